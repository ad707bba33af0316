//! One-shot-deviation certification and best-response computation on top of
//! the decision trees.
//!
//! With the two-period horizon and the continuation behavior fixed by the
//! profile, a profile is an equilibrium exactly when no agent gains more
//! than the tolerance by switching to a single pure action at a single
//! information set: backward induction over the finite tree makes any
//! profitable multi-set deviation decomposable into a profitable one-shot
//! deviation at its last deviating set.

use serde::{Deserialize, Serialize};

use crate::error::{CredenceError, Result};
use crate::model::ModelKind;
use crate::params::ModelParams;
use crate::strategy::{ConsumerStrategy, ExpertStrategy};
use crate::TOL;

use super::tree::{
    evaluate_tree, Agent, SET_C1_MINOR, SET_C1_SERIOUS, SET_E1_MINOR, SET_E1_SERIOUS,
};

/// The worst deviation found by a certification run.
#[derive(Debug, Clone, Serialize)]
pub struct Witness {
    pub agent: Agent,
    pub setting: &'static str,
    pub action: &'static str,
    pub gain: f64,
}

/// Result of certifying one profile on one model tree.
#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub is_equilibrium: bool,
    /// Largest one-shot deviation gain across all information sets.
    pub max_gain: f64,
    /// The set and action achieving `max_gain` (absent only for a degenerate
    /// tree with no decisions).
    pub witness: Option<Witness>,
    /// How unreached information sets were weighted.
    pub off_path_convention: String,
}

/// Certify `profile` on `kind`'s tree: every information set's best action
/// must beat the profile blend by at most `tol`.
pub fn verify_equilibrium(
    kind: ModelKind,
    p: &ModelParams,
    expert: &ExpertStrategy,
    consumer: &ConsumerStrategy,
    tol: f64,
) -> Result<VerificationReport> {
    if tol.is_nan() || tol < 0.0 {
        return Err(CredenceError::Precondition(
            "verification tolerance must be nonnegative".into(),
        ));
    }
    let out = evaluate_tree(kind, p, expert, consumer)?;
    let mut max_gain = f64::NEG_INFINITY;
    let mut witness = None;
    for rec in &out.records {
        let (gain, action) = rec.best_gain();
        if gain > max_gain {
            max_gain = gain;
            witness = Some(Witness {
                agent: rec.agent,
                setting: rec.setting,
                action,
                gain,
            });
        }
    }
    let max_gain = if witness.is_some() { max_gain } else { 0.0 };
    Ok(VerificationReport {
        is_equilibrium: max_gain <= tol,
        max_gain,
        witness,
        off_path_convention:
            "unreached recommendation sets believe the recommendation is truthful".into(),
    })
}

/// A consumer's optimal reply to a recommendation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConsumerResponse {
    Accept,
    Reject,
    /// Values within [`TOL`]: any mixture is optimal.
    Indifferent,
}

/// An expert's optimal recommendation policy for a problem type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExpertResponse {
    Truthful,
    Fraudulent,
    Indifferent,
}

/// Best responses of one side, holding the other side at the supplied
/// strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BestResponses {
    /// Consumer's reply per first-visit recommendation type.
    Consumer {
        minor: ConsumerResponse,
        serious: ConsumerResponse,
    },
    /// Expert's policy per problem type.
    Expert {
        minor: ExpertResponse,
        serious: ExpertResponse,
    },
}

/// Which side of the market is held fixed in [`best_responses`].
#[derive(Debug, Clone, Copy)]
pub enum FixedSide {
    /// Fix the experts' first-visit behavior; report the consumer's best
    /// replies (first-visit acceptance depends on the expert side only
    /// through beliefs, so the consumer's own first-visit strategy is
    /// irrelevant here).
    Expert(ExpertStrategy),
    /// Fix the consumer's acceptance behavior; report the experts' best
    /// policies.
    Consumer(ConsumerStrategy),
}

fn gap_to_response<T>(gap: f64, first: T, second: T, indifferent: T) -> T {
    if gap.abs() <= TOL {
        indifferent
    } else if gap > 0.0 {
        first
    } else {
        second
    }
}

/// First-visit best responses for the free side, given `fixed`.
pub fn best_responses(kind: ModelKind, p: &ModelParams, fixed: FixedSide) -> Result<BestResponses> {
    // The probed side's own strategy does not move its first-visit action
    // values (those depend on the opposite side and the fixed continuation),
    // so it is filled with an arbitrary interior value.
    let (expert, consumer) = match fixed {
        FixedSide::Expert(e) => (
            e,
            ConsumerStrategy {
                a_m1: 0.5,
                a_s1: 0.5,
                a_m2: 1.0,
                a_s2: 1.0,
            },
        ),
        FixedSide::Consumer(c) => (
            ExpertStrategy {
                t_m1: 0.5,
                t_s1: 0.5,
                t_m2: 0.0,
                t_s2: 1.0,
            },
            c,
        ),
    };
    let out = evaluate_tree(kind, p, &expert, &consumer)?;
    let action_gap = |setting: &str| -> Result<f64> {
        let rec = out
            .record(setting)
            .ok_or(CredenceError::Precondition(format!(
                "model has no information set named \"{setting}\""
            )))?;
        Ok(rec.actions[0].value - rec.actions[1].value)
    };
    Ok(match fixed {
        FixedSide::Expert(_) => BestResponses::Consumer {
            minor: gap_to_response(
                action_gap(SET_C1_MINOR)?,
                ConsumerResponse::Accept,
                ConsumerResponse::Reject,
                ConsumerResponse::Indifferent,
            ),
            serious: gap_to_response(
                action_gap(SET_C1_SERIOUS)?,
                ConsumerResponse::Accept,
                ConsumerResponse::Reject,
                ConsumerResponse::Indifferent,
            ),
        },
        FixedSide::Consumer(_) => BestResponses::Expert {
            minor: gap_to_response(
                action_gap(SET_E1_MINOR)?,
                ExpertResponse::Truthful,
                ExpertResponse::Fraudulent,
                ExpertResponse::Indifferent,
            ),
            serious: gap_to_response(
                action_gap(SET_E1_SERIOUS)?,
                ExpertResponse::Truthful,
                ExpertResponse::Fraudulent,
                ExpertResponse::Indifferent,
            ),
        },
    })
}
