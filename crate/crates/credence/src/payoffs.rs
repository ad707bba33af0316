//! Decision values for the base model: the consumer's expected payoff from
//! accepting or rejecting each first-visit recommendation, and the expert's
//! incentive margins for the two kinds of fraud.
//!
//! Values are conditional on the consumer having already sunk the first
//! search cost `k`; the first `k` enters only welfare accounting. Reject
//! branches include the *additional* search cost of the second visit.

use serde::{Deserialize, Serialize};

use crate::beliefs::Beliefs;
use crate::error::{CredenceError, Result};
use crate::params::{validate_params, ModelParams};
use crate::strategy::ConsumerStrategy;

/// Expected consumer payoffs (money units, typically negative) for each
/// first-visit decision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConsumerDecisionValues {
    /// Accept the serious recommendation: pay `p_s`, problem solved.
    pub accept_serious: f64,
    /// Reject the serious recommendation and search a second expert.
    pub reject_serious: f64,
    /// Accept the minor recommendation; if the problem was serious, the
    /// treatment fails and the consumer returns for the serious one.
    pub accept_minor: f64,
    /// Reject the minor recommendation and search a second expert.
    pub reject_minor: f64,
}

/// Expert incentive margins: expected gain from each fraud relative to the
/// truthful recommendation, given the consumer's acceptance behaviour.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpertDecisionValues {
    /// Gain from recommending the serious treatment on a minor problem:
    /// `(p_s−c_s)·a_s1 − (p_m−c_m)·a_m1`.
    pub overtreat_margin: f64,
    /// Gain from recommending the minor treatment on a serious problem
    /// (the failed treatment brings the consumer back for the serious one):
    /// `(p_s−c_s+p_m−c_m)·a_m1 − (p_s−c_s)·a_s1`.
    pub undertreat_margin: f64,
}

/// Second-visit behaviour, pinned by backward induction: at the final visit
/// the opportunistic expert overtreats minor problems (`t_m2 = 0`) and has no
/// return visit to harvest, so never undertreats (`t_s2 = 1`); the consumer
/// accepts both recommendations because any treatment price is below the
/// smallest untreated loss (`p_s < l_m`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecondVisitBehaviour {
    pub t_m2: f64,
    pub t_s2: f64,
    pub a_m2: f64,
    pub a_s2: f64,
}

/// Where an undertreated consumer goes once the minor treatment fails.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReturnChoice {
    /// Revisit the initial expert (cost `k_return`) rather than paying the
    /// full search cost `k` again.
    ReturnToInitial,
}

/// The unique second-visit behaviour under valid parameters.
pub fn period2_strategies(p: &ModelParams) -> Result<SecondVisitBehaviour> {
    validate_params(p)?;
    Ok(SecondVisitBehaviour {
        t_m2: 0.0,
        t_s2: 1.0,
        a_m2: 1.0,
        a_s2: 1.0,
    })
}

/// Routing of an undertreated consumer: returning to the initial expert is
/// dominant whenever it is cheaper than a fresh search.
pub fn return_decision(p: &ModelParams) -> Result<ReturnChoice> {
    if p.k > p.k_return {
        Ok(ReturnChoice::ReturnToInitial)
    } else {
        Err(CredenceError::ResentmentRegime)
    }
}

/// Consumer decision values at the supplied beliefs.
pub fn consumer_values(p: &ModelParams, b: &Beliefs) -> ConsumerDecisionValues {
    let h = p.h;
    let (tau_m, tau_s) = (b.tau_m, b.tau_s);
    ConsumerDecisionValues {
        accept_serious: -p.p_s,
        reject_serious: tau_s * (-p.p_s - p.k)
            + (1.0 - tau_s) * h * (-p.p_m - p.k)
            + (1.0 - tau_s) * (1.0 - h) * (-p.p_s - p.k),
        accept_minor: -tau_m * p.p_m + (1.0 - tau_m) * (-p.p_m - p.p_s - p.k_return),
        reject_minor: tau_m * h * (-p.p_m - p.k)
            + tau_m * (1.0 - h) * (-p.p_s - p.k)
            + (1.0 - tau_m) * (-p.p_s - p.k),
    }
}

/// Expert incentive margins at the supplied consumer acceptance behaviour.
pub fn expert_values(p: &ModelParams, c: &ConsumerStrategy) -> ExpertDecisionValues {
    let ms = p.margin_s();
    let mm = p.margin_m();
    ExpertDecisionValues {
        overtreat_margin: ms * c.a_s1 - mm * c.a_m1,
        undertreat_margin: (ms + mm) * c.a_m1 - ms * c.a_s1,
    }
}
