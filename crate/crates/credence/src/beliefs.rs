//! Bayesian belief updating: expected truthfulness of each recommendation arm
//! and the consumer's posterior that a received recommendation is truthful.

use serde::{Deserialize, Serialize};

use crate::error::{CredenceError, Result};
use crate::params::ModelParams;
use crate::strategy::ExpertStrategy;

/// Off-path convention: when a recommendation arm has probability zero, the
/// posterior defaults to the recommendation being truthful. Overridable per
/// call through [`posterior_beliefs_with_offpath`].
pub const OFF_PATH_TRUTHFUL: f64 = 1.0;

/// Expected truthfulness of each recommendation arm and the induced
/// posteriors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Beliefs {
    /// Expected probability of a truthful serious recommendation,
    /// `h + (1−h)·t_s1`.
    pub tbar_s: f64,
    /// Expected probability of a truthful minor recommendation,
    /// `h + (1−h)·t_m1`.
    pub tbar_m: f64,
    /// Posterior that a received minor recommendation is truthful.
    pub tau_m: f64,
    /// Posterior that a received serious recommendation is truthful.
    pub tau_s: f64,
}

/// Expected truthfulness `(tbar_s, tbar_m)` of the serious and minor
/// recommendation arms under first-visit strategies.
pub fn expected_truthfulness(p: &ModelParams, e: &ExpertStrategy) -> (f64, f64) {
    (
        p.h + (1.0 - p.h) * e.t_s1,
        p.h + (1.0 - p.h) * e.t_m1,
    )
}

/// Posterior that an arm is truthful given the probability masses of
/// truthful and untruthful recommendations on that arm. A zero-mass arm gets
/// the supplied off-path belief.
pub(crate) fn posterior_from_masses(truthful: f64, untruthful: f64, off_path: f64) -> f64 {
    let total = truthful + untruthful;
    if total <= 0.0 {
        off_path
    } else {
        crate::clamp_unit(truthful / total)
    }
}

/// Posterior beliefs with an explicit off-path convention; total on all
/// inputs.
pub fn posterior_beliefs_with_offpath(
    p: &ModelParams,
    e: &ExpertStrategy,
    off_path: f64,
) -> Beliefs {
    let (tbar_s, tbar_m) = expected_truthfulness(p, e);
    // A minor recommendation is truthful when the problem is minor
    // (mass mu·tbar_m) and fraudulent when a serious problem is undertreated
    // (mass (1−mu)(1−tbar_s)); symmetrically for the serious arm.
    let tau_m = posterior_from_masses(p.mu * tbar_m, (1.0 - p.mu) * (1.0 - tbar_s), off_path);
    let tau_s = posterior_from_masses((1.0 - p.mu) * tbar_s, p.mu * (1.0 - tbar_m), off_path);
    Beliefs {
        tbar_s,
        tbar_m,
        tau_m,
        tau_s,
    }
}

/// Posterior beliefs under the default off-path convention, erroring instead
/// of applying the convention when a recommendation arm has probability zero.
pub fn posterior_beliefs(p: &ModelParams, e: &ExpertStrategy) -> Result<Beliefs> {
    let (tbar_s, tbar_m) = expected_truthfulness(p, e);
    if p.mu * tbar_m + (1.0 - p.mu) * (1.0 - tbar_s) <= 0.0 {
        return Err(CredenceError::ZeroProbabilityEvent {
            recommendation: "minor",
        });
    }
    if (1.0 - p.mu) * tbar_s + p.mu * (1.0 - tbar_m) <= 0.0 {
        return Err(CredenceError::ZeroProbabilityEvent {
            recommendation: "serious",
        });
    }
    Ok(posterior_beliefs_with_offpath(p, e, OFF_PATH_TRUTHFUL))
}
