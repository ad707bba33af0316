//! Closed-form regime classification for the base model: threshold formulas,
//! the regime map over the prior, and finite-difference comparative statics.

use serde::{Deserialize, Serialize};

use crate::error::{CredenceError, Result};
use crate::params::{validate_params, ModelParams};
use crate::strategy::{ConsumerStrategy, ExpertStrategy, Regime};
use crate::{clamp_unit, TOL};

/// Regime boundaries in prior space.
///
/// * For `mu < mu_1_star` the serious-problem side mixes (partial
///   undertreatment);
/// * for `mu_1_star < mu < mu_2_star` both frauds are full and everything is
///   accepted;
/// * for `mu > mu_2_star` the minor-problem side mixes (partial
///   overtreatment).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeThresholds {
    pub mu_1_star: f64,
    pub mu_2_star: f64,
    /// True when `h·(p_s − p_m) <= k`: rejecting a serious recommendation can
    /// never pay, so the partial-overtreatment boundary sits at 1 exactly.
    pub low_h_branch: bool,
    /// True when `p_m + k_return − k <= 0`: rejecting a minor recommendation
    /// is at least as cheap as accepting a fraudulent one, the
    /// partial-undertreatment region is empty, and `mu_1_star` is clamped
    /// to 0.
    pub fopu_region_empty: bool,
}

/// A classified equilibrium: regime tag, the full strategy profile, the
/// thresholds that defined the regime (base model only), and bookkeeping
/// flags.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumProfile {
    pub regime: Regime,
    pub expert: ExpertStrategy,
    pub consumer: ConsumerStrategy,
    /// Base-model regime boundaries; absent on extension and variant
    /// profiles, which carry their own threshold structures.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub thresholds: Option<RegimeThresholds>,
    /// Set when the prior sits within tolerance of a regime threshold; the
    /// classification is then a tie-break convention, not a strict-region
    /// fact.
    pub boundary_flag: bool,
    /// Set on profiles whose mixing probabilities are defined implicitly and
    /// were solved numerically rather than taken from a closed form.
    pub requires_oracle: bool,
}

impl EquilibriumProfile {
    /// A profile carrying no strategies: used for the marker tags.
    pub fn marker(regime: Regime) -> Self {
        debug_assert!(regime.is_marker());
        EquilibriumProfile {
            regime,
            expert: ExpertStrategy {
                t_m1: f64::NAN,
                t_s1: f64::NAN,
                t_m2: f64::NAN,
                t_s2: f64::NAN,
            },
            consumer: ConsumerStrategy {
                a_m1: f64::NAN,
                a_s1: f64::NAN,
                a_m2: f64::NAN,
                a_s2: f64::NAN,
            },
            thresholds: None,
            boundary_flag: false,
            requires_oracle: false,
        }
    }
}

/// Closed-form regime boundaries.
pub fn regime_thresholds(p: &ModelParams) -> Result<RegimeThresholds> {
    validate_params(p)?;
    let h = p.h;
    let gap = p.p_s - p.p_m;

    let return_surplus = p.p_m + p.k_return - p.k;
    let (mu_1_star, fopu_region_empty) = if return_surplus <= 0.0 {
        (0.0, true)
    } else {
        let num = (1.0 - h) * return_surplus;
        (num / (h * p.k + (1.0 - h) * h * gap + num), false)
    };

    let low_h_branch = h * gap <= p.k;
    let mu_2_star = if low_h_branch {
        1.0
    } else {
        h * p.k / (h * p.k + (1.0 - h) * (h * gap - p.k))
    };

    Ok(RegimeThresholds {
        mu_1_star,
        mu_2_star,
        low_h_branch,
        fopu_region_empty,
    })
}

fn profile(
    regime: Regime,
    t_m1: f64,
    t_s1: f64,
    a_m1: f64,
    a_s1: f64,
    thresholds: RegimeThresholds,
    boundary_flag: bool,
) -> EquilibriumProfile {
    EquilibriumProfile {
        regime,
        expert: ExpertStrategy {
            t_m1,
            t_s1,
            t_m2: 0.0,
            t_s2: 1.0,
        },
        consumer: ConsumerStrategy {
            a_m1,
            a_s1,
            a_m2: 1.0,
            a_s2: 1.0,
        },
        thresholds: Some(thresholds),
        boundary_flag,
        requires_oracle: false,
    }
}

/// The minor-side mixing probability of the partial-overtreatment regime.
pub(crate) fn pofu_t_m1(p: &ModelParams) -> Result<f64> {
    let d = p.h * (p.p_s - p.p_m) - p.k;
    if d <= 0.0 {
        // The region `mu > mu_2_star` with `mu_2_star < 1` already implies
        // d > 0; reaching this is a bug or a floating-point edge case.
        return Err(CredenceError::DenominatorVanished("h·(p_s − p_m) − k"));
    }
    Ok(clamp_unit(
        1.0 - (1.0 - p.mu) * p.h * p.k / (p.mu * (1.0 - p.h) * d),
    ))
}

/// The serious-side mixing probability of the partial-undertreatment regime.
pub(crate) fn fopu_t_s1(p: &ModelParams) -> Result<f64> {
    let return_surplus = p.p_m + p.k_return - p.k;
    if return_surplus <= 0.0 {
        return Err(CredenceError::EmptyFopuRegion);
    }
    let num = p.mu * p.h * ((1.0 - p.h) * (p.p_s - p.p_m) + p.k);
    Ok(clamp_unit(
        1.0 - num / ((1.0 - p.mu) * (1.0 - p.h) * return_surplus),
    ))
}

fn pofu_profile(
    p: &ModelParams,
    th: RegimeThresholds,
    boundary_flag: bool,
) -> Result<EquilibriumProfile> {
    let t_m1 = pofu_t_m1(p)?;
    let a_s1 = p.margin_m() / p.margin_s();
    Ok(profile(
        Regime::Pofu,
        t_m1,
        0.0,
        1.0,
        a_s1,
        th,
        boundary_flag,
    ))
}

fn fopu_profile(
    p: &ModelParams,
    th: RegimeThresholds,
    boundary_flag: bool,
) -> Result<EquilibriumProfile> {
    let t_s1 = fopu_t_s1(p)?;
    let a_m1 = p.margin_s() / (p.margin_s() + p.margin_m());
    Ok(profile(
        Regime::Fopu,
        0.0,
        t_s1,
        a_m1,
        1.0,
        th,
        boundary_flag,
    ))
}

/// Classify the base-model equilibrium at `p`, with an explicit boundary
/// tolerance.
///
/// Points within `tol` of a threshold classify on the full-fraud side with
/// `boundary_flag` set. When the two thresholds cross (`mu_2_star <
/// mu_1_star`), both mixed regimes exist on the overlap and the tie-break
/// picks partial overtreatment exactly when `mu` exceeds the margin ratio
/// `(p_m−c_m)/(p_s−c_s)`.
pub fn classify_equilibrium_with_tol(p: &ModelParams, tol: f64) -> Result<EquilibriumProfile> {
    let th = regime_thresholds(p)?;
    let mu = p.mu;
    let near = |t: f64| (mu - t).abs() <= tol;

    let overlap = !th.fopu_region_empty && th.mu_2_star < th.mu_1_star;
    if overlap {
        let pivot = p.margin_m() / p.margin_s();
        let boundary = near(th.mu_1_star) || near(th.mu_2_star) || near(pivot);
        return if mu <= th.mu_2_star {
            fopu_profile(p, th, boundary)
        } else if mu >= th.mu_1_star {
            pofu_profile(p, th, boundary)
        } else if mu > pivot {
            pofu_profile(p, th, boundary)
        } else {
            fopu_profile(p, th, boundary)
        };
    }

    if near(th.mu_1_star) || near(th.mu_2_star) {
        return Ok(profile(Regime::Fofu, 0.0, 0.0, 1.0, 1.0, th, true));
    }
    if mu < th.mu_1_star {
        fopu_profile(p, th, false)
    } else if mu > th.mu_2_star {
        pofu_profile(p, th, false)
    } else {
        Ok(profile(Regime::Fofu, 0.0, 0.0, 1.0, 1.0, th, false))
    }
}

/// Classify the base-model equilibrium at `p` with the default tolerance.
pub fn classify_equilibrium(p: &ModelParams) -> Result<EquilibriumProfile> {
    classify_equilibrium_with_tol(p, TOL)
}

/// Which parameter a comparative-statics probe perturbs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StaticsParam {
    /// The search cost `k`.
    #[serde(rename = "k")]
    K,
    /// The serious-treatment price `p_s`.
    #[serde(rename = "p_s")]
    Ps,
}

/// Sign of a finite-difference estimate, with values within [`TOL`] of zero
/// reported as `Zero`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    pub fn of(v: f64) -> Sign {
        if v.abs() <= TOL {
            Sign::Zero
        } else if v > 0.0 {
            Sign::Positive
        } else {
            Sign::Negative
        }
    }
}

/// A finite-difference estimate with its sign label.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignedEstimate {
    pub value: f64,
    pub sign: Sign,
}

impl SignedEstimate {
    pub(crate) fn of(value: f64) -> Self {
        SignedEstimate {
            value,
            sign: Sign::of(value),
        }
    }
}

/// Central finite-difference sensitivities of the mixing probabilities and
/// regime boundaries with respect to one parameter, inside one regime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StaticsReport {
    pub target: StaticsParam,
    pub step: f64,
    pub regime: Regime,
    pub d_t_m1: SignedEstimate,
    pub d_t_s1: SignedEstimate,
    pub d_mu_1_star: SignedEstimate,
    pub d_mu_2_star: SignedEstimate,
}

/// Estimate `∂t_m1/∂·`, `∂t_s1/∂·`, `∂mu_1_star/∂·`, `∂mu_2_star/∂·` by
/// central differences of size `step` around `p`.
pub fn comparative_statics(
    p: &ModelParams,
    target: StaticsParam,
    step: f64,
) -> Result<StaticsReport> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(CredenceError::Precondition(
            "comparative-statics step must be positive and finite".into(),
        ));
    }
    let mut lo = *p;
    let mut hi = *p;
    match target {
        StaticsParam::K => {
            lo.k -= step;
            hi.k += step;
        }
        StaticsParam::Ps => {
            lo.p_s -= step;
            hi.p_s += step;
        }
    }
    let base = classify_equilibrium(p)?;
    let eq_lo = classify_equilibrium(&lo)?;
    let eq_hi = classify_equilibrium(&hi)?;
    if eq_lo.regime != base.regime || eq_hi.regime != base.regime {
        return Err(CredenceError::RegimeCrossing {
            below: eq_lo.regime,
            above: eq_hi.regime,
        });
    }
    let th_lo = eq_lo.thresholds.expect("base profiles carry thresholds");
    let th_hi = eq_hi.thresholds.expect("base profiles carry thresholds");
    let d = |a: f64, b: f64| SignedEstimate::of((b - a) / (2.0 * step));
    Ok(StaticsReport {
        target,
        step,
        regime: base.regime,
        d_t_m1: d(eq_lo.expert.t_m1, eq_hi.expert.t_m1),
        d_t_s1: d(eq_lo.expert.t_s1, eq_hi.expert.t_s1),
        d_mu_1_star: d(th_lo.mu_1_star, th_hi.mu_1_star),
        d_mu_2_star: d(th_lo.mu_2_star, th_hi.mu_2_star),
    })
}
