//! Diagnostic error: every visit's diagnosis matches the true problem only
//! with probability `1 − ε`, experts act on the diagnosis, and both fraud
//! boundaries shift with the error rate.
//!
//! The full-fraud band keeps a closed form. The mixed regimes on either side
//! are defined only implicitly once `ε > 0` — the binding indifference now
//! depends on the chance that a strategic undertreatment happens to fit the
//! true problem — so their mixing probabilities are solved on the decision
//! tree (bisection for the expert side, an exact affine solve for the
//! consumer side) and the profiles are tagged `requires_oracle`.

use serde::{Deserialize, Serialize};

use crate::equilibrium::{EquilibriumProfile, SignedEstimate};
use crate::error::{CredenceError, Result};
use crate::model::ModelKind;
use crate::oracle::tree::{SET_C1_MINOR, SET_C1_SERIOUS, SET_E1_MINOR, SET_E1_SERIOUS};
use crate::oracle::{evaluate_tree, verify_equilibrium};
use crate::params::{validate_params, ModelParams};
use crate::solver::{bisect, BisectOptions};
use crate::strategy::{ConsumerStrategy, ExpertStrategy, Regime};
use crate::{clamp_unit, TOL};

/// Regime boundaries of the noisy-diagnosis market.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsilonThresholds {
    /// Lower edge of the full-fraud band from the plan "reject the minor
    /// recommendation, then accept whatever the next expert says".
    pub mu_1: f64,
    /// Upper edge of the full-fraud band (serious recommendations stop being
    /// accepted above it).
    pub mu_2: f64,
    /// Lower edge of the full-fraud band from the plan "reject the minor
    /// recommendation, and reject a repeated minor recommendation too".
    pub mu_3: f64,
    /// Largest error rate for which this regime map applies at these
    /// parameters.
    pub eps_star: f64,
    /// True when honesty is too low for rejecting a serious recommendation
    /// to ever pay (`h·(p_s−p_m)·(1−ε) <= k`); `mu_2` then sits at 1 exactly.
    pub low_h_branch: bool,
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !epsilon.is_finite() || !(0.0..0.5).contains(&epsilon) {
        return Err(CredenceError::Precondition(format!(
            "diagnosis error rate must lie in [0, 0.5), got {epsilon}"
        )));
    }
    Ok(())
}

/// Largest error rate for which the regime map applies: the binding
/// constraint keeping full truthfulness from being an equilibrium on either
/// recommendation side.
pub fn epsilon_star(p: &ModelParams) -> f64 {
    let gap_k = p.p_s - p.p_m + p.k;
    let serious_side = (1.0 - p.mu) * p.k / ((1.0 - p.mu) * p.k + p.mu * p.h * gap_k);
    let return_surplus = p.p_m + p.k_return - p.k;
    let minor_side = if return_surplus <= 0.0 {
        1.0
    } else {
        let num = p.mu * (1.0 - p.h) * gap_k;
        num / (num + (1.0 - p.mu) * return_surplus)
    };
    serious_side.min(minor_side)
}

/// Closed-form regime boundaries under diagnosis error `epsilon`.
pub fn epsilon_thresholds(p: &ModelParams, epsilon: f64) -> Result<EpsilonThresholds> {
    validate_params(p)?;
    check_epsilon(epsilon)?;
    let h = p.h;
    let eps = epsilon;
    // Probability weights of a minor recommendation under full fraud, by
    // true state: honest experts follow the diagnosis, opportunistic experts
    // recommend minor exactly on a serious diagnosis.
    let a = h * (1.0 - eps) + eps * (1.0 - h);
    let b = eps * h + (1.0 - eps) * (1.0 - h);
    let gap = p.p_s - p.p_m;
    let return_surplus = p.p_m + p.k_return - p.k;

    let low_h_branch = h * gap * (1.0 - eps) <= p.k;
    let mu_2 = if low_h_branch {
        1.0
    } else {
        let n = a * (p.k + h * eps * (p.l_s + p.p_m - p.p_s));
        let d = b * (h * gap * (1.0 - eps) - p.k);
        n / (n + d)
    };

    let n1 = b * ((1.0 - h * eps) * return_surplus - h * eps * (p.l_s + p.k - p.p_s - p.k_return));
    let d1 = a * ((gap + p.k) * (1.0 - h + h * eps) + h * (1.0 - eps) * p.k);
    let mu_1 = if n1 <= 0.0 { 0.0 } else { n1 / (n1 + d1) };

    let n3 = b * (p.p_m + p.k_return - h * eps * (p.l_s - p.p_s) - p.k);
    let d3 = a * ((gap + p.k) * (1.0 - h + h * eps) + h * (1.0 - eps) * (p.l_m - p.p_m + p.k));
    let mu_3 = if n3 <= 0.0 { 0.0 } else { n3 / (n3 + d3) };

    Ok(EpsilonThresholds {
        mu_1,
        mu_2,
        mu_3,
        eps_star: epsilon_star(p),
        low_h_branch,
    })
}

/// Action-value gap (first listed action minus second) at one information
/// set, or NaN when the tree cannot be evaluated.
fn value_gap(
    kind: ModelKind,
    p: &ModelParams,
    e: &ExpertStrategy,
    c: &ConsumerStrategy,
    setting: &str,
) -> f64 {
    match evaluate_tree(kind, p, e, c) {
        Ok(out) => match out.record(setting) {
            Some(rec) => rec.actions[0].value - rec.actions[1].value,
            None => f64::NAN,
        },
        Err(_) => f64::NAN,
    }
}

/// Root of the affine map `a ↦ g0 + (g1 − g0)·a` when it crosses zero
/// strictly inside the unit interval.
fn affine_root(g0: f64, g1: f64) -> Option<f64> {
    if !g0.is_finite() || !g1.is_finite() || g0 <= 0.0 || g1 >= 0.0 {
        return None;
    }
    Some(clamp_unit(g0 / (g0 - g1)))
}

/// Solve a mixed regime on the decision tree: the expert's mixing
/// probability comes from the consumer's indifference (bisection), the
/// consumer's from the expert's indifference (exact affine solve). The
/// second-visit minor acceptance is the profile value that certifies; both
/// candidates are tried because the reject-twice plan can be the binding
/// one.
fn solve_mixed(p: &ModelParams, epsilon: f64, regime: Regime) -> Result<EquilibriumProfile> {
    let kind = ModelKind::Epsilon(epsilon);
    for a_m2 in [1.0, 0.0] {
        let mut expert = ExpertStrategy {
            t_m1: 0.0,
            t_s1: 0.0,
            t_m2: 0.0,
            t_s2: 1.0,
        };
        let mut consumer = ConsumerStrategy {
            a_m1: 1.0,
            a_s1: 1.0,
            a_m2,
            a_s2: 1.0,
        };
        match regime {
            Regime::Pofu => {
                // Serious recommendations are mixed over, so the consumer's
                // accept/reject gap there pins the minor-diagnosis expert.
                let residual = |t: f64| {
                    let e = ExpertStrategy { t_m1: t, ..expert };
                    value_gap(kind, p, &e, &consumer, SET_C1_SERIOUS)
                };
                let Ok(t_m1) = bisect(residual, 0.0, 1.0, &BisectOptions::default()) else {
                    continue;
                };
                expert.t_m1 = clamp_unit(t_m1);
                let gap = |a: f64| {
                    let c = ConsumerStrategy { a_s1: a, ..consumer };
                    value_gap(kind, p, &expert, &c, SET_E1_MINOR)
                };
                let Some(a_s1) = affine_root(gap(0.0), gap(1.0)) else {
                    continue;
                };
                consumer.a_s1 = a_s1;
            }
            Regime::Fopu => {
                let residual = |t: f64| {
                    let e = ExpertStrategy { t_s1: t, ..expert };
                    value_gap(kind, p, &e, &consumer, SET_C1_MINOR)
                };
                let Ok(t_s1) = bisect(residual, 0.0, 1.0, &BisectOptions::default()) else {
                    continue;
                };
                expert.t_s1 = clamp_unit(t_s1);
                let gap = |a: f64| {
                    let c = ConsumerStrategy { a_m1: a, ..consumer };
                    value_gap(kind, p, &expert, &c, SET_E1_SERIOUS)
                };
                let Some(a_m1) = affine_root(gap(0.0), gap(1.0)) else {
                    continue;
                };
                consumer.a_m1 = a_m1;
            }
            _ => unreachable!("only the two mixed regimes are solved here"),
        }
        let report = verify_equilibrium(kind, p, &expert, &consumer, TOL)?;
        if report.is_equilibrium {
            return Ok(EquilibriumProfile {
                regime,
                expert,
                consumer,
                thresholds: None,
                boundary_flag: false,
                requires_oracle: true,
            });
        }
    }
    Err(CredenceError::NoEquilibriumFound)
}

fn fofu_profile(boundary_flag: bool) -> EquilibriumProfile {
    EquilibriumProfile {
        regime: Regime::Fofu,
        expert: ExpertStrategy {
            t_m1: 0.0,
            t_s1: 0.0,
            t_m2: 0.0,
            t_s2: 1.0,
        },
        consumer: ConsumerStrategy {
            a_m1: 1.0,
            a_s1: 1.0,
            a_m2: 1.0,
            a_s2: 1.0,
        },
        thresholds: None,
        boundary_flag,
        requires_oracle: false,
    }
}

/// Equilibrium of the noisy-diagnosis market at `p`.
///
/// Mirrors the base classifier's conventions: points within [`TOL`] of a
/// boundary classify on the full-fraud side with `boundary_flag` set, and
/// when the boundaries cross, the overlap tie-break picks partial
/// overtreatment exactly when `mu` exceeds the margin ratio.
pub fn epsilon_equilibrium(
    p: &ModelParams,
    epsilon: f64,
) -> Result<(EquilibriumProfile, EpsilonThresholds)> {
    let th = epsilon_thresholds(p, epsilon)?;
    if epsilon >= th.eps_star {
        return Err(CredenceError::EpsilonTooLarge {
            epsilon,
            eps_star: th.eps_star,
        });
    }
    let mu = p.mu;
    let lower = th.mu_1.max(th.mu_3);
    let near = |t: f64| (mu - t).abs() <= TOL;

    let fopu_possible = lower > 0.0;
    let overlap = fopu_possible && th.mu_2 < lower;
    if overlap {
        let pivot = p.margin_m() / p.margin_s();
        let regime = if mu <= th.mu_2 {
            Regime::Fopu
        } else if mu >= lower || mu > pivot {
            Regime::Pofu
        } else {
            Regime::Fopu
        };
        return Ok((solve_mixed(p, epsilon, regime)?, th));
    }

    if near(lower) || near(th.mu_2) {
        return Ok((fofu_profile(true), th));
    }
    let profile = if mu < lower {
        solve_mixed(p, epsilon, Regime::Fopu)?
    } else if mu > th.mu_2 {
        solve_mixed(p, epsilon, Regime::Pofu)?
    } else {
        fofu_profile(false)
    };
    Ok((profile, th))
}

/// Forward finite differences of the fraud-band boundaries in the error
/// rate, taken at `ε = 0` on the interior (unclamped) formulas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorRateEffect {
    pub step: f64,
    /// Movement of the lower (undertreatment-side) boundary `mu_1`.
    pub d_mu_1: SignedEstimate,
    /// Movement of the upper (overtreatment-side) boundary `mu_2`.
    pub d_mu_2: SignedEstimate,
}

/// Estimate how a small diagnosis error moves the full-fraud band: positive
/// `d_mu_2` (and negative `d_mu_1`) mean a wider band. Evaluated on the
/// interior formulas so the tendency is visible even where the boundary is
/// clamped.
pub fn epsilon_error_rate_effect(p: &ModelParams, step: f64) -> Result<ErrorRateEffect> {
    validate_params(p)?;
    if !(step > 0.0) || !step.is_finite() || step > 1e-3 {
        return Err(CredenceError::Precondition(format!(
            "finite-difference step must lie in (0, 1e-3], got {step}"
        )));
    }
    let h = p.h;
    let gap = p.p_s - p.p_m;
    let return_surplus = p.p_m + p.k_return - p.k;

    let mu_2_interior = |eps: f64| {
        let a = h * (1.0 - eps) + eps * (1.0 - h);
        let b = eps * h + (1.0 - eps) * (1.0 - h);
        let n = a * (p.k + h * eps * (p.l_s + p.p_m - p.p_s));
        let d = b * (h * gap * (1.0 - eps) - p.k);
        n / (n + d)
    };
    let mu_1_interior = |eps: f64| {
        let a = h * (1.0 - eps) + eps * (1.0 - h);
        let b = eps * h + (1.0 - eps) * (1.0 - h);
        let n = b * ((1.0 - h * eps) * return_surplus
            - h * eps * (p.l_s + p.k - p.p_s - p.k_return));
        let d = a * ((gap + p.k) * (1.0 - h + h * eps) + h * (1.0 - eps) * p.k);
        n / (n + d)
    };

    let d_mu_2 = (mu_2_interior(step) - mu_2_interior(0.0)) / step;
    let d_mu_1 = (mu_1_interior(step) - mu_1_interior(0.0)) / step;
    if !d_mu_2.is_finite() || !d_mu_1.is_finite() {
        return Err(CredenceError::DenominatorVanished(
            "error-rate boundary sensitivity",
        ));
    }
    Ok(ErrorRateEffect {
        step,
        d_mu_1: SignedEstimate::of(d_mu_1),
        d_mu_2: SignedEstimate::of(d_mu_2),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::{classify_equilibrium, regime_thresholds, Sign};

    #[test]
    fn largest_allowed_error_rate_at_the_frozen_point() {
        let p = ModelParams::demo(0.5, 0.5);
        assert!((epsilon_star(&p) - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn too_large_an_error_rate_is_refused() {
        let p = ModelParams::demo(0.5, 0.5);
        match epsilon_equilibrium(&p, 0.4) {
            Err(CredenceError::EpsilonTooLarge { epsilon, eps_star }) => {
                assert_eq!(epsilon, 0.4);
                assert!((eps_star - 1.0 / 3.0).abs() < 1e-12);
            }
            other => panic!("expected the error-rate guard, got {other:?}"),
        }
    }

    #[test]
    fn out_of_range_error_rates_are_refused() {
        let p = ModelParams::demo(0.5, 0.5);
        for eps in [-0.1, 0.5, 0.7, f64::NAN] {
            assert!(matches!(
                epsilon_equilibrium(&p, eps),
                Err(CredenceError::Precondition(_))
            ));
        }
    }

    #[test]
    fn zero_error_boundaries_collapse_to_the_base_thresholds() {
        for h in [0.2, 0.35, 0.5, 0.65, 0.8, 0.95] {
            let p = ModelParams::demo(h, 0.5);
            let th = epsilon_thresholds(&p, 0.0).unwrap();
            let base = regime_thresholds(&p).unwrap();
            assert!((th.mu_1 - base.mu_1_star).abs() < 1e-12, "h={h}");
            assert!((th.mu_2 - base.mu_2_star).abs() < 1e-12, "h={h}");
            assert_eq!(th.low_h_branch, base.low_h_branch, "h={h}");
            // The reject-twice boundary is the slack one without error.
            assert!(th.mu_3 <= th.mu_1 + 1e-12, "h={h}");
        }
    }

    #[test]
    fn zero_error_classification_reduces_to_the_base_model() {
        for h in [0.4, 0.5, 0.7] {
            for mu in [0.1, 0.2, 0.5, 0.8, 0.95] {
                let p = ModelParams::demo(h, mu);
                let (noisy, _) = epsilon_equilibrium(&p, 0.0).unwrap();
                let base = classify_equilibrium(&p).unwrap();
                assert_eq!(noisy.regime, base.regime, "h={h} mu={mu}");
                for (a, b) in [
                    (noisy.expert.t_m1, base.expert.t_m1),
                    (noisy.expert.t_s1, base.expert.t_s1),
                    (noisy.expert.t_m2, base.expert.t_m2),
                    (noisy.expert.t_s2, base.expert.t_s2),
                    (noisy.consumer.a_m1, base.consumer.a_m1),
                    (noisy.consumer.a_s1, base.consumer.a_s1),
                    (noisy.consumer.a_m2, base.consumer.a_m2),
                    (noisy.consumer.a_s2, base.consumer.a_s2),
                ] {
                    assert!((a - b).abs() <= TOL, "h={h} mu={mu}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn the_full_fraud_band_is_a_certified_equilibrium() {
        let p = ModelParams::demo(0.5, 0.5);
        let eps = 0.2;
        let (profile, th) = epsilon_equilibrium(&p, eps).unwrap();
        assert_eq!(profile.regime, Regime::Fofu);
        assert!(!profile.requires_oracle);
        assert!(th.mu_1.max(th.mu_3) < 0.5 && 0.5 < th.mu_2);
        let report =
            verify_equilibrium(ModelKind::Epsilon(eps), &p, &profile.expert, &profile.consumer, TOL)
                .unwrap();
        assert!(report.is_equilibrium, "gain {}", report.max_gain);
    }

    #[test]
    fn partial_overtreatment_above_the_band() {
        // Large prior: serious recommendations are no longer accepted
        // outright, the minor-diagnosis expert mixes.
        let p = ModelParams::demo(0.5, 0.95);
        let eps = 0.02;
        let (profile, th) = epsilon_equilibrium(&p, eps).unwrap();
        assert_eq!(profile.regime, Regime::Pofu);
        assert!(profile.requires_oracle);
        assert!(p.mu > th.mu_2);
        let t_m1 = profile.expert.t_m1;
        let a_s1 = profile.consumer.a_s1;
        assert!(0.0 < t_m1 && t_m1 < 1.0);
        assert!(0.0 < a_s1 && a_s1 < 1.0);
        assert_eq!(profile.expert.t_s1, 0.0);
        assert_eq!(profile.consumer.a_m1, 1.0);

        // The acceptance probability equals the margin ratio corrected by
        // the chance that a minor diagnosis hides a serious problem (whose
        // return visit the truthful action would also earn).
        let q_m = (1.0 - p.mu) * eps / (p.mu * (1.0 - eps) + (1.0 - p.mu) * eps);
        let expect = p.margin_m() / p.margin_s() + q_m;
        assert!((a_s1 - expect).abs() < 1e-9, "{a_s1} vs {expect}");

        // Consumer indifference on serious recommendations, written in
        // posterior form: k + τ_s·h·ε·(l_s+p_m−p_s) = h(1−ε)(1−τ_s)(p_s−p_m).
        let t_bar_m = p.h + (1.0 - p.h) * t_m1;
        let t_bar_s = p.h;
        let truthful = (1.0 - p.mu) * (1.0 - eps) * t_bar_s + (1.0 - p.mu) * (1.0 - t_bar_m) * eps;
        let excessive = p.mu * t_bar_s * eps + p.mu * (1.0 - t_bar_m) * (1.0 - eps);
        let tau_s = truthful / (truthful + excessive);
        let residual = p.k + tau_s * p.h * eps * (p.l_s + p.p_m - p.p_s)
            - p.h * (1.0 - eps) * (1.0 - tau_s) * (p.p_s - p.p_m);
        assert!(residual.abs() < 1e-9, "indifference residual {residual}");
    }

    #[test]
    fn partial_undertreatment_below_the_band() {
        let p = ModelParams::demo(0.5, 0.15);
        let eps = 0.05;
        let (profile, th) = epsilon_equilibrium(&p, eps).unwrap();
        assert_eq!(profile.regime, Regime::Fopu);
        assert!(profile.requires_oracle);
        assert!(p.mu < th.mu_1.max(th.mu_3));
        let t_s1 = profile.expert.t_s1;
        let a_m1 = profile.consumer.a_m1;
        assert!(0.0 < t_s1 && t_s1 < 1.0);
        assert!(0.0 < a_m1 && a_m1 < 1.0);
        assert_eq!(profile.expert.t_m1, 0.0);
        assert_eq!(profile.consumer.a_s1, 1.0);

        // The minor acceptance that keeps the serious-diagnosis expert
        // indifferent accounts for undertreatments that silently succeed.
        let q_s = (1.0 - p.mu) * (1.0 - eps) / ((1.0 - p.mu) * (1.0 - eps) + p.mu * eps);
        let expect = p.margin_s() / (p.margin_m() + q_s * p.margin_s());
        assert!((a_m1 - expect).abs() < 1e-9, "{a_m1} vs {expect}");
    }

    #[test]
    fn boundary_priors_classify_as_full_fraud_with_the_flag() {
        let base = ModelParams::demo(0.5, 0.5);
        let eps = 0.02;
        let th = epsilon_thresholds(&base, eps).unwrap();
        let p = ModelParams::demo(0.5, th.mu_2);
        let (profile, _) = epsilon_equilibrium(&p, eps).unwrap();
        assert_eq!(profile.regime, Regime::Fofu);
        assert!(profile.boundary_flag);
    }

    #[test]
    fn a_small_error_rate_widens_the_band_when_honesty_is_low() {
        for h in [0.3, 0.5] {
            let p = ModelParams::demo(h, 0.5);
            let effect = epsilon_error_rate_effect(&p, 1e-5).unwrap();
            assert_eq!(effect.d_mu_2.sign, Sign::Positive, "h={h}");
            assert_eq!(effect.d_mu_1.sign, Sign::Negative, "h={h}");
        }
        let p = ModelParams::demo(0.5, 0.5);
        let effect = epsilon_error_rate_effect(&p, 1e-5).unwrap();
        assert!((effect.d_mu_2.value - 13.0 / 9.0).abs() < 1e-3);
    }

    #[test]
    fn a_small_error_rate_narrows_the_band_when_honesty_is_high() {
        let p = ModelParams::demo(0.95, 0.5);
        let effect = epsilon_error_rate_effect(&p, 1e-5).unwrap();
        assert_eq!(effect.d_mu_2.sign, Sign::Negative);
        assert_eq!(effect.d_mu_1.sign, Sign::Positive);
    }

    #[test]
    fn bad_steps_are_refused() {
        let p = ModelParams::demo(0.5, 0.5);
        for step in [0.0, -1e-5, 0.01, f64::NAN] {
            assert!(epsilon_error_rate_effect(&p, step).is_err());
        }
    }
}
