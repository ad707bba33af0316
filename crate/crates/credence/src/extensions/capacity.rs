//! Capacity shocks: each expert-period is hit with probability `chi` by a
//! shock that rules out the serious treatment. The regime map splits at
//! `chi* = (p_m−c_m)/(p_s−c_s)`: below it the market looks like the base
//! model (strategic undertreatment in every regime), above it truthful
//! serious recommendations survive at low priors because a second sale
//! after an accepted undertreatment is too likely to be lost to a shock.

use serde::{Deserialize, Serialize};

use crate::equilibrium::EquilibriumProfile;
use crate::error::{CredenceError, Result};
use crate::params::{validate_params, ModelParams};
use crate::strategy::{ConsumerStrategy, ExpertStrategy, Regime};
use crate::{clamp_unit, TOL};

/// Regime boundaries of the capacity-shock market.
///
/// `mu_1`/`mu_3` bound the full-fraud band from below for mild shocks
/// (`chi ≤ chi_star`), via the reject-then-accept and reject-twice search
/// plans respectively; `mu_2` bounds it from above. For severe shocks
/// (`chi > chi_star`) the corresponding boundaries of the no-undertreatment
/// band are `mu_5`/`mu_6` below and `mu_4` above.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacityThresholds {
    /// Shock probability at which a guaranteed serious margin today matches
    /// the minor margin plus a shock-discounted second sale.
    pub chi_star: f64,
    pub mu_1: f64,
    pub mu_2: f64,
    pub mu_3: f64,
    /// Upper edge of the truthful band under severe shocks; above it
    /// strategic undertreatment reappears.
    pub mu_4: f64,
    pub mu_5: f64,
    pub mu_6: f64,
    /// True when rejecting a serious recommendation never pays
    /// (`(h+(1−h)chi)·(p_s−p_m) ≤ k`); `mu_2` then sits at 1 exactly.
    pub low_h_branch: bool,
}

fn check_chi(chi: f64) -> Result<()> {
    if !chi.is_finite() || !(0.0..=1.0).contains(&chi) {
        return Err(CredenceError::Precondition(format!(
            "capacity shock probability must lie in [0, 1], got {chi}"
        )));
    }
    Ok(())
}

/// Shock probability above which truthful serious recommendations can
/// survive: the minor margin plus a shock-discounted serious margin stops
/// beating a sure serious margin.
pub fn capacity_chi_star(p: &ModelParams) -> f64 {
    p.margin_m() / p.margin_s()
}

/// Closed-form regime boundaries under shock probability `chi`.
pub fn capacity_thresholds(p: &ModelParams, chi: f64) -> Result<CapacityThresholds> {
    validate_params(p)?;
    check_chi(chi)?;
    let h = p.h;
    let gap = p.p_s - p.p_m;
    // Probability that a given period can actually deliver a truthful
    // recommendation on a serious problem (honest and unshocked, or any
    // expert forced into the minor recommendation): the "minor
    // recommendation is harmless" weight.
    let w = h + (1.0 - h) * chi;
    // Expected extra loss per rejected serious recommendation caused by
    // shocked second visits.
    let l_shock = chi * (p.l_s - p.p_s + (1.0 - h) * p.p_m);
    // Cost of the reject-then-accept plan against a truthful minor
    // recommendation, and its surplus when the recommendation was
    // inadequate.
    let plan_cost = p.k + (1.0 - h) * (1.0 - chi) * gap;
    let plan_surplus = p.p_m * (1.0 - (1.0 - h) * chi) + p.k_return - p.k;
    // Same pair for the reject-twice plan.
    let strict_cost = p.k + w * p.l_m + (1.0 - h) * (1.0 - chi) * p.p_s - p.p_m;
    let return_surplus = p.p_m + p.k_return - p.k;

    let low_h_branch = w * gap <= p.k;
    let mu_2 = if low_h_branch {
        1.0
    } else {
        let n = h * (p.k + l_shock);
        n / (n + (1.0 - h) * (w * gap - p.k))
    };
    let mu_4 = if low_h_branch {
        1.0
    } else {
        (p.k + l_shock) / (h * p.k + l_shock + (1.0 - h) * w * gap)
    };

    let ratio = |num: f64, scale: f64| {
        if num <= 0.0 {
            0.0
        } else {
            num / (num + scale)
        }
    };
    let mu_1 = ratio((1.0 - h) * plan_surplus, w * plan_cost);
    let mu_3 = ratio((1.0 - h) * return_surplus, w * strict_cost);
    let mu_5 = ratio((1.0 - h) * chi * plan_surplus, w * plan_cost);
    let mu_6 = ratio((1.0 - h) * chi * return_surplus, w * strict_cost);

    Ok(CapacityThresholds {
        chi_star: capacity_chi_star(p),
        mu_1,
        mu_2,
        mu_3,
        mu_4,
        mu_5,
        mu_6,
        low_h_branch,
    })
}

/// Whether a profile undertreats for strategic reasons: some unshocked
/// opportunistic experts recommend the minor treatment on a serious problem.
pub fn strategic_undertreatment(profile: &EquilibriumProfile) -> bool {
    profile.expert.t_s1 < 1.0
}

struct Pieces<'a> {
    p: &'a ModelParams,
    chi: f64,
    w: f64,
    l_shock: f64,
    plan_cost: f64,
    plan_surplus: f64,
    strict_cost: f64,
    return_surplus: f64,
}

impl<'a> Pieces<'a> {
    fn new(p: &'a ModelParams, chi: f64) -> Self {
        let h = p.h;
        let w = h + (1.0 - h) * chi;
        Pieces {
            p,
            chi,
            w,
            l_shock: chi * (p.l_s - p.p_s + (1.0 - h) * p.p_m),
            plan_cost: p.k + (1.0 - h) * (1.0 - chi) * (p.p_s - p.p_m),
            plan_surplus: p.p_m * (1.0 - (1.0 - h) * chi) + p.k_return - p.k,
            strict_cost: p.k + w * p.l_m + (1.0 - h) * (1.0 - chi) * p.p_s - p.p_m,
            return_surplus: p.p_m + p.k_return - p.k,
        }
    }

    /// Partial-overtreatment mixing: the minor-problem expert overtreats
    /// just often enough to keep the consumer indifferent about a serious
    /// recommendation.
    fn pofu_t_m1(&self) -> Result<f64> {
        let p = self.p;
        let m = self.w * (p.p_s - p.p_m) - p.k;
        if m <= 0.0 {
            return Err(CredenceError::DenominatorVanished(
                "(h + (1−h)·chi)·(p_s − p_m) − k",
            ));
        }
        let t = 1.0
            - (1.0 - p.mu) * p.h * (p.k + self.l_shock) / (p.mu * (1.0 - p.h) * m);
        Ok(clamp_unit(t))
    }

    /// Whether the reject-then-accept plan is the binding alternative to
    /// accepting a minor recommendation (otherwise it is the reject-twice
    /// plan), together with the posterior that makes it bind.
    fn binding_plan(&self) -> (f64, bool) {
        let tau_accept = self.plan_surplus / (self.plan_cost + self.plan_surplus);
        let tau_strict = self.return_surplus / (self.strict_cost + self.return_surplus);
        if tau_accept >= tau_strict {
            (tau_accept, true)
        } else {
            (tau_strict, false)
        }
    }

    /// Partial-undertreatment mixing: solve the binding minor-recommendation
    /// indifference for the serious-problem expert's truthfulness.
    fn fopu_t_s1(&self) -> Result<(f64, bool)> {
        let p = self.p;
        let (tau, accept_plan) = self.binding_plan();
        if !(tau > 0.0) {
            return Err(CredenceError::EmptyFopuRegion);
        }
        // Fraction of minor recommendations on serious problems consistent
        // with the binding posterior.
        let x = p.mu * self.w * (1.0 - tau) / (tau * (1.0 - p.mu) * (1.0 - p.h));
        if self.chi >= 1.0 {
            return Err(CredenceError::DenominatorVanished(
                "1 − chi (no unshocked experts to mix)",
            ));
        }
        let t = 1.0 - (x - self.chi) / (1.0 - self.chi);
        Ok((clamp_unit(t), accept_plan))
    }

    /// Second-visit minor acceptance consistent with the plan that binds at
    /// a no-undertreatment profile: accept when following through on the
    /// reject-then-accept plan, reject when the reject-twice plan pays more.
    fn ponu_a_m2(&self) -> f64 {
        let p = self.p;
        let lhs = p.mu * self.w * self.w * (p.l_m - p.p_m);
        let rhs =
            (1.0 - p.mu) * (1.0 - p.h) * (1.0 - p.h) * self.chi * self.chi * p.p_m;
        if lhs >= rhs {
            1.0
        } else {
            0.0
        }
    }
}

fn profile(
    regime: Regime,
    t_m1: f64,
    t_s1: f64,
    a_m1: f64,
    a_s1: f64,
    a_m2: f64,
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
            a_m2,
            a_s2: 1.0,
        },
        thresholds: None,
        boundary_flag,
        requires_oracle: false,
    }
}

/// Equilibrium of the capacity-shock market at `p`.
///
/// Follows the base classifier's conventions: points within [`TOL`] of a
/// boundary classify into the adjacent pure band with `boundary_flag` set.
pub fn capacity_equilibrium(
    p: &ModelParams,
    chi: f64,
) -> Result<(EquilibriumProfile, CapacityThresholds)> {
    let th = capacity_thresholds(p, chi)?;
    let pieces = Pieces::new(p, chi);
    let mu = p.mu;
    let near = |t: f64| (mu - t).abs() <= TOL;
    let pivot = p.margin_m() / p.margin_s();

    let profile = if chi <= th.chi_star {
        let lower = th.mu_1.max(th.mu_3);
        let sliver = th.mu_5.max(th.mu_6);
        let overlap = lower > 0.0 && th.mu_2 < lower;
        if overlap {
            let pofu_side = if mu <= th.mu_2 {
                false
            } else {
                mu >= lower || mu > pivot
            };
            let boundary = near(th.mu_2) || near(lower) || near(pivot);
            if pofu_side {
                let t_m1 = pieces.pofu_t_m1()?;
                profile(Regime::Pofu, t_m1, 0.0, 1.0, pivot, 1.0, boundary)
            } else {
                mild_shock_low_side(&pieces, sliver, boundary)?
            }
        } else if near(lower) || near(th.mu_2) {
            profile(Regime::Fofu, 0.0, 0.0, 1.0, 1.0, 1.0, true)
        } else if mu < lower {
            mild_shock_low_side(&pieces, sliver, near(sliver))?
        } else if mu > th.mu_2 {
            let t_m1 = pieces.pofu_t_m1()?;
            profile(Regime::Pofu, t_m1, 0.0, 1.0, pivot, 1.0, false)
        } else {
            profile(Regime::Fofu, 0.0, 0.0, 1.0, 1.0, 1.0, false)
        }
    } else {
        let lower = th.mu_5.max(th.mu_6);
        let overlap = lower > 0.0 && th.mu_4 < lower;
        if overlap {
            let pofu_side = if mu <= th.mu_4 { false } else { mu > pivot };
            let boundary = near(th.mu_4) || near(lower) || near(pivot);
            if pofu_side {
                let t_m1 = pieces.pofu_t_m1()?;
                profile(Regime::Pofu, t_m1, 0.0, 1.0, pivot, 1.0, boundary)
            } else {
                profile(
                    Regime::Ponu,
                    0.0,
                    1.0,
                    0.0,
                    1.0,
                    pieces.ponu_a_m2(),
                    boundary,
                )
            }
        } else if near(lower) || near(th.mu_4) {
            profile(Regime::Fonu, 0.0, 1.0, 1.0, 1.0, 1.0, true)
        } else if mu < lower {
            profile(Regime::Ponu, 0.0, 1.0, 0.0, 1.0, pieces.ponu_a_m2(), false)
        } else if mu > th.mu_4 {
            let t_m1 = pieces.pofu_t_m1()?;
            profile(Regime::Pofu, t_m1, 0.0, 1.0, pivot, 1.0, false)
        } else {
            profile(Regime::Fonu, 0.0, 1.0, 1.0, 1.0, 1.0, false)
        }
    };
    Ok((profile, th))
}

/// The low-prior side of the mild-shock map: partial undertreatment where
/// the mixing stays interior, and the fully rejective no-undertreatment
/// profile on the thin band below it where even full truthfulness cannot
/// make the consumer accept a minor recommendation.
fn mild_shock_low_side(
    pieces: &Pieces,
    sliver: f64,
    boundary: bool,
) -> Result<EquilibriumProfile> {
    let p = pieces.p;
    if p.mu <= sliver {
        return Ok(profile(
            Regime::Ponu,
            0.0,
            1.0,
            0.0,
            1.0,
            pieces.ponu_a_m2(),
            boundary || (p.mu - sliver).abs() <= TOL,
        ));
    }
    let (t_s1, _accept_plan) = pieces.fopu_t_s1()?;
    let a_m1 = p.margin_s() / (p.margin_m() + (1.0 - pieces.chi) * p.margin_s());
    Ok(profile(Regime::Fopu, 0.0, t_s1, a_m1, 1.0, 1.0, boundary))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::{classify_equilibrium, regime_thresholds};
    use crate::model::ModelKind;
    use crate::oracle::verify_equilibrium;

    #[test]
    fn shock_pivot_at_the_frozen_point() {
        let p = ModelParams::demo(0.5, 0.5);
        assert!((capacity_chi_star(&p) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn severe_shock_band_edge_matches_the_frozen_value() {
        let p = ModelParams::demo(0.5, 0.5);
        let th = capacity_thresholds(&p, 0.5).unwrap();
        assert!((th.mu_4 - 4.0 / 4.625).abs() < 1e-12);
    }

    #[test]
    fn out_of_range_shock_probabilities_are_refused() {
        let p = ModelParams::demo(0.5, 0.5);
        for chi in [-0.2, 1.5, f64::NAN] {
            assert!(matches!(
                capacity_equilibrium(&p, chi),
                Err(CredenceError::Precondition(_))
            ));
        }
    }

    #[test]
    fn no_shock_collapses_to_the_base_thresholds() {
        for h in [0.2, 0.35, 0.5, 0.65, 0.8, 0.95] {
            let p = ModelParams::demo(h, 0.5);
            let th = capacity_thresholds(&p, 0.0).unwrap();
            let base = regime_thresholds(&p).unwrap();
            assert!((th.mu_1 - base.mu_1_star).abs() < 1e-12, "h={h}");
            assert!((th.mu_2 - base.mu_2_star).abs() < 1e-12, "h={h}");
            assert_eq!(th.low_h_branch, base.low_h_branch, "h={h}");
            // The reject-twice plan never binds without shocks, and the
            // fully rejective band is empty.
            assert!(th.mu_3 <= th.mu_1 + 1e-12, "h={h}");
            assert_eq!(th.mu_5, 0.0, "h={h}");
            assert_eq!(th.mu_6, 0.0, "h={h}");
        }
    }

    #[test]
    fn no_shock_classification_reduces_to_the_base_model() {
        for h in [0.4, 0.5, 0.7] {
            for mu in [0.1, 0.2, 0.5, 0.8, 0.95] {
                let p = ModelParams::demo(h, mu);
                let (shocked, _) = capacity_equilibrium(&p, 0.0).unwrap();
                let base = classify_equilibrium(&p).unwrap();
                assert_eq!(shocked.regime, base.regime, "h={h} mu={mu}");
                for (a, b) in [
                    (shocked.expert.t_m1, base.expert.t_m1),
                    (shocked.expert.t_s1, base.expert.t_s1),
                    (shocked.consumer.a_m1, base.consumer.a_m1),
                    (shocked.consumer.a_s1, base.consumer.a_s1),
                    (shocked.consumer.a_m2, base.consumer.a_m2),
                ] {
                    assert!((a - b).abs() <= 1e-12, "h={h} mu={mu}: {a} vs {b}");
                }
            }
        }
    }

    fn certify(p: &ModelParams, chi: f64, profile: &EquilibriumProfile) {
        let report = verify_equilibrium(
            ModelKind::Capacity(chi),
            p,
            &profile.expert,
            &profile.consumer,
            TOL,
        )
        .unwrap();
        assert!(
            report.is_equilibrium,
            "chi={chi} mu={} regime {:?}: gain {} at {:?}",
            p.mu, profile.regime, report.max_gain, report.witness
        );
    }

    #[test]
    fn mild_shock_band_structure_and_certification() {
        let chi = 0.2;
        // Thresholds at h=0.5: mu_2 ≈ 0.7333, max(mu_1, mu_3) ≈ 0.2326,
        // sliver max(mu_5, mu_6) ≈ 0.0571.
        let p = ModelParams::demo(0.5, 0.5);
        let th = capacity_thresholds(&p, chi).unwrap();
        assert!((th.mu_2 - 1.1 / 1.5).abs() < 1e-12);
        assert!((th.mu_1 - 0.4 / 1.72).abs() < 1e-12);
        assert!((th.mu_3 - 0.5 / 3.26).abs() < 1e-12);

        let (fofu, _) = capacity_equilibrium(&p, chi).unwrap();
        assert_eq!(fofu.regime, Regime::Fofu);
        certify(&p, chi, &fofu);

        let p = ModelParams::demo(0.5, 0.9);
        let (pofu, _) = capacity_equilibrium(&p, chi).unwrap();
        assert_eq!(pofu.regime, Regime::Pofu);
        assert!((pofu.expert.t_m1 - (1.0 - 0.11 / 0.36)).abs() < 1e-12);
        assert!((pofu.consumer.a_s1 - 1.0 / 3.0).abs() < 1e-15);
        certify(&p, chi, &pofu);

        let p = ModelParams::demo(0.5, 0.1);
        let (fopu, _) = capacity_equilibrium(&p, chi).unwrap();
        assert_eq!(fopu.regime, Regime::Fopu);
        assert!((fopu.expert.t_s1 - (1.0 - 0.166_666_666_666_666_7 / 0.8)).abs() < 1e-12);
        assert!((fopu.consumer.a_m1 - 3.0 / 3.4).abs() < 1e-12);
        certify(&p, chi, &fopu);
        assert!(strategic_undertreatment(&fopu));

        // Below the sliver even full truthfulness cannot rescue the minor
        // recommendation, and the rejective profile takes over.
        let p = ModelParams::demo(0.5, 0.04);
        let (ponu, _) = capacity_equilibrium(&p, chi).unwrap();
        assert_eq!(ponu.regime, Regime::Ponu);
        assert!(!strategic_undertreatment(&ponu));
    }

    #[test]
    fn severe_shock_band_structure_and_certification() {
        let chi = 0.5;
        let p = ModelParams::demo(0.5, 0.5);
        let th = capacity_thresholds(&p, chi).unwrap();
        assert!((th.mu_5 - 0.125 / 1.4375).abs() < 1e-12);
        assert!((th.mu_6 - 0.25 / 3.8125).abs() < 1e-12);

        let (fonu, _) = capacity_equilibrium(&p, chi).unwrap();
        assert_eq!(fonu.regime, Regime::Fonu);
        assert_eq!(fonu.expert.t_s1, 1.0);
        assert!(!strategic_undertreatment(&fonu));
        certify(&p, chi, &fonu);

        let p = ModelParams::demo(0.5, 0.95);
        let (pofu, _) = capacity_equilibrium(&p, chi).unwrap();
        assert_eq!(pofu.regime, Regime::Pofu);
        assert!((pofu.expert.t_m1 - (1.0 - 0.1 / 0.59375)).abs() < 1e-12);
        assert!(strategic_undertreatment(&pofu));
        certify(&p, chi, &pofu);

        // Low prior, reject-then-accept plan binding: certifiable.
        let p = ModelParams::demo(0.5, 0.07);
        let (ponu, _) = capacity_equilibrium(&p, chi).unwrap();
        assert_eq!(ponu.regime, Regime::Ponu);
        assert_eq!(ponu.consumer.a_m1, 0.0);
        assert_eq!(ponu.consumer.a_m2, 1.0);
        certify(&p, chi, &ponu);

        // Slightly lower prior: the reject-twice plan binds instead and the
        // consumer walks away from a repeated minor recommendation.
        let p = ModelParams::demo(0.5, 0.05);
        let (ponu, _) = capacity_equilibrium(&p, chi).unwrap();
        assert_eq!(ponu.regime, Regime::Ponu);
        assert_eq!(ponu.consumer.a_m1, 0.0);
        assert_eq!(ponu.consumer.a_m2, 0.0);
    }

    #[test]
    fn severe_shock_profit_matches_the_hand_computation() {
        let p = ModelParams::demo(0.5, 0.5);
        let chi = 0.5;
        let (fonu, _) = capacity_equilibrium(&p, chi).unwrap();
        let out = crate::oracle::evaluate_tree(
            ModelKind::Capacity(chi),
            &p,
            &fonu.expert,
            &fonu.consumer,
        )
        .unwrap();
        assert!((out.profit - 2.375).abs() < 1e-12);
    }
}
