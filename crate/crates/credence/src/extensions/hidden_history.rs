//! Hidden visit histories: experts cannot tell a first-visit consumer from
//! one who already rejected another expert's recommendation, so each
//! opportunistic expert plays one recommendation strategy per problem type
//! across both visits. Full fraud survives on a *wider* prior band than in
//! the base market — a rejected consumer now risks undertreatment at the
//! second expert too, which makes first-visit acceptance more attractive —
//! and that extra acceptance is exactly what hurts consumer welfare.

use serde::{Deserialize, Serialize};

use crate::equilibrium::EquilibriumProfile;
use crate::error::{CredenceError, Result};
use crate::model::ModelKind;
use crate::oracle::tree::{evaluate_tree, SET_C1_MINOR};
use crate::oracle::verify_equilibrium;
use crate::params::{validate_params, ModelParams};
use crate::solver::{bisect, BisectOptions};
use crate::strategy::{ConsumerStrategy, ExpertStrategy, Regime};
use crate::{clamp_unit, TOL};

/// Prior boundaries of the hidden-history regime map.
///
/// The full-fraud band is `max(mu_1, mu_3) ≤ mu ≤ mu_2`: `mu_1` and `mu_3`
/// are the priors below which rejecting a first-visit minor recommendation
/// pays (planning to accept, respectively reject, a repeated minor
/// recommendation), and `mu_2` is the prior above which rejecting a serious
/// recommendation pays.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HiddenHistoryThresholds {
    pub mu_1: f64,
    pub mu_2: f64,
    pub mu_3: f64,
    /// Honesty level splitting the high-prior region: at or below it the
    /// pure profile with all serious recommendations rejected holds; above
    /// it the experts mix on minor problems and consumers mix on serious
    /// acceptance.
    pub h_split: f64,
    /// True when rejecting a serious recommendation never pays
    /// (`h·(p_s−p_m) ≤ k`); `mu_2` then sits at 1 exactly.
    pub low_h_branch: bool,
}

/// First-visit shares an expert's visitors, by problem type, given a
/// symmetric profile: `gamma_m` (`gamma_s`) is the probability that a
/// consumer presenting a minor (serious) problem has not visited anyone
/// before, and `gamma_mm` (`gamma_sm`) is the probability that a
/// second-visit consumer with a minor (serious) problem rejected a *minor*
/// recommendation rather than a serious one. The conditional shares are 0
/// when full acceptance leaves no second visits to condition on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VisitPosteriors {
    pub gamma_m: f64,
    pub gamma_s: f64,
    pub gamma_mm: f64,
    pub gamma_sm: f64,
}

/// Steady-state visit shares induced by a merged-strategy profile.
pub fn visit_posteriors(
    p: &ModelParams,
    e: &ExpertStrategy,
    c: &ConsumerStrategy,
) -> VisitPosteriors {
    let t_m = p.h + (1.0 - p.h) * e.t_m1;
    let t_s = p.h + (1.0 - p.h) * e.t_s1;
    // Second-visit flow per new consumer of each problem type: rejected
    // truthful recommendations plus rejected fraudulent ones.
    let flow_m = t_m * (1.0 - c.a_m1) + (1.0 - t_m) * (1.0 - c.a_s1);
    let flow_s = t_s * (1.0 - c.a_s1) + (1.0 - t_s) * (1.0 - c.a_m1);
    VisitPosteriors {
        gamma_m: 1.0 / (1.0 + flow_m),
        gamma_s: 1.0 / (1.0 + flow_s),
        gamma_mm: if flow_m > 0.0 {
            t_m * (1.0 - c.a_m1) / flow_m
        } else {
            0.0
        },
        gamma_sm: if flow_s > 0.0 {
            (1.0 - t_s) * (1.0 - c.a_m1) / flow_s
        } else {
            0.0
        },
    }
}

/// Closed-form prior boundaries of the hidden-history market.
pub fn hidden_history_thresholds(p: &ModelParams) -> Result<HiddenHistoryThresholds> {
    validate_params(p)?;
    let h = p.h;
    let gap = p.p_s - p.p_m;
    let rs = p.p_m + p.k_return - p.k;
    let salvage = p.l_s - p.p_s;

    let low_h_branch = h * gap <= p.k;
    let mu_2 = if low_h_branch {
        1.0
    } else {
        let n = h * h * p.k + h * (1.0 - h) * (salvage + p.p_m + p.k);
        n / (n + (1.0 - h) * (h * gap - p.k))
    };

    let ratio = |num: f64, scale: f64| {
        if num <= 0.0 {
            0.0
        } else {
            num / (num + scale)
        }
    };
    let mu_1 = ratio(
        (1.0 - h) * (h * rs - (1.0 - h) * (salvage + p.k - p.k_return)),
        h * ((1.0 - h) * gap + p.k),
    );
    let mu_3 = ratio(
        (1.0 - h) * (rs - (1.0 - h) * salvage),
        h * h * (p.l_m - p.p_m + p.k) + (1.0 - h) * h * (gap + p.k),
    );

    Ok(HiddenHistoryThresholds {
        mu_1,
        mu_2,
        mu_3,
        h_split: (p.margin_s() - 2.0 * p.margin_m()) / (p.margin_s() - p.margin_m()),
        low_h_branch,
    })
}

fn merged(t_m: f64, t_s: f64) -> ExpertStrategy {
    ExpertStrategy {
        t_m1: t_m,
        t_s1: t_s,
        t_m2: t_m,
        t_s2: t_s,
    }
}

fn profile(
    regime: Regime,
    t_m: f64,
    t_s: f64,
    consumer: ConsumerStrategy,
    boundary_flag: bool,
    requires_oracle: bool,
) -> EquilibriumProfile {
    EquilibriumProfile {
        regime,
        expert: merged(t_m, t_s),
        consumer,
        thresholds: None,
        boundary_flag,
        requires_oracle,
    }
}

fn value_gap(p: &ModelParams, e: &ExpertStrategy, c: &ConsumerStrategy, setting: &str) -> f64 {
    match evaluate_tree(ModelKind::HiddenHistory, p, e, c) {
        Ok(out) => match out.record(setting) {
            Some(rec) => rec.actions[0].value - rec.actions[1].value,
            None => f64::NAN,
        },
        Err(_) => f64::NAN,
    }
}

/// Low-prior mixed profile: the serious-problem expert mixes between
/// truthful and minor recommendations (merged across visits) and the
/// consumer mixes on first-visit minor acceptance. The expert's mixing
/// probability solves the consumer's minor-recommendation indifference on
/// the tree; the consumer's acceptance then follows in closed form from the
/// expert's own indifference, which depends on the equilibrium level of
/// serious-side truthfulness, not just the honest share.
fn solve_low_prior(
    p: &ModelParams,
    th: &HiddenHistoryThresholds,
    boundary_flag: bool,
) -> Result<EquilibriumProfile> {
    let ms = p.margin_s();
    let mm = p.margin_m();
    // Try the repeat-minor acceptance variant with the wider validity
    // window first; fall back to the other.
    let candidates = if th.mu_1 >= th.mu_3 {
        [1.0, 0.0]
    } else {
        [0.0, 1.0]
    };
    for a_m2 in candidates {
        let consumer_at = |a_m1: f64| ConsumerStrategy {
            a_m1,
            a_s1: 1.0,
            a_m2,
            a_s2: 1.0,
        };
        let residual =
            |t: f64| value_gap(p, &merged(0.0, t), &consumer_at(1.0), SET_C1_MINOR);
        if !(residual(0.0) < 0.0 && residual(1.0) > 0.0) {
            continue;
        }
        let Ok(t_s) = bisect(residual, 0.0, 1.0, &BisectOptions::default()) else {
            continue;
        };
        let t_bar_s = p.h + (1.0 - p.h) * t_s;
        let a_m1 = if a_m2 == 1.0 {
            ((2.0 - t_bar_s) * ms - (1.0 - t_bar_s) * mm)
                / ((2.0 - t_bar_s) * ms + t_bar_s * mm)
        } else {
            (2.0 - t_bar_s) * ms / ((2.0 - t_bar_s) * ms + mm)
        };
        if !(0.0..=1.0).contains(&a_m1) {
            continue;
        }
        let candidate = profile(
            Regime::Fopu,
            0.0,
            t_s,
            consumer_at(a_m1),
            boundary_flag,
            true,
        );
        let report = verify_equilibrium(
            ModelKind::HiddenHistory,
            p,
            &candidate.expert,
            &candidate.consumer,
            TOL,
        )?;
        if report.is_equilibrium {
            return Ok(candidate);
        }
    }
    Err(CredenceError::NoEquilibriumFound)
}

/// High-prior mixed profile: the minor-problem expert mixes (merged across
/// visits) to keep the consumer indifferent about serious recommendations,
/// and the consumer's serious acceptance keeps the expert indifferent. The
/// truthfulness level is the smaller root of the indifference quadratic;
/// the larger root leaves the feasible bracket above the band edge.
fn solve_high_prior(p: &ModelParams, boundary_flag: bool) -> Result<EquilibriumProfile> {
    let gap = p.p_s - p.p_m;
    let a = p.mu * gap;
    let b = p.mu * (gap - p.k);
    let c0 = (1.0 - p.mu) * p.h * (p.k + (1.0 - p.h) * (p.l_s + p.p_m - p.p_s));
    let disc = b * b - 4.0 * a * c0;
    if disc < 0.0 || a <= 0.0 {
        return Err(CredenceError::NoEquilibriumFound);
    }
    // x is the share of minor-problem consumers receiving a (fraudulent)
    // serious recommendation.
    let x = (b - disc.sqrt()) / (2.0 * a);
    let t_m = clamp_unit((1.0 - x - p.h) / (1.0 - p.h));
    let spread = p.margin_s() - p.margin_m();
    let a_s1 = (p.margin_m() - x * spread) / (p.margin_s() - x * spread);
    if !(0.0..=1.0).contains(&a_s1) {
        return Err(CredenceError::NoEquilibriumFound);
    }
    Ok(profile(
        Regime::Pofu,
        t_m,
        0.0,
        ConsumerStrategy {
            a_m1: 1.0,
            a_s1,
            a_m2: 1.0,
            a_s2: 1.0,
        },
        boundary_flag,
        false,
    ))
}

/// Equilibrium of the hidden-history market at `p`, with the regime
/// thresholds and the visit shares the returned profile induces.
pub fn hidden_history_equilibrium(
    p: &ModelParams,
) -> Result<(EquilibriumProfile, HiddenHistoryThresholds, VisitPosteriors)> {
    let th = hidden_history_thresholds(p)?;
    let mu = p.mu;
    let near = |t: f64| (mu - t).abs() <= TOL;
    let lower = th.mu_1.max(th.mu_3);

    let profile = if mu < lower && !near(lower) {
        solve_low_prior(p, &th, near(th.mu_1) || near(th.mu_3))?
    } else if mu <= th.mu_2 {
        profile(
            Regime::Fofu,
            0.0,
            0.0,
            ConsumerStrategy {
                a_m1: 1.0,
                a_s1: 1.0,
                a_m2: 1.0,
                a_s2: 1.0,
            },
            near(lower) || near(th.mu_2),
            false,
        )
    } else if p.h <= th.h_split {
        profile(
            Regime::FofuRejectSerious,
            0.0,
            0.0,
            ConsumerStrategy {
                a_m1: 1.0,
                a_s1: 0.0,
                a_m2: 1.0,
                a_s2: 1.0,
            },
            near(th.mu_2) || (p.h - th.h_split).abs() <= TOL,
            false,
        )
    } else {
        solve_high_prior(p, near(th.mu_2) || (p.h - th.h_split).abs() <= TOL)?
    };
    let posteriors = visit_posteriors(p, &profile.expert, &profile.consumer);
    Ok((profile, th, posteriors))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::classify_equilibrium;
    use crate::outcomes::outcome_metrics;

    fn certify(p: &ModelParams, profile: &EquilibriumProfile) {
        let report = verify_equilibrium(
            ModelKind::HiddenHistory,
            p,
            &profile.expert,
            &profile.consumer,
            TOL,
        )
        .unwrap();
        assert!(
            report.is_equilibrium,
            "mu={} h={} regime {:?}: gain {} at {:?}",
            p.mu, p.h, profile.regime, report.max_gain, report.witness
        );
    }

    #[test]
    fn thresholds_at_the_frozen_point() {
        let p = ModelParams::demo(0.5, 0.5);
        let th = hidden_history_thresholds(&p).unwrap();
        assert_eq!(th.mu_1, 0.0);
        assert_eq!(th.mu_3, 0.0);
        assert!((th.mu_2 - 0.9).abs() < 1e-12);
        assert!((th.h_split - 0.5).abs() < 1e-15);
        assert!(!th.low_h_branch);
    }

    #[test]
    fn a_low_honesty_market_never_rejects_serious_recommendations() {
        let p = ModelParams::demo(0.3, 0.5);
        let th = hidden_history_thresholds(&p).unwrap();
        assert_eq!(th.mu_2, 1.0);
        assert!(th.low_h_branch);
    }

    #[test]
    fn full_acceptance_means_every_visitor_is_new() {
        let p = ModelParams::demo(0.5, 0.5);
        let g = visit_posteriors(
            &p,
            &merged(1.0, 1.0),
            &ConsumerStrategy {
                a_m1: 1.0,
                a_s1: 1.0,
                a_m2: 1.0,
                a_s2: 1.0,
            },
        );
        assert_eq!(g.gamma_m, 1.0);
        assert_eq!(g.gamma_s, 1.0);
        assert_eq!(g.gamma_mm, 0.0);
        assert_eq!(g.gamma_sm, 0.0);
    }

    #[test]
    fn the_full_fraud_band_spans_the_widened_range() {
        // The band holds all the way down to mu near zero at the frozen
        // point, and up to the widened edge 0.9.
        for mu in [0.01, 0.3, 0.5, 2.0 / 3.0, 0.85] {
            let p = ModelParams::demo(0.5, mu);
            let (profile, _, g) = hidden_history_equilibrium(&p).unwrap();
            assert_eq!(profile.regime, Regime::Fofu, "mu={mu}");
            certify(&p, &profile);
            assert_eq!(g.gamma_m, 1.0);
        }
    }

    #[test]
    fn above_the_band_low_honesty_consumers_reject_serious_recommendations() {
        // h = 0.5 sits exactly on the split, so the pure rejection profile
        // applies (and the experts' overtreat indifference is knife-edge).
        let p = ModelParams::demo(0.5, 0.95);
        let (profile, _, g) = hidden_history_equilibrium(&p).unwrap();
        assert_eq!(profile.regime, Regime::FofuRejectSerious);
        assert_eq!(profile.consumer.a_s1, 0.0);
        assert_eq!(profile.expert.t_m1, 0.0);
        certify(&p, &profile);
        assert!((g.gamma_m - 1.0 / (2.0 - p.h)).abs() < 1e-12);
        assert!((g.gamma_s - 1.0 / (1.0 + p.h)).abs() < 1e-12);
        assert_eq!(g.gamma_mm, 0.0);
        assert_eq!(g.gamma_sm, 0.0);
    }

    #[test]
    fn above_the_band_high_honesty_experts_mix_on_minor_problems() {
        let p = ModelParams {
            h: 0.7,
            mu: 0.95,
            ..ModelParams::demo(0.7, 0.95)
        };
        let (profile, th, _) = hidden_history_equilibrium(&p).unwrap();
        assert!(p.mu > th.mu_2);
        assert_eq!(profile.regime, Regime::Pofu);
        // Hand-computed quadratic root and self-consistent acceptance.
        assert!((profile.expert.t_m1 - 0.789_758_4).abs() < 1e-6);
        assert!((profile.consumer.a_s1 - 0.304_070_8).abs() < 1e-6);
        certify(&p, &profile);

        // The indifference equation itself holds at the root.
        let x = 1.0 - (p.h + (1.0 - p.h) * profile.expert.t_m1);
        let gap = p.p_s - p.p_m;
        let c0 = (1.0 - p.mu) * p.h * (p.k + (1.0 - p.h) * (p.l_s + p.p_m - p.p_s));
        let resid = p.mu * gap * x * x - p.mu * (gap - p.k) * x + c0;
        assert!(resid.abs() < 1e-9, "quadratic residual {resid}");
    }

    #[test]
    fn below_the_band_experts_mix_on_serious_problems() {
        // mu_1 > 0 requires high honesty; at h = 0.9 the window reaches up
        // to 0.025.
        let p = ModelParams::demo(0.9, 0.02);
        let (profile, th, _) = hidden_history_equilibrium(&p).unwrap();
        assert!((th.mu_1 - 0.025).abs() < 1e-12);
        assert!(th.mu_3 < th.mu_1);
        assert_eq!(profile.regime, Regime::Fopu);
        assert!(profile.requires_oracle);
        assert_eq!(profile.expert.t_m1, 0.0);
        assert!(profile.expert.t_s1 > 0.0 && profile.expert.t_s1 < 1.0);
        assert!(profile.consumer.a_m1 > 0.0 && profile.consumer.a_m1 < 1.0);
        assert_eq!(profile.consumer.a_m2, 1.0);
        certify(&p, &profile);

        // Acceptance ties to the equilibrium truthfulness level through the
        // expert's indifference.
        let t_bar_s = p.h + (1.0 - p.h) * profile.expert.t_s1;
        let ms = p.margin_s();
        let mm = p.margin_m();
        let expect = ((2.0 - t_bar_s) * ms - (1.0 - t_bar_s) * mm)
            / ((2.0 - t_bar_s) * ms + t_bar_s * mm);
        assert!((profile.consumer.a_m1 - expect).abs() < 1e-9);
    }

    #[test]
    fn hiding_the_history_lowers_welfare_on_the_overlap() {
        // Between the known-history band edge (2/3) and the hidden-history
        // edge (0.9), the known market mixes on overtreatment while the
        // hidden market stays at full fraud; the welfare gap is exactly the
        // extra overtreatment spend.
        let p = ModelParams::demo(0.5, 0.8);
        let known = classify_equilibrium(&p).unwrap();
        let known_cw = outcome_metrics(&p, &known).unwrap().welfare;
        assert!((known_cw - -4.4).abs() < 1e-12);

        let (hidden, _, _) = hidden_history_equilibrium(&p).unwrap();
        let hidden_cw =
            evaluate_tree(ModelKind::HiddenHistory, &p, &hidden.expert, &hidden.consumer)
                .unwrap()
                .welfare;
        assert!((hidden_cw - -5.0).abs() < 1e-12);

        let t_bar_m_known = p.h + (1.0 - p.h) * known.expert.t_m1;
        let gap = p.mu * (t_bar_m_known - p.h) * (p.p_s - p.p_m);
        assert!((known_cw - hidden_cw - gap).abs() < 1e-12);
    }
}
