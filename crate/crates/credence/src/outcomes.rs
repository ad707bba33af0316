//! Analytic outcome evaluation for the base model: the opportunistic
//! expert's expected profit, consumer welfare under all-cost accounting, the
//! thresholds that govern their monotonicity, and discrete monotonicity
//! scans along a parameter axis.

use serde::{Deserialize, Serialize};

use crate::equilibrium::{classify_equilibrium, EquilibriumProfile, Sign};
use crate::error::{CredenceError, Result};
use crate::params::ModelParams;
use crate::strategy::Regime;

/// Profit and welfare under one regime's closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutcomeMetrics {
    /// Opportunistic expert's expected profit per first-visit consumer,
    /// including any return-visit payment.
    pub profit: f64,
    /// Consumer's expected payoff including every search cost paid.
    pub welfare: f64,
    /// Regime whose formulas produced the numbers.
    pub regime: Regime,
}

fn require_base_regime(eq: &EquilibriumProfile) -> Result<Regime> {
    match eq.regime {
        Regime::Fofu | Regime::Pofu | Regime::Fopu => Ok(eq.regime),
        other => Err(CredenceError::RegimeMismatch { regime: other }),
    }
}

/// Expected profit of an opportunistic expert per first-visit consumer.
///
/// In the full-fraud regime every minor problem is overtreated at the
/// serious margin and every serious problem is undertreated and then fixed
/// on the return visit; the mixed regimes replace one side with the
/// indifference value.
pub fn expert_profit(p: &ModelParams, eq: &EquilibriumProfile) -> Result<f64> {
    let regime = require_base_regime(eq)?;
    let ms = p.margin_s();
    let mm = p.margin_m();
    Ok(match regime {
        Regime::Fofu => (1.0 - p.mu) * (ms + mm) + p.mu * ms,
        Regime::Pofu => (1.0 - p.mu) * (ms + mm) + p.mu * mm,
        Regime::Fopu => ms,
        _ => unreachable!(),
    })
}

/// Expected consumer payoff (a negative number: prices plus search costs),
/// including the first search cost `k`.
pub fn consumer_welfare(p: &ModelParams, eq: &EquilibriumProfile) -> Result<f64> {
    consumer_welfare_with(p, eq, true)
}

/// [`consumer_welfare`] with the first search cost optionally excluded
/// (the participation-constraint view of the same expression).
pub fn consumer_welfare_with(
    p: &ModelParams,
    eq: &EquilibriumProfile,
    include_first_search: bool,
) -> Result<f64> {
    let regime = require_base_regime(eq)?;
    let h = p.h;
    let mu = p.mu;
    // Cost of each terminal branch, first search included.
    let truthful_minor = p.p_m + p.k;
    let serious_treated = p.p_s + p.k;
    let undertreated_then_returned = p.p_m + p.p_s + p.k + p.k_return;

    // Truthfulness rates faced by the consumer on each problem type. In the
    // mixed regimes the consumer is exactly indifferent between accepting
    // and rejecting the mixed recommendation, so the rejection branch
    // carries the same value and the expressions below cover both.
    let (tbar_m, tbar_s) = match regime {
        Regime::Fofu => (h, h),
        Regime::Pofu => (h + (1.0 - h) * eq.expert.t_m1, h),
        Regime::Fopu => (h, h + (1.0 - h) * eq.expert.t_s1),
        _ => unreachable!(),
    };

    let cost = mu * tbar_m * truthful_minor
        + mu * (1.0 - tbar_m) * serious_treated
        + (1.0 - mu) * tbar_s * serious_treated
        + (1.0 - mu) * (1.0 - tbar_s) * undertreated_then_returned;
    let adjustment = if include_first_search { 0.0 } else { p.k };
    Ok(-cost + adjustment)
}

/// Profit and welfare together.
pub fn outcome_metrics(p: &ModelParams, eq: &EquilibriumProfile) -> Result<OutcomeMetrics> {
    Ok(OutcomeMetrics {
        profit: expert_profit(p, eq)?,
        welfare: consumer_welfare(p, eq)?,
        regime: eq.regime,
    })
}

/// Thresholds governing where profit and welfare switch monotonicity
/// direction.
///
/// `mu_3_star` splits the prior axis for the profit shape; `h_1_star` /
/// `h_2_star` bound the ethics levels below which welfare falls as honesty
/// rises; `h_3_star` plays the same role for the prior-axis welfare claim.
/// Values may sit outside (0,1), meaning the corresponding region is empty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StaticsThresholds {
    pub mu_3_star: f64,
    /// Root of a quadratic in `h`; `None` when its discriminant is negative.
    pub h_1_star: Option<f64>,
    pub h_2_star: f64,
    pub h_3_star: f64,
}

/// Evaluate all four monotonicity thresholds, tolerating an undefined
/// `h_1_star`.
pub fn statics_thresholds_partial(p: &ModelParams) -> Result<StaticsThresholds> {
    let gap = p.p_s - p.p_m;
    if !(p.k * gap > 0.0) {
        return Err(CredenceError::Precondition(
            "monotonicity thresholds need k > 0 and p_s > p_m".into(),
        ));
    }
    let mu_3_star = p.k / (gap + 2.0 * p.k - 2.0 * (p.k * gap).sqrt());

    let return_surplus = p.p_m + p.k_return - p.k;
    let s = p.mu * (gap + p.k) + (1.0 - p.mu) * return_surplus;
    let disc = s * s - 4.0 * p.mu * (1.0 - p.mu) * gap * return_surplus;
    let h_1_star = if disc < 0.0 {
        None
    } else {
        Some((s - disc.sqrt()) / (2.0 * p.mu * gap))
    };

    let h_2_star = (p.p_s + p.k_return) * p.k / (2.0 * gap * (p.p_m + p.k_return));
    let h_3_star = 2.0 * h_2_star;

    Ok(StaticsThresholds {
        mu_3_star,
        h_1_star,
        h_2_star,
        h_3_star,
    })
}

/// Evaluate all four monotonicity thresholds, failing when `h_1_star` is
/// undefined at the supplied prior.
pub fn statics_thresholds(p: &ModelParams) -> Result<StaticsThresholds> {
    let t = statics_thresholds_partial(p)?;
    if t.h_1_star.is_none() {
        return Err(CredenceError::UndefinedThreshold("h_1_star"));
    }
    Ok(t)
}

/// Which parameter axis a monotonicity scan walks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    H,
    Mu,
}

/// One grid cell of a monotonicity scan. Difference signs compare this cell
/// to the next one and are absent on the last cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityCell {
    /// The scanned coordinate (the cell center).
    pub coord: f64,
    pub regime: Regime,
    pub profit: f64,
    pub welfare: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_profit_sign: Option<Sign>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_welfare_sign: Option<Sign>,
    /// Whether the next cell sits in a different regime (the difference
    /// signs then straddle a jump discontinuity).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub regime_jump: Option<bool>,
}

/// Piecewise sign profile of profit and welfare along one axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub axis: Axis,
    pub cells: Vec<MonotonicityCell>,
}

/// Scan profit and welfare over `grid_n` cells spanning (0,1) on `axis`
/// (all other parameters held at `p`), reporting one-sided difference signs
/// and regime jumps.
pub fn monotonicity_report(p: &ModelParams, axis: Axis, grid_n: usize) -> Result<MonotonicityReport> {
    if grid_n < 3 {
        return Err(CredenceError::Precondition(
            "monotonicity scan needs at least 3 grid cells".into(),
        ));
    }
    let mut cells = Vec::with_capacity(grid_n);
    for i in 0..grid_n {
        let coord = (i as f64 + 0.5) / grid_n as f64;
        let mut q = *p;
        match axis {
            Axis::H => q.h = coord,
            Axis::Mu => q.mu = coord,
        }
        let eq = classify_equilibrium(&q)?;
        let m = outcome_metrics(&q, &eq)?;
        cells.push(MonotonicityCell {
            coord,
            regime: eq.regime,
            profit: m.profit,
            welfare: m.welfare,
            d_profit_sign: None,
            d_welfare_sign: None,
            regime_jump: None,
        });
    }
    for i in 0..grid_n - 1 {
        let (profit, welfare, regime) = (cells[i].profit, cells[i].welfare, cells[i].regime);
        let next = &cells[i + 1];
        let dp = Sign::of(next.profit - profit);
        let dw = Sign::of(next.welfare - welfare);
        let jump = next.regime != regime;
        let cell = &mut cells[i];
        cell.d_profit_sign = Some(dp);
        cell.d_welfare_sign = Some(dw);
        cell.regime_jump = Some(jump);
    }
    Ok(MonotonicityReport { axis, cells })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::ModelParams;

    fn eq(h: f64, mu: f64) -> (ModelParams, EquilibriumProfile) {
        let p = ModelParams::demo(h, mu);
        let eq = classify_equilibrium(&p).unwrap();
        (p, eq)
    }

    #[test]
    fn profit_per_regime() {
        let (p, e) = eq(0.5, 0.5);
        assert_eq!(e.regime, Regime::Fofu);
        assert!((expert_profit(&p, &e).unwrap() - 3.5).abs() < 1e-15);

        let (p, e) = eq(0.5, 0.2);
        assert_eq!(e.regime, Regime::Fopu);
        assert!((expert_profit(&p, &e).unwrap() - 3.0).abs() < 1e-15);
        // Inside the region the profit does not move with the prior.
        let (p2, e2) = eq(0.5, 0.25);
        assert_eq!(e2.regime, Regime::Fopu);
        assert_eq!(
            expert_profit(&p, &e).unwrap(),
            expert_profit(&p2, &e2).unwrap()
        );

        let (p, e) = eq(0.5, 0.8);
        assert_eq!(e.regime, Regime::Pofu);
        assert!((expert_profit(&p, &e).unwrap() - 1.6).abs() < 1e-15);
    }

    #[test]
    fn welfare_at_the_pinned_point() {
        let (p, e) = eq(0.4, 0.5);
        assert_eq!(e.regime, Regime::Fofu);
        assert!((consumer_welfare(&p, &e).unwrap() - (-6.0)).abs() < 1e-12);
        assert!(
            (consumer_welfare_with(&p, &e, false).unwrap() - (-5.0)).abs() < 1e-12,
            "excluding the first search cost adds k back"
        );
    }

    #[test]
    fn welfare_jump_at_the_lower_boundary() {
        // Approaching the lower regime boundary from below, welfare exceeds
        // the full-fraud expression at the same prior by
        // (1-mu)(tbar_s - h)(p_m + k_return).
        let p0 = ModelParams::demo(0.5, 0.5);
        let mu_1 = crate::equilibrium::regime_thresholds(&p0).unwrap().mu_1_star;
        let p = ModelParams::demo(0.5, mu_1 * 0.999);
        let e = classify_equilibrium(&p).unwrap();
        assert_eq!(e.regime, Regime::Fopu);
        let cw_fopu = consumer_welfare(&p, &e).unwrap();

        let mut fofu = e;
        fofu.regime = Regime::Fofu;
        fofu.expert.t_m1 = 0.0;
        fofu.expert.t_s1 = 0.0;
        let cw_fofu = consumer_welfare(&p, &fofu).unwrap();

        let tbar_s = p.h + (1.0 - p.h) * e.expert.t_s1;
        let gap = (1.0 - p.mu) * (tbar_s - p.h) * (p.p_m + p.k_return);
        assert!(gap > 0.0);
        assert!((cw_fopu - cw_fofu - gap).abs() < 1e-12);
    }

    #[test]
    fn honest_limit_welfare() {
        let p = ModelParams::demo(1.0 - 1e-9, 0.5);
        let e = classify_equilibrium(&p).unwrap();
        assert_eq!(e.regime, Regime::Fofu);
        let cw = consumer_welfare(&p, &e).unwrap();
        let honest = -(p.mu * (p.p_m + p.k) + (1.0 - p.mu) * (p.p_s + p.k));
        assert!((cw - honest).abs() < 1e-6);
    }

    #[test]
    fn marker_regimes_are_rejected() {
        let p = ModelParams::demo(0.5, 0.5);
        let e = EquilibriumProfile::marker(Regime::NoPureEquilibrium);
        assert!(matches!(
            expert_profit(&p, &e).unwrap_err(),
            CredenceError::RegimeMismatch { .. }
        ));
    }

    #[test]
    fn monotonicity_threshold_values() {
        let t = statics_thresholds(&ModelParams::demo(0.5, 0.2)).unwrap();
        assert!((t.mu_3_star - 0.651_084_739_625_981).abs() < 1e-12);
        assert!((t.h_2_star - 5.0 / 12.0).abs() < 1e-15);
        assert!((t.h_3_star - 5.0 / 6.0).abs() < 1e-15);
        assert!((t.h_1_star.unwrap() - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn profit_flip_threshold_degenerates_when_costs_match_the_price_gap() {
        let mut p = ModelParams::demo(0.5, 0.5);
        p.k = 3.0; // equals p_s - p_m
        let t = statics_thresholds_partial(&p).unwrap();
        assert!((t.mu_3_star - 1.0).abs() < 1e-15);
    }

    #[test]
    fn profit_shape_along_the_prior_axis() {
        // At low honesty the profit is flat in the mixed region, jumps up at
        // the regime boundary, and falls thereafter: weakly up, then down.
        let p = ModelParams::demo(0.3, 0.5);
        let r = monotonicity_report(&p, Axis::Mu, 101).unwrap();
        assert_eq!(r.cells.len(), 101);
        let signs: Vec<Sign> = r
            .cells
            .iter()
            .filter_map(|c| c.d_profit_sign)
            .collect();
        assert_eq!(signs.len(), 100);
        let first_fall = signs
            .iter()
            .position(|s| *s == Sign::Negative)
            .expect("profit must eventually fall");
        assert!(
            signs[..first_fall].iter().all(|s| *s != Sign::Negative),
            "no decrease before the peak"
        );
        assert!(
            signs[first_fall..].iter().all(|s| *s != Sign::Positive),
            "no increase after the peak"
        );
        assert!(
            r.cells.iter().any(|c| c.regime_jump == Some(true)),
            "the scan crosses a regime boundary"
        );
        assert!(r.cells.last().unwrap().d_profit_sign.is_none());
    }

    #[test]
    fn welfare_falls_with_honesty_at_low_priors() {
        // With minor problems rare (mu = 0.2, below the profit-flip
        // threshold), welfare decreases in h below
        // min(h_1_star, h_2_star) = 5/12.
        let p = ModelParams::demo(0.5, 0.2);
        let t = statics_thresholds(&p).unwrap();
        let cap = t.h_2_star.min(t.h_1_star.unwrap());
        let r = monotonicity_report(&p, Axis::H, 101).unwrap();
        for c in &r.cells {
            if c.coord < cap - 0.02 {
                assert_eq!(
                    c.d_welfare_sign,
                    Some(Sign::Negative),
                    "welfare should fall at h={}",
                    c.coord
                );
            }
        }
    }

    #[test]
    fn smallest_valid_scan() {
        let p = ModelParams::demo(0.4, 0.5);
        let r = monotonicity_report(&p, Axis::Mu, 3).unwrap();
        assert_eq!(r.cells.len(), 3);
        assert_eq!(
            r.cells.iter().filter(|c| c.d_profit_sign.is_some()).count(),
            2
        );
        assert!(monotonicity_report(&p, Axis::Mu, 2).is_err());
    }
}
