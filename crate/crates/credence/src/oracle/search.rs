//! Numeric equilibrium search, independent of every closed form.
//!
//! First-visit strategies are found by support enumeration: each of the four
//! first-visit behavior probabilities is pure-0, pure-1, or mixed. A mixed
//! acceptance probability requires the consumer to be exactly indifferent at
//! that recommendation set — an equation in the expert mixing probabilities
//! (acceptance probabilities never move consumer action values). A mixed
//! recommendation probability requires the expert to be indifferent at that
//! problem type — an equation that is affine in the acceptance
//! probabilities. The two square subsystems are solved by bracketed
//! bisection and affine interpolation respectively, every assembled
//! candidate is certified by the one-shot-deviation check, and certified
//! profiles are deduplicated.

use crate::equilibrium::EquilibriumProfile;
use crate::error::{CredenceError, Result};
use crate::model::ModelKind;
use crate::params::ModelParams;
use crate::solver::{bisect, BisectOptions};
use crate::strategy::{ConsumerStrategy, ExpertStrategy, Regime};
use crate::{clamp_unit, TOL};

use super::tree::{evaluate_tree, SET_C1_MINOR, SET_C1_SERIOUS, SET_E1_MINOR, SET_E1_SERIOUS};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Support {
    Zero,
    One,
    Mixed,
}

impl Support {
    fn pure_value(self) -> f64 {
        match self {
            Support::Zero => 0.0,
            Support::One => 1.0,
            Support::Mixed => f64::NAN,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Pattern {
    t_m1: Support,
    t_s1: Support,
    a_m1: Support,
    a_s1: Support,
}

impl Pattern {
    fn mixed_t(&self) -> usize {
        [self.t_m1, self.t_s1]
            .iter()
            .filter(|s| **s == Support::Mixed)
            .count()
    }

    fn mixed_a(&self) -> usize {
        [self.a_m1, self.a_s1]
            .iter()
            .filter(|s| **s == Support::Mixed)
            .count()
    }
}

/// Fixed continuation behavior: second visits are truthful about serious
/// problems, fraudulent about minor ones, and accepted.
fn continuation_expert(t_m1: f64, t_s1: f64) -> ExpertStrategy {
    ExpertStrategy {
        t_m1,
        t_s1,
        t_m2: 0.0,
        t_s2: 1.0,
    }
}

fn continuation_consumer(a_m1: f64, a_s1: f64) -> ConsumerStrategy {
    ConsumerStrategy {
        a_m1,
        a_s1,
        a_m2: 1.0,
        a_s2: 1.0,
    }
}

/// Map a solved profile to its regime tag by the shape of its support.
fn regime_of(e: &ExpertStrategy, c: &ConsumerStrategy) -> Regime {
    let pure0 = |x: f64| x == 0.0;
    let pure1 = |x: f64| x == 1.0;
    if pure0(e.t_m1) && pure0(e.t_s1) && pure0(c.a_s1) {
        return Regime::FofuRejectSerious;
    }
    match (pure0(e.t_s1), pure1(e.t_s1)) {
        (true, _) => {
            if pure0(e.t_m1) {
                Regime::Fofu
            } else if pure1(e.t_m1) {
                Regime::OutsideCharacterizedRegion
            } else {
                Regime::Pofu
            }
        }
        (_, true) => {
            if pure0(e.t_m1) {
                Regime::Fonu
            } else if pure1(e.t_m1) {
                Regime::OutsideCharacterizedRegion
            } else {
                Regime::Ponu
            }
        }
        _ => {
            if pure0(e.t_m1) {
                Regime::Fopu
            } else {
                Regime::OutsideCharacterizedRegion
            }
        }
    }
}

/// Consumer indifference residual (accept minus reject) at one
/// recommendation set, as a function of the expert mixing probabilities.
fn consumer_residual(
    kind: ModelKind,
    p: &ModelParams,
    t_m1: f64,
    t_s1: f64,
    setting: &'static str,
) -> Result<f64> {
    // Acceptance probabilities do not move first-visit consumer values;
    // anything interior works here.
    let out = evaluate_tree(
        kind,
        p,
        &continuation_expert(t_m1, t_s1),
        &continuation_consumer(0.5, 0.5),
    )?;
    let rec = out.record(setting).ok_or(CredenceError::Precondition(format!(
        "model has no information set named \"{setting}\""
    )))?;
    Ok(rec.actions[0].value - rec.actions[1].value)
}

/// All bracketed roots of `f` on [lo, hi], located by a sign scan over
/// `grid_n` points and refined by bisection.
fn scan_roots(mut f: impl FnMut(f64) -> Result<f64>, grid_n: usize) -> Result<Vec<f64>> {
    let lo = TOL;
    let hi = 1.0 - TOL;
    let opt = BisectOptions::default();
    let mut roots = Vec::new();
    let mut prev_x = lo;
    let mut prev_v = f(lo)?;
    for i in 1..grid_n {
        let x = lo + (hi - lo) * i as f64 / (grid_n - 1) as f64;
        let v = f(x)?;
        if prev_v == 0.0 {
            roots.push(prev_x);
        } else if prev_v * v < 0.0 {
            let mut err = None;
            if let Ok(root) = bisect(
                |t| match f(t) {
                    Ok(v) => v,
                    Err(e) => {
                        err = Some(e);
                        f64::NAN
                    }
                },
                prev_x,
                x,
                &opt,
            ) {
                roots.push(root);
            }
            if let Some(e) = err {
                return Err(e);
            }
        }
        prev_x = x;
        prev_v = v;
    }
    if prev_v == 0.0 {
        roots.push(prev_x);
    }
    Ok(roots)
}

/// Solve the consumer-indifference subsystem: all (t_m1, t_s1) vectors
/// consistent with the pattern's mixed acceptance sets.
fn solve_expert_mixing(
    kind: ModelKind,
    p: &ModelParams,
    pattern: Pattern,
    grid_n: usize,
) -> Result<Vec<(f64, f64)>> {
    let m_mixed = pattern.a_m1 == Support::Mixed;
    let s_mixed = pattern.a_s1 == Support::Mixed;
    match (m_mixed, s_mixed) {
        (false, false) => Ok(vec![(pattern.t_m1.pure_value(), pattern.t_s1.pure_value())]),
        (one_eq_is_minor, _) if pattern.mixed_a() == 1 => {
            let setting = if one_eq_is_minor {
                SET_C1_MINOR
            } else {
                SET_C1_SERIOUS
            };
            // Which expert probability is free follows from the pattern.
            let t_m1_free = pattern.t_m1 == Support::Mixed;
            let fixed = if t_m1_free {
                pattern.t_s1.pure_value()
            } else {
                pattern.t_m1.pure_value()
            };
            let roots = scan_roots(
                |x| {
                    let (tm, ts) = if t_m1_free { (x, fixed) } else { (fixed, x) };
                    consumer_residual(kind, p, tm, ts, setting)
                },
                grid_n,
            )?;
            Ok(roots
                .into_iter()
                .map(|x| if t_m1_free { (x, fixed) } else { (fixed, x) })
                .collect())
        }
        _ => solve_two_consumer_equations(kind, p, grid_n),
    }
}

/// Both acceptance probabilities mixed: two indifference equations in both
/// expert probabilities. The serious-recommendation equation is solved for
/// t_s1 at fixed t_m1 (tracking every inner root), and the minor equation's
/// sign changes along those root branches are refined by bisection.
fn solve_two_consumer_equations(
    kind: ModelKind,
    p: &ModelParams,
    grid_n: usize,
) -> Result<Vec<(f64, f64)>> {
    let inner = |tm: f64| -> Result<Vec<f64>> {
        scan_roots(
            |ts| consumer_residual(kind, p, tm, ts, SET_C1_SERIOUS),
            grid_n,
        )
    };
    let outer = |tm: f64, ts: f64| consumer_residual(kind, p, tm, ts, SET_C1_MINOR);

    let lo = TOL;
    let hi = 1.0 - TOL;
    let mut solutions: Vec<(f64, f64)> = Vec::new();
    let mut prev: Option<(f64, Vec<(f64, f64)>)> = None; // (tm, [(ts, outer residual)])
    for i in 0..grid_n {
        let tm = lo + (hi - lo) * i as f64 / (grid_n - 1) as f64;
        let mut branch = Vec::new();
        for ts in inner(tm)? {
            branch.push((ts, outer(tm, ts)?));
        }
        if let Some((prev_tm, prev_branch)) = &prev {
            if prev_branch.len() == branch.len() {
                for (idx, ((_ts0, r0), (_ts1, r1))) in
                    prev_branch.iter().zip(branch.iter()).enumerate()
                {
                    if r0 * r1 < 0.0 || *r0 == 0.0 {
                        // Refine tm by bisection; at each probe, follow the
                        // branch with the matching root index.
                        let mut err = None;
                        let residual = |tm_probe: f64| match inner(tm_probe) {
                            Ok(roots) if roots.len() > idx => match outer(tm_probe, roots[idx]) {
                                Ok(v) => v,
                                Err(e) => {
                                    err = Some(e);
                                    f64::NAN
                                }
                            },
                            Ok(_) => f64::NAN,
                            Err(e) => {
                                err = Some(e);
                                f64::NAN
                            }
                        };
                        if let Ok(tm_root) =
                            bisect(residual, *prev_tm, tm, &BisectOptions::default())
                        {
                            if let Some(e) = err {
                                return Err(e);
                            }
                            let inner_roots = inner(tm_root)?;
                            if let Some(ts_root) = inner_roots.get(idx) {
                                solutions.push((tm_root, *ts_root));
                            }
                        } else if let Some(e) = err {
                            return Err(e);
                        }
                    }
                }
            }
        }
        prev = Some((tm, branch));
    }
    Ok(solutions)
}

/// Expert indifference residual (truthful minus fraudulent) at one problem
/// type, as a function of the acceptance probabilities.
fn expert_residual(
    kind: ModelKind,
    p: &ModelParams,
    t: (f64, f64),
    a: (f64, f64),
    setting: &'static str,
) -> Result<f64> {
    let out = evaluate_tree(
        kind,
        p,
        &continuation_expert(t.0, t.1),
        &continuation_consumer(a.0, a.1),
    )?;
    let rec = out.record(setting).ok_or(CredenceError::Precondition(format!(
        "model has no information set named \"{setting}\""
    )))?;
    Ok(rec.actions[0].value - rec.actions[1].value)
}

/// Solve the expert-indifference subsystem for the mixed acceptance
/// probabilities, which enter every expert value affinely.
fn solve_consumer_mixing(
    kind: ModelKind,
    p: &ModelParams,
    pattern: Pattern,
    t: (f64, f64),
) -> Result<Option<(f64, f64)>> {
    let m_mixed = pattern.a_m1 == Support::Mixed;
    let s_mixed = pattern.a_s1 == Support::Mixed;
    let equations: Vec<&'static str> = [
        (pattern.t_m1 == Support::Mixed, SET_E1_MINOR),
        (pattern.t_s1 == Support::Mixed, SET_E1_SERIOUS),
    ]
    .into_iter()
    .filter_map(|(mixed, set)| mixed.then_some(set))
    .collect();

    match (m_mixed, s_mixed) {
        (false, false) => Ok(Some((
            pattern.a_m1.pure_value(),
            pattern.a_s1.pure_value(),
        ))),
        (true, false) | (false, true) => {
            let fixed = if m_mixed {
                pattern.a_s1.pure_value()
            } else {
                pattern.a_m1.pure_value()
            };
            let assemble = |x: f64| if m_mixed { (x, fixed) } else { (fixed, x) };
            let d0 = expert_residual(kind, p, t, assemble(0.0), equations[0])?;
            let d1 = expert_residual(kind, p, t, assemble(1.0), equations[0])?;
            if (d1 - d0).abs() < 1e-14 {
                return Ok(None);
            }
            let x = d0 / (d0 - d1);
            if !(-TOL..=1.0 + TOL).contains(&x) {
                return Ok(None);
            }
            Ok(Some(assemble(clamp_unit(x))))
        }
        (true, true) => {
            // Two affine equations in (a_m1, a_s1): coefficients from three
            // corner evaluations.
            let mut rows = [[0.0; 3]; 2];
            for (r, setting) in equations.iter().enumerate() {
                let d00 = expert_residual(kind, p, t, (0.0, 0.0), setting)?;
                let d10 = expert_residual(kind, p, t, (1.0, 0.0), setting)?;
                let d01 = expert_residual(kind, p, t, (0.0, 1.0), setting)?;
                rows[r] = [d10 - d00, d01 - d00, -d00];
            }
            let det = rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0];
            if det.abs() < 1e-14 {
                return Ok(None);
            }
            let x = (rows[0][2] * rows[1][1] - rows[0][1] * rows[1][2]) / det;
            let y = (rows[0][0] * rows[1][2] - rows[0][2] * rows[1][0]) / det;
            if !(-TOL..=1.0 + TOL).contains(&x) || !(-TOL..=1.0 + TOL).contains(&y) {
                return Ok(None);
            }
            Ok(Some((clamp_unit(x), clamp_unit(y))))
        }
    }
}

/// Search the model for equilibria by support enumeration; every returned
/// profile passed one-shot-deviation certification at `tol`.
pub fn find_equilibria_grid(
    kind: ModelKind,
    p: &ModelParams,
    grid_n: usize,
    tol: f64,
) -> Result<Vec<EquilibriumProfile>> {
    if grid_n < 11 {
        return Err(CredenceError::Precondition(
            "support-enumeration search needs a scan grid of at least 11 points".into(),
        ));
    }
    let supports = [Support::Zero, Support::One, Support::Mixed];
    let mut patterns = Vec::new();
    for &t_m1 in &supports {
        for &t_s1 in &supports {
            for &a_m1 in &supports {
                for &a_s1 in &supports {
                    let pt = Pattern {
                        t_m1,
                        t_s1,
                        a_m1,
                        a_s1,
                    };
                    // Only square subsystems admit generic solutions: each
                    // mixed probability on one side contributes exactly one
                    // indifference equation constraining the other side.
                    if pt.mixed_t() == pt.mixed_a() {
                        patterns.push(pt);
                    }
                }
            }
        }
    }
    patterns.sort_by_key(|pt| pt.mixed_t());

    let mut found: Vec<EquilibriumProfile> = Vec::new();
    for pattern in patterns {
        let t_solutions = solve_expert_mixing(kind, p, pattern, grid_n)?;
        for t in t_solutions {
            // A "mixed" slot that landed on a boundary duplicates a pure
            // pattern; skip it here.
            let interior = |s: Support, v: f64| s != Support::Mixed || (v > 0.0 && v < 1.0);
            let (tm, ts) = (clamp_unit(t.0), clamp_unit(t.1));
            if !interior(pattern.t_m1, tm) || !interior(pattern.t_s1, ts) {
                continue;
            }
            let Some((am, as_)) = solve_consumer_mixing(kind, p, pattern, (tm, ts))? else {
                continue;
            };
            if !interior(pattern.a_m1, am) || !interior(pattern.a_s1, as_) {
                continue;
            }
            let expert = continuation_expert(tm, ts);
            let consumer = continuation_consumer(am, as_);
            let report = super::verify::verify_equilibrium(kind, p, &expert, &consumer, tol)?;
            if !report.is_equilibrium {
                continue;
            }
            let duplicate = found.iter().any(|f| {
                let d = (f.expert.t_m1 - expert.t_m1)
                    .abs()
                    .max((f.expert.t_s1 - expert.t_s1).abs())
                    .max((f.consumer.a_m1 - consumer.a_m1).abs())
                    .max((f.consumer.a_s1 - consumer.a_s1).abs());
                d <= tol.max(1e-9)
            });
            if duplicate {
                continue;
            }
            found.push(EquilibriumProfile {
                regime: regime_of(&expert, &consumer),
                expert,
                consumer,
                thresholds: None,
                boundary_flag: false,
                requires_oracle: true,
            });
        }
    }
    if found.is_empty() {
        return Err(CredenceError::NoEquilibriumFound);
    }
    Ok(found)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::classify_equilibrium;

    fn demo_search(h: f64, mu: f64) -> Vec<EquilibriumProfile> {
        let p = ModelParams::demo(h, mu);
        find_equilibria_grid(ModelKind::Base, &p, 11, TOL).unwrap()
    }

    #[test]
    fn rediscovers_full_fraud_at_the_demo_point() {
        let found = demo_search(0.5, 0.5);
        assert_eq!(found.len(), 1, "{found:?}");
        let eq = &found[0];
        assert_eq!(eq.regime, Regime::Fofu);
        assert_eq!(
            (eq.expert.t_m1, eq.expert.t_s1, eq.consumer.a_m1, eq.consumer.a_s1),
            (0.0, 0.0, 1.0, 1.0)
        );
    }

    #[test]
    fn rediscovers_the_minor_side_mixing() {
        let found = demo_search(0.5, 0.8);
        assert_eq!(found.len(), 1, "{found:?}");
        let eq = &found[0];
        assert_eq!(eq.regime, Regime::Pofu);
        assert!((eq.expert.t_m1 - 0.5).abs() < 1e-6);
        assert!((eq.consumer.a_s1 - 1.0 / 3.0).abs() < 1e-6);
        let closed = classify_equilibrium(&ModelParams::demo(0.5, 0.8)).unwrap();
        assert!((eq.expert.t_m1 - closed.expert.t_m1).abs() < 1e-6);
    }

    #[test]
    fn rediscovers_the_serious_side_mixing() {
        let found = demo_search(0.5, 0.2);
        assert_eq!(found.len(), 1, "{found:?}");
        let eq = &found[0];
        assert_eq!(eq.regime, Regime::Fopu);
        assert!((eq.expert.t_s1 - 0.375).abs() < 1e-6);
        assert!((eq.consumer.a_m1 - 0.75).abs() < 1e-6);
    }

    #[test]
    fn small_grids_are_rejected() {
        let p = ModelParams::demo(0.5, 0.5);
        assert!(matches!(
            find_equilibria_grid(ModelKind::Base, &p, 2, TOL).unwrap_err(),
            CredenceError::Precondition(_)
        ));
    }
}
