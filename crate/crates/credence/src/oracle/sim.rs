//! Monte-Carlo market simulator.
//!
//! Consumers are drawn independently by descending the model's decision tree,
//! sampling chance moves and mixed actions from a counter-based generator
//! keyed by `(seed, consumer index)`. Results are therefore reproducible for
//! a given seed and independent of thread count: consumers are aggregated in
//! fixed-size chunks whose partial sums are combined in chunk order.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{CredenceError, Result};
use crate::model::ModelKind;
use crate::params::ModelParams;
use crate::strategy::{ConsumerStrategy, ExpertStrategy};

use super::rng::StreamRng;
use super::tree::{
    build_root, Node, EV_OPPORTUNISTIC, EV_OVERTREAT, EV_RETURN, EV_SEARCH, EV_UNDERTREAT,
};

/// Consumers per aggregation chunk; fixed so that the floating-point
/// reduction order never depends on the thread count.
const CHUNK: u64 = 65_536;

/// Sample statistics from a simulated market.
#[derive(Debug, Clone, Serialize)]
pub struct SimulationResult {
    pub n_consumers: u64,
    pub seed: u64,
    /// Mean profit of an opportunistic initial expert per consumer served.
    pub profit_mean: f64,
    /// Standard error of `profit_mean`; absent when fewer than two
    /// consumers met an opportunistic initial expert.
    pub profit_se: Option<f64>,
    /// Mean consumer payoff, all treatment costs and losses counted.
    pub welfare_mean: f64,
    /// Standard error of `welfare_mean`; absent when `n_consumers` is 1.
    pub welfare_se: Option<f64>,
    /// Fraction of consumers who accepted the serious treatment for a minor
    /// problem.
    pub overtreatment_rate: f64,
    /// Fraction of consumers who accepted the minor treatment for a serious
    /// problem.
    pub undertreatment_rate: f64,
    /// Fraction of consumers who went back to their initial expert after a
    /// failed treatment.
    pub return_rate: f64,
    /// Fraction of consumers who consulted a second expert.
    pub search_rate: f64,
}

#[derive(Debug, Clone, Copy, Default)]
struct ChunkStats {
    n: u64,
    welfare_sum: f64,
    welfare_sumsq: f64,
    n_opportunistic: u64,
    profit_sum: f64,
    profit_sumsq: f64,
    n_overtreated: u64,
    n_undertreated: u64,
    n_returned: u64,
    n_searched: u64,
}

impl ChunkStats {
    fn absorb(&mut self, other: &ChunkStats) {
        self.n += other.n;
        self.welfare_sum += other.welfare_sum;
        self.welfare_sumsq += other.welfare_sumsq;
        self.n_opportunistic += other.n_opportunistic;
        self.profit_sum += other.profit_sum;
        self.profit_sumsq += other.profit_sumsq;
        self.n_overtreated += other.n_overtreated;
        self.n_undertreated += other.n_undertreated;
        self.n_returned += other.n_returned;
        self.n_searched += other.n_searched;
    }
}

/// One consumer's outcome: payoff, initial-expert profit, event tags.
fn sample_consumer(root: &Node, rng: &mut StreamRng) -> (f64, f64, u8) {
    let mut node = root;
    let mut cost = 0.0;
    let mut e1 = 0.0;
    let mut events: u8 = 0;
    loop {
        match node {
            Node::End => return (-cost, e1, events),
            Node::Chance(branches) => {
                let u = rng.next_u01();
                let mut acc = 0.0;
                let mut chosen = branches.last().expect("chance node has branches");
                for b in branches {
                    acc += b.prob;
                    if u < acc {
                        chosen = b;
                        break;
                    }
                }
                cost += chosen.inc.cost;
                e1 += chosen.inc.e1;
                events |= chosen.inc.events;
                node = &chosen.next;
            }
            Node::Decide(d) => {
                let u = rng.next_u01();
                let mut acc = 0.0;
                let mut chosen = d.actions.last().expect("decision node has actions");
                for a in &d.actions {
                    acc += a.prob;
                    if u < acc {
                        chosen = a;
                        break;
                    }
                }
                cost += chosen.inc.cost;
                e1 += chosen.inc.e1;
                events |= chosen.inc.events;
                node = &chosen.next;
            }
        }
    }
}

fn simulate_chunk(root: &Node, seed: u64, start: u64, end: u64) -> ChunkStats {
    let mut s = ChunkStats::default();
    for i in start..end {
        let mut rng = StreamRng::new(seed, i);
        let (welfare, e1, events) = sample_consumer(root, &mut rng);
        s.n += 1;
        s.welfare_sum += welfare;
        s.welfare_sumsq += welfare * welfare;
        if events & EV_OPPORTUNISTIC != 0 {
            s.n_opportunistic += 1;
            s.profit_sum += e1;
            s.profit_sumsq += e1 * e1;
        }
        if events & EV_OVERTREAT != 0 {
            s.n_overtreated += 1;
        }
        if events & EV_UNDERTREAT != 0 {
            s.n_undertreated += 1;
        }
        if events & EV_RETURN != 0 {
            s.n_returned += 1;
        }
        if events & EV_SEARCH != 0 {
            s.n_searched += 1;
        }
    }
    s
}

fn mean_and_se(sum: f64, sumsq: f64, n: u64) -> (f64, Option<f64>) {
    if n == 0 {
        return (f64::NAN, None);
    }
    let nf = n as f64;
    let mean = sum / nf;
    if n < 2 {
        return (mean, None);
    }
    let var = ((sumsq - nf * mean * mean) / (nf - 1.0)).max(0.0);
    (mean, Some((var / nf).sqrt()))
}

/// Simulate `n_consumers` independent consumers and return sample statistics.
///
/// Deterministic in `(seed, n_consumers)` and independent of thread count.
pub fn simulate_market(
    kind: ModelKind,
    p: &ModelParams,
    e: &ExpertStrategy,
    c: &ConsumerStrategy,
    n_consumers: u64,
    seed: u64,
) -> Result<SimulationResult> {
    if n_consumers == 0 {
        return Err(CredenceError::Precondition(
            "simulation needs at least one consumer".into(),
        ));
    }
    let root = build_root(kind, p, e, c)?;
    let n_chunks = n_consumers.div_ceil(CHUNK);
    let stats: Vec<ChunkStats> = (0..n_chunks)
        .into_par_iter()
        .map(|ci| {
            let start = ci * CHUNK;
            let end = (start + CHUNK).min(n_consumers);
            simulate_chunk(&root, seed, start, end)
        })
        .collect();
    let mut total = ChunkStats::default();
    for s in &stats {
        total.absorb(s);
    }

    let (welfare_mean, welfare_se) = mean_and_se(total.welfare_sum, total.welfare_sumsq, total.n);
    let (profit_mean, profit_se) = mean_and_se(
        total.profit_sum,
        total.profit_sumsq,
        total.n_opportunistic,
    );
    let nf = total.n as f64;
    Ok(SimulationResult {
        n_consumers: total.n,
        seed,
        profit_mean,
        profit_se,
        welfare_mean,
        welfare_se,
        overtreatment_rate: total.n_overtreated as f64 / nf,
        undertreatment_rate: total.n_undertreated as f64 / nf,
        return_rate: total.n_returned as f64 / nf,
        search_rate: total.n_searched as f64 / nf,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::classify_equilibrium;

    #[test]
    fn estimates_match_expectations_at_the_pinned_point() {
        let p = ModelParams::demo(0.4, 0.5);
        let eq = classify_equilibrium(&p).unwrap();
        let r = simulate_market(
            ModelKind::Base,
            &p,
            &eq.expert,
            &eq.consumer,
            200_000,
            7,
        )
        .unwrap();
        let profit_se = r.profit_se.unwrap();
        let welfare_se = r.welfare_se.unwrap();
        assert!(
            (r.profit_mean - 3.5).abs() <= 4.0 * profit_se,
            "profit {} ± {}",
            r.profit_mean,
            profit_se
        );
        assert!(
            (r.welfare_mean - (-6.0)).abs() <= 4.0 * welfare_se,
            "welfare {} ± {}",
            r.welfare_mean,
            welfare_se
        );
        // Under full fraud every minor problem met by an opportunistic
        // expert is overtreated and accepted; serious problems are
        // undertreated, then repaired on a return visit.
        assert!((r.overtreatment_rate - p.mu * (1.0 - p.h)).abs() < 0.01);
        assert!((r.undertreatment_rate - (1.0 - p.mu) * (1.0 - p.h)).abs() < 0.01);
        assert!((r.return_rate - r.undertreatment_rate).abs() < 1e-12);
        assert_eq!(r.search_rate, 0.0);
    }

    #[test]
    fn identical_seeds_reproduce_bit_for_bit() {
        let p = ModelParams::demo(0.5, 0.8);
        let eq = classify_equilibrium(&p).unwrap();
        let a = simulate_market(ModelKind::Base, &p, &eq.expert, &eq.consumer, 70_000, 3).unwrap();
        let b = simulate_market(ModelKind::Base, &p, &eq.expert, &eq.consumer, 70_000, 3).unwrap();
        assert_eq!(a.profit_mean.to_bits(), b.profit_mean.to_bits());
        assert_eq!(a.welfare_mean.to_bits(), b.welfare_mean.to_bits());
        assert_eq!(a.search_rate, b.search_rate);
        let c_run =
            simulate_market(ModelKind::Base, &p, &eq.expert, &eq.consumer, 70_000, 4).unwrap();
        assert_ne!(a.welfare_mean.to_bits(), c_run.welfare_mean.to_bits());
    }

    #[test]
    fn single_consumer_has_no_standard_error() {
        let p = ModelParams::demo(0.5, 0.5);
        let eq = classify_equilibrium(&p).unwrap();
        let r = simulate_market(ModelKind::Base, &p, &eq.expert, &eq.consumer, 1, 11).unwrap();
        assert!(r.welfare_se.is_none());
        assert_eq!(r.n_consumers, 1);
    }

    #[test]
    fn zero_consumers_is_an_error() {
        let p = ModelParams::demo(0.5, 0.5);
        let eq = classify_equilibrium(&p).unwrap();
        assert!(matches!(
            simulate_market(ModelKind::Base, &p, &eq.expert, &eq.consumer, 0, 1).unwrap_err(),
            CredenceError::Precondition(_)
        ));
    }
}
