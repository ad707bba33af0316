//! Decision tree for the resentment market: returning to the expert whose
//! minor treatment failed costs more than a fresh search (`k_return > k`),
//! so undertreated consumers take their follow-up business elsewhere. The
//! payoff structure is otherwise the base market's (or the hidden-history
//! market's, when visit histories are also unobservable); the base routing
//! node already sends the consumer to whichever follow-up is cheaper, so
//! the same builders apply under the inverted cost ordering.

use super::{base, hidden_history};
use crate::error::Result;
use crate::oracle::tree::Node;
use crate::params::ModelParams;
use crate::strategy::{ConsumerStrategy, ExpertStrategy};

pub(crate) fn build(
    p: &ModelParams,
    hidden: bool,
    e: &ExpertStrategy,
    c: &ConsumerStrategy,
) -> Result<Node> {
    if hidden {
        hidden_history::build(p, e, c)
    } else {
        base::build(p, e, c)
    }
}

#[cfg(test)]
mod tests {
    use crate::model::ModelKind;
    use crate::oracle::tree::evaluate_tree;
    use crate::params::ModelParams;
    use crate::strategy::{ConsumerStrategy, ExpertStrategy};

    fn resentful() -> ModelParams {
        ModelParams {
            k_return: 1.5,
            ..ModelParams::demo(0.5, 0.5)
        }
    }

    #[test]
    fn cheap_return_parameters_are_refused() {
        let p = ModelParams::demo(0.5, 0.5);
        let e = ExpertStrategy {
            t_m1: 0.0,
            t_s1: 1.0,
            t_m2: 0.0,
            t_s2: 1.0,
        };
        let c = ConsumerStrategy {
            a_m1: 1.0,
            a_s1: 1.0,
            a_m2: 1.0,
            a_s2: 1.0,
        };
        let kind = ModelKind::Resentment {
            hidden_history: false,
        };
        assert!(evaluate_tree(kind, &p, &e, &c).is_err());
    }

    #[test]
    fn undertreated_consumers_search_rather_than_return() {
        // Full undertreatment with everything accepted: the follow-up visit
        // goes to a new expert at cost k, so the initial expert earns only
        // the minor margin on serious problems and the consumer pays
        // p_m + k + p_s there.
        let p = resentful();
        let e = ExpertStrategy {
            t_m1: 0.0,
            t_s1: 0.0,
            t_m2: 0.0,
            t_s2: 1.0,
        };
        let c = ConsumerStrategy {
            a_m1: 1.0,
            a_s1: 1.0,
            a_m2: 1.0,
            a_s2: 1.0,
        };
        let kind = ModelKind::Resentment {
            hidden_history: false,
        };
        let out = evaluate_tree(kind, &p, &e, &c).unwrap();
        let profit = p.mu * p.margin_s() + (1.0 - p.mu) * p.margin_m();
        assert!((out.profit - profit).abs() < 1e-12, "profit {}", out.profit);
        let minor_cost = p.h * p.p_m + (1.0 - p.h) * p.p_s;
        let serious_cost = p.h * p.p_s + (1.0 - p.h) * (p.p_m + p.k + p.p_s);
        let cw = -(p.k + p.mu * minor_cost + (1.0 - p.mu) * serious_cost);
        assert!((out.welfare - cw).abs() < 1e-12, "welfare {}", out.welfare);
    }
}
