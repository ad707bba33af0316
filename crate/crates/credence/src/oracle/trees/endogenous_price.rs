//! Decision tree for the market with endogenously chosen prices: every
//! expert is opportunistic, and treatment prices sit at the
//! profit-maximizing point `p_m* = l_m`, `p_s* = l_m − c_m + c_s`, which
//! equalizes the two treatment margins. Because the minor price absorbs
//! the consumer's entire minor-problem surplus, walking away from a
//! recommendation (quitting the market) is a live option and is audited
//! at every first-visit choice.

use super::base;
use crate::error::Result;
use crate::oracle::tree::*;
use crate::params::ModelParams;
use crate::strategy::{ConsumerStrategy, ExpertStrategy};

/// The posted-price parameter set: input params with both prices replaced
/// by their profit-maximizing values. Deliberately not re-validated — the
/// stars sit on the consumer's participation boundary (`p_m* = l_m`), which
/// the exogenous-price validation would reject.
pub(super) fn star_params(p: &ModelParams) -> ModelParams {
    ModelParams {
        p_m: p.l_m,
        p_s: p.l_m - p.c_m + p.c_s,
        ..*p
    }
}

pub(crate) fn build(p: &ModelParams, e: &ExpertStrategy, c: &ConsumerStrategy) -> Result<Node> {
    let q = star_params(p);
    Ok(Node::Chance(vec![Branch {
        prob: 1.0,
        inc: Inc::cost(q.k).tag(EV_OPPORTUNISTIC),
        next: Node::chance(vec![
            Branch {
                prob: q.mu,
                inc: Inc::NONE,
                next: expert1_minor(p, e, c),
            },
            Branch {
                prob: 1.0 - q.mu,
                inc: Inc::NONE,
                next: expert1_serious(p, e, c),
            },
        ]),
    }]))
}

fn expert1_minor(p: &ModelParams, e: &ExpertStrategy, c: &ConsumerStrategy) -> Node {
    Node::Decide(Decision {
        owner: Owner::InitialExpert,
        setting: SET_E1_MINOR,
        off_path_weight: 1.0,
        actions: vec![
            ActionNode {
                label: ACT_TRUTHFUL,
                prob: e.t_m1,
                inc: Inc::NONE,
                next: c1_minor_rec(p, e, c, true),
            },
            ActionNode {
                label: ACT_OVERTREAT,
                prob: 1.0 - e.t_m1,
                inc: Inc::NONE,
                next: c1_serious_rec(p, e, c, true),
            },
        ],
    })
}

fn expert1_serious(p: &ModelParams, e: &ExpertStrategy, c: &ConsumerStrategy) -> Node {
    Node::Decide(Decision {
        owner: Owner::InitialExpert,
        setting: SET_E1_SERIOUS,
        off_path_weight: 1.0,
        actions: vec![
            ActionNode {
                label: ACT_TRUTHFUL,
                prob: e.t_s1,
                inc: Inc::NONE,
                next: c1_serious_rec(p, e, c, false),
            },
            ActionNode {
                label: ACT_UNDERTREAT,
                prob: 1.0 - e.t_s1,
                inc: Inc::NONE,
                next: c1_minor_rec(p, e, c, false),
            },
        ],
    })
}

fn c1_minor_rec(p: &ModelParams, e: &ExpertStrategy, c: &ConsumerStrategy, minor: bool) -> Node {
    let q = star_params(p);
    let accept_next = if minor {
        Node::End
    } else {
        base::follow_up(&q, true)
    };
    Node::Decide(Decision {
        owner: Owner::Consumer,
        setting: SET_C1_MINOR,
        off_path_weight: if minor { 1.0 } else { 0.0 },
        actions: vec![
            ActionNode {
                label: ACT_ACCEPT,
                prob: c.a_m1,
                inc: Inc::cost_e1(q.p_m, q.margin_m()).tag(if minor { 0 } else { EV_UNDERTREAT }),
                next: accept_next,
            },
            ActionNode {
                label: ACT_REJECT,
                prob: 1.0 - c.a_m1,
                inc: Inc::cost(q.k).tag(EV_SEARCH),
                next: second_visit(p, e, c, minor, false),
            },
            ActionNode {
                label: ACT_QUIT,
                prob: 0.0,
                inc: Inc::cost(if minor { q.l_m } else { q.l_s }),
                next: Node::End,
            },
        ],
    })
}

fn c1_serious_rec(p: &ModelParams, e: &ExpertStrategy, c: &ConsumerStrategy, minor: bool) -> Node {
    let q = star_params(p);
    Node::Decide(Decision {
        owner: Owner::Consumer,
        setting: SET_C1_SERIOUS,
        off_path_weight: if minor { 0.0 } else { 1.0 },
        actions: vec![
            ActionNode {
                label: ACT_ACCEPT,
                prob: c.a_s1,
                inc: Inc::cost_e1(q.p_s, q.margin_s()).tag(if minor { EV_OVERTREAT } else { 0 }),
                next: Node::End,
            },
            ActionNode {
                label: ACT_REJECT,
                prob: 1.0 - c.a_s1,
                inc: Inc::cost(q.k).tag(EV_SEARCH),
                next: second_visit(p, e, c, minor, true),
            },
            ActionNode {
                label: ACT_QUIT,
                prob: 0.0,
                inc: Inc::cost(if minor { q.l_m } else { q.l_s }),
                next: Node::End,
            },
        ],
    })
}

fn second_visit(
    p: &ModelParams,
    e: &ExpertStrategy,
    c: &ConsumerStrategy,
    minor: bool,
    rejected_serious: bool,
) -> Node {
    let q = star_params(p);
    let (set_minor_rec, set_serious_rec) = if rejected_serious {
        (SET_C2_MINOR_AFTER_SERIOUS, SET_C2_SERIOUS_AFTER_SERIOUS)
    } else {
        (SET_C2_MINOR_AFTER_MINOR, SET_C2_SERIOUS_AFTER_MINOR)
    };
    // Every second-visit expert is opportunistic too. Rejecting a second
    // recommendation already costs the untreated loss, so quitting needs no
    // separate action there.
    if minor {
        Node::Decide(Decision {
            owner: Owner::SecondExpert,
            setting: SET_E2_MINOR,
            off_path_weight: 1.0,
            actions: vec![
                ActionNode {
                    label: ACT_TRUTHFUL,
                    prob: e.t_m2,
                    inc: Inc::NONE,
                    next: base::c2_minor_rec(&q, c, set_minor_rec, true, true),
                },
                ActionNode {
                    label: ACT_OVERTREAT,
                    prob: 1.0 - e.t_m2,
                    inc: Inc::NONE,
                    next: base::c2_serious_rec(&q, c, set_serious_rec, true, true),
                },
            ],
        })
    } else {
        Node::Decide(Decision {
            owner: Owner::SecondExpert,
            setting: SET_E2_SERIOUS,
            off_path_weight: 1.0,
            actions: vec![
                ActionNode {
                    label: ACT_TRUTHFUL,
                    prob: e.t_s2,
                    inc: Inc::NONE,
                    next: base::c2_serious_rec(&q, c, set_serious_rec, false, true),
                },
                ActionNode {
                    label: ACT_UNDERTREAT,
                    prob: 1.0 - e.t_s2,
                    inc: Inc::NONE,
                    next: base::c2_minor_rec(&q, c, set_minor_rec, false, true),
                },
            ],
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelKind;
    use crate::oracle::tree::evaluate_tree;

    fn posted_price_profile() -> (ExpertStrategy, ConsumerStrategy) {
        (
            ExpertStrategy {
                t_m1: 1.0,
                t_s1: 0.0,
                t_m2: 1.0,
                t_s2: 1.0,
            },
            ConsumerStrategy {
                a_m1: 1.0,
                a_s1: 1.0,
                a_m2: 1.0,
                a_s2: 1.0,
            },
        )
    }

    #[test]
    fn star_prices_extract_the_minor_surplus() {
        // mu = 0.9: minor problems pay p_m* = l_m = 6 for the l_m - c_m = 5
        // margin; serious ones are undertreated, return, and pay
        // p_m* + p_s* = 13 for both margins.
        let p = ModelParams::demo(0.5, 0.9);
        let (e, c) = posted_price_profile();
        let out = evaluate_tree(ModelKind::EndogenousPrice, &p, &e, &c).unwrap();
        let margin = p.l_m - p.c_m;
        let profit = p.mu * margin + (1.0 - p.mu) * 2.0 * margin;
        assert!((out.profit - profit).abs() < 1e-12, "profit {}", out.profit);
        let p_m_star = p.l_m;
        let p_s_star = p.l_m - p.c_m + p.c_s;
        let serious_cost = p_m_star + p.k_return + p_s_star;
        let cw = -(p.k + p.mu * p_m_star + (1.0 - p.mu) * serious_cost);
        assert!((out.welfare - cw).abs() < 1e-12, "welfare {}", out.welfare);
    }

    #[test]
    fn cheap_losses_make_quitting_the_best_reply() {
        // At the demo loss l_s = 10, an undertreated consumer's total outlay
        // p_m* + p_s* + k' = 13 exceeds the loss itself, so quitting on a
        // minor recommendation beats accepting by (1-mu) times the excess.
        let p = ModelParams::demo(0.5, 0.9);
        let (e, c) = posted_price_profile();
        let out = evaluate_tree(ModelKind::EndogenousPrice, &p, &e, &c).unwrap();
        let rec = out.record(SET_C1_MINOR).unwrap();
        let (gain, action) = rec.best_gain();
        assert_eq!(action, ACT_QUIT);
        let excess = p.l_m + p.k_return + (p.l_m - p.c_m + p.c_s) - p.l_s;
        assert!((gain - (1.0 - p.mu) * excess).abs() < 1e-12, "gain {gain}");
    }

    #[test]
    fn the_posted_price_profile_certifies_when_losses_are_steep() {
        // With l_s = 14 the undertreated consumer's outlay stays below the
        // loss, and mu = 0.9 clears the 1 - k/(l_m + k') = 5/6 bound: no
        // player gains from any one-shot deviation.
        let p = ModelParams {
            l_s: 14.0,
            ..ModelParams::demo(0.5, 0.9)
        };
        let (e, c) = posted_price_profile();
        let out = evaluate_tree(ModelKind::EndogenousPrice, &p, &e, &c).unwrap();
        for rec in &out.records {
            let (gain, action) = rec.best_gain();
            assert!(gain <= 1e-9, "{} gains {gain} by {action}", rec.setting);
        }
    }
}
