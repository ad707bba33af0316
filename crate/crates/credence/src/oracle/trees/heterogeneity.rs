//! Decision tree for the capability-heterogeneity market: a share `alpha`
//! of experts can deliver both treatments, the rest only the minor one.
//! Capability is independent of ethics. A low-capability honest expert
//! refuses a serious problem outright; a low-capability opportunistic
//! expert sells the minor treatment anyway. Only high-capability
//! opportunistic experts make strategic recommendation choices, so the
//! expert strategy describes them. Returning after a failed minor
//! treatment only pays off when the initial expert was capable, which is
//! what pushes undertreated consumers toward a fresh search.

use super::base;
use crate::error::{CredenceError, Result};
use crate::oracle::tree::*;
use crate::params::ModelParams;
use crate::strategy::{ConsumerStrategy, ExpertStrategy};

pub(crate) fn build(
    p: &ModelParams,
    alpha: f64,
    e: &ExpertStrategy,
    c: &ConsumerStrategy,
) -> Result<Node> {
    if !alpha.is_finite() || alpha <= 0.0 || alpha >= 1.0 {
        return Err(CredenceError::Precondition(format!(
            "high-capability share must lie strictly between 0 and 1, got {alpha}"
        )));
    }
    let minor_types = Node::chance(vec![
        // Honest experts treat a minor problem truthfully whatever their
        // capability; the capability flag is only read on follow-ups after
        // undertreatment, which honest experts never commit.
        Branch {
            prob: p.h,
            inc: Inc::NONE,
            next: c1_minor_rec(p, alpha, e, c, true, false, true),
        },
        Branch {
            prob: (1.0 - p.h) * alpha,
            inc: Inc::NONE.tag(EV_OPPORTUNISTIC),
            next: expert1_minor(p, alpha, e, c),
        },
        Branch {
            prob: (1.0 - p.h) * (1.0 - alpha),
            inc: Inc::NONE.tag(EV_OPPORTUNISTIC),
            next: c1_minor_rec(p, alpha, e, c, true, true, false),
        },
    ]);
    let serious_types = Node::chance(vec![
        Branch {
            prob: p.h * alpha,
            inc: Inc::NONE,
            next: c1_serious_rec(p, alpha, e, c, false, false),
        },
        // An honest expert who cannot deliver the serious treatment sends
        // the consumer away untreated.
        Branch {
            prob: p.h * (1.0 - alpha),
            inc: Inc::NONE,
            next: refused_route(p, alpha, e),
        },
        Branch {
            prob: (1.0 - p.h) * alpha,
            inc: Inc::NONE.tag(EV_OPPORTUNISTIC),
            next: expert1_serious(p, alpha, e, c),
        },
        // An opportunistic one sells the only treatment she has.
        Branch {
            prob: (1.0 - p.h) * (1.0 - alpha),
            inc: Inc::NONE.tag(EV_OPPORTUNISTIC),
            next: c1_minor_rec(p, alpha, e, c, false, true, false),
        },
    ]);
    Ok(Node::Chance(vec![Branch {
        prob: 1.0,
        inc: Inc::cost(p.k),
        next: Node::chance(vec![
            Branch {
                prob: p.mu,
                inc: Inc::NONE,
                next: minor_types,
            },
            Branch {
                prob: 1.0 - p.mu,
                inc: Inc::NONE,
                next: serious_types,
            },
        ]),
    }]))
}

fn expert1_minor(p: &ModelParams, alpha: f64, e: &ExpertStrategy, c: &ConsumerStrategy) -> Node {
    Node::Decide(Decision {
        owner: Owner::InitialExpert,
        setting: SET_E1_MINOR,
        off_path_weight: 1.0,
        actions: vec![
            ActionNode {
                label: ACT_TRUTHFUL,
                prob: e.t_m1,
                inc: Inc::NONE,
                next: c1_minor_rec(p, alpha, e, c, true, true, true),
            },
            ActionNode {
                label: ACT_OVERTREAT,
                prob: 1.0 - e.t_m1,
                inc: Inc::NONE,
                next: c1_serious_rec(p, alpha, e, c, true, true),
            },
        ],
    })
}

fn expert1_serious(p: &ModelParams, alpha: f64, e: &ExpertStrategy, c: &ConsumerStrategy) -> Node {
    Node::Decide(Decision {
        owner: Owner::InitialExpert,
        setting: SET_E1_SERIOUS,
        off_path_weight: 1.0,
        actions: vec![
            ActionNode {
                label: ACT_TRUTHFUL,
                prob: e.t_s1,
                inc: Inc::NONE,
                next: c1_serious_rec(p, alpha, e, c, false, true),
            },
            ActionNode {
                label: ACT_UNDERTREAT,
                prob: 1.0 - e.t_s1,
                inc: Inc::NONE,
                next: c1_minor_rec(p, alpha, e, c, false, true, true),
            },
        ],
    })
}

fn c1_minor_rec(
    p: &ModelParams,
    alpha: f64,
    e: &ExpertStrategy,
    c: &ConsumerStrategy,
    minor: bool,
    opportunistic: bool,
    initial_high: bool,
) -> Node {
    let e1 = if opportunistic { p.margin_m() } else { 0.0 };
    let accept_next = if minor {
        Node::End
    } else {
        follow_up(p, alpha, e, initial_high, opportunistic)
    };
    Node::Decide(Decision {
        owner: Owner::Consumer,
        setting: SET_C1_MINOR,
        off_path_weight: if minor { 1.0 } else { 0.0 },
        actions: vec![
            ActionNode {
                label: ACT_ACCEPT,
                prob: c.a_m1,
                inc: Inc::cost_e1(p.p_m, e1).tag(if minor { 0 } else { EV_UNDERTREAT }),
                next: accept_next,
            },
            ActionNode {
                label: ACT_REJECT,
                prob: 1.0 - c.a_m1,
                inc: Inc::cost(p.k).tag(EV_SEARCH),
                next: second_visit(p, alpha, e, c, minor, false),
            },
        ],
    })
}

fn c1_serious_rec(
    p: &ModelParams,
    alpha: f64,
    e: &ExpertStrategy,
    c: &ConsumerStrategy,
    minor: bool,
    opportunistic: bool,
) -> Node {
    let e1 = if opportunistic { p.margin_s() } else { 0.0 };
    Node::Decide(Decision {
        owner: Owner::Consumer,
        setting: SET_C1_SERIOUS,
        off_path_weight: if minor { 0.0 } else { 1.0 },
        actions: vec![
            ActionNode {
                label: ACT_ACCEPT,
                prob: c.a_s1,
                inc: Inc::cost_e1(p.p_s, e1).tag(if minor { EV_OVERTREAT } else { 0 }),
                next: Node::End,
            },
            ActionNode {
                label: ACT_REJECT,
                prob: 1.0 - c.a_s1,
                inc: Inc::cost(p.k).tag(EV_SEARCH),
                next: second_visit(p, alpha, e, c, minor, true),
            },
        ],
    })
}

/// Whether an undertreated (or refused) consumer, who now knows the problem
/// is serious, prefers paying the search cost for a fresh draw over eating
/// the loss: a share `alpha` of new experts can actually fix it.
fn searches_rather_than_quits(p: &ModelParams, alpha: f64) -> bool {
    p.k < alpha * (p.l_s - p.p_s)
}

/// The undertreated consumer's choice. Returning only helps when the
/// initial expert was high-capability — a low one has nothing more to
/// sell — so the profile routes to a fresh search (or gives up when even
/// that is not worth it), and the return stays available as a deviation.
/// When the set is unreached, occurrences are weighted by how likely each
/// initial-expert capability is to have produced an undertreatment.
fn follow_up(
    p: &ModelParams,
    alpha: f64,
    e: &ExpertStrategy,
    initial_high: bool,
    opportunistic: bool,
) -> Node {
    let searches = searches_rather_than_quits(p, alpha);
    let return_next = if initial_high {
        return_visit(p, opportunistic)
    } else {
        Node::leaf(Inc::cost(p.l_s))
    };
    Node::Decide(Decision {
        owner: Owner::Consumer,
        setting: SET_ROUTE,
        off_path_weight: if initial_high {
            alpha * (1.0 - e.t_s1)
        } else {
            1.0 - alpha
        },
        actions: vec![
            ActionNode {
                label: ACT_RETURN,
                prob: 0.0,
                inc: Inc::cost(p.k_return).tag(EV_RETURN),
                next: return_next,
            },
            ActionNode {
                label: ACT_SEARCH,
                prob: if searches { 1.0 } else { 0.0 },
                inc: Inc::cost(p.k).tag(EV_SEARCH),
                next: search_outcome(p, alpha),
            },
            ActionNode {
                label: ACT_UNTREATED,
                prob: if searches { 0.0 } else { 1.0 },
                inc: Inc::cost(p.l_s),
                next: Node::End,
            },
        ],
    })
}

/// Back at a high-capability initial expert with a known serious problem.
fn return_visit(p: &ModelParams, opportunistic: bool) -> Node {
    let e1 = if opportunistic { p.margin_s() } else { 0.0 };
    Node::Decide(Decision {
        owner: Owner::Consumer,
        setting: SET_RETURN,
        off_path_weight: 1.0,
        actions: vec![
            ActionNode {
                label: ACT_ACCEPT,
                prob: 1.0,
                inc: Inc::cost_e1(p.p_s, e1),
                next: Node::End,
            },
            ActionNode {
                label: ACT_REFUSE,
                prob: 0.0,
                inc: Inc::cost(p.l_s),
                next: Node::End,
            },
        ],
    })
}

/// A fresh expert facing a consumer who knows her problem is serious:
/// capable ones fix it at the posted price, incapable ones leave the loss.
fn search_outcome(p: &ModelParams, alpha: f64) -> Node {
    Node::chance(vec![
        Branch {
            prob: alpha,
            inc: Inc::cost(p.p_s),
            next: Node::End,
        },
        Branch {
            prob: 1.0 - alpha,
            inc: Inc::cost(p.l_s),
            next: Node::End,
        },
    ])
}

/// A consumer refused service knows two things: the problem is serious and
/// this expert cannot help. She searches when capable experts are common
/// enough to justify the cost, and otherwise stays untreated.
fn refused_route(p: &ModelParams, alpha: f64, e: &ExpertStrategy) -> Node {
    let searches = searches_rather_than_quits(p, alpha);
    Node::Decide(Decision {
        owner: Owner::Consumer,
        setting: SET_REFUSED_ROUTE,
        off_path_weight: 1.0,
        actions: vec![
            ActionNode {
                label: ACT_SEARCH,
                prob: if searches { 1.0 } else { 0.0 },
                inc: Inc::cost(p.k).tag(EV_SEARCH),
                next: refused_second_visit(p, alpha, e),
            },
            ActionNode {
                label: ACT_UNTREATED,
                prob: if searches { 0.0 } else { 1.0 },
                inc: Inc::cost(p.l_s),
                next: Node::End,
            },
        ],
    })
}

fn refused_second_visit(p: &ModelParams, alpha: f64, e: &ExpertStrategy) -> Node {
    Node::chance(vec![
        Branch {
            prob: p.h * alpha,
            inc: Inc::NONE,
            next: refused_serious_rec(p, false),
        },
        Branch {
            prob: p.h * (1.0 - alpha),
            inc: Inc::cost(p.l_s),
            next: Node::End,
        },
        Branch {
            prob: (1.0 - p.h) * alpha,
            inc: Inc::NONE,
            next: Node::Decide(Decision {
                owner: Owner::SecondExpert,
                setting: SET_E2_SERIOUS,
                off_path_weight: 1.0,
                actions: vec![
                    ActionNode {
                        label: ACT_TRUTHFUL,
                        prob: e.t_s2,
                        inc: Inc::NONE,
                        next: refused_serious_rec(p, true),
                    },
                    ActionNode {
                        label: ACT_UNDERTREAT,
                        prob: 1.0 - e.t_s2,
                        inc: Inc::NONE,
                        next: refused_minor_rec(p, true),
                    },
                ],
            }),
        },
        Branch {
            prob: (1.0 - p.h) * (1.0 - alpha),
            inc: Inc::NONE,
            next: refused_minor_rec(p, true),
        },
    ])
}

/// A minor recommendation to a consumer who knows the problem is serious
/// buys nothing; rejecting is dominant.
fn refused_minor_rec(p: &ModelParams, opportunistic: bool) -> Node {
    let e2 = if opportunistic { p.margin_m() } else { 0.0 };
    Node::Decide(Decision {
        owner: Owner::Consumer,
        setting: SET_REFUSED_MINOR,
        off_path_weight: 1.0,
        actions: vec![
            ActionNode {
                label: ACT_REJECT,
                prob: 1.0,
                inc: Inc::cost(p.l_s),
                next: Node::End,
            },
            ActionNode {
                label: ACT_ACCEPT,
                prob: 0.0,
                inc: Inc::cost_e2(p.p_m + p.l_s, e2).tag(EV_UNDERTREAT),
                next: Node::End,
            },
        ],
    })
}

fn refused_serious_rec(p: &ModelParams, opportunistic: bool) -> Node {
    let e2 = if opportunistic { p.margin_s() } else { 0.0 };
    Node::Decide(Decision {
        owner: Owner::Consumer,
        setting: SET_REFUSED_SERIOUS,
        off_path_weight: 1.0,
        actions: vec![
            ActionNode {
                label: ACT_ACCEPT,
                prob: 1.0,
                inc: Inc::cost_e2(p.p_s, e2),
                next: Node::End,
            },
            ActionNode {
                label: ACT_REJECT,
                prob: 0.0,
                inc: Inc::cost(p.l_s),
                next: Node::End,
            },
        ],
    })
}

fn second_visit(
    p: &ModelParams,
    alpha: f64,
    e: &ExpertStrategy,
    c: &ConsumerStrategy,
    minor: bool,
    rejected_serious: bool,
) -> Node {
    let (set_minor_rec, set_serious_rec) = if rejected_serious {
        (SET_C2_MINOR_AFTER_SERIOUS, SET_C2_SERIOUS_AFTER_SERIOUS)
    } else {
        (SET_C2_MINOR_AFTER_MINOR, SET_C2_SERIOUS_AFTER_MINOR)
    };
    if minor {
        Node::chance(vec![
            Branch {
                prob: p.h,
                inc: Inc::NONE,
                next: base::c2_minor_rec(p, c, set_minor_rec, true, false),
            },
            Branch {
                prob: (1.0 - p.h) * alpha,
                inc: Inc::NONE,
                next: Node::Decide(Decision {
                    owner: Owner::SecondExpert,
                    setting: SET_E2_MINOR,
                    off_path_weight: 1.0,
                    actions: vec![
                        ActionNode {
                            label: ACT_TRUTHFUL,
                            prob: e.t_m2,
                            inc: Inc::NONE,
                            next: base::c2_minor_rec(p, c, set_minor_rec, true, true),
                        },
                        ActionNode {
                            label: ACT_OVERTREAT,
                            prob: 1.0 - e.t_m2,
                            inc: Inc::NONE,
                            next: base::c2_serious_rec(p, c, set_serious_rec, true, true),
                        },
                    ],
                }),
            },
            Branch {
                prob: (1.0 - p.h) * (1.0 - alpha),
                inc: Inc::NONE,
                next: base::c2_minor_rec(p, c, set_minor_rec, true, true),
            },
        ])
    } else {
        Node::chance(vec![
            Branch {
                prob: p.h * alpha,
                inc: Inc::NONE,
                next: base::c2_serious_rec(p, c, set_serious_rec, false, false),
            },
            // Refused at the last expert in town: the loss lands.
            Branch {
                prob: p.h * (1.0 - alpha),
                inc: Inc::cost(p.l_s),
                next: Node::End,
            },
            Branch {
                prob: (1.0 - p.h) * alpha,
                inc: Inc::NONE,
                next: Node::Decide(Decision {
                    owner: Owner::SecondExpert,
                    setting: SET_E2_SERIOUS,
                    off_path_weight: 1.0,
                    actions: vec![
                        ActionNode {
                            label: ACT_TRUTHFUL,
                            prob: e.t_s2,
                            inc: Inc::NONE,
                            next: base::c2_serious_rec(p, c, set_serious_rec, false, true),
                        },
                        ActionNode {
                            label: ACT_UNDERTREAT,
                            prob: 1.0 - e.t_s2,
                            inc: Inc::NONE,
                            next: base::c2_minor_rec(p, c, set_minor_rec, false, true),
                        },
                    ],
                }),
            },
            Branch {
                prob: (1.0 - p.h) * (1.0 - alpha),
                inc: Inc::NONE,
                next: base::c2_minor_rec(p, c, set_minor_rec, false, true),
            },
        ])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelKind;
    use crate::oracle::tree::evaluate_tree;

    fn no_undertreatment() -> (ExpertStrategy, ConsumerStrategy) {
        (
            ExpertStrategy {
                t_m1: 0.0,
                t_s1: 1.0,
                t_m2: 0.0,
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
    fn out_of_range_capability_shares_are_refused() {
        let p = ModelParams::demo(0.5, 0.5);
        let (e, c) = no_undertreatment();
        for alpha in [0.0, 1.0, 1.5, -0.2, f64::NAN] {
            assert!(
                evaluate_tree(ModelKind::Heterogeneity(alpha), &p, &e, &c).is_err(),
                "alpha {alpha} accepted"
            );
        }
    }

    #[test]
    fn profit_and_welfare_at_the_pinned_point() {
        // h = mu = alpha = 1/2. Opportunistic high types overtreat minor
        // problems and treat serious ones truthfully (p_s each); honest
        // experts and low types charge p_m for minor problems. A serious
        // problem at a low expert ends in a search: refused by the honest,
        // sold a futile minor treatment by the opportunistic.
        let p = ModelParams::demo(0.5, 0.5);
        let (e, c) = no_undertreatment();
        let out = evaluate_tree(ModelKind::Heterogeneity(0.5), &p, &e, &c).unwrap();
        let profit = 0.5 * p.margin_s() + 0.5 * p.margin_m();
        assert!((out.profit - profit).abs() < 1e-12, "profit {}", out.profit);
        let search_cont = p.k + 0.5 * p.p_s + 0.5 * p.l_s;
        let minor_cost = 0.5 * p.p_m + 0.25 * p.p_m + 0.25 * p.p_s;
        let serious_cost =
            0.25 * p.p_s + 0.25 * search_cont + 0.25 * p.p_s + 0.25 * (p.p_m + search_cont);
        let cw = -(p.k + 0.5 * minor_cost + 0.5 * serious_cost);
        assert!((out.welfare - cw).abs() < 1e-12, "welfare {}", out.welfare);
        assert!((out.welfare - (-6.0)).abs() < 1e-12);
    }

    #[test]
    fn full_acceptance_without_undertreatment_leaves_no_deviation_gain() {
        let p = ModelParams::demo(0.5, 0.5);
        let (e, c) = no_undertreatment();
        let out = evaluate_tree(ModelKind::Heterogeneity(0.5), &p, &e, &c).unwrap();
        for rec in &out.records {
            let (gain, action) = rec.best_gain();
            assert!(gain <= 1e-9, "{} gains {gain} by {action}", rec.setting);
        }
    }

    #[test]
    fn returning_to_a_low_expert_is_as_hopeless_as_quitting() {
        let p = ModelParams::demo(0.5, 0.5);
        let (e, c) = no_undertreatment();
        let out = evaluate_tree(ModelKind::Heterogeneity(0.5), &p, &e, &c).unwrap();
        // On path every discovered undertreatment comes from a low-capability
        // expert, so a return trip buys nothing over staying untreated.
        let route = out.record(SET_ROUTE).unwrap();
        assert_eq!(route.actions[0].label, ACT_RETURN);
        assert!((route.actions[0].value - (-(p.k_return + p.l_s))).abs() < 1e-12);
        assert_eq!(route.actions[1].label, ACT_SEARCH);
        let search = -(p.k + 0.5 * p.p_s + 0.5 * p.l_s);
        assert!((route.actions[1].value - search).abs() < 1e-12);
        assert_eq!(route.actions[2].label, ACT_UNTREATED);
        assert!((route.actions[2].value - (-p.l_s)).abs() < 1e-12);
    }
}
