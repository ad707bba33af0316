//! Decision tree of the base market: perfect diagnosis, observable
//! histories, return cheaper than a fresh search.

use crate::error::Result;
use crate::oracle::tree::*;
use crate::params::ModelParams;
use crate::strategy::{ConsumerStrategy, ExpertStrategy};

/// How an accepted-but-insufficient minor treatment plays out: with what
/// probability the consumer notices the unresolved problem before the game
/// ends, and what a return-visit serious treatment costs her and earns the
/// expert. The base market discovers always and charges the full serious
/// price; the refund contract and the delayed-discovery variant bend one
/// knob each.
#[derive(Clone, Copy)]
pub(super) struct FollowUpTerms {
    pub discovery: f64,
    pub return_price: f64,
    pub return_margin: f64,
}

impl FollowUpTerms {
    pub(super) fn standard(p: &ModelParams) -> Self {
        FollowUpTerms {
            discovery: 1.0,
            return_price: p.p_s,
            return_margin: p.margin_s(),
        }
    }

    /// Refund contract: the initial fee comes back when the minor treatment
    /// fails, so the return visit costs the price difference and earns the
    /// expert that difference less the serious cost.
    pub(super) fn refund(p: &ModelParams) -> Self {
        FollowUpTerms {
            discovery: 1.0,
            return_price: p.p_s - p.p_m,
            return_margin: p.p_s - p.p_m - p.c_s,
        }
    }

    /// Delayed discovery: the failure comes to light before the game ends
    /// only with probability 1 − delta; otherwise the serious loss lands
    /// with no chance to respond.
    pub(super) fn delayed(p: &ModelParams, delta: f64) -> Self {
        FollowUpTerms {
            discovery: 1.0 - delta,
            ..Self::standard(p)
        }
    }
}

pub(crate) fn build(p: &ModelParams, e: &ExpertStrategy, c: &ConsumerStrategy) -> Result<Node> {
    build_with(p, e, c, FollowUpTerms::standard(p))
}

pub(crate) fn build_with(
    p: &ModelParams,
    e: &ExpertStrategy,
    c: &ConsumerStrategy,
    terms: FollowUpTerms,
) -> Result<Node> {
    let first_visit = Node::chance(vec![
        Branch {
            prob: p.mu,
            inc: Inc::NONE,
            next: Node::chance(vec![
                Branch {
                    prob: p.h,
                    inc: Inc::NONE,
                    next: c1_minor_rec(p, e, c, terms, true, false),
                },
                Branch {
                    prob: 1.0 - p.h,
                    inc: Inc::NONE.tag(EV_OPPORTUNISTIC),
                    next: expert1_minor(p, e, c, terms),
                },
            ]),
        },
        Branch {
            prob: 1.0 - p.mu,
            inc: Inc::NONE,
            next: Node::chance(vec![
                Branch {
                    prob: p.h,
                    inc: Inc::NONE,
                    next: c1_serious_rec(p, e, c, false, false),
                },
                Branch {
                    prob: 1.0 - p.h,
                    inc: Inc::NONE.tag(EV_OPPORTUNISTIC),
                    next: expert1_serious(p, e, c, terms),
                },
            ]),
        },
    ]);
    // The first search cost is sunk before any recommendation arrives.
    Ok(Node::Chance(vec![Branch {
        prob: 1.0,
        inc: Inc::cost(p.k),
        next: first_visit,
    }]))
}

fn expert1_minor(
    p: &ModelParams,
    e: &ExpertStrategy,
    c: &ConsumerStrategy,
    terms: FollowUpTerms,
) -> Node {
    Node::Decide(Decision {
        owner: Owner::InitialExpert,
        setting: SET_E1_MINOR,
        off_path_weight: 1.0,
        actions: vec![
            ActionNode {
                label: ACT_TRUTHFUL,
                prob: e.t_m1,
                inc: Inc::NONE,
                next: c1_minor_rec(p, e, c, terms, true, true),
            },
            ActionNode {
                label: ACT_OVERTREAT,
                prob: 1.0 - e.t_m1,
                inc: Inc::NONE,
                next: c1_serious_rec(p, e, c, true, true),
            },
        ],
    })
}

fn expert1_serious(
    p: &ModelParams,
    e: &ExpertStrategy,
    c: &ConsumerStrategy,
    terms: FollowUpTerms,
) -> Node {
    Node::Decide(Decision {
        owner: Owner::InitialExpert,
        setting: SET_E1_SERIOUS,
        off_path_weight: 1.0,
        actions: vec![
            ActionNode {
                label: ACT_TRUTHFUL,
                prob: e.t_s1,
                inc: Inc::NONE,
                next: c1_serious_rec(p, e, c, false, true),
            },
            ActionNode {
                label: ACT_UNDERTREAT,
                prob: 1.0 - e.t_s1,
                inc: Inc::NONE,
                next: c1_minor_rec(p, e, c, terms, false, true),
            },
        ],
    })
}

fn c1_minor_rec(
    p: &ModelParams,
    e: &ExpertStrategy,
    c: &ConsumerStrategy,
    terms: FollowUpTerms,
    minor: bool,
    opportunistic: bool,
) -> Node {
    let e1 = if opportunistic { p.margin_m() } else { 0.0 };
    // Accepting the minor treatment ends the game when the problem really is
    // minor; on a serious problem the failure comes to light (with the
    // discovery probability) and the consumer picks a follow-up move, or it
    // stays hidden and the serious loss lands at period end.
    let accept_next = if minor {
        Node::End
    } else if terms.discovery >= 1.0 {
        follow_up_with(p, opportunistic, terms)
    } else {
        Node::chance(vec![
            Branch {
                prob: terms.discovery,
                inc: Inc::NONE,
                next: follow_up_with(p, opportunistic, terms),
            },
            Branch {
                prob: 1.0 - terms.discovery,
                inc: Inc::cost(p.l_s),
                next: Node::End,
            },
        ])
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
                next: second_visit(p, e, c, minor, false),
            },
        ],
    })
}

fn c1_serious_rec(
    p: &ModelParams,
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
            // The serious treatment fixes either problem.
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
                next: second_visit(p, e, c, minor, true),
            },
        ],
    })
}

/// The undertreated consumer's choice: the problem is now known to be
/// serious. Returning is cheaper than searching in the base model, so the
/// profile routes there; the other options stay available as deviations.
/// `opportunistic` says whether the initial expert's revenue counts toward
/// the opportunistic profit stream.
pub(super) fn follow_up(p: &ModelParams, opportunistic: bool) -> Node {
    follow_up_with(p, opportunistic, FollowUpTerms::standard(p))
}

fn follow_up_with(p: &ModelParams, opportunistic: bool, terms: FollowUpTerms) -> Node {
    let return_prob = if p.k_return < p.k { 1.0 } else { 0.0 };
    Node::Decide(Decision {
        owner: Owner::Consumer,
        setting: SET_ROUTE,
        off_path_weight: 1.0,
        actions: vec![
            ActionNode {
                label: ACT_RETURN,
                prob: return_prob,
                inc: Inc::cost(p.k_return).tag(EV_RETURN),
                next: return_visit_with(p, opportunistic, terms),
            },
            // A fresh expert sees the failed minor treatment, knows the
            // problem is serious, and fixes it at the posted price.
            ActionNode {
                label: ACT_SEARCH,
                prob: 1.0 - return_prob,
                inc: Inc::cost(p.k + p.p_s).tag(EV_SEARCH),
                next: Node::End,
            },
            ActionNode {
                label: ACT_UNTREATED,
                prob: 0.0,
                inc: Inc::cost(p.l_s),
                next: Node::End,
            },
        ],
    })
}

/// Back at the initial expert, who now faces a known serious problem and
/// charges the serious price.
fn return_visit_with(p: &ModelParams, opportunistic: bool, terms: FollowUpTerms) -> Node {
    let e1 = if opportunistic { terms.return_margin } else { 0.0 };
    Node::Decide(Decision {
        owner: Owner::Consumer,
        setting: SET_RETURN,
        off_path_weight: 1.0,
        actions: vec![
            ActionNode {
                label: ACT_ACCEPT,
                prob: 1.0,
                inc: Inc::cost_e1(terms.return_price, e1),
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

fn second_visit(
    p: &ModelParams,
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
                next: c2_minor_rec(p, c, set_minor_rec, true, false),
            },
            Branch {
                prob: 1.0 - p.h,
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
                            next: c2_minor_rec(p, c, set_minor_rec, true, true),
                        },
                        ActionNode {
                            label: ACT_OVERTREAT,
                            prob: 1.0 - e.t_m2,
                            inc: Inc::NONE,
                            next: c2_serious_rec(p, c, set_serious_rec, true, true),
                        },
                    ],
                }),
            },
        ])
    } else {
        Node::chance(vec![
            Branch {
                prob: p.h,
                inc: Inc::NONE,
                next: c2_serious_rec(p, c, set_serious_rec, false, false),
            },
            Branch {
                prob: 1.0 - p.h,
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
                            next: c2_serious_rec(p, c, set_serious_rec, false, true),
                        },
                        ActionNode {
                            label: ACT_UNDERTREAT,
                            prob: 1.0 - e.t_s2,
                            inc: Inc::NONE,
                            next: c2_minor_rec(p, c, set_minor_rec, false, true),
                        },
                    ],
                }),
            },
        ])
    }
}

pub(super) fn c2_minor_rec(
    p: &ModelParams,
    c: &ConsumerStrategy,
    setting: &'static str,
    minor: bool,
    opportunistic: bool,
) -> Node {
    let e2 = if opportunistic { p.margin_m() } else { 0.0 };
    // A second-period undertreatment is never fixed: the game ends with the
    // serious loss on top of the wasted minor price.
    let accept_cost = if minor { p.p_m } else { p.p_m + p.l_s };
    let reject_cost = if minor { p.l_m } else { p.l_s };
    Node::Decide(Decision {
        owner: Owner::Consumer,
        setting,
        off_path_weight: if minor { 1.0 } else { 0.0 },
        actions: vec![
            ActionNode {
                label: ACT_ACCEPT,
                prob: c.a_m2,
                inc: Inc::cost_e2(accept_cost, e2).tag(if minor { 0 } else { EV_UNDERTREAT }),
                next: Node::End,
            },
            ActionNode {
                label: ACT_REJECT,
                prob: 1.0 - c.a_m2,
                inc: Inc::cost(reject_cost),
                next: Node::End,
            },
        ],
    })
}

pub(super) fn c2_serious_rec(
    p: &ModelParams,
    c: &ConsumerStrategy,
    setting: &'static str,
    minor: bool,
    opportunistic: bool,
) -> Node {
    let e2 = if opportunistic { p.margin_s() } else { 0.0 };
    let reject_cost = if minor { p.l_m } else { p.l_s };
    Node::Decide(Decision {
        owner: Owner::Consumer,
        setting,
        off_path_weight: if minor { 0.0 } else { 1.0 },
        actions: vec![
            ActionNode {
                label: ACT_ACCEPT,
                prob: c.a_s2,
                inc: Inc::cost_e2(p.p_s, e2).tag(if minor { EV_OVERTREAT } else { 0 }),
                next: Node::End,
            },
            ActionNode {
                label: ACT_REJECT,
                prob: 1.0 - c.a_s2,
                inc: Inc::cost(reject_cost),
                next: Node::End,
            },
        ],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beliefs::posterior_beliefs;
    use crate::equilibrium::classify_equilibrium;
    use crate::model::ModelKind;
    use crate::payoffs::consumer_values;

    fn outcome(p: &ModelParams, e: &ExpertStrategy, c: &ConsumerStrategy) -> Result<TreeOutcome> {
        evaluate_tree(ModelKind::Base, p, e, c)
    }

    fn fofu() -> (ExpertStrategy, ConsumerStrategy) {
        (
            ExpertStrategy {
                t_m1: 0.0,
                t_s1: 0.0,
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
    fn full_fraud_profit_and_welfare_at_the_pinned_point() {
        let p = ModelParams::demo(0.4, 0.5);
        let (e, c) = fofu();
        let out = outcome(&p, &e, &c).unwrap();
        assert!((out.profit - 3.5).abs() < 1e-12);
        assert!((out.welfare - (-6.0)).abs() < 1e-12);
    }

    #[test]
    fn first_visit_values_match_the_closed_forms() {
        // Mixed strategies so that every first-visit set is reached with an
        // interior posterior.
        let p = ModelParams::demo(0.4, 0.5);
        let e = ExpertStrategy {
            t_m1: 0.3,
            t_s1: 0.6,
            t_m2: 0.0,
            t_s2: 1.0,
        };
        let c = ConsumerStrategy {
            a_m1: 0.7,
            a_s1: 0.9,
            a_m2: 1.0,
            a_s2: 1.0,
        };
        let out = outcome(&p, &e, &c).unwrap();
        let b = posterior_beliefs(&p, &e).unwrap();
        let v = consumer_values(&p, &b);

        let minor = out.record(SET_C1_MINOR).unwrap();
        let accept = &minor.actions[0];
        let reject = &minor.actions[1];
        assert_eq!(accept.label, ACT_ACCEPT);
        assert!((accept.value - v.accept_minor).abs() < 1e-12);
        assert!((reject.value - v.reject_minor).abs() < 1e-12);

        let serious = out.record(SET_C1_SERIOUS).unwrap();
        assert!((serious.actions[0].value - v.accept_serious).abs() < 1e-12);
        assert!((serious.actions[0].value - (-p.p_s)).abs() < 1e-12);
        assert!((serious.actions[1].value - v.reject_serious).abs() < 1e-12);

        // Expert margins: action-value differences per problem type.
        let values = crate::payoffs::expert_values(&p, &c);
        let e1m = out.record(SET_E1_MINOR).unwrap();
        let margin = e1m.actions[1].value - e1m.actions[0].value;
        assert!((margin - values.overtreat_margin).abs() < 1e-12);
        let e1s = out.record(SET_E1_SERIOUS).unwrap();
        let margin = e1s.actions[1].value - e1s.actions[0].value;
        assert!((margin - values.undertreat_margin).abs() < 1e-12);
    }

    #[test]
    fn unreached_sets_use_the_truthful_belief() {
        // Under full acceptance nothing is ever rejected, so second-visit
        // recommendation sets are off path; their values follow the
        // convention of believing the new recommendation.
        let p = ModelParams::demo(0.4, 0.5);
        let (e, c) = fofu();
        let out = outcome(&p, &e, &c).unwrap();
        let rec = out.record(SET_C2_SERIOUS_AFTER_MINOR).unwrap();
        assert_eq!(rec.reach, 0.0);
        assert_eq!(rec.actions[0].value, -p.p_s);
        assert_eq!(rec.actions[1].value, -p.l_s);
        let rec = out.record(SET_C2_MINOR_AFTER_SERIOUS).unwrap();
        assert_eq!(rec.actions[0].value, -p.p_m);
        assert_eq!(rec.actions[1].value, -p.l_m);
    }

    #[test]
    fn reach_probabilities_add_up() {
        let p = ModelParams::demo(0.4, 0.5);
        let (e, c) = fofu();
        let out = outcome(&p, &e, &c).unwrap();
        // Minor recommendations: honest experts on minor problems plus
        // opportunistic undertreatment on serious ones.
        let reach = out.record(SET_C1_MINOR).unwrap().reach;
        assert!((reach - (p.mu * p.h + (1.0 - p.mu) * (1.0 - p.h))).abs() < 1e-12);
        let reach = out.record(SET_C1_SERIOUS).unwrap().reach;
        assert!((reach - (p.mu * (1.0 - p.h) + (1.0 - p.mu) * p.h)).abs() < 1e-12);
        // Every serious problem handled by an opportunistic expert ends in
        // the follow-up set under full fraud and full acceptance.
        let reach = out.record(SET_ROUTE).unwrap().reach;
        assert!((reach - (1.0 - p.mu) * (1.0 - p.h)).abs() < 1e-12);
    }

    #[test]
    fn classified_profiles_leave_no_deviation_gain() {
        for mu in [0.2, 0.5, 0.8] {
            let p = ModelParams::demo(0.5, mu);
            let eq = classify_equilibrium(&p).unwrap();
            let out = outcome(&p, &eq.expert, &eq.consumer).unwrap();
            for rec in &out.records {
                let (gain, action) = rec.best_gain();
                assert!(
                    gain <= 1e-9,
                    "mu={mu}: {} gains {gain} by {action}",
                    rec.setting
                );
            }
        }
    }

    #[test]
    fn all_truthful_all_accepting_is_not_an_equilibrium() {
        let p = ModelParams::demo(0.5, 0.5);
        let e = ExpertStrategy {
            t_m1: 1.0,
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
        let out = outcome(&p, &e, &c).unwrap();
        let (gain, action) = out.record(SET_E1_MINOR).unwrap().best_gain();
        assert_eq!(action, ACT_OVERTREAT);
        assert!((gain - (p.margin_s() - p.margin_m())).abs() < 1e-12);
    }
}
