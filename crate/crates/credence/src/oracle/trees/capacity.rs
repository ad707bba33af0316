//! Decision tree of the capacity-shock market: each expert-period
//! independently draws a shock with probability `chi` that rules out the
//! serious treatment. A shocked honest expert turns a serious problem away;
//! a shocked opportunistic expert recommends the minor treatment regardless
//! of the state (the only recommendation that can earn anything).
//!
//! Refused consumers know their problem is serious; their later choices are
//! separate information sets pinned to the pointwise-dominant action
//! (searching when a fresh expert is worth the cost, rejecting a minor
//! patch-up, accepting a serious fix), so certification checks them like
//! any other decision.

use super::base;
use crate::error::{CredenceError, Result};
use crate::oracle::tree::*;
use crate::params::ModelParams;
use crate::strategy::{ConsumerStrategy, ExpertStrategy};

pub(crate) fn build(
    p: &ModelParams,
    chi: f64,
    e: &ExpertStrategy,
    c: &ConsumerStrategy,
) -> Result<Node> {
    if !chi.is_finite() || !(0.0..=1.0).contains(&chi) {
        return Err(CredenceError::Precondition(format!(
            "capacity shock probability must lie in [0, 1], got {chi}"
        )));
    }
    let first_visit = Node::chance(vec![
        Branch {
            prob: p.mu,
            inc: Inc::NONE,
            next: minor_state(p, chi, e, c),
        },
        Branch {
            prob: 1.0 - p.mu,
            inc: Inc::NONE,
            next: serious_state(p, chi, e, c),
        },
    ]);
    Ok(Node::Chance(vec![Branch {
        prob: 1.0,
        inc: Inc::cost(p.k),
        next: first_visit,
    }]))
}

fn minor_state(p: &ModelParams, chi: f64, e: &ExpertStrategy, c: &ConsumerStrategy) -> Node {
    // A shock never changes what the consumer with a minor problem hears
    // from an honest expert, so the honest branch needs no shock split.
    Node::chance(vec![
        Branch {
            prob: p.h,
            inc: Inc::NONE,
            next: c1_minor_rec(p, chi, e, c, true, false),
        },
        Branch {
            prob: (1.0 - p.h) * (1.0 - chi),
            inc: Inc::NONE.tag(EV_OPPORTUNISTIC),
            next: Node::Decide(Decision {
                owner: Owner::InitialExpert,
                setting: SET_E1_MINOR,
                off_path_weight: 1.0,
                actions: vec![
                    ActionNode {
                        label: ACT_TRUTHFUL,
                        prob: e.t_m1,
                        inc: Inc::NONE,
                        next: c1_minor_rec(p, chi, e, c, true, true),
                    },
                    ActionNode {
                        label: ACT_OVERTREAT,
                        prob: 1.0 - e.t_m1,
                        inc: Inc::NONE,
                        next: c1_serious_rec(p, chi, e, c, true, true),
                    },
                ],
            }),
        },
        // Shocked opportunists can only offer the minor treatment, which
        // happens to be the truthful recommendation here.
        Branch {
            prob: (1.0 - p.h) * chi,
            inc: Inc::NONE.tag(EV_OPPORTUNISTIC),
            next: c1_minor_rec(p, chi, e, c, true, true),
        },
    ])
}

fn serious_state(p: &ModelParams, chi: f64, e: &ExpertStrategy, c: &ConsumerStrategy) -> Node {
    Node::chance(vec![
        Branch {
            prob: p.h * (1.0 - chi),
            inc: Inc::NONE,
            next: c1_serious_rec(p, chi, e, c, false, false),
        },
        // A shocked honest expert cannot deliver the serious treatment and
        // will not misrepresent, so the consumer is turned away.
        Branch {
            prob: p.h * chi,
            inc: Inc::NONE,
            next: refused_route(p, chi, e),
        },
        Branch {
            prob: (1.0 - p.h) * (1.0 - chi),
            inc: Inc::NONE.tag(EV_OPPORTUNISTIC),
            next: Node::Decide(Decision {
                owner: Owner::InitialExpert,
                setting: SET_E1_SERIOUS,
                off_path_weight: 1.0,
                actions: vec![
                    ActionNode {
                        label: ACT_TRUTHFUL,
                        prob: e.t_s1,
                        inc: Inc::NONE,
                        next: c1_serious_rec(p, chi, e, c, false, true),
                    },
                    ActionNode {
                        label: ACT_UNDERTREAT,
                        prob: 1.0 - e.t_s1,
                        inc: Inc::NONE,
                        next: c1_minor_rec(p, chi, e, c, false, true),
                    },
                ],
            }),
        },
        Branch {
            prob: (1.0 - p.h) * chi,
            inc: Inc::NONE.tag(EV_OPPORTUNISTIC),
            next: c1_minor_rec(p, chi, e, c, false, true),
        },
    ])
}

fn c1_minor_rec(
    p: &ModelParams,
    chi: f64,
    e: &ExpertStrategy,
    c: &ConsumerStrategy,
    minor: bool,
    opportunistic: bool,
) -> Node {
    let e1 = if opportunistic { p.margin_m() } else { 0.0 };
    let accept_next = if minor {
        Node::End
    } else {
        follow_up(p, chi, opportunistic)
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
                next: second_visit(p, chi, e, c, minor, false),
            },
        ],
    })
}

fn c1_serious_rec(
    p: &ModelParams,
    chi: f64,
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
                next: second_visit(p, chi, e, c, minor, true),
            },
        ],
    })
}

/// The undertreated consumer's routing choice. Returning and searching face
/// the same fresh shock risk, so returning wins exactly when it is cheaper;
/// a shocked provider on this last visit leaves the problem unresolved.
fn follow_up(p: &ModelParams, chi: f64, opportunistic: bool) -> Node {
    let return_prob = if p.k_return < p.k { 1.0 } else { 0.0 };
    let e1 = if opportunistic { p.margin_s() } else { 0.0 };
    let treated = |extra_e1: f64| {
        Node::chance(vec![
            Branch {
                prob: chi,
                inc: Inc::cost(p.l_s),
                next: Node::End,
            },
            Branch {
                prob: 1.0 - chi,
                inc: Inc::cost_e1(p.p_s, extra_e1),
                next: Node::End,
            },
        ])
    };
    Node::Decide(Decision {
        owner: Owner::Consumer,
        setting: SET_ROUTE,
        off_path_weight: 1.0,
        actions: vec![
            ActionNode {
                label: ACT_RETURN,
                prob: return_prob,
                inc: Inc::cost(p.k_return).tag(EV_RETURN),
                next: treated(e1),
            },
            ActionNode {
                label: ACT_SEARCH,
                prob: 1.0 - return_prob,
                inc: Inc::cost(p.k).tag(EV_SEARCH),
                next: treated(0.0),
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

/// Turned away by a shocked honest expert, the consumer knows the problem
/// is serious and weighs one more search against staying untreated.
fn refused_route(p: &ModelParams, chi: f64, e: &ExpertStrategy) -> Node {
    let search_prob = if p.k < (1.0 - chi) * (p.l_s - p.p_s) {
        1.0
    } else {
        0.0
    };
    Node::Decide(Decision {
        owner: Owner::Consumer,
        setting: SET_REFUSED_ROUTE,
        off_path_weight: 1.0,
        actions: vec![
            ActionNode {
                label: ACT_SEARCH,
                prob: search_prob,
                inc: Inc::cost(p.k).tag(EV_SEARCH),
                next: refused_second_visit(p, chi, e),
            },
            ActionNode {
                label: ACT_UNTREATED,
                prob: 1.0 - search_prob,
                inc: Inc::cost(p.l_s),
                next: Node::End,
            },
        ],
    })
}

fn refused_second_visit(p: &ModelParams, chi: f64, e: &ExpertStrategy) -> Node {
    Node::chance(vec![
        Branch {
            prob: p.h * (1.0 - chi),
            inc: Inc::NONE,
            next: refused_serious_rec(p, false),
        },
        // Refused twice: the period budget is spent.
        Branch {
            prob: p.h * chi,
            inc: Inc::cost(p.l_s),
            next: Node::End,
        },
        Branch {
            prob: (1.0 - p.h) * (1.0 - chi),
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
            prob: (1.0 - p.h) * chi,
            inc: Inc::NONE,
            next: refused_minor_rec(p, true),
        },
    ])
}

/// A minor recommendation cannot help a problem the consumer knows is
/// serious, so rejecting it is pinned as the dominant choice.
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
    chi: f64,
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
            // Honest experts recommend minor here whether shocked or not,
            // and a shocked opportunist has no other option.
            Branch {
                prob: p.h + (1.0 - p.h) * chi,
                inc: Inc::NONE,
                next: base::c2_minor_rec(
                    p,
                    c,
                    set_minor_rec,
                    true,
                    // The margin stream only tracks the initial expert.
                    false,
                ),
            },
            Branch {
                prob: (1.0 - p.h) * (1.0 - chi),
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
        ])
    } else {
        Node::chance(vec![
            Branch {
                prob: p.h * (1.0 - chi),
                inc: Inc::NONE,
                next: base::c2_serious_rec(p, c, set_serious_rec, false, false),
            },
            // A shocked honest expert turns the serious problem away; no
            // visits remain.
            Branch {
                prob: p.h * chi,
                inc: Inc::cost(p.l_s),
                next: Node::End,
            },
            Branch {
                prob: (1.0 - p.h) * (1.0 - chi),
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
                prob: (1.0 - p.h) * chi,
                inc: Inc::NONE,
                next: base::c2_minor_rec(p, c, set_minor_rec, false, true),
            },
        ])
    }
}
