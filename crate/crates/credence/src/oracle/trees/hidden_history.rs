//! Decision tree for the market where experts cannot see whether a visitor
//! is on her first or second search.
//!
//! The consumer still knows her own history, so her information sets match
//! the base tree. The expert, unable to tell visits apart, plays one merged
//! strategy per problem type: the first-visit and second-visit
//! recommendation nodes share a setting, and the walk's reach-weighting
//! blends them exactly in proportion to the steady-state mix of new and
//! returning consumers an expert actually faces.

use crate::error::{CredenceError, Result};
use crate::oracle::tree::{
    ActionNode, Branch, Decision, Inc, Node, Owner, ACT_ACCEPT, ACT_OVERTREAT, ACT_REJECT,
    ACT_TRUTHFUL, ACT_UNDERTREAT, EV_OPPORTUNISTIC, EV_SEARCH, EV_UNDERTREAT, SET_C1_MINOR,
    SET_C1_SERIOUS, SET_C2_MINOR_AFTER_MINOR, SET_C2_MINOR_AFTER_SERIOUS, SET_E_MINOR_ANY,
    SET_E_SERIOUS_ANY,
};
use crate::params::ModelParams;
use crate::strategy::{ConsumerStrategy, ExpertStrategy};

use super::base;

pub(crate) fn build(p: &ModelParams, e: &ExpertStrategy, c: &ConsumerStrategy) -> Result<Node> {
    if e.t_m2 != e.t_m1 || e.t_s2 != e.t_s1 {
        return Err(CredenceError::Precondition(
            "with visit histories hidden the expert plays one strategy across visits: \
             set t_m2 = t_m1 and t_s2 = t_s1"
                .into(),
        ));
    }
    let root = Node::chance(vec![Branch {
        prob: 1.0,
        inc: Inc::cost(p.k),
        next: Node::chance(vec![
            Branch {
                prob: p.mu,
                inc: Inc::NONE,
                next: minor_state(p, e, c),
            },
            Branch {
                prob: 1.0 - p.mu,
                inc: Inc::NONE,
                next: serious_state(p, e, c),
            },
        ]),
    }]);
    Ok(root)
}

fn minor_state(p: &ModelParams, e: &ExpertStrategy, c: &ConsumerStrategy) -> Node {
    Node::chance(vec![
        Branch {
            prob: p.h,
            inc: Inc::NONE,
            next: c1_minor_rec(p, e, c, true, false),
        },
        Branch {
            prob: 1.0 - p.h,
            inc: Inc::NONE.tag(EV_OPPORTUNISTIC),
            next: Node::Decide(Decision {
                owner: Owner::InitialExpert,
                setting: SET_E_MINOR_ANY,
                off_path_weight: 1.0,
                actions: vec![
                    ActionNode {
                        label: ACT_TRUTHFUL,
                        prob: e.t_m1,
                        inc: Inc::NONE,
                        next: c1_minor_rec(p, e, c, true, true),
                    },
                    ActionNode {
                        label: ACT_OVERTREAT,
                        prob: 1.0 - e.t_m1,
                        inc: Inc::NONE,
                        next: c1_serious_rec(p, e, c, true, true),
                    },
                ],
            }),
        },
    ])
}

fn serious_state(p: &ModelParams, e: &ExpertStrategy, c: &ConsumerStrategy) -> Node {
    Node::chance(vec![
        Branch {
            prob: p.h,
            inc: Inc::NONE,
            next: c1_serious_rec(p, e, c, false, false),
        },
        Branch {
            prob: 1.0 - p.h,
            inc: Inc::NONE.tag(EV_OPPORTUNISTIC),
            next: Node::Decide(Decision {
                owner: Owner::InitialExpert,
                setting: SET_E_SERIOUS_ANY,
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
                        next: c1_minor_rec(p, e, c, false, true),
                    },
                ],
            }),
        },
    ])
}

fn c1_minor_rec(
    p: &ModelParams,
    e: &ExpertStrategy,
    c: &ConsumerStrategy,
    minor: bool,
    opportunistic: bool,
) -> Node {
    let e1 = if opportunistic { p.margin_m() } else { 0.0 };
    let accept_next = if minor {
        Node::End
    } else {
        base::follow_up(p, opportunistic)
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
            ActionNode {
                label: ACT_ACCEPT,
                prob: c.a_s1,
                inc: Inc::cost_e1(p.p_s, e1).tag(if minor {
                    crate::oracle::tree::EV_OVERTREAT
                } else {
                    0
                }),
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

/// The second expert's recommendation nodes reuse the merged settings, so
/// the walk folds them into the same records as the first-visit nodes.
fn second_visit(
    p: &ModelParams,
    e: &ExpertStrategy,
    c: &ConsumerStrategy,
    minor: bool,
    rejected_serious: bool,
) -> Node {
    if minor {
        Node::chance(vec![
            Branch {
                prob: p.h,
                inc: Inc::NONE,
                next: c2_minor_rec(p, c, true, rejected_serious),
            },
            Branch {
                prob: 1.0 - p.h,
                inc: Inc::NONE,
                next: Node::Decide(Decision {
                    owner: Owner::SecondExpert,
                    setting: SET_E_MINOR_ANY,
                    off_path_weight: 1.0,
                    actions: vec![
                        ActionNode {
                            label: ACT_TRUTHFUL,
                            prob: e.t_m1,
                            inc: Inc::NONE,
                            next: c2_minor_rec(p, c, true, rejected_serious),
                        },
                        ActionNode {
                            label: ACT_OVERTREAT,
                            prob: 1.0 - e.t_m1,
                            inc: Inc::NONE,
                            next: c2_serious_rec(p, c, true, rejected_serious),
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
                next: c2_serious_rec(p, c, false, rejected_serious),
            },
            Branch {
                prob: 1.0 - p.h,
                inc: Inc::NONE,
                next: Node::Decide(Decision {
                    owner: Owner::SecondExpert,
                    setting: SET_E_SERIOUS_ANY,
                    off_path_weight: 1.0,
                    actions: vec![
                        ActionNode {
                            label: ACT_TRUTHFUL,
                            prob: e.t_s1,
                            inc: Inc::NONE,
                            next: c2_serious_rec(p, c, false, rejected_serious),
                        },
                        ActionNode {
                            label: ACT_UNDERTREAT,
                            prob: 1.0 - e.t_s1,
                            inc: Inc::NONE,
                            next: c2_minor_rec(p, c, false, rejected_serious),
                        },
                    ],
                }),
            },
        ])
    }
}

/// Second-visit minor recommendation. After a rejected minor the acceptance
/// probability is the consumer's `a_m2` choice; after a rejected serious it
/// is pinned to one — a repeated search cannot pay once a serious
/// recommendation has already been turned down, so accepting dominates and
/// the deviation checker audits the pin like any other action.
fn c2_minor_rec(p: &ModelParams, c: &ConsumerStrategy, minor: bool, rejected_serious: bool) -> Node {
    let (setting, accept_prob) = if rejected_serious {
        (SET_C2_MINOR_AFTER_SERIOUS, 1.0)
    } else {
        (SET_C2_MINOR_AFTER_MINOR, c.a_m2)
    };
    let accept_cost = if minor { p.p_m } else { p.p_m + p.l_s };
    let reject_cost = if minor { p.l_m } else { p.l_s };
    Node::Decide(Decision {
        owner: Owner::Consumer,
        setting,
        off_path_weight: if minor { 1.0 } else { 0.0 },
        actions: vec![
            ActionNode {
                label: ACT_ACCEPT,
                prob: accept_prob,
                inc: Inc::cost_e2(accept_cost, p.margin_m())
                    .tag(if minor { 0 } else { EV_UNDERTREAT }),
                next: Node::End,
            },
            ActionNode {
                label: ACT_REJECT,
                prob: 1.0 - accept_prob,
                inc: Inc::cost(reject_cost),
                next: Node::End,
            },
        ],
    })
}

fn c2_serious_rec(p: &ModelParams, c: &ConsumerStrategy, minor: bool, rejected_serious: bool) -> Node {
    let setting = if rejected_serious {
        crate::oracle::tree::SET_C2_SERIOUS_AFTER_SERIOUS
    } else {
        crate::oracle::tree::SET_C2_SERIOUS_AFTER_MINOR
    };
    base::c2_serious_rec(p, c, setting, minor, true)
}
