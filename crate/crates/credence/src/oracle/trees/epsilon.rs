//! Decision tree with diagnostic error: experts act on a noisy signal.
//!
//! Every visit draws an independent diagnosis that matches the true problem
//! with probability `1 - epsilon`. Honest experts recommend exactly what
//! they diagnose, so a wrong diagnosis produces an unintended wrong
//! recommendation; opportunistic experts play their recommendation strategy
//! against the diagnosis. A strategically undertreated consumer returns only
//! when the problem really was serious — with the complementary probability
//! the minor treatment happened to be appropriate and the game ends.

use crate::error::{CredenceError, Result};
use crate::oracle::tree::*;
use crate::params::ModelParams;
use crate::strategy::{ConsumerStrategy, ExpertStrategy};

use super::base;

pub(crate) fn build(
    p: &ModelParams,
    epsilon: f64,
    e: &ExpertStrategy,
    c: &ConsumerStrategy,
) -> Result<Node> {
    if !epsilon.is_finite() || !(0.0..0.5).contains(&epsilon) {
        return Err(CredenceError::Precondition(format!(
            "diagnosis error rate must lie in [0, 0.5), got {epsilon}"
        )));
    }
    let state = |minor: bool| {
        Node::chance(vec![
            Branch {
                prob: p.h,
                inc: Inc::NONE,
                next: honest1(p, epsilon, e, c, minor),
            },
            Branch {
                prob: 1.0 - p.h,
                inc: Inc::NONE.tag(EV_OPPORTUNISTIC),
                next: opportunistic1(p, epsilon, e, c, minor),
            },
        ])
    };
    let first_visit = Node::chance(vec![
        Branch {
            prob: p.mu,
            inc: Inc::NONE,
            next: state(true),
        },
        Branch {
            prob: 1.0 - p.mu,
            inc: Inc::NONE,
            next: state(false),
        },
    ]);
    // The first search cost is sunk before any recommendation arrives.
    Ok(Node::Chance(vec![Branch {
        prob: 1.0,
        inc: Inc::cost(p.k),
        next: first_visit,
    }]))
}

/// Honest initial expert: recommends whatever the diagnosis says, which is
/// wrong with probability `epsilon`.
fn honest1(p: &ModelParams, eps: f64, e: &ExpertStrategy, c: &ConsumerStrategy, minor: bool) -> Node {
    let right = if minor {
        c1_minor_rec(p, eps, e, c, true, false)
    } else {
        c1_serious_rec(p, eps, e, c, false, false)
    };
    let wrong = if minor {
        c1_serious_rec(p, eps, e, c, true, false)
    } else {
        c1_minor_rec(p, eps, e, c, false, false)
    };
    Node::chance(vec![
        Branch {
            prob: 1.0 - eps,
            inc: Inc::NONE,
            next: right,
        },
        Branch {
            prob: eps,
            inc: Inc::NONE,
            next: wrong,
        },
    ])
}

/// Opportunistic initial expert: the diagnosis draw selects which
/// recommendation policy applies; the true state only shapes what follows.
fn opportunistic1(
    p: &ModelParams,
    eps: f64,
    e: &ExpertStrategy,
    c: &ConsumerStrategy,
    minor: bool,
) -> Node {
    let diag_match = if minor {
        expert1_minor_diag(p, eps, e, c, true)
    } else {
        expert1_serious_diag(p, eps, e, c, false)
    };
    let diag_mismatch = if minor {
        expert1_serious_diag(p, eps, e, c, true)
    } else {
        expert1_minor_diag(p, eps, e, c, false)
    };
    Node::chance(vec![
        Branch {
            prob: 1.0 - eps,
            inc: Inc::NONE,
            next: diag_match,
        },
        Branch {
            prob: eps,
            inc: Inc::NONE,
            next: diag_mismatch,
        },
    ])
}

/// Opportunistic expert holding a minor diagnosis; `minor` is the true state.
fn expert1_minor_diag(
    p: &ModelParams,
    eps: f64,
    e: &ExpertStrategy,
    c: &ConsumerStrategy,
    minor: bool,
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
                next: c1_minor_rec(p, eps, e, c, minor, true),
            },
            ActionNode {
                label: ACT_OVERTREAT,
                prob: 1.0 - e.t_m1,
                inc: Inc::NONE,
                next: c1_serious_rec(p, eps, e, c, minor, true),
            },
        ],
    })
}

/// Opportunistic expert holding a serious diagnosis; `minor` is the true
/// state.
fn expert1_serious_diag(
    p: &ModelParams,
    eps: f64,
    e: &ExpertStrategy,
    c: &ConsumerStrategy,
    minor: bool,
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
                next: c1_serious_rec(p, eps, e, c, minor, true),
            },
            ActionNode {
                label: ACT_UNDERTREAT,
                prob: 1.0 - e.t_s1,
                inc: Inc::NONE,
                next: c1_minor_rec(p, eps, e, c, minor, true),
            },
        ],
    })
}

fn c1_minor_rec(
    p: &ModelParams,
    eps: f64,
    e: &ExpertStrategy,
    c: &ConsumerStrategy,
    minor: bool,
    opportunistic: bool,
) -> Node {
    let e1 = if opportunistic { p.margin_m() } else { 0.0 };
    // A minor treatment on a truly minor problem ends the game even when the
    // recommendation was a strategic guess; only a truly serious problem
    // comes to light and triggers the follow-up choice.
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
                next: second_visit(p, eps, e, c, minor, false),
            },
        ],
    })
}

fn c1_serious_rec(
    p: &ModelParams,
    eps: f64,
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
                next: second_visit(p, eps, e, c, minor, true),
            },
        ],
    })
}

/// Fresh expert, fresh diagnosis draw. Recommendation endpoints reuse the
/// base nodes: a second-visit undertreatment is never fixed regardless of
/// how it arose.
fn second_visit(
    p: &ModelParams,
    eps: f64,
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
    let minor_rec = |opp: bool| base::c2_minor_rec(p, c, set_minor_rec, minor, opp);
    let serious_rec = |opp: bool| base::c2_serious_rec(p, c, set_serious_rec, minor, opp);

    let honest = {
        let (right, wrong) = if minor {
            (minor_rec(false), serious_rec(false))
        } else {
            (serious_rec(false), minor_rec(false))
        };
        Node::chance(vec![
            Branch {
                prob: 1.0 - eps,
                inc: Inc::NONE,
                next: right,
            },
            Branch {
                prob: eps,
                inc: Inc::NONE,
                next: wrong,
            },
        ])
    };

    let expert2_minor_diag = Node::Decide(Decision {
        owner: Owner::SecondExpert,
        setting: SET_E2_MINOR,
        off_path_weight: 1.0,
        actions: vec![
            ActionNode {
                label: ACT_TRUTHFUL,
                prob: e.t_m2,
                inc: Inc::NONE,
                next: minor_rec(true),
            },
            ActionNode {
                label: ACT_OVERTREAT,
                prob: 1.0 - e.t_m2,
                inc: Inc::NONE,
                next: serious_rec(true),
            },
        ],
    });
    let expert2_serious_diag = Node::Decide(Decision {
        owner: Owner::SecondExpert,
        setting: SET_E2_SERIOUS,
        off_path_weight: 1.0,
        actions: vec![
            ActionNode {
                label: ACT_TRUTHFUL,
                prob: e.t_s2,
                inc: Inc::NONE,
                next: serious_rec(true),
            },
            ActionNode {
                label: ACT_UNDERTREAT,
                prob: 1.0 - e.t_s2,
                inc: Inc::NONE,
                next: minor_rec(true),
            },
        ],
    });
    let opportunistic = {
        let (diag_match, diag_mismatch) = if minor {
            (expert2_minor_diag, expert2_serious_diag)
        } else {
            (expert2_serious_diag, expert2_minor_diag)
        };
        Node::chance(vec![
            Branch {
                prob: 1.0 - eps,
                inc: Inc::NONE,
                next: diag_match,
            },
            Branch {
                prob: eps,
                inc: Inc::NONE,
                next: diag_mismatch,
            },
        ])
    };

    Node::chance(vec![
        Branch {
            prob: p.h,
            inc: Inc::NONE,
            next: honest,
        },
        Branch {
            prob: 1.0 - p.h,
            inc: Inc::NONE,
            next: opportunistic,
        },
    ])
}
