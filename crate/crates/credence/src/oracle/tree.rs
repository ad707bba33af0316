//! Explicit decision-tree evaluation: the ground truth the closed forms are
//! checked against.
//!
//! Each market model is spelled out as a small extensive-form tree over
//! chance moves (problem type, expert type, shocks), expert recommendation
//! choices, and consumer accept/reject/search choices. Evaluation walks the
//! tree with the profile's behavior probabilities and reports, per
//! information set, the expected value of every available action — the raw
//! material for one-shot-deviation checks, best responses, and equilibrium
//! search. Profit and welfare fall out of the same walk, so none of it
//! depends on the closed-form payoff expressions elsewhere in the crate.

use serde::{Deserialize, Serialize};

use crate::error::{CredenceError, Result};
use crate::model::ModelKind;
use crate::params::ModelParams;
use crate::strategy::{ConsumerStrategy, ExpertStrategy};

use super::trees;

/// Who moves at an information set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Agent {
    Consumer,
    Expert,
}

/// One available action at an information set: its profile probability and
/// its expected value to the mover (beliefs-weighted across the set).
#[derive(Debug, Clone, Serialize)]
pub struct ActionValue {
    pub label: &'static str,
    pub prob: f64,
    pub value: f64,
}

/// All actions of one information set, with the set's on-path reach
/// probability.
#[derive(Debug, Clone, Serialize)]
pub struct DecisionRecord {
    pub agent: Agent,
    pub setting: &'static str,
    pub reach: f64,
    pub actions: Vec<ActionValue>,
}

impl DecisionRecord {
    /// Expected value of following the profile at this set.
    pub fn profile_value(&self) -> f64 {
        self.actions.iter().map(|a| a.prob * a.value).sum()
    }

    /// Largest one-shot deviation gain at this set, and the action achieving
    /// it.
    pub fn best_gain(&self) -> (f64, &'static str) {
        let blend = self.profile_value();
        let mut best = f64::NEG_INFINITY;
        let mut label = "";
        for a in &self.actions {
            if a.value > best {
                best = a.value;
                label = a.label;
            }
        }
        (best - blend, label)
    }
}

/// Full evaluation of a profile on a model's decision tree.
#[derive(Debug, Clone, Serialize)]
pub struct TreeOutcome {
    pub records: Vec<DecisionRecord>,
    /// Opportunistic initial expert's expected profit per first-visit
    /// consumer, return-visit payments included.
    pub profit: f64,
    /// Consumer's expected payoff, all prices, losses, and search costs
    /// (including the first) counted.
    pub welfare: f64,
}

impl TreeOutcome {
    pub fn record(&self, setting: &str) -> Option<&DecisionRecord> {
        self.records.iter().find(|r| r.setting == setting)
    }
}

// ---------------------------------------------------------------------------
// Information-set and action labels shared across model trees.
// ---------------------------------------------------------------------------

pub const SET_E1_MINOR: &str = "expert: first-visit minor problem";
pub const SET_E1_SERIOUS: &str = "expert: first-visit serious problem";
pub const SET_C1_MINOR: &str = "consumer: first-visit minor recommendation";
pub const SET_C1_SERIOUS: &str = "consumer: first-visit serious recommendation";
pub const SET_E2_MINOR: &str = "expert: second-visit minor problem";
pub const SET_E2_SERIOUS: &str = "expert: second-visit serious problem";
pub const SET_C2_MINOR_AFTER_MINOR: &str =
    "consumer: second-visit minor recommendation after rejecting minor";
pub const SET_C2_MINOR_AFTER_SERIOUS: &str =
    "consumer: second-visit minor recommendation after rejecting serious";
pub const SET_C2_SERIOUS_AFTER_MINOR: &str =
    "consumer: second-visit serious recommendation after rejecting minor";
pub const SET_C2_SERIOUS_AFTER_SERIOUS: &str =
    "consumer: second-visit serious recommendation after rejecting serious";
pub const SET_ROUTE: &str = "consumer: follow-up after failed minor treatment";
pub const SET_RETURN: &str = "consumer: return-visit serious recommendation";
pub const SET_REFUSED_ROUTE: &str = "consumer: follow-up after being refused service";
pub const SET_REFUSED_MINOR: &str = "consumer: post-refusal minor recommendation";
pub const SET_REFUSED_SERIOUS: &str = "consumer: post-refusal serious recommendation";
pub const SET_E_MINOR_ANY: &str = "expert: minor problem, visit unknown";
pub const SET_E_SERIOUS_ANY: &str = "expert: serious problem, visit unknown";

pub const ACT_TRUTHFUL: &str = "truthful";
pub const ACT_OVERTREAT: &str = "overtreat";
pub const ACT_UNDERTREAT: &str = "undertreat";
pub const ACT_ACCEPT: &str = "accept";
pub const ACT_REJECT: &str = "reject";
pub const ACT_RETURN: &str = "return to initial expert";
pub const ACT_SEARCH: &str = "search for a new expert";
pub const ACT_UNTREATED: &str = "stay untreated";
pub const ACT_REFUSE: &str = "refuse";
pub const ACT_QUIT: &str = "quit the market";

// ---------------------------------------------------------------------------
// Tree machinery (crate-internal; model builders live in `trees/`).
// ---------------------------------------------------------------------------

/// Bitmask of countable market events picked up along an edge.
pub(crate) type EventMask = u8;
/// The consumer's initial expert is of the opportunistic type.
pub(crate) const EV_OPPORTUNISTIC: EventMask = 1 << 0;
/// The consumer accepted the serious treatment for a minor problem.
pub(crate) const EV_OVERTREAT: EventMask = 1 << 1;
/// The consumer accepted the minor treatment for a serious problem.
pub(crate) const EV_UNDERTREAT: EventMask = 1 << 2;
/// The consumer went back to the initial expert after a failed treatment.
pub(crate) const EV_RETURN: EventMask = 1 << 3;
/// The consumer paid the search cost to consult a second expert.
pub(crate) const EV_SEARCH: EventMask = 1 << 4;

/// Payoff increments picked up when traversing an edge: a consumer cost
/// (positive number, negated into the payoff), profit accruing to the
/// initial expert (`e1`) or to the second-visit expert (`e2`), and event
/// tags for the simulator's counters.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Inc {
    pub cost: f64,
    pub e1: f64,
    pub e2: f64,
    pub events: EventMask,
}

impl Inc {
    pub const NONE: Inc = Inc {
        cost: 0.0,
        e1: 0.0,
        e2: 0.0,
        events: 0,
    };

    pub fn cost(cost: f64) -> Inc {
        Inc { cost, ..Inc::NONE }
    }

    pub fn cost_e1(cost: f64, e1: f64) -> Inc {
        Inc { cost, e1, ..Inc::NONE }
    }

    pub fn cost_e2(cost: f64, e2: f64) -> Inc {
        Inc { cost, e2, ..Inc::NONE }
    }

    /// Attach event tags to this increment.
    pub fn tag(mut self, events: EventMask) -> Inc {
        self.events |= events;
        self
    }
}

/// Whose payoff a decision node maximizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Owner {
    Consumer,
    InitialExpert,
    SecondExpert,
}

impl Owner {
    fn agent(self) -> Agent {
        match self {
            Owner::Consumer => Agent::Consumer,
            _ => Agent::Expert,
        }
    }
}

#[derive(Debug)]
pub(crate) struct Branch {
    pub prob: f64,
    pub inc: Inc,
    pub next: Node,
}

#[derive(Debug)]
pub(crate) struct ActionNode {
    pub label: &'static str,
    pub prob: f64,
    pub inc: Inc,
    pub next: Node,
}

#[derive(Debug)]
pub(crate) struct Decision {
    pub owner: Owner,
    pub setting: &'static str,
    /// Relative weight of this occurrence in the set's belief when the set
    /// is never reached on path (the truthful-recommendation convention).
    pub off_path_weight: f64,
    pub actions: Vec<ActionNode>,
}

#[derive(Debug)]
pub(crate) enum Node {
    Chance(Vec<Branch>),
    Decide(Decision),
    End,
}

impl Node {
    pub fn chance(branches: Vec<Branch>) -> Node {
        debug_assert!(
            (branches.iter().map(|b| b.prob).sum::<f64>() - 1.0).abs() < 1e-9,
            "chance probabilities must sum to 1"
        );
        Node::Chance(branches)
    }

    pub fn leaf(inc: Inc) -> Node {
        Node::Chance(vec![Branch {
            prob: 1.0,
            inc,
            next: Node::End,
        }])
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Val {
    c: f64,
    e1: f64,
    e2: f64,
}

fn apply(inc: Inc, v: Val) -> Val {
    Val {
        c: v.c - inc.cost,
        e1: v.e1 + inc.e1,
        e2: v.e2 + inc.e2,
    }
}

fn eval(node: &Node) -> Val {
    match node {
        Node::End => Val::default(),
        Node::Chance(branches) => {
            let mut total = Val::default();
            for b in branches {
                let v = apply(b.inc, eval(&b.next));
                total.c += b.prob * v.c;
                total.e1 += b.prob * v.e1;
                total.e2 += b.prob * v.e2;
            }
            total
        }
        Node::Decide(d) => {
            let mut total = Val::default();
            for a in &d.actions {
                let v = apply(a.inc, eval(&a.next));
                total.c += a.prob * v.c;
                total.e1 += a.prob * v.e1;
                total.e2 += a.prob * v.e2;
            }
            total
        }
    }
}

/// Accumulates the occurrences of one information set across the tree.
struct SetAccum {
    agent: Agent,
    setting: &'static str,
    labels: Vec<&'static str>,
    probs: Vec<f64>,
    reach: f64,
    on_path_value_sums: Vec<f64>,
    off_weight: f64,
    off_value_sums: Vec<f64>,
}

fn walk(node: &Node, reach: f64, sets: &mut Vec<SetAccum>) {
    match node {
        Node::End => {}
        Node::Chance(branches) => {
            for b in branches {
                walk(&b.next, reach * b.prob, sets);
            }
        }
        Node::Decide(d) => {
            let values: Vec<f64> = d
                .actions
                .iter()
                .map(|a| {
                    let v = apply(a.inc, eval(&a.next));
                    match d.owner {
                        Owner::Consumer => v.c,
                        Owner::InitialExpert => v.e1,
                        Owner::SecondExpert => v.e2,
                    }
                })
                .collect();
            let accum = match sets.iter_mut().find(|s| s.setting == d.setting) {
                Some(a) => a,
                None => {
                    sets.push(SetAccum {
                        agent: d.owner.agent(),
                        setting: d.setting,
                        labels: d.actions.iter().map(|a| a.label).collect(),
                        probs: d.actions.iter().map(|a| a.prob).collect(),
                        reach: 0.0,
                        on_path_value_sums: vec![0.0; d.actions.len()],
                        off_weight: 0.0,
                        off_value_sums: vec![0.0; d.actions.len()],
                    });
                    sets.last_mut().unwrap()
                }
            };
            debug_assert_eq!(accum.labels.len(), values.len(), "{}", d.setting);
            accum.reach += reach;
            accum.off_weight += d.off_path_weight;
            for (i, v) in values.iter().enumerate() {
                accum.on_path_value_sums[i] += reach * v;
                accum.off_value_sums[i] += d.off_path_weight * v;
            }
            for a in &d.actions {
                walk(&a.next, reach * a.prob, sets);
            }
        }
    }
}

/// Evaluate a built tree: per-set action values, profit, and welfare.
///
/// `opportunistic_share` is the probability that the initial expert is
/// opportunistic; the tree only accrues `e1` on those branches, so dividing
/// by the share turns the unconditional expectation into the opportunistic
/// expert's profit.
pub(crate) fn run(root: Node, opportunistic_share: f64) -> TreeOutcome {
    let total = eval(&root);
    let mut sets = Vec::new();
    walk(&root, 1.0, &mut sets);
    let records = sets
        .into_iter()
        .map(|s| {
            let on_path = s.reach > 0.0;
            let denom = if on_path { s.reach } else { s.off_weight };
            debug_assert!(denom > 0.0, "{} has no belief weight", s.setting);
            let sums = if on_path {
                &s.on_path_value_sums
            } else {
                &s.off_value_sums
            };
            DecisionRecord {
                agent: s.agent,
                setting: s.setting,
                reach: s.reach,
                actions: s
                    .labels
                    .iter()
                    .zip(s.probs.iter())
                    .zip(sums.iter())
                    .map(|((label, prob), sum)| ActionValue {
                        label,
                        prob: *prob,
                        value: sum / denom,
                    })
                    .collect(),
            }
        })
        .collect();
    TreeOutcome {
        records,
        profit: total.e1 / opportunistic_share,
        welfare: total.c,
    }
}

pub(crate) fn check_strategies(e: &ExpertStrategy, c: &ConsumerStrategy) -> Result<()> {
    if !e.in_unit() || !c.in_unit() {
        return Err(CredenceError::Precondition(
            "strategy probabilities must lie in [0,1]".into(),
        ));
    }
    Ok(())
}

/// Build `kind`'s decision tree under the given profile, after validating
/// parameters and strategies.
pub(crate) fn build_root(
    kind: ModelKind,
    p: &ModelParams,
    e: &ExpertStrategy,
    c: &ConsumerStrategy,
) -> Result<Node> {
    // The resentment market inverts the search-cost ordering: returning to
    // the expert who failed costs more than a fresh search.
    let rule = match kind {
        ModelKind::Resentment { .. } => crate::params::SearchCostRule::ReturnDearer,
        _ => crate::params::SearchCostRule::ReturnCheaper,
    };
    crate::params::validate_with(p, rule)?;
    check_strategies(e, c)?;
    match kind {
        ModelKind::Base => trees::base::build(p, e, c),
        ModelKind::Epsilon(eps) => trees::epsilon::build(p, eps, e, c),
        ModelKind::Capacity(chi) => trees::capacity::build(p, chi, e, c),
        ModelKind::HiddenHistory => trees::hidden_history::build(p, e, c),
        ModelKind::AltContract => trees::alt_contract::build(p, e, c),
        ModelKind::Delta(delta) => trees::delayed::build(p, delta, e, c),
        ModelKind::Resentment { hidden_history } => {
            trees::resentment::build(p, hidden_history, e, c)
        }
        ModelKind::Heterogeneity(alpha) => trees::heterogeneity::build(p, alpha, e, c),
        ModelKind::EndogenousPrice => trees::endogenous_price::build(p, e, c),
    }
}

/// Evaluate `kind`'s decision tree under the given profile.
pub fn evaluate_tree(
    kind: ModelKind,
    p: &ModelParams,
    e: &ExpertStrategy,
    c: &ConsumerStrategy,
) -> Result<TreeOutcome> {
    let root = build_root(kind, p, e, c)?;
    // The endogenous-price tree models an all-opportunistic market, so the
    // initial expert's whole revenue stream is opportunistic.
    let share = match kind {
        ModelKind::EndogenousPrice => 1.0,
        _ => 1.0 - p.h,
    };
    Ok(run(root, share))
}
