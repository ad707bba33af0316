//! Decision tree for the refund contract: when a minor treatment fails to
//! resolve the problem, the initial fee comes back, so a returning consumer
//! pays only the price difference for the serious treatment and the expert
//! earns that difference less the serious cost. Everything else matches the
//! base market.

use super::base;
use crate::error::Result;
use crate::oracle::tree::Node;
use crate::params::ModelParams;
use crate::strategy::{ConsumerStrategy, ExpertStrategy};

pub(crate) fn build(p: &ModelParams, e: &ExpertStrategy, c: &ConsumerStrategy) -> Result<Node> {
    base::build_with(p, e, c, base::FollowUpTerms::refund(p))
}
