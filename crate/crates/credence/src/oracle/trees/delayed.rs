//! Decision tree for the delayed-discovery market: an undertreated consumer
//! notices the unresolved problem before the game ends only with
//! probability 1 − delta; otherwise the serious loss lands with no chance
//! to respond. Everything else matches the base market.

use super::base;
use crate::error::{CredenceError, Result};
use crate::oracle::tree::Node;
use crate::params::ModelParams;
use crate::strategy::{ConsumerStrategy, ExpertStrategy};

pub(crate) fn build(
    p: &ModelParams,
    delta: f64,
    e: &ExpertStrategy,
    c: &ConsumerStrategy,
) -> Result<Node> {
    if !delta.is_finite() || !(0.0..=1.0).contains(&delta) {
        return Err(CredenceError::Precondition(format!(
            "non-discovery probability must lie in [0, 1], got {delta}"
        )));
    }
    base::build_with(p, e, c, base::FollowUpTerms::delayed(p, delta))
}
