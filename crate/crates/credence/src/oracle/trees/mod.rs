//! One decision-tree builder per market model.

pub(crate) mod alt_contract;
pub(crate) mod base;
pub(crate) mod capacity;
pub(crate) mod delayed;
pub(crate) mod endogenous_price;
pub(crate) mod epsilon;
pub(crate) mod heterogeneity;
pub(crate) mod hidden_history;
pub(crate) mod resentment;
