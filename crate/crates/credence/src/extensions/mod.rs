//! Equilibria and thresholds for the three market extensions: diagnostic
//! error, capacity shocks, and hidden diagnosis history.

pub mod capacity;
pub mod epsilon;
pub mod hidden_history;

pub use capacity::{
    capacity_chi_star, capacity_equilibrium, capacity_thresholds, strategic_undertreatment,
    CapacityThresholds,
};
pub use epsilon::{
    epsilon_equilibrium, epsilon_error_rate_effect, epsilon_star, epsilon_thresholds,
    EpsilonThresholds, ErrorRateEffect,
};
pub use hidden_history::{
    hidden_history_equilibrium, hidden_history_thresholds, visit_posteriors,
    HiddenHistoryThresholds, VisitPosteriors,
};
