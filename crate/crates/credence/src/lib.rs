//! Equilibrium engine for a two-period credence-service market with
//! consumer search.
//!
//! Consumers with an unknown minor or serious problem visit experts who may
//! misrepresent the diagnosis; consumers can reject a recommendation and
//! search again, and undertreated consumers may return. The crate computes
//! the closed-form equilibria of the base market and its extensions and
//! variants, classifies them into fraud regimes, evaluates profit and
//! welfare, and independently certifies every profile by one-shot-deviation
//! checks on the full decision tree, numeric equilibrium search, and Monte
//! Carlo simulation.

pub mod beliefs;
pub mod equilibrium;
pub mod error;
pub mod extensions;
pub mod model;
pub mod oracle;
pub mod outcomes;
pub mod params;
pub mod payoffs;
pub mod solver;
pub mod strategy;

pub use beliefs::{expected_truthfulness, posterior_beliefs, Beliefs, OFF_PATH_TRUTHFUL};
pub use model::ModelKind;
pub use oracle::{
    best_responses, evaluate_tree, find_equilibria_grid, simulate_market, verify_equilibrium,
    SimulationResult, TreeOutcome, VerificationReport,
};
pub use equilibrium::{
    classify_equilibrium, classify_equilibrium_with_tol, comparative_statics, regime_thresholds,
    EquilibriumProfile, RegimeThresholds, Sign, SignedEstimate, StaticsParam, StaticsReport,
};
pub use error::{CredenceError, Result};
pub use extensions::{
    capacity_chi_star, capacity_equilibrium, capacity_thresholds, epsilon_equilibrium,
    epsilon_error_rate_effect, epsilon_star, epsilon_thresholds, hidden_history_equilibrium,
    hidden_history_thresholds, strategic_undertreatment, visit_posteriors, CapacityThresholds,
    EpsilonThresholds, ErrorRateEffect, HiddenHistoryThresholds, VisitPosteriors,
};
pub use outcomes::{
    consumer_welfare, consumer_welfare_with, expert_profit, monotonicity_report, outcome_metrics,
    statics_thresholds, statics_thresholds_partial, Axis, MonotonicityCell, MonotonicityReport,
    OutcomeMetrics, StaticsThresholds,
};
pub use params::{validate_params, ModelParams};
pub use payoffs::{
    consumer_values, expert_values, period2_strategies, return_decision, ConsumerDecisionValues,
    ExpertDecisionValues, ReturnChoice, SecondVisitBehaviour,
};
pub use strategy::{ConsumerStrategy, ExpertStrategy, Regime};

/// Default numeric tolerance: strategies and beliefs within `TOL` of 0 or 1
/// snap to the boundary, indifference residuals below `TOL` count as exact,
/// and deviation gains above `TOL` fail certification.
pub const TOL: f64 = 1e-9;

/// Snap a probability to 0 or 1 when it sits within [`TOL`] of the boundary,
/// absorbing closed-form rounding noise so that downstream code can compare
/// against the endpoints exactly.
pub fn clamp_unit(x: f64) -> f64 {
    if x.abs() <= TOL {
        0.0
    } else if (x - 1.0).abs() <= TOL {
        1.0
    } else {
        x
    }
}
