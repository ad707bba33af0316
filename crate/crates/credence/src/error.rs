//! Error taxonomy for the equilibrium engine.
//!
//! Errors fall into three families: input problems (`InvalidParams`,
//! `Precondition`), model-region signals that a classifier cannot cover the
//! supplied point (`EpsilonTooLarge`, `NotResentment`, ...), and defensive
//! guards that indicate a bug if they ever fire (`DenominatorVanished`,
//! `NoEquilibriumFound`).

use thiserror::Error;

use crate::strategy::Regime;

/// All failure modes of the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CredenceError {
    /// One or more parameter constraints are violated. Every violated
    /// constraint is listed by name, not just the first.
    #[error("invalid parameters: {}", .0.join("; "))]
    InvalidParams(Vec<String>),

    /// A recommendation arm has probability zero under the supplied strategy,
    /// so its posterior is undefined without an off-path belief convention.
    #[error("{recommendation} recommendation has probability zero; posterior undefined without an off-path convention")]
    ZeroProbabilityEvent { recommendation: &'static str },

    /// Returning to a known expert costs more than a fresh search
    /// (`k_return >= k`); the base-model return rule does not apply and the
    /// point belongs to the resentment variant.
    #[error("return cost is not below search cost; point belongs to the resentment variant")]
    ResentmentRegime,

    /// The resentment variant requires `k_return > k`.
    #[error("resentment variant requires k_return > k")]
    NotResentment,

    /// `p_m + k_return − k <= 0`: the partial-undertreatment region is empty
    /// and its mixing probability is undefined.
    #[error("partial-undertreatment region is empty (p_m + k_return <= k)")]
    EmptyFopuRegion,

    /// The prior sits within tolerance of a regime threshold, so the
    /// classification is a convention rather than a strict-region fact.
    #[error("prior within tolerance of a regime threshold")]
    BoundaryAmbiguity,

    /// A finite-difference probe stepped across a regime boundary; no
    /// single-regime derivative exists there.
    #[error("perturbation crosses a regime boundary ({below} -> {above}); report both sides instead of a derivative")]
    RegimeCrossing { below: Regime, above: Regime },

    /// A comparative-statics threshold is undefined at the supplied
    /// parameters (negative discriminant).
    #[error("threshold {0} is undefined at these parameters")]
    UndefinedThreshold(&'static str),

    /// A closed-form outcome formula was asked for a regime it does not
    /// cover.
    #[error("no closed-form outcome for regime {regime}")]
    RegimeMismatch { regime: Regime },

    /// The diagnosis error rate exceeds the level up to which the regime map
    /// is characterized.
    #[error("epsilon {epsilon} is not below eps_star {eps_star}; regime map not characterized")]
    EpsilonTooLarge { epsilon: f64, eps_star: f64 },

    /// Grid search certified no equilibrium. Existence holds throughout the
    /// characterized regions, so this is a bug signal, not a model fact.
    #[error("grid search certified no equilibrium (bug signal)")]
    NoEquilibriumFound,

    /// Defensive guard: a denominator vanished where the surrounding region
    /// logic should have made that impossible.
    #[error("denominator vanished: {0}")]
    DenominatorVanished(&'static str),

    /// An operation precondition failed (degenerate step, grid too coarse,
    /// zero consumers, negative tolerance, ...).
    #[error("precondition failed: {0}")]
    Precondition(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, CredenceError>;
