//! Game-theoretic oracle: closed-form-free evaluation, certification,
//! search, and simulation built on each model's extensive-form decision
//! tree.
//!
//! The tree encodes chance moves (problem type, expert type), expert
//! recommendation sets, and consumer acceptance sets, with payoff increments
//! on edges. Everything here derives from the tree alone — posterior
//! beliefs, action values, profits, and welfare — so it can serve as an
//! independent check on the closed-form classifier.

pub mod rng;
pub mod search;
pub mod sim;
pub mod tree;
pub(crate) mod trees;
pub mod verify;

pub use rng::StreamRng;
pub use search::find_equilibria_grid;
pub use sim::{simulate_market, SimulationResult};
pub use tree::{evaluate_tree, ActionValue, Agent, DecisionRecord, TreeOutcome};
pub use verify::{
    best_responses, verify_equilibrium, BestResponses, ConsumerResponse, ExpertResponse,
    FixedSide, VerificationReport, Witness,
};
