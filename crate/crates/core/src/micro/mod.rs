//! Agent-level opinion dynamics.
//!
//! Every model family reduces to one drift,
//!
//! ```text
//! F_i = α_i Σ_j (w_ij / Z_i) (X_j - X_i),   Z_i = Σ_j w_ij,
//! w_ij = [Σ_r γ_r K_r(Λ_r(i), Λ_r(j))] · κ(X_i, X_j, ε_i),
//! ```
//!
//! where `K_r` is the group weight of partition `r`. A single partition with a
//! single group gives the plain bounded-confidence model; frozen weights give
//! the identity-invariant model; live weights give the time-varying model,
//! optionally restricted to each agent's scope; several partitions give the
//! multi-identity model.

mod engine;
mod state;
mod weights;

pub use engine::{drift, DistanceRecord, MicroEngine, MicroRun, Trajectory};
pub use state::{AgentState, Integrator, MicroSystem, Partition, Scope, WeightMode};
pub use weights::{group_distributions, recompute_group_weights, GroupWeightMatrix, Provenance};

use thiserror::Error;

use crate::distributions::DistributionError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("agent {agent}: {reason}")]
    InvalidAgent { agent: usize, reason: String },
    #[error("partition `{partition}` has no agents in group `{group}`")]
    EmptyGroup { partition: String, group: String },
    #[error("invalid system: {0}")]
    InvalidSystem(String),
    #[error("agent {agent} has an empty weighted neighborhood (Z = 0) at step {step}")]
    DegenerateNeighborhood { agent: usize, step: usize },
    #[error(transparent)]
    Distribution(#[from] DistributionError),
}
