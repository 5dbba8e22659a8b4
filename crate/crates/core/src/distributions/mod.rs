//! Opinion distributions over the state space `[-1, 1]`.
//!
//! Two representations are used: [`EmpiricalDistribution`], a sorted sample
//! set standing for the uniform mixture of Dirac masses at the samples, and
//! [`GridDensity`], a cell-averaged density on a uniform mesh. Distances
//! between them are exact 1-Wasserstein distances computed from the CDFs.

mod empirical;
mod grid;
mod initial;
mod wasserstein;

pub use empirical::{cdf_eval, EmpiricalDistribution};
pub use grid::{GridDensity, MASS_TOLERANCE};
pub use initial::{sample_initial, sample_stratified, InitialDistributionSpec, MixtureComponent};
pub(crate) use wasserstein::w1_sorted;
pub use wasserstein::{w1_cdf_integral, w1_empirical, w1_empirical_grid, w1_grid};

use thiserror::Error;

/// Lower end of the opinion space.
pub const OMEGA_MIN: f64 = -1.0;
/// Upper end of the opinion space.
pub const OMEGA_MAX: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DistributionError {
    #[error("invalid distribution: {0}")]
    Invalid(String),
    #[error("grid shape mismatch: {left} cells vs {right} cells")]
    Shape { left: usize, right: usize },
    #[error("grid density mass {mass} deviates from 1 by more than {tolerance}")]
    Mass { mass: f64, tolerance: f64 },
    #[error("invalid distribution spec: {0}")]
    Config(String),
}

pub(crate) fn in_omega(x: f64) -> bool {
    (OMEGA_MIN..=OMEGA_MAX).contains(&x)
}
