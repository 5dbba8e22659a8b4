//! Mean-field limit: one density per sub-population transported by the
//! continuity equation `∂_t μ^k + ∂_x(V^k μ^k) = 0`, with
//!
//! ```text
//! V^k(x) = α_k Σ_r λ_r K_kr ∫ κ^k(x, y) (y - x) dμ^r(y) / ψ^k(x),
//! ψ^k(x) = Σ_r λ_r K_kr ∫ κ^k(x, y) dμ^r(y),
//! ```
//!
//! where `K_kr` is the population kernel at `W1(μ^k, μ^r)`. The grid solver
//! is first-order upwind finite volume; [`characteristics_oracle`] advects
//! particles along the same velocity for cross-checks.

mod characteristics;
mod solver;

pub use characteristics::{characteristics_oracle, OracleRun};
pub use solver::{
    fluxes, run_meanfield, upwind_step, velocity, velocity_fields, MeanFieldRun, VelocityField,
    CFL_LIMIT, PSI_TOLERANCE,
};

use thiserror::Error;

use crate::distributions::{DistributionError, GridDensity};
use crate::kernels::{LocalKernel, PopulationKernel};

const LAMBDA_SUM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeanFieldError {
    #[error("invalid mean-field system: {0}")]
    InvalidSystem(String),
    #[error("CFL number {cfl} exceeds {limit} at dt = {dt}; largest stable dt is {max_dt}")]
    Cfl {
        cfl: f64,
        limit: f64,
        dt: f64,
        max_dt: f64,
    },
    #[error("population {population}: denominator ψ = {psi} at x = {x}")]
    DegenerateDenominator { population: usize, x: f64, psi: f64 },
    #[error("population {population}: mass changed by {drift} in one step")]
    MassDrift { population: usize, drift: f64 },
    #[error("population {population}: negative density {value} in cell {cell}")]
    Negative {
        population: usize,
        cell: usize,
        value: f64,
    },
    #[error(transparent)]
    Distribution(#[from] DistributionError),
}

/// Representative-agent parameters and current density of one sub-population.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanFieldPopulation {
    pub name: String,
    pub density: GridDensity,
    /// Mass fraction `λ_k`.
    pub lambda: f64,
    pub alpha: f64,
    pub epsilon: f64,
    pub sigma: Option<f64>,
    pub kernel: LocalKernel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeanFieldSystem {
    pub populations: Vec<MeanFieldPopulation>,
    pub kernel: PopulationKernel,
    pub dt: f64,
    pub t_end: f64,
    pub save_every: usize,
}

impl MeanFieldSystem {
    pub fn n_cells(&self) -> usize {
        self.populations.first().map_or(0, |p| p.density.n_cells())
    }

    pub fn n_steps(&self) -> usize {
        ((self.t_end / self.dt) - 1e-9).ceil().max(1.0) as usize
    }

    pub fn validate(&self) -> Result<(), MeanFieldError> {
        let bad = |m: String| Err(MeanFieldError::InvalidSystem(m));
        if self.populations.is_empty() {
            return bad("no populations".into());
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt = {} must be positive", self.dt));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return bad(format!("t_end = {} must be positive", self.t_end));
        }
        if self.save_every == 0 {
            return bad("save_every must be at least 1".into());
        }
        self.kernel
            .validate()
            .map_err(|e| MeanFieldError::InvalidSystem(e.to_string()))?;
        let n = self.n_cells();
        let mut total = 0.0;
        for p in &self.populations {
            if p.density.n_cells() != n {
                return Err(DistributionError::Shape {
                    left: n,
                    right: p.density.n_cells(),
                }
                .into());
            }
            if !(p.lambda > 0.0 && p.lambda <= 1.0) {
                return bad(format!(
                    "`{}`: mass fraction {} outside (0, 1]",
                    p.name, p.lambda
                ));
            }
            if !(0.0..=1.0).contains(&p.alpha) {
                return bad(format!("`{}`: alpha {} outside [0, 1]", p.name, p.alpha));
            }
            if !(p.epsilon > 0.0 && p.epsilon.is_finite()) {
                return bad(format!(
                    "`{}`: epsilon {} must be positive",
                    p.name, p.epsilon
                ));
            }
            if let Some(s) = p.sigma {
                if !(s > 0.0 && s.is_finite()) {
                    return bad(format!("`{}`: sigma {s} must be positive", p.name));
                }
            }
            p.kernel
                .validate()
                .map_err(|e| MeanFieldError::InvalidSystem(format!("`{}`: {e}", p.name)))?;
            total += p.lambda;
        }
        if (total - 1.0).abs() > LAMBDA_SUM_TOLERANCE {
            return bad(format!("mass fractions sum to {total}, not 1"));
        }
        Ok(())
    }
}
