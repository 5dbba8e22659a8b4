use rayon::prelude::*;

use crate::distributions::{w1_grid, GridDensity, OMEGA_MIN};
use crate::micro::DistanceRecord;

use super::{MeanFieldError, MeanFieldPopulation, MeanFieldSystem};

/// Largest admissible CFL number.
pub const CFL_LIMIT: f64 = 0.9;
/// Denominators at or below this are degenerate.
pub const PSI_TOLERANCE: f64 = 1e-14;
/// Cell mass below which an interface velocity is irrelevant to transport.
const NEGLIGIBLE_MASS: f64 = 1e-12;
const MASS_STEP_TOLERANCE: f64 = 1e-12;

/// Velocities at the `n_cells + 1` cell interfaces of one population. The two
/// boundary entries are always zero.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityField {
    values: Vec<f64>,
}

impl VelocityField {
    pub fn new(mut values: Vec<f64>) -> Result<Self, MeanFieldError> {
        if values.len() < 2 {
            return Err(MeanFieldError::InvalidSystem(
                "velocity field needs two edges".into(),
            ));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(MeanFieldError::InvalidSystem(format!(
                "non-finite velocity {v}"
            )));
        }
        let n = values.len() - 1;
        values[0] = 0.0;
        values[n] = 0.0;
        Ok(Self { values })
    }

    pub fn zero(n_cells: usize) -> Self {
        Self {
            values: vec![0.0; n_cells + 1],
        }
    }

    pub fn n_cells(&self) -> usize {
        self.values.len() - 1
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `max_i (v⁺_{i+1/2} - v⁻_{i-1/2}) · dt / Δx`, the fraction of a cell's
    /// content leaving it in one step.
    pub fn cfl(&self, dt: f64) -> f64 {
        let dx = 2.0 / self.n_cells() as f64;
        let v = &self.values;
        (0..self.n_cells())
            .map(|i| v[i + 1].max(0.0) - v[i].min(0.0))
            .fold(0.0, f64::max)
            * dt
            / dx
    }
}

fn kernel_matrix(
    populations: &[MeanFieldPopulation],
    system: &MeanFieldSystem,
    t: f64,
) -> Result<Vec<Vec<f64>>, MeanFieldError> {
    let p = populations.len();
    let mut w = vec![vec![0.0; p]; p];
    for k in 0..p {
        for r in k + 1..p {
            let d = w1_grid(&populations[k].density, &populations[r].density)?;
            w[k][r] = d;
            w[r][k] = d;
        }
    }
    Ok((0..p)
        .map(|k| {
            (0..p)
                .map(|r| {
                    system
                        .kernel
                        .eval_pair(w[k][r], t, r, k, populations[k].sigma)
                })
                .collect()
        })
        .collect())
}

/// Numerator and denominator of the velocity of population `k` at `x`.
fn moments(x: f64, populations: &[MeanFieldPopulation], k: usize, weights: &[f64]) -> (f64, f64) {
    let own = &populations[k];
    let density = &own.density;
    let n = density.n_cells();
    let dx = density.dx();
    let eps = own.epsilon;
    // One extra cell on each side; the kernel decides the boundary itself.
    let lo = (((x - eps - OMEGA_MIN) / dx - 0.5).floor() as isize - 1).max(0) as usize;
    let hi = ((((x + eps - OMEGA_MIN) / dx - 0.5).ceil() as isize) + 1).clamp(0, n as isize - 1)
        as usize;
    let mut num = 0.0;
    let mut den = 0.0;
    for c in lo..=hi {
        let y = density.cell_center(c);
        let kappa = own.kernel.eval(x, y, eps);
        if kappa == 0.0 {
            continue;
        }
        for (r, pop) in populations.iter().enumerate() {
            let f = pop.density.values()[c];
            if f == 0.0 || weights[r] == 0.0 {
                continue;
            }
            let m = pop.lambda * weights[r] * kappa * f * dx;
            den += m;
            num += m * (y - x);
        }
    }
    (num, den)
}

/// Velocity of the representative agent of population `k` at `x`.
pub fn velocity(x: f64, system: &MeanFieldSystem, k: usize, t: f64) -> Result<f64, MeanFieldError> {
    let kmat = kernel_matrix(&system.populations, system, t)?;
    let (num, den) = moments(x, &system.populations, k, &kmat[k]);
    if !(den > PSI_TOLERANCE) {
        return Err(MeanFieldError::DegenerateDenominator {
            population: k,
            x,
            psi: den,
        });
    }
    Ok(system.populations[k].alpha * num / den)
}

/// Interface velocities of every population from the current densities.
pub fn velocity_fields(
    populations: &[MeanFieldPopulation],
    system: &MeanFieldSystem,
    t: f64,
) -> Result<Vec<VelocityField>, MeanFieldError> {
    let kmat = kernel_matrix(populations, system, t)?;
    let n = populations[0].density.n_cells();
    populations
        .iter()
        .enumerate()
        .map(|(k, pop)| {
            if pop.alpha == 0.0 {
                return Ok(VelocityField::zero(n));
            }
            let dx = pop.density.dx();
            let interior: Vec<Result<f64, MeanFieldError>> = (1..n)
                .into_par_iter()
                .map(|e| {
                    let x = pop.density.edge(e);
                    let (num, den) = moments(x, populations, k, &kmat[k]);
                    if den > PSI_TOLERANCE {
                        return Ok(pop.alpha * num / den);
                    }
                    let f = pop.density.values();
                    if (f[e - 1] + f[e]) * dx <= NEGLIGIBLE_MASS {
                        Ok(0.0)
                    } else {
                        Err(MeanFieldError::DegenerateDenominator {
                            population: k,
                            x,
                            psi: den,
                        })
                    }
                })
                .collect();
            let mut values = Vec::with_capacity(n + 1);
            values.push(0.0);
            for v in interior {
                values.push(v?);
            }
            values.push(0.0);
            VelocityField::new(values)
        })
        .collect()
}

/// Upwind fluxes `F_{i-1/2}` at all `n_cells + 1` interfaces.
pub fn fluxes(density: &GridDensity, field: &VelocityField) -> Vec<f64> {
    let f = density.values();
    let v = field.values();
    let n = f.len();
    let mut out = vec![0.0; n + 1];
    for e in 1..n {
        out[e] = v[e].max(0.0) * f[e - 1] + v[e].min(0.0) * f[e];
    }
    out
}

/// One conservative first-order upwind step. Rejects steps above the CFL
/// limit.
pub fn upwind_step(
    density: &GridDensity,
    field: &VelocityField,
    dt: f64,
) -> Result<GridDensity, MeanFieldError> {
    upwind_step_checked(density, field, dt, 0)
}

fn upwind_step_checked(
    density: &GridDensity,
    field: &VelocityField,
    dt: f64,
    population: usize,
) -> Result<GridDensity, MeanFieldError> {
    if field.n_cells() != density.n_cells() {
        return Err(crate::distributions::DistributionError::Shape {
            left: density.n_cells(),
            right: field.n_cells(),
        }
        .into());
    }
    let cfl = field.cfl(dt);
    if cfl > CFL_LIMIT {
        return Err(MeanFieldError::Cfl {
            cfl,
            limit: CFL_LIMIT,
            dt,
            max_dt: dt * CFL_LIMIT / cfl,
        });
    }
    // Same update as differencing `fluxes`, grouped so that every term is
    // non-negative under the CFL bound: rounding cannot create negative mass.
    let c = dt / density.dx();
    let f = density.values();
    let u = field.values();
    let n = f.len();
    let mut next = Vec::with_capacity(n);
    for (i, fi) in f.iter().enumerate() {
        let out = u[i + 1].max(0.0) - u[i].min(0.0);
        let mut v = fi * (1.0 - c * out);
        if i > 0 {
            v += c * (u[i].max(0.0) * f[i - 1]);
        }
        if i + 1 < n {
            v += c * (-u[i + 1].min(0.0) * f[i + 1]);
        }
        if v < 0.0 {
            return Err(MeanFieldError::Negative {
                population,
                cell: i,
                value: v,
            });
        }
        next.push(v);
    }
    let next = GridDensity::from_values_unchecked(next);
    let drift = next.mass() - density.mass();
    if drift.abs() > MASS_STEP_TOLERANCE {
        return Err(MeanFieldError::MassDrift { population, drift });
    }
    Ok(next)
}

/// Density snapshots and pairwise distances of a mean-field run.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanFieldRun {
    pub steps: Vec<usize>,
    pub times: Vec<f64>,
    /// `densities[frame][population]`.
    pub densities: Vec<Vec<GridDensity>>,
    pub distances: Vec<DistanceRecord>,
    /// Largest `|mass - 1|` seen over all populations and steps.
    pub max_mass_error: f64,
    /// Transport steps taken, including CFL sub-steps.
    pub substeps: usize,
}

impl MeanFieldRun {
    pub fn final_densities(&self) -> &[GridDensity] {
        self.densities.last().map_or(&[], Vec::as_slice)
    }
}

fn distances(
    populations: &[MeanFieldPopulation],
    step: usize,
    t: f64,
) -> Result<Vec<DistanceRecord>, MeanFieldError> {
    let mut out = Vec::new();
    for a in 0..populations.len() {
        for b in a + 1..populations.len() {
            out.push(DistanceRecord {
                step,
                t,
                partition: 0,
                group_a: a,
                group_b: b,
                w1: w1_grid(&populations[a].density, &populations[b].density)?,
            });
        }
    }
    Ok(out)
}

/// Integrates to `t_end` with nominal step `dt`. A step whose CFL number
/// exceeds the limit is split into equal sub-steps, with the velocity
/// recomputed before each one.
pub fn run_meanfield(system: &MeanFieldSystem) -> Result<MeanFieldRun, MeanFieldError> {
    system.validate()?;
    let mut pops = system.populations.clone();
    let n_steps = system.n_steps();
    let mut run = MeanFieldRun {
        steps: Vec::new(),
        times: Vec::new(),
        densities: Vec::new(),
        distances: Vec::new(),
        max_mass_error: 0.0,
        substeps: 0,
    };
    let save = |pops: &[MeanFieldPopulation], step: usize, run: &mut MeanFieldRun| {
        let t = step as f64 * system.dt;
        run.steps.push(step);
        run.times.push(t);
        run.densities
            .push(pops.iter().map(|p| p.density.clone()).collect());
        run.distances.extend(distances(pops, step, t)?);
        Ok::<(), MeanFieldError>(())
    };
    save(&pops, 0, &mut run)?;
    for step in 1..=n_steps {
        let t0 = (step - 1) as f64 * system.dt;
        let mut elapsed = 0.0;
        let mut remaining = system.dt;
        loop {
            let fields = velocity_fields(&pops, system, t0 + elapsed)?;
            let cfl = fields.iter().map(|f| f.cfl(remaining)).fold(0.0, f64::max);
            let (h, last) = if cfl <= CFL_LIMIT {
                (remaining, true)
            } else {
                (remaining / (cfl / CFL_LIMIT).ceil(), false)
            };
            let next: Vec<Result<GridDensity, MeanFieldError>> = pops
                .par_iter()
                .zip(&fields)
                .enumerate()
                .map(|(k, (p, f))| upwind_step_checked(&p.density, f, h, k))
                .collect();
            for (p, d) in pops.iter_mut().zip(next) {
                p.density = d?;
                run.max_mass_error = run.max_mass_error.max((p.density.mass() - 1.0).abs());
            }
            run.substeps += 1;
            if last {
                break;
            }
            elapsed += h;
            remaining -= h;
        }
        if step % system.save_every == 0 || step == n_steps {
            save(&pops, step, &mut run)?;
        }
    }
    Ok(run)
}
