use rayon::prelude::*;

use crate::derive_seed;
use crate::distributions::{
    sample_stratified, w1_sorted, EmpiricalDistribution, InitialDistributionSpec, OMEGA_MAX,
    OMEGA_MIN,
};
use crate::kernels::LocalKernel;

use super::{MeanFieldError, MeanFieldSystem, PSI_TOLERANCE};

const MIN_PARTICLES: usize = 1000;

/// Particle ensembles of every population at the saved steps.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleRun {
    pub steps: Vec<usize>,
    pub times: Vec<f64>,
    /// `particles[frame][population]`.
    pub particles: Vec<Vec<EmpiricalDistribution>>,
}

impl OracleRun {
    pub fn final_particles(&self) -> &[EmpiricalDistribution] {
        self.particles.last().map_or(&[], Vec::as_slice)
    }
}

/// Sorted positions and running sums for windowed uniform-kernel moments.
struct Ensemble {
    sorted: Vec<f64>,
    prefix: Vec<f64>,
}

impl Ensemble {
    fn new(x: &[f64]) -> Self {
        let mut sorted = x.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mut prefix = Vec::with_capacity(sorted.len() + 1);
        prefix.push(0.0);
        let mut acc = 0.0;
        for y in &sorted {
            acc += y;
            prefix.push(acc);
        }
        Self { sorted, prefix }
    }

    /// `(Σ κ (y - x), Σ κ) / n` over the ensemble.
    fn moments(&self, kernel: &LocalKernel, x: f64, eps: f64) -> (f64, f64) {
        let n = self.sorted.len() as f64;
        let lo = self.sorted.partition_point(|y| x - y > eps);
        let hi = self.sorted.partition_point(|y| y - x <= eps);
        if let LocalKernel::Uniform = kernel {
            let count = (hi - lo) as f64;
            let sum = self.prefix[hi] - self.prefix[lo];
            return ((sum - count * x) / n, count / n);
        }
        let mut num = 0.0;
        let mut den = 0.0;
        for y in &self.sorted[lo..hi] {
            let k = kernel.eval(x, *y, eps);
            num += k * (y - x);
            den += k;
        }
        (num / n, den / n)
    }
}

fn drifts(
    system: &MeanFieldSystem,
    x: &[Vec<f64>],
    kmat: &[Vec<f64>],
) -> Result<Vec<Vec<f64>>, MeanFieldError> {
    let ensembles: Vec<Ensemble> = x.iter().map(|p| Ensemble::new(p)).collect();
    system
        .populations
        .iter()
        .enumerate()
        .map(|(k, pop)| {
            if pop.alpha == 0.0 {
                return Ok(vec![0.0; x[k].len()]);
            }
            let out: Vec<Result<f64, MeanFieldError>> = x[k]
                .par_iter()
                .map(|&xi| {
                    let mut num = 0.0;
                    let mut den = 0.0;
                    for (r, other) in system.populations.iter().enumerate() {
                        let w = other.lambda * kmat[k][r];
                        if w == 0.0 {
                            continue;
                        }
                        let (a, b) = ensembles[r].moments(&pop.kernel, xi, pop.epsilon);
                        num += w * a;
                        den += w * b;
                    }
                    if !(den > PSI_TOLERANCE) {
                        return Err(MeanFieldError::DegenerateDenominator {
                            population: k,
                            x: xi,
                            psi: den,
                        });
                    }
                    Ok(pop.alpha * num / den)
                })
                .collect();
            out.into_iter().collect()
        })
        .collect()
}

fn advance(x: &[Vec<f64>], k: &[Vec<f64>], h: f64) -> Vec<Vec<f64>> {
    x.iter()
        .zip(k)
        .map(|(x, k)| x.iter().zip(k).map(|(x, k)| x + h * k).collect())
        .collect()
}

/// Advects stratified samples of each initial law along the velocity
/// generated by the particles themselves (RK4, population kernel held fixed
/// within a step). `laws[k]` is the initial law of population `k`; the grid
/// densities of `system` are not used.
pub fn characteristics_oracle(
    system: &MeanFieldSystem,
    laws: &[InitialDistributionSpec],
    n_particles: usize,
    seed: u64,
) -> Result<OracleRun, MeanFieldError> {
    system.validate()?;
    if laws.len() != system.populations.len() {
        return Err(MeanFieldError::InvalidSystem(format!(
            "{} initial laws for {} populations",
            laws.len(),
            system.populations.len()
        )));
    }
    if n_particles < MIN_PARTICLES {
        return Err(MeanFieldError::InvalidSystem(format!(
            "oracle needs at least {MIN_PARTICLES} particles, got {n_particles}"
        )));
    }
    let mut x: Vec<Vec<f64>> = laws
        .iter()
        .enumerate()
        .map(|(k, law)| {
            sample_stratified(law, n_particles, derive_seed(seed, k as u64))
                .map(|d| d.samples().to_vec())
        })
        .collect::<Result<_, _>>()?;
    let p = x.len();
    let dt = system.dt;
    let n_steps = system.n_steps();
    let mut run = OracleRun {
        steps: Vec::new(),
        times: Vec::new(),
        particles: Vec::new(),
    };
    let save = |x: &[Vec<f64>], step: usize, run: &mut OracleRun| {
        run.steps.push(step);
        run.times.push(step as f64 * dt);
        run.particles.push(
            x.iter()
                .map(|p| EmpiricalDistribution::new(p.clone()))
                .collect::<Result<_, _>>()?,
        );
        Ok::<(), MeanFieldError>(())
    };
    save(&x, 0, &mut run)?;
    for step in 1..=n_steps {
        let t = (step - 1) as f64 * dt;
        let sorted: Vec<Vec<f64>> = x
            .iter()
            .map(|p| {
                let mut s = p.clone();
                s.sort_by(f64::total_cmp);
                s
            })
            .collect();
        let kmat: Vec<Vec<f64>> = (0..p)
            .map(|k| {
                (0..p)
                    .map(|r| {
                        let w = if k == r {
                            0.0
                        } else {
                            w1_sorted(&sorted[k], &sorted[r])
                        };
                        system
                            .kernel
                            .eval_pair(w, t, r, k, system.populations[k].sigma)
                    })
                    .collect()
            })
            .collect();
        let k1 = drifts(system, &x, &kmat)?;
        let k2 = drifts(system, &advance(&x, &k1, dt / 2.0), &kmat)?;
        let k3 = drifts(system, &advance(&x, &k2, dt / 2.0), &kmat)?;
        let k4 = drifts(system, &advance(&x, &k3, dt), &kmat)?;
        for k in 0..p {
            for i in 0..x[k].len() {
                let v = k1[k][i] + 2.0 * k2[k][i] + 2.0 * k3[k][i] + k4[k][i];
                x[k][i] = (x[k][i] + dt / 6.0 * v).clamp(OMEGA_MIN, OMEGA_MAX);
            }
        }
        if step % system.save_every == 0 || step == n_steps {
            save(&x, step, &mut run)?;
        }
    }
    Ok(run)
}
