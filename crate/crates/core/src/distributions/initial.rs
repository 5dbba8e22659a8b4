use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::grid::{cell_of, edge};
use super::{in_omega, DistributionError, EmpiricalDistribution};

/// Rejection attempts per truncated-Gaussian draw before giving up.
const MAX_REJECTIONS: usize = 1_000_000;

/// Initial opinion law of a sub-population. All endpoints lie in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialDistributionSpec {
    Uniform {
        a: f64,
        b: f64,
    },
    TruncatedGaussian {
        mean: f64,
        std: f64,
        lo: f64,
        hi: f64,
    },
    Dirac {
        x: f64,
    },
    Mixture {
        components: Vec<MixtureComponent>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureComponent {
    pub weight: f64,
    pub law: InitialDistributionSpec,
}

impl InitialDistributionSpec {
    pub fn truncated_gaussian(mean: f64, std: f64) -> Self {
        Self::TruncatedGaussian {
            mean,
            std,
            lo: -1.0,
            hi: 1.0,
        }
    }

    /// Rejects degenerate or out-of-domain parameters.
    pub fn check(&self) -> Result<(), DistributionError> {
        let bounds = |name: &str, v: f64| {
            if in_omega(v) {
                Ok(())
            } else {
                Err(DistributionError::Config(format!(
                    "{name} = {v} outside [-1, 1]"
                )))
            }
        };
        match self {
            Self::Uniform { a, b } => {
                bounds("a", *a)?;
                bounds("b", *b)?;
                if a >= b {
                    return Err(DistributionError::Config(format!(
                        "uniform needs a < b, got a = {a}, b = {b}"
                    )));
                }
            }
            Self::TruncatedGaussian { mean, std, lo, hi } => {
                bounds("lo", *lo)?;
                bounds("hi", *hi)?;
                if !mean.is_finite() {
                    return Err(DistributionError::Config(format!(
                        "mean = {mean} is not finite"
                    )));
                }
                if !(*std > 0.0) || !std.is_finite() {
                    return Err(DistributionError::Config(format!(
                        "std = {std} must be positive"
                    )));
                }
                if lo >= hi {
                    return Err(DistributionError::Config(format!(
                        "truncation needs lo < hi, got lo = {lo}, hi = {hi}"
                    )));
                }
                if self.truncation_mass() <= 0.0 {
                    return Err(DistributionError::Config(
                        "truncation window carries no Gaussian mass".into(),
                    ));
                }
            }
            Self::Dirac { x } => bounds("x", *x)?,
            Self::Mixture { components } => {
                if components.is_empty() {
                    return Err(DistributionError::Config(
                        "mixture has no components".into(),
                    ));
                }
                let mut total = 0.0;
                for c in components {
                    if !(c.weight > 0.0) || !c.weight.is_finite() {
                        return Err(DistributionError::Config(format!(
                            "mixture weight {} must be positive",
                            c.weight
                        )));
                    }
                    total += c.weight;
                    c.law.check()?;
                }
                if (total - 1.0).abs() > 1e-12 {
                    return Err(DistributionError::Config(format!(
                        "mixture weights sum to {total}, expected 1"
                    )));
                }
            }
        }
        Ok(())
    }

    fn truncation_mass(&self) -> f64 {
        match self {
            Self::TruncatedGaussian { mean, std, lo, hi } => {
                std_normal_cdf((hi - mean) / std) - std_normal_cdf((lo - mean) / std)
            }
            _ => 1.0,
        }
    }

    /// Cumulative distribution function.
    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            Self::Uniform { a, b } => ((x - a) / (b - a)).clamp(0.0, 1.0),
            Self::TruncatedGaussian { mean, std, lo, hi } => {
                if x <= *lo {
                    0.0
                } else if x >= *hi {
                    1.0
                } else {
                    let base = std_normal_cdf((lo - mean) / std);
                    let z = std_normal_cdf((x - mean) / std);
                    ((z - base) / self.truncation_mass()).clamp(0.0, 1.0)
                }
            }
            Self::Dirac { x: p } => {
                if x >= *p {
                    1.0
                } else {
                    0.0
                }
            }
            Self::Mixture { components } => {
                components.iter().map(|c| c.weight * c.law.cdf(x)).sum()
            }
        }
    }

    /// Smallest `x` in `[-1, 1]` with `cdf(x) >= u`.
    pub fn quantile(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        match self {
            Self::Uniform { a, b } => (a + u * (b - a)).clamp(*a, *b),
            Self::Dirac { x } => *x,
            _ => {
                let (mut lo, mut hi) = (-1.0_f64, 1.0_f64);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    if self.cdf(mid) >= u {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                hi
            }
        }
    }

    /// Adds `weight ×` the mass of each grid cell to `out`.
    pub(crate) fn accumulate_cell_masses(&self, n_cells: usize, weight: f64, out: &mut [f64]) {
        match self {
            Self::Dirac { x } => out[cell_of(n_cells, *x)] += weight,
            Self::Mixture { components } => {
                for c in components {
                    c.law
                        .accumulate_cell_masses(n_cells, weight * c.weight, out);
                }
            }
            _ => {
                let mut left = self.cdf(edge(n_cells, 0));
                for (i, cell) in out.iter_mut().enumerate() {
                    let right = self.cdf(edge(n_cells, i + 1));
                    *cell += weight * (right - left);
                    left = right;
                }
            }
        }
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> Result<f64, DistributionError> {
        match self {
            Self::Uniform { a, b } => {
                let u: f64 = rng.random();
                Ok((a + u * (b - a)).clamp(*a, *b))
            }
            Self::TruncatedGaussian { mean, std, lo, hi } => {
                let normal = Normal::new(*mean, *std)
                    .map_err(|e| DistributionError::Config(e.to_string()))?;
                for _ in 0..MAX_REJECTIONS {
                    let x = normal.sample(rng);
                    if (*lo..=*hi).contains(&x) {
                        return Ok(x);
                    }
                }
                Err(DistributionError::Config(format!(
                    "truncated Gaussian rejected {MAX_REJECTIONS} draws in a row"
                )))
            }
            Self::Dirac { x } => Ok(*x),
            Self::Mixture { components } => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for c in components {
                    acc += c.weight;
                    if u < acc {
                        return c.law.draw(rng);
                    }
                }
                components[components.len() - 1].law.draw(rng)
            }
        }
    }
}

/// Draws `n` independent samples and sorts them. Deterministic in
/// `(spec, n, seed)`; truncated Gaussians use rejection from the full law.
pub fn sample_initial(
    spec: &InitialDistributionSpec,
    n: usize,
    seed: u64,
) -> Result<EmpiricalDistribution, DistributionError> {
    spec.check()?;
    if n == 0 {
        return Err(DistributionError::Config(
            "sample count must be at least 1".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = (0..n)
        .map(|_| spec.draw(&mut rng))
        .collect::<Result<Vec<_>, _>>()?;
    EmpiricalDistribution::new(samples)
}

/// Stratified inverse-CDF sample: one draw per quantile stratum
/// `[j/n, (j+1)/n)`. Sampling error in W1 decays like `1/n`.
pub fn sample_stratified(
    spec: &InitialDistributionSpec,
    n: usize,
    seed: u64,
) -> Result<EmpiricalDistribution, DistributionError> {
    spec.check()?;
    if n == 0 {
        return Err(DistributionError::Config(
            "sample count must be at least 1".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = (0..n)
        .map(|j| {
            let u: f64 = rng.random();
            spec.quantile((j as f64 + u) / n as f64)
        })
        .collect();
    EmpiricalDistribution::new(samples)
}

fn std_normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dirac_samples_are_constant() {
        let d = sample_initial(&InitialDistributionSpec::Dirac { x: 0.3 }, 4, 99).unwrap();
        assert_eq!(d.samples(), &[0.3; 4]);
    }

    #[test]
    fn uniform_mean_near_center() {
        // |mean| has std 1/sqrt(3 n) ~ 0.0018 at n = 1e5, so 0.02 is > 10 sigma.
        let spec = InitialDistributionSpec::Uniform { a: -1.0, b: 1.0 };
        let d = sample_initial(&spec, 100_000, 7).unwrap();
        assert!(d.mean().abs() < 0.02, "mean {}", d.mean());
    }

    #[test]
    fn truncated_gaussian_stays_in_window() {
        let spec = InitialDistributionSpec::truncated_gaussian(0.0, 0.2);
        let d = sample_initial(&spec, 100_000, 7).unwrap();
        assert!(d.min() >= -1.0 && d.max() <= 1.0);
        let narrow = InitialDistributionSpec::TruncatedGaussian {
            mean: 0.9,
            std: 0.5,
            lo: 0.2,
            hi: 0.4,
        };
        let d = sample_initial(&narrow, 1000, 1).unwrap();
        assert!(d.min() >= 0.2 && d.max() <= 0.4);
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let spec = InitialDistributionSpec::truncated_gaussian(-0.5, 0.15);
        assert_eq!(
            sample_initial(&spec, 50, 3).unwrap(),
            sample_initial(&spec, 50, 3).unwrap()
        );
        assert_ne!(
            sample_initial(&spec, 50, 3).unwrap(),
            sample_initial(&spec, 50, 4).unwrap()
        );
    }

    #[test]
    fn degenerate_specs_are_config_errors() {
        let bad = [
            InitialDistributionSpec::TruncatedGaussian {
                mean: 0.0,
                std: 0.0,
                lo: -1.0,
                hi: 1.0,
            },
            InitialDistributionSpec::TruncatedGaussian {
                mean: 0.0,
                std: 0.1,
                lo: 0.5,
                hi: 0.5,
            },
            InitialDistributionSpec::Uniform { a: 0.2, b: 0.1 },
            InitialDistributionSpec::Uniform { a: -2.0, b: 0.1 },
            InitialDistributionSpec::Mixture {
                components: vec![
                    MixtureComponent {
                        weight: 0.6,
                        law: InitialDistributionSpec::Dirac { x: 0.0 },
                    },
                    MixtureComponent {
                        weight: 0.5,
                        law: InitialDistributionSpec::Dirac { x: 0.1 },
                    },
                ],
            },
        ];
        for spec in bad {
            assert!(
                matches!(
                    sample_initial(&spec, 3, 0),
                    Err(DistributionError::Config(_))
                ),
                "{spec:?}"
            );
        }
    }

    #[test]
    fn quantile_inverts_cdf() {
        let spec = InitialDistributionSpec::Mixture {
            components: vec![
                MixtureComponent {
                    weight: 0.5,
                    law: InitialDistributionSpec::truncated_gaussian(-0.5, 0.1),
                },
                MixtureComponent {
                    weight: 0.5,
                    law: InitialDistributionSpec::Uniform { a: 0.0, b: 1.0 },
                },
            ],
        };
        for u in [0.01, 0.25, 0.5, 0.75, 0.99] {
            let x = spec.quantile(u);
            assert!((spec.cdf(x) - u).abs() < 1e-9, "u {u} x {x}");
        }
    }

    #[test]
    fn stratified_sample_is_sorted_and_close() {
        let spec = InitialDistributionSpec::Uniform { a: -1.0, b: 1.0 };
        let d = sample_stratified(&spec, 1000, 5).unwrap();
        assert!(d.samples().windows(2).all(|w| w[0] <= w[1]));
        assert!(d.mean().abs() < 2.0 / 1000.0);
    }
}
