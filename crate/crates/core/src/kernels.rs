//! Interaction kernels.
//!
//! [`LocalKernel`] weighs a pair of agents by their opinion distance, with a
//! hard cutoff at the confidence radius. [`PopulationKernel`] weighs a pair of
//! groups by the W1 distance between their opinion distributions.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid kernel parameter `{field}`: {reason}")]
pub struct KernelError {
    pub field: &'static str,
    pub reason: String,
}

fn kernel_error(field: &'static str, reason: impl Into<String>) -> KernelError {
    KernelError {
        field,
        reason: reason.into(),
    }
}

/// Agent-level kernel `κ_d(x_i, x_j, ε)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum LocalKernel {
    /// Weight 1 inside the confidence window.
    #[serde(rename = "uniform")]
    Uniform,
    /// `ε - d`, un-normalized.
    #[serde(rename = "triangular")]
    Triangular,
    /// `exp(-γ d^p)`.
    #[serde(rename = "exp")]
    Exponential {
        gamma: f64,
        #[serde(alias = "alpha")]
        exponent: f64,
    },
    /// `exp(-γ(|x_i|) d^p)` with `γ(u) = scale · u^power`.
    #[serde(rename = "state_exp")]
    StateExponential {
        gamma_scale: f64,
        gamma_power: f64,
        #[serde(alias = "alpha")]
        exponent: f64,
    },
}

impl LocalKernel {
    pub fn validate(&self) -> Result<(), KernelError> {
        match self {
            Self::Uniform | Self::Triangular => Ok(()),
            Self::Exponential { gamma, exponent } => {
                positive("gamma", *gamma)?;
                positive("exponent", *exponent)
            }
            Self::StateExponential {
                gamma_scale,
                gamma_power,
                exponent,
            } => {
                if !(*gamma_scale >= 0.0) || !gamma_scale.is_finite() {
                    return Err(kernel_error(
                        "gamma_scale",
                        format!("{gamma_scale} must be >= 0"),
                    ));
                }
                positive("gamma_power", *gamma_power)?;
                positive("exponent", *exponent)
            }
        }
    }

    /// Weight of `x_j` as seen by `x_i`. Zero whenever `|x_i - x_j| > ε`.
    #[inline]
    pub fn eval(&self, x_i: f64, x_j: f64, epsilon: f64) -> f64 {
        let d = (x_i - x_j).abs();
        if d > epsilon {
            return 0.0;
        }
        match self {
            Self::Uniform => 1.0,
            Self::Triangular => epsilon - d,
            Self::Exponential { gamma, exponent } => (-gamma * pow(d, *exponent)).exp(),
            Self::StateExponential {
                gamma_scale,
                gamma_power,
                exponent,
            } => {
                let rate = gamma_scale * pow(x_i.abs(), *gamma_power);
                (-rate * pow(d, *exponent)).exp()
            }
        }
    }

    /// Whether `eval(x, y, ε) == eval(y, x, ε)` for all inputs.
    pub fn is_symmetric(&self) -> bool {
        !matches!(self, Self::StateExponential { .. })
    }
}

// The common integer exponents skip `powf`; both forms are correctly rounded.
#[inline]
fn pow(x: f64, p: f64) -> f64 {
    if p == 1.0 {
        x
    } else if p == 2.0 {
        x * x
    } else {
        x.powf(p)
    }
}

/// Free-function form of [`LocalKernel::eval`].
pub fn eval_local(kernel: &LocalKernel, x_i: f64, x_j: f64, epsilon: f64) -> f64 {
    kernel.eval(x_i, x_j, epsilon)
}

/// Cutoff applied to cross-group pairs by their W1 distance `w`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Threshold {
    #[default]
    None,
    /// No interaction once `w > σ`.
    Above { sigma: f64 },
    /// No interaction while `w <= σ`.
    Below { sigma: f64 },
}

impl Threshold {
    pub fn sigma(&self) -> Option<f64> {
        match self {
            Self::None => None,
            Self::Above { sigma } | Self::Below { sigma } => Some(*sigma),
        }
    }

    fn with_sigma(self, sigma: f64) -> Self {
        match self {
            Self::None => Self::None,
            Self::Above { .. } => Self::Above { sigma },
            Self::Below { .. } => Self::Below { sigma },
        }
    }
}

/// Time-dependent decay rate, `Γ(t) = Γ_0 + rate · t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecaySchedule {
    pub rate: f64,
}

/// Directed group pairs `(source, target)` on which the cross-group kernel
/// applies. Agents of `target` are influenced by agents of `source`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AsymmetryMask {
    allowed: BTreeSet<(usize, usize)>,
}

impl AsymmetryMask {
    pub fn new(pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        Self {
            allowed: pairs.into_iter().collect(),
        }
    }

    pub fn allows(&self, source: usize, target: usize) -> bool {
        self.allowed.contains(&(source, target))
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.allowed.iter().copied()
    }
}

/// Group-level kernel `K(μ^k, μ^q, σ) = exp(-Γ(t) · W1)`, with optional
/// threshold, decay schedule and asymmetry mask.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PopulationKernel {
    pub gamma: f64,
    pub threshold: Threshold,
    pub schedule: Option<DecaySchedule>,
    pub mask: Option<AsymmetryMask>,
}

impl PopulationKernel {
    pub fn exponential(gamma: f64) -> Self {
        Self {
            gamma,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), KernelError> {
        if !(self.gamma >= 0.0) || !self.gamma.is_finite() {
            return Err(kernel_error(
                "gamma",
                format!("{} must be >= 0", self.gamma),
            ));
        }
        if let Some(sigma) = self.threshold.sigma() {
            positive("sigma", sigma)?;
        }
        if let Some(schedule) = &self.schedule {
            if !(schedule.rate >= 0.0) || !schedule.rate.is_finite() {
                return Err(kernel_error(
                    "decay.rate",
                    format!(
                        "{} must be >= 0 for a nondecreasing schedule",
                        schedule.rate
                    ),
                ));
            }
            if !(self.gamma > 0.0) {
                return Err(kernel_error("gamma", "a decay schedule needs Γ(0) > 0"));
            }
        }
        Ok(())
    }

    /// `Γ(t)`.
    pub fn rate_at(&self, t: f64) -> f64 {
        match &self.schedule {
            Some(s) => self.gamma + s.rate * t,
            None => self.gamma,
        }
    }

    /// Kernel value for two groups at W1 distance `w`, ignoring the mask.
    /// Thresholds only cut cross-group pairs; a group always sees itself.
    pub fn eval(&self, w: f64, t: f64, same_group: bool) -> f64 {
        self.eval_with_threshold(self.threshold, w, t, same_group)
    }

    /// Kernel value for the directed pair `source -> target`, where `sigma`
    /// overrides the threshold radius of the target agent when given.
    pub fn eval_pair(
        &self,
        w: f64,
        t: f64,
        source: usize,
        target: usize,
        sigma: Option<f64>,
    ) -> f64 {
        let same_group = source == target;
        if !same_group {
            if let Some(mask) = &self.mask {
                if !mask.allows(source, target) {
                    return 0.0;
                }
            }
        }
        let threshold = match sigma {
            Some(s) => self.threshold.with_sigma(s),
            None => self.threshold,
        };
        self.eval_with_threshold(threshold, w, t, same_group)
    }

    fn eval_with_threshold(&self, threshold: Threshold, w: f64, t: f64, same_group: bool) -> f64 {
        if !same_group {
            match threshold {
                Threshold::None => {}
                Threshold::Above { sigma } if w > sigma => return 0.0,
                Threshold::Below { sigma } if w <= sigma => return 0.0,
                _ => {}
            }
        }
        let rate = self.rate_at(t);
        if rate == 0.0 {
            1.0
        } else {
            (-rate * w).exp()
        }
    }
}

/// Free-function form of [`PopulationKernel::eval`].
pub fn eval_population(kernel: &PopulationKernel, w: f64, t: f64, same_group: bool) -> f64 {
    kernel.eval(w, t, same_group)
}

fn positive(field: &'static str, v: f64) -> Result<(), KernelError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(kernel_error(field, format!("{v} must be positive")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXP_1_1: LocalKernel = LocalKernel::Exponential {
        gamma: 1.0,
        exponent: 1.0,
    };

    #[test]
    fn uniform_cutoff() {
        assert_eq!(eval_local(&LocalKernel::Uniform, 0.1, 0.5, 0.6), 1.0);
        assert_eq!(eval_local(&LocalKernel::Uniform, 0.1, 0.9, 0.6), 0.0);
    }

    #[test]
    fn cutoff_is_inclusive() {
        assert_eq!(LocalKernel::Uniform.eval(0.0, 0.5, 0.5), 1.0);
        assert_eq!(LocalKernel::Triangular.eval(0.0, 0.5, 0.5), 0.0);
        assert_eq!(LocalKernel::Uniform.eval(0.0, 0.5000001, 0.5), 0.0);
    }

    #[test]
    fn exponential_value() {
        let v = eval_local(&EXP_1_1, 0.0, 0.5, 0.6);
        assert!((v - (-0.5f64).exp()).abs() < 1e-15);
        assert!((v - 0.606531).abs() < 1e-6);
    }

    #[test]
    fn state_dependent_is_flat_at_neutral_opinion() {
        let k = LocalKernel::StateExponential {
            gamma_scale: 1.0,
            gamma_power: 1.0,
            exponent: 2.0,
        };
        assert_eq!(k.eval(0.0, 0.3, 0.6), 1.0);
        // Not symmetric: seen from 0.3, the rate is γ(0.3) = 0.3.
        let back = k.eval(0.3, 0.0, 0.6);
        assert!((back - (-0.3f64 * 0.09).exp()).abs() < 1e-15);
        assert!(!k.is_symmetric());
    }

    #[test]
    fn triangular_is_unnormalized() {
        assert!((LocalKernel::Triangular.eval(0.0, 0.2, 0.6) - 0.4).abs() < 1e-15);
        assert_eq!(LocalKernel::Triangular.eval(0.3, 0.3, 0.6), 0.6);
    }

    #[test]
    fn local_parameters_validated() {
        assert!(LocalKernel::Exponential {
            gamma: 0.0,
            exponent: 1.0
        }
        .validate()
        .is_err());
        assert!(LocalKernel::Exponential {
            gamma: 1.0,
            exponent: -1.0
        }
        .validate()
        .is_err());
        assert!(EXP_1_1.validate().is_ok());
    }

    #[test]
    fn population_examples() {
        let k = PopulationKernel::exponential(2.0);
        assert_eq!(eval_population(&k, 0.0, 3.0, false), 1.0);
        assert!((eval_population(&k, 0.5, 0.0, false) - (-1.0f64).exp()).abs() < 1e-15);
        let above = PopulationKernel {
            threshold: Threshold::Above { sigma: 0.3 },
            ..k.clone()
        };
        assert_eq!(eval_population(&above, 0.5, 0.0, false), 0.0);
        assert!(eval_population(&above, 0.3, 0.0, false) > 0.0);
        let below = PopulationKernel {
            threshold: Threshold::Below { sigma: 0.3 },
            ..k
        };
        assert_eq!(eval_population(&below, 0.1, 0.0, false), 0.0);
        assert_eq!(eval_population(&below, 0.3, 0.0, false), 0.0);
        assert!(eval_population(&below, 0.31, 0.0, false) > 0.0);
        // A group always interacts with itself.
        assert_eq!(eval_population(&below, 0.0, 0.0, true), 1.0);
    }

    #[test]
    fn schedule_ramps_rate() {
        let k = PopulationKernel {
            gamma: 0.5,
            schedule: Some(DecaySchedule { rate: 2.0 }),
            ..PopulationKernel::default()
        };
        assert_eq!(k.rate_at(0.0), 0.5);
        assert_eq!(k.rate_at(1.5), 3.5);
        assert!(k.eval(0.4, 1.0, false) < k.eval(0.4, 0.0, false));
        let bad = PopulationKernel { gamma: 0.0, ..k };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn mask_falls_back_to_in_group_default() {
        let k = PopulationKernel {
            mask: Some(AsymmetryMask::new([(0, 1)])),
            ..PopulationKernel::exponential(0.0)
        };
        assert_eq!(k.eval_pair(0.4, 0.0, 0, 1, None), 1.0);
        assert_eq!(k.eval_pair(0.4, 0.0, 1, 0, None), 0.0);
        assert_eq!(k.eval_pair(0.0, 0.0, 1, 1, None), 1.0);
    }

    #[test]
    fn sigma_override() {
        let k = PopulationKernel {
            threshold: Threshold::Above { sigma: 0.3 },
            ..PopulationKernel::exponential(1.0)
        };
        assert_eq!(k.eval_pair(0.5, 0.0, 0, 1, None), 0.0);
        assert!(k.eval_pair(0.5, 0.0, 0, 1, Some(0.6)) > 0.0);
    }
}
