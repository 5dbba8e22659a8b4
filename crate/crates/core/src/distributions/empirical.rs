use super::{in_omega, DistributionError};

/// Sorted sample set of a sub-population, read as `(1/n) Σ δ_{x_j}`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDistribution {
    samples: Vec<f64>,
}

impl EmpiricalDistribution {
    /// Builds a distribution from unsorted samples. Every sample must lie in
    /// `[-1, 1]` and the set must be nonempty.
    pub fn new(mut samples: Vec<f64>) -> Result<Self, DistributionError> {
        if samples.is_empty() {
            return Err(DistributionError::Invalid("empty sample set".into()));
        }
        if let Some(bad) = samples.iter().find(|x| !in_omega(**x)) {
            return Err(DistributionError::Invalid(format!(
                "sample {bad} outside [-1, 1]"
            )));
        }
        samples.sort_by(f64::total_cmp);
        Ok(Self { samples })
    }

    pub fn dirac(x: f64) -> Result<Self, DistributionError> {
        Self::new(vec![x])
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    pub fn min(&self) -> f64 {
        self.samples[0]
    }

    pub fn max(&self) -> f64 {
        self.samples[self.samples.len() - 1]
    }

    /// Shifts every sample by `c`. Fails if a shifted sample leaves `[-1, 1]`.
    pub fn shifted(&self, c: f64) -> Result<Self, DistributionError> {
        Self::new(self.samples.iter().map(|x| x + c).collect())
    }
}

/// Fraction of samples `<= y`.
pub fn cdf_eval(d: &EmpiricalDistribution, y: f64) -> f64 {
    let count = d.samples.partition_point(|x| *x <= y);
    count as f64 / d.samples.len() as f64
}
