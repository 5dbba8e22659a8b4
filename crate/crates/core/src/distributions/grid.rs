use super::{DistributionError, InitialDistributionSpec, OMEGA_MIN};

/// Allowed deviation of `Σ values · Δx` from 1.
pub const MASS_TOLERANCE: f64 = 1e-12;

/// Piecewise-constant probability density on a uniform mesh over `[-1, 1]`.
///
/// `values[i]` is the average density over cell `i`, which spans
/// `[-1 + i·Δx, -1 + (i+1)·Δx]` with `Δx = 2 / n_cells`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDensity {
    values: Vec<f64>,
}

impl GridDensity {
    /// Validates nonnegativity and unit mass. The values are never rescaled.
    pub fn new(values: Vec<f64>) -> Result<Self, DistributionError> {
        if values.is_empty() {
            return Err(DistributionError::Invalid(
                "grid needs at least one cell".into(),
            ));
        }
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0)
        {
            return Err(DistributionError::Invalid(format!(
                "cell {i} has density {v}"
            )));
        }
        let density = Self { values };
        let mass = density.mass();
        if (mass - 1.0).abs() > MASS_TOLERANCE {
            return Err(DistributionError::Mass {
                mass,
                tolerance: MASS_TOLERANCE,
            });
        }
        Ok(density)
    }

    /// Skips the mass check; the caller re-checks mass against its own
    /// reference.
    pub(crate) fn from_values_unchecked(values: Vec<f64>) -> Self {
        Self { values }
    }

    /// Constant density `1/2` on every cell.
    pub fn uniform(n_cells: usize) -> Result<Self, DistributionError> {
        Self::new(vec![0.5; n_cells])
    }

    /// All mass in cell `k`.
    pub fn one_hot(n_cells: usize, k: usize) -> Result<Self, DistributionError> {
        if k >= n_cells {
            return Err(DistributionError::Invalid(format!(
                "cell {k} out of range for {n_cells} cells"
            )));
        }
        let mut values = vec![0.0; n_cells];
        values[k] = n_cells as f64 / 2.0;
        Self::new(values)
    }

    /// Cell averages of an initial law: `(F(right) - F(left)) / Δx` per cell.
    /// Dirac components land entirely in the cell containing the point.
    pub fn from_spec(
        spec: &InitialDistributionSpec,
        n_cells: usize,
    ) -> Result<Self, DistributionError> {
        spec.check()?;
        if n_cells == 0 {
            return Err(DistributionError::Invalid(
                "grid needs at least one cell".into(),
            ));
        }
        let dx = 2.0 / n_cells as f64;
        let mut values = vec![0.0; n_cells];
        spec.accumulate_cell_masses(n_cells, 1.0, &mut values);
        for v in &mut values {
            *v /= dx;
        }
        Self::new(values)
    }

    pub fn n_cells(&self) -> usize {
        self.values.len()
    }

    pub fn dx(&self) -> f64 {
        2.0 / self.values.len() as f64
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn cell_center(&self, i: usize) -> f64 {
        cell_center(self.values.len(), i)
    }

    /// Left edge of cell `i` (`i == n_cells` gives the right domain end).
    pub fn edge(&self, i: usize) -> f64 {
        edge(self.values.len(), i)
    }

    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.dx()
    }

    pub fn mean(&self) -> f64 {
        let dx = self.dx();
        self.values
            .iter()
            .enumerate()
            .map(|(i, v)| v * dx * self.cell_center(i))
            .sum()
    }

    /// CDF at the cell edges: `n_cells + 1` values starting at 0.
    pub fn edge_cdf(&self) -> Vec<f64> {
        let dx = self.dx();
        let mut out = Vec::with_capacity(self.values.len() + 1);
        let mut acc = 0.0;
        out.push(0.0);
        for v in &self.values {
            acc += v * dx;
            out.push(acc);
        }
        out
    }

    /// Mirror image under `x -> -x`.
    pub fn reflected(&self) -> Self {
        let mut values = self.values.clone();
        values.reverse();
        Self { values }
    }
}

pub(crate) fn cell_center(n_cells: usize, i: usize) -> f64 {
    OMEGA_MIN + (i as f64 + 0.5) * 2.0 / n_cells as f64
}

pub(crate) fn edge(n_cells: usize, i: usize) -> f64 {
    if i == n_cells {
        return 1.0;
    }
    OMEGA_MIN + i as f64 * 2.0 / n_cells as f64
}

/// Index of the cell containing `x`; right-closed at the domain end.
pub(crate) fn cell_of(n_cells: usize, x: f64) -> usize {
    let pos = ((x - OMEGA_MIN) / 2.0 * n_cells as f64).floor();
    (pos.max(0.0) as usize).min(n_cells - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_and_one_hot_have_unit_mass() {
        for n in [1, 7, 16, 256, 1000] {
            assert!((GridDensity::uniform(n).unwrap().mass() - 1.0).abs() <= MASS_TOLERANCE);
            assert!((GridDensity::one_hot(n, n / 2).unwrap().mass() - 1.0).abs() <= MASS_TOLERANCE);
        }
    }

    #[test]
    fn rejects_negative_and_unnormalized() {
        assert!(matches!(
            GridDensity::new(vec![1.5, -0.5]),
            Err(DistributionError::Invalid(_))
        ));
        assert!(matches!(
            GridDensity::new(vec![0.5, 0.6]),
            Err(DistributionError::Mass { .. })
        ));
    }

    #[test]
    fn cell_lookup() {
        assert_eq!(cell_of(4, -1.0), 0);
        assert_eq!(cell_of(4, -0.5), 1);
        assert_eq!(cell_of(4, 0.99), 3);
        assert_eq!(cell_of(4, 1.0), 3);
        assert_eq!(cell_center(4, 0), -0.75);
    }

    #[test]
    fn projection_of_uniform_law() {
        let spec = InitialDistributionSpec::Uniform { a: -0.5, b: 0.5 };
        let g = GridDensity::from_spec(&spec, 8).unwrap();
        assert_eq!(g.values(), &[0.0, 0.0, 1.0, 1.0, 1.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn projection_of_dirac() {
        let spec = InitialDistributionSpec::Dirac { x: 0.3 };
        let g = GridDensity::from_spec(&spec, 10).unwrap();
        assert_eq!(cell_of(10, 0.3), 6);
        assert_eq!(g.values()[6], 5.0);
    }
}
