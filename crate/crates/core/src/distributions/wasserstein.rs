//! Exact 1-Wasserstein distances in one dimension, `W1 = ∫ |F_a - F_b|`.

use super::{DistributionError, EmpiricalDistribution, GridDensity};

/// W1 between two empirical distributions.
///
/// Equal sizes use the sorted-sample formula `(1/n) Σ |a_i - b_i|`;
/// otherwise the step CDFs are integrated exactly by [`w1_cdf_integral`].
pub fn w1_empirical(a: &EmpiricalDistribution, b: &EmpiricalDistribution) -> f64 {
    if a.len() == b.len() {
        let sum: f64 = a
            .samples()
            .iter()
            .zip(b.samples())
            .map(|(x, y)| (x - y).abs())
            .sum();
        sum / a.len() as f64
    } else {
        w1_cdf_integral(a, b)
    }
}

/// W1 by integrating `|F_a - F_b|` over the merged breakpoints.
pub fn w1_cdf_integral(a: &EmpiricalDistribution, b: &EmpiricalDistribution) -> f64 {
    w1_sorted(a.samples(), b.samples())
}

/// Same as [`w1_cdf_integral`] for sorted, nonempty slices.
pub(crate) fn w1_sorted(a: &[f64], b: &[f64]) -> f64 {
    let (n, m) = (a.len(), b.len());
    debug_assert!(n > 0 && m > 0);
    let (mut i, mut j) = (0usize, 0usize);
    let mut prev = a[0].min(b[0]);
    let mut acc = 0.0;
    while i < n || j < m {
        let next = match (a.get(i), b.get(j)) {
            (Some(x), Some(y)) => x.min(*y),
            (Some(x), None) => *x,
            (None, Some(y)) => *y,
            (None, None) => unreachable!(),
        };
        // On [prev, next) the CDFs are i/n and j/m.
        let gap = (i * m).abs_diff(j * n);
        if gap != 0 {
            acc += gap as f64 * (next - prev);
        }
        while i < n && a[i] == next {
            i += 1;
        }
        while j < m && b[j] == next {
            j += 1;
        }
        prev = next;
    }
    acc / (n as f64 * m as f64)
}

/// W1 between two grid densities on the same mesh. Both CDFs are piecewise
/// linear, so each cell contributes the exact integral of `|linear|`.
pub fn w1_grid(f: &GridDensity, g: &GridDensity) -> Result<f64, DistributionError> {
    if f.n_cells() != g.n_cells() {
        return Err(DistributionError::Shape {
            left: f.n_cells(),
            right: g.n_cells(),
        });
    }
    let dx = f.dx();
    let (cf, cg) = (f.edge_cdf(), g.edge_cdf());
    let mut acc = 0.0;
    for i in 0..f.n_cells() {
        acc += abs_linear_integral(cf[i] - cg[i], cf[i + 1] - cg[i + 1], dx);
    }
    Ok(acc)
}

/// W1 between an empirical distribution and a grid density.
pub fn w1_empirical_grid(e: &EmpiricalDistribution, g: &GridDensity) -> f64 {
    let samples = e.samples();
    let n = samples.len() as f64;
    let cdf = g.edge_cdf();
    let mut k = 0usize;
    // Samples at or below -1 count from the start.
    while k < samples.len() && samples[k] <= g.edge(0) {
        k += 1;
    }
    let mut acc = 0.0;
    for cell in 0..g.n_cells() {
        let (x0, x1) = (g.edge(cell), g.edge(cell + 1));
        let slope = (cdf[cell + 1] - cdf[cell]) / (x1 - x0);
        let grid_at = |x: f64| cdf[cell] + slope * (x - x0);
        let mut left = x0;
        loop {
            let right = match samples.get(k) {
                Some(&s) if s < x1 => s,
                _ => x1,
            };
            let level = k as f64 / n;
            acc += abs_linear_integral(grid_at(left) - level, grid_at(right) - level, right - left);
            if right == x1 {
                break;
            }
            while k < samples.len() && samples[k] == right {
                k += 1;
            }
            left = right;
        }
        while k < samples.len() && samples[k] <= x1 && cell + 1 < g.n_cells() {
            k += 1;
        }
    }
    acc
}

/// `∫_0^h |d0 + (d1 - d0) s/h| ds`.
fn abs_linear_integral(d0: f64, d1: f64, h: f64) -> f64 {
    if h <= 0.0 {
        return 0.0;
    }
    if d0 * d1 >= 0.0 {
        0.5 * h * (d0.abs() + d1.abs())
    } else {
        0.5 * h * (d0 * d0 + d1 * d1) / (d0.abs() + d1.abs())
    }
}
