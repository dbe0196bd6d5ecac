use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::DenseMatrix;
use crate::error::{ensure, AresError, Result};

/// Principal axes of a centred data set.
///
/// `components` is `d x r` with orthonormal columns ordered by decreasing
/// variance. `total_variance` is the trace of the full sample covariance, so
/// the retained ratios sum to less than one when `r < d`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    pub components: DenseMatrix,
    pub explained_variance: Vec<f64>,
    pub total_variance: f64,
}

/// Fits PCA by eigendecomposition of the sample covariance (divisor `n - 1`).
///
/// Each component's sign is fixed so that its largest-magnitude entry is
/// positive.
pub fn fit_pca(data: &DenseMatrix, max_components: usize) -> Result<PcaModel> {
    let (n, d) = data.shape();
    ensure!(n >= 2, InvalidArgument, "PCA needs at least 2 rows, got {n}");
    ensure!(
        max_components >= 1 && max_components <= n.min(d),
        InvalidArgument,
        "max_components must be in 1..={}, got {max_components}",
        n.min(d)
    );

    let mean = data.column_means();
    let mut cov = DMatrix::<f64>::zeros(d, d);
    let mut centred = vec![0.0; d];
    for row in data.iter_rows() {
        for (c, (v, m)) in centred.iter_mut().zip(row.iter().zip(&mean)) {
            *c = v - m;
        }
        for i in 0..d {
            let ci = centred[i];
            if ci == 0.0 {
                continue;
            }
            for j in i..d {
                cov[(i, j)] += ci * centred[j];
            }
        }
    }
    let denom = (n - 1) as f64;
    for i in 0..d {
        for j in i..d {
            let v = cov[(i, j)] / denom;
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }
    let total_variance = cov.trace();
    if total_variance <= 0.0 {
        return Err(AresError::Degenerate(
            "all features have zero variance".into(),
        ));
    }

    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));

    let r = max_components;
    let mut components = DenseMatrix::zeros(d, r);
    let mut explained_variance = Vec::with_capacity(r);
    for (c, &src) in order.iter().take(r).enumerate() {
        explained_variance.push(eig.eigenvalues[src].max(0.0));
        let col = eig.eigenvectors.column(src);
        let pivot = col
            .iter()
            .copied()
            .enumerate()
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()).then(b.0.cmp(&a.0)))
            .map_or(1.0, |(_, v)| v);
        let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
        for i in 0..d {
            components.set(i, c, sign * col[i]);
        }
    }

    Ok(PcaModel {
        mean,
        components,
        explained_variance,
        total_variance,
    })
}

impl PcaModel {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn n_components(&self) -> usize {
        self.explained_variance.len()
    }

    pub fn explained_variance_ratio(&self) -> Vec<f64> {
        self.explained_variance
            .iter()
            .map(|v| v / self.total_variance)
            .collect()
    }

    /// Smallest `r` whose cumulative explained-variance ratio reaches `threshold`.
    ///
    /// Returns the number of retained components if the threshold is never met.
    pub fn components_for_variance(&self, threshold: f64) -> Result<usize> {
        ensure!(
            threshold > 0.0 && threshold <= 1.0,
            InvalidArgument,
            "variance threshold must be in (0, 1], got {threshold}"
        );
        Ok(components_for_ratios(&self.explained_variance_ratio(), threshold))
    }

    /// Squared distance between `x` and its projection onto the retained subspace.
    pub fn reconstruction_error(&self, x: &[f64]) -> Result<f64> {
        let d = self.dim();
        ensure!(
            x.len() == d,
            Dimension,
            "expected {d} features, got {}",
            x.len()
        );
        let centred: Vec<f64> = x.iter().zip(&self.mean).map(|(v, m)| v - m).collect();
        let r = self.n_components();
        let mut coeffs = vec![0.0; r];
        for (i, c) in centred.iter().enumerate() {
            let row = self.components.row(i);
            for (k, w) in coeffs.iter_mut().zip(row) {
                *k += c * w;
            }
        }
        let mut err = 0.0;
        for (i, c) in centred.iter().enumerate() {
            let proj: f64 = self
                .components
                .row(i)
                .iter()
                .zip(&coeffs)
                .map(|(w, k)| w * k)
                .sum();
            err += (c - proj).powi(2);
        }
        Ok(err)
    }
}

// Cumulative sums of ratios such as (0.6, 0.3) land a hair under 0.9.
const CUMULATIVE_SLACK: f64 = 1e-12;

pub(crate) fn components_for_ratios(ratios: &[f64], threshold: f64) -> usize {
    let mut cumulative = 0.0;
    for (i, r) in ratios.iter().enumerate() {
        cumulative += r;
        if cumulative + CUMULATIVE_SLACK >= threshold {
            return i + 1;
        }
    }
    ratios.len()
}
