//! Local density scores over the latent space: local outlier factor (the
//! default), k-th neighbour distance, and distance to the nearest fitted
//! Gaussian.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, AresError, Result};
use crate::latent::LatentIndex;
use crate::math::DenseMatrix;

/// Floor applied to reachability distances so duplicate points keep a finite
/// local reachability density.
pub const REACHABILITY_FLOOR: f64 = 1e-12;

/// Class id marking training rows without a usable label (e.g. contaminants);
/// such rows are skipped when fitting per-class Gaussians.
pub const UNLABELLED: u32 = u32::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GdMetric {
    Euclidean,
    Mahalanobis,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DensityConfig", into = "DensityConfig")]
pub enum DensityMethod {
    Lof { k: usize },
    Knn { k: usize },
    GaussianDistance { metric: GdMetric, multimodal: bool },
    /// Reserved; fitting it is rejected.
    NormalizingFlow,
}

impl Default for DensityMethod {
    fn default() -> Self {
        DensityMethod::Lof { k: 10 }
    }
}

/// Wire form: `{"method": "lof", "k": 10}`, `{"method": "gd-mahalanobis", "multimodal": true}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DensityConfig {
    method: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    multimodal: Option<bool>,
}

impl TryFrom<DensityConfig> for DensityMethod {
    type Error = AresError;
    fn try_from(c: DensityConfig) -> Result<Self> {
        DensityMethod::from_name(&c.method, c.k, c.multimodal)
    }
}

impl From<DensityMethod> for DensityConfig {
    fn from(m: DensityMethod) -> Self {
        let (k, multimodal) = match m {
            DensityMethod::Lof { k } | DensityMethod::Knn { k } => (Some(k), None),
            DensityMethod::GaussianDistance { multimodal, .. } => (None, Some(multimodal)),
            DensityMethod::NormalizingFlow => (None, None),
        };
        DensityConfig {
            method: m.name().to_string(),
            k,
            multimodal,
        }
    }
}

impl DensityMethod {
    /// Parses `lof`, `knn`, `gd-euclidean`, `gd-mahalanobis` (and the reserved `nf`).
    /// `k` defaults to 10 for LOF and 20 for KNN; `multimodal` defaults to true.
    pub fn from_name(name: &str, k: Option<usize>, multimodal: Option<bool>) -> Result<Self> {
        let m = match name {
            "lof" => DensityMethod::Lof { k: k.unwrap_or(10) },
            "knn" => DensityMethod::Knn { k: k.unwrap_or(20) },
            "gd-euclidean" => DensityMethod::GaussianDistance {
                metric: GdMetric::Euclidean,
                multimodal: multimodal.unwrap_or(true),
            },
            "gd-mahalanobis" => DensityMethod::GaussianDistance {
                metric: GdMetric::Mahalanobis,
                multimodal: multimodal.unwrap_or(true),
            },
            "nf" => DensityMethod::NormalizingFlow,
            other => {
                return Err(AresError::Config(format!(
                    "unknown density method {other:?} (expected lof, knn, gd-euclidean or gd-mahalanobis)"
                )))
            }
        };
        if let DensityMethod::Lof { k } | DensityMethod::Knn { k } = m {
            ensure!(k >= 1, Config, "density k must be at least 1");
        }
        Ok(m)
    }

    pub fn name(&self) -> &'static str {
        match self {
            DensityMethod::Lof { .. } => "lof",
            DensityMethod::Knn { .. } => "knn",
            DensityMethod::GaussianDistance {
                metric: GdMetric::Euclidean,
                ..
            } => "gd-euclidean",
            DensityMethod::GaussianDistance {
                metric: GdMetric::Mahalanobis,
                ..
            } => "gd-mahalanobis",
            DensityMethod::NormalizingFlow => "nf",
        }
    }

    /// Short label such as `lof-k10` or `gd-mahalanobis-multi`.
    pub fn label(&self) -> String {
        match self {
            DensityMethod::Lof { k } | DensityMethod::Knn { k } => format!("{}-k{k}", self.name()),
            DensityMethod::GaussianDistance { multimodal, .. } => {
                format!("{}-{}", self.name(), if *multimodal { "multi" } else { "uni" })
            }
            DensityMethod::NormalizingFlow => "nf".into(),
        }
    }
}

/// Precomputed k-distances and local reachability densities of the training
/// points.
#[derive(Clone, Debug, PartialEq)]
pub struct LofModel {
    k: usize,
    k_distances: Vec<f64>,
    lrd: Vec<f64>,
}

impl LofModel {
    pub fn fit(index: &LatentIndex, k: usize) -> Result<Self> {
        let m = index.len();
        ensure!(
            k >= 1 && k < m,
            InvalidArgument,
            "LOF needs 1 <= k < {m} training points, got k = {k}"
        );
        let neighbours = (0..m)
            .into_par_iter()
            .map(|i| index.training_neighbours(i, k))
            .collect::<Result<Vec<_>>>()?;
        let k_distances: Vec<f64> = neighbours.iter().map(|n| n.kth_distance()).collect();
        let lrd = neighbours
            .iter()
            .map(|n| reachability_density(n.indices.iter().zip(&n.distances), &k_distances))
            .collect();
        Ok(Self { k, k_distances, lrd })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn k_distances(&self) -> &[f64] {
        &self.k_distances
    }

    pub fn local_reachability_densities(&self) -> &[f64] {
        &self.lrd
    }

    /// LOF of a query encoding against the training points.
    pub fn score(&self, index: &LatentIndex, z: &[f64]) -> Result<f64> {
        ensure!(
            self.lrd.len() == index.len(),
            InvalidArgument,
            "LOF model was fitted on a different index"
        );
        let n = index.query_knn(z, self.k)?;
        let own = reachability_density(n.indices.iter().zip(&n.distances), &self.k_distances);
        Ok(self.ratio(&n.indices, own))
    }

    /// LOF of every training point, each judged against the others.
    pub fn training_scores(&self, index: &LatentIndex) -> Result<Vec<f64>> {
        (0..index.len())
            .into_par_iter()
            .map(|i| {
                let n = index.training_neighbours(i, self.k)?;
                Ok(self.ratio(&n.indices, self.lrd[i]))
            })
            .collect()
    }

    fn ratio(&self, neighbours: &[usize], own_lrd: f64) -> f64 {
        let mean_lrd: f64 = neighbours.iter().map(|&b| self.lrd[b]).sum::<f64>() / neighbours.len() as f64;
        mean_lrd / own_lrd
    }
}

fn reachability_density<'a>(neighbours: impl Iterator<Item = (&'a usize, &'a f64)>, k_distances: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut count = 0usize;
    for (&b, &d) in neighbours {
        sum += k_distances[b].max(d).max(REACHABILITY_FLOOR);
        count += 1;
    }
    count as f64 / sum
}

/// LOF of `z` with `k` neighbours. Fits the training-side statistics on every
/// call, so prefer [`LofModel`] when scoring many queries.
pub fn lof_score(index: &LatentIndex, z: &[f64], k: usize) -> Result<f64> {
    LofModel::fit(index, k)?.score(index, z)
}

/// Distance from `z` to its k-th nearest training encoding.
pub fn knn_distance_score(index: &LatentIndex, z: &[f64], k: usize) -> Result<f64> {
    Ok(index.query_knn(z, k)?.kth_distance())
}

/// Gaussian with a ridge-regularized covariance.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianComponent {
    pub mean: Vec<f64>,
    pub covariance: DenseMatrix,
    pub ridge: f64,
    // lower Cholesky factor of covariance + ridge * I
    chol: DenseMatrix,
}

/// Relative ridge: `1e-6 * trace / dim`, floored at `1e-12`.
pub fn default_ridge(covariance: &DenseMatrix) -> f64 {
    let d = covariance.rows();
    let trace: f64 = (0..d).map(|i| covariance.get(i, i)).sum();
    (1e-6 * trace / d.max(1) as f64).max(1e-12)
}

impl GaussianComponent {
    pub fn new(mean: Vec<f64>, covariance: DenseMatrix, ridge: f64) -> Result<Self> {
        let d = mean.len();
        ensure!(
            covariance.shape() == (d, d),
            Dimension,
            "covariance must be {d}x{d}"
        );
        ensure!(ridge > 0.0, InvalidArgument, "ridge must be positive");
        for i in 0..d {
            for j in 0..i {
                ensure!(
                    (covariance.get(i, j) - covariance.get(j, i)).abs() <= 1e-10,
                    InvalidArgument,
                    "covariance is not symmetric"
                );
            }
        }
        let reg = DMatrix::from_fn(d, d, |i, j| covariance.get(i, j) + if i == j { ridge } else { 0.0 });
        let l = reg
            .cholesky()
            .ok_or_else(|| AresError::Degenerate("regularized covariance is singular".into()))?
            .l();
        let chol = DenseMatrix::new(d, d, (0..d * d).map(|p| l[(p / d, p % d)]).collect())?;
        Ok(Self {
            mean,
            covariance,
            ridge,
            chol,
        })
    }

    /// Sample mean and covariance (divisor `n - 1`) of the rows.
    pub fn fit(rows: &DenseMatrix) -> Result<Self> {
        let (n, d) = rows.shape();
        ensure!(n >= 2, InvalidArgument, "a Gaussian needs at least 2 samples, got {n}");
        let mean = rows.column_means();
        let mut cov = DenseMatrix::zeros(d, d);
        for row in rows.iter_rows() {
            for i in 0..d {
                let ci = row[i] - mean[i];
                for j in i..d {
                    let v = cov.get(i, j) + ci * (row[j] - mean[j]);
                    cov.set(i, j, v);
                }
            }
        }
        for i in 0..d {
            for j in i..d {
                let v = cov.get(i, j) / (n - 1) as f64;
                cov.set(i, j, v);
                cov.set(j, i, v);
            }
        }
        let ridge = default_ridge(&cov);
        Self::new(mean, cov, ridge)
    }

    pub fn euclidean(&self, z: &[f64]) -> f64 {
        crate::math::squared_distance(z, &self.mean).sqrt()
    }

    /// `sqrt((z - mu)^T (Sigma + ridge I)^-1 (z - mu))` via forward substitution.
    pub fn mahalanobis(&self, z: &[f64]) -> f64 {
        let d = self.mean.len();
        let mut y = vec![0.0; d];
        for i in 0..d {
            let mut s = z[i] - self.mean[i];
            for (j, yj) in y.iter().enumerate().take(i) {
                s -= self.chol.get(i, j) * yj;
            }
            y[i] = s / self.chol.get(i, i);
        }
        y.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn distance(&self, z: &[f64], metric: GdMetric) -> f64 {
        match metric {
            GdMetric::Euclidean => self.euclidean(z),
            GdMetric::Mahalanobis => self.mahalanobis(z),
        }
    }
}

/// One Gaussian per class in the index (`multimodal`) or a single one over
/// all labelled-or-not rows.
pub fn fit_gaussians(index: &LatentIndex, multimodal: bool) -> Result<Vec<GaussianComponent>> {
    let enc = index.encodings();
    if !multimodal {
        return Ok(vec![GaussianComponent::fit(enc)?]);
    }
    let ids = index
        .class_ids()
        .ok_or_else(|| AresError::InvalidArgument("multimodal Gaussians need class ids in the index".into()))?;
    let mut classes: Vec<u32> = ids.iter().copied().filter(|&c| c != UNLABELLED).collect();
    classes.sort_unstable();
    classes.dedup();
    ensure!(!classes.is_empty(), InvalidArgument, "index has no labelled rows");
    classes
        .into_iter()
        .map(|c| {
            let rows: Vec<usize> = (0..ids.len()).filter(|&i| ids[i] == c).collect();
            ensure!(
                rows.len() >= 2,
                InvalidArgument,
                "class {c} has {} samples; at least 2 are needed",
                rows.len()
            );
            GaussianComponent::fit(&enc.select_rows(&rows))
        })
        .collect()
}

/// Distance from `z` to the closest component.
pub fn gaussian_distance_score(components: &[GaussianComponent], z: &[f64], metric: GdMetric) -> Result<f64> {
    ensure!(!components.is_empty(), InvalidArgument, "no Gaussian components fitted");
    for c in components {
        ensure!(
            c.mean.len() == z.len(),
            Dimension,
            "query has {} dimensions, component {}",
            z.len(),
            c.mean.len()
        );
    }
    Ok(components
        .iter()
        .map(|c| c.distance(z, metric))
        .fold(f64::INFINITY, f64::min))
}

/// A density method fitted to a latent index.
#[derive(Clone, Debug)]
pub enum DensityScorer {
    Lof(LofModel),
    Knn { k: usize },
    Gaussian {
        components: Vec<GaussianComponent>,
        metric: GdMetric,
    },
}

impl DensityScorer {
    pub fn fit(method: &DensityMethod, index: &LatentIndex) -> Result<Self> {
        match *method {
            DensityMethod::Lof { k } => Ok(DensityScorer::Lof(LofModel::fit(index, k)?)),
            DensityMethod::Knn { k } => {
                ensure!(
                    k >= 1 && k <= index.len(),
                    InvalidArgument,
                    "KNN needs 1 <= k <= {}, got {k}",
                    index.len()
                );
                Ok(DensityScorer::Knn { k })
            }
            DensityMethod::GaussianDistance { metric, multimodal } => Ok(DensityScorer::Gaussian {
                components: fit_gaussians(index, multimodal)?,
                metric,
            }),
            DensityMethod::NormalizingFlow => Err(AresError::Unsupported(
                "normalizing-flow density is not implemented; use lof, knn, gd-euclidean or gd-mahalanobis".into(),
            )),
        }
    }

    /// `d(x)` for the latent encoding `z`; larger means sparser.
    pub fn score(&self, index: &LatentIndex, z: &[f64]) -> Result<f64> {
        match self {
            DensityScorer::Lof(m) => m.score(index, z),
            DensityScorer::Knn { k } => knn_distance_score(index, z, *k),
            DensityScorer::Gaussian { components, metric } => gaussian_distance_score(components, z, *metric),
        }
    }
}
