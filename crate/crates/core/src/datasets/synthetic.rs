use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::LabelledDataset;
use crate::autoencoder::DataKind;
use crate::error::{ensure, AresError, Result};
use crate::math::DenseMatrix;

/// Covariance of one Gaussian cluster.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Covariance {
    /// Full `d x d` matrix; must be positive definite.
    Full(Vec<Vec<f64>>),
    /// `F F^T + noise_std^2 I` with `factors` of shape `d x q`: a q-dimensional
    /// manifold plus isotropic off-manifold noise.
    LowRank { factors: Vec<Vec<f64>>, noise_std: f64 },
    Isotropic(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterSpec {
    pub mean: Vec<f64>,
    pub covariance: Covariance,
    pub size: usize,
}

/// Anomalies drawn from a normal cluster and then perturbed.
///
/// Each anomaly is a sample of `base_cluster` whose manifold coordinates are
/// multiplied by `factor_scale` (low-rank clusters only), shifted by `offset`
/// and given extra isotropic noise `extra_noise_std`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnomalySpec {
    pub base_cluster: usize,
    pub size: usize,
    #[serde(default)]
    pub extra_noise_std: f64,
    #[serde(default)]
    pub offset: Option<Vec<f64>>,
    #[serde(default = "one")]
    pub factor_scale: f64,
}

fn one() -> f64 {
    1.0
}

/// Clusters become classes `0..clusters.len()`; all anomalies share the
/// class id `clusters.len()`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    pub dim: usize,
    pub clusters: Vec<ClusterSpec>,
    #[serde(default)]
    pub anomalies: Vec<AnomalySpec>,
}

enum Sampler {
    Chol(DMatrix<f64>),
    LowRank { factors: DMatrix<f64>, noise: f64 },
}

impl Sampler {
    fn new(cov: &Covariance, dim: usize, cluster: usize) -> Result<Self> {
        match cov {
            Covariance::Full(rows) => {
                ensure!(
                    rows.len() == dim && rows.iter().all(|r| r.len() == dim),
                    Dimension,
                    "cluster {cluster}: covariance must be {dim}x{dim}"
                );
                let m = DMatrix::from_fn(dim, dim, |i, j| rows[i][j]);
                for i in 0..dim {
                    for j in 0..i {
                        ensure!(
                            (m[(i, j)] - m[(j, i)]).abs() <= 1e-10 * (1.0 + m[(i, j)].abs()),
                            Degenerate,
                            "cluster {cluster}: covariance is not symmetric"
                        );
                    }
                }
                let chol = m.cholesky().ok_or_else(|| {
                    AresError::Degenerate(format!("cluster {cluster}: covariance is not positive definite"))
                })?;
                Ok(Sampler::Chol(chol.l()))
            }
            Covariance::LowRank { factors, noise_std } => {
                ensure!(
                    factors.len() == dim,
                    Dimension,
                    "cluster {cluster}: factor matrix needs {dim} rows"
                );
                let q = factors.first().map_or(0, Vec::len);
                ensure!(
                    factors.iter().all(|r| r.len() == q),
                    Dimension,
                    "cluster {cluster}: ragged factor matrix"
                );
                ensure!(
                    *noise_std > 0.0 && noise_std.is_finite(),
                    Degenerate,
                    "cluster {cluster}: low-rank covariance needs positive noise"
                );
                Ok(Sampler::LowRank {
                    factors: DMatrix::from_fn(dim, q, |i, j| factors[i][j]),
                    noise: *noise_std,
                })
            }
            Covariance::Isotropic(s) => {
                ensure!(
                    *s > 0.0 && s.is_finite(),
                    Degenerate,
                    "cluster {cluster}: isotropic std must be positive"
                );
                Ok(Sampler::LowRank {
                    factors: DMatrix::zeros(dim, 0),
                    noise: *s,
                })
            }
        }
    }

    fn sample(&self, mean: &[f64], factor_scale: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let d = mean.len();
        let mut x = mean.to_vec();
        match self {
            Sampler::Chol(l) => {
                let e: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
                for i in 0..d {
                    for (j, ej) in e.iter().enumerate().take(i + 1) {
                        x[i] += l[(i, j)] * ej;
                    }
                }
            }
            Sampler::LowRank { factors, noise } => {
                let u: Vec<f64> = (0..factors.ncols())
                    .map(|_| factor_scale * Distribution::<f64>::sample(&StandardNormal, rng))
                    .collect();
                for (i, xi) in x.iter_mut().enumerate() {
                    let manifold: f64 = u.iter().enumerate().map(|(j, uj)| factors[(i, j)] * uj).sum();
                    let e: f64 = StandardNormal.sample(rng);
                    *xi += manifold + noise * e;
                }
            }
        }
        x
    }
}

/// Draws the clusters and anomalies described by `spec`. Rows are grouped by
/// cluster, anomalies last; identical seeds give identical bytes.
pub fn make_synthetic(spec: &SyntheticSpec, seed: u64) -> Result<LabelledDataset> {
    let d = spec.dim;
    ensure!(d >= 1, InvalidArgument, "dimension must be positive");
    ensure!(!spec.clusters.is_empty(), InvalidArgument, "at least one cluster is required");
    let samplers = spec
        .clusters
        .iter()
        .enumerate()
        .map(|(c, cl)| {
            ensure!(cl.mean.len() == d, Dimension, "cluster {c}: mean must have {d} entries");
            Sampler::new(&cl.covariance, d, c)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = Vec::new();
    let mut class_ids = Vec::new();
    for (c, (cl, sampler)) in spec.clusters.iter().zip(&samplers).enumerate() {
        for _ in 0..cl.size {
            data.extend(sampler.sample(&cl.mean, 1.0, &mut rng));
            class_ids.push(c as u32);
        }
    }
    let anomaly_class = spec.clusters.len() as u32;
    for (a, an) in spec.anomalies.iter().enumerate() {
        ensure!(
            an.base_cluster < spec.clusters.len(),
            InvalidArgument,
            "anomaly group {a}: unknown base cluster {}",
            an.base_cluster
        );
        ensure!(an.extra_noise_std >= 0.0, InvalidArgument, "anomaly group {a}: negative noise");
        if let Some(off) = &an.offset {
            ensure!(off.len() == d, Dimension, "anomaly group {a}: offset must have {d} entries");
        }
        let base = &spec.clusters[an.base_cluster];
        let sampler = &samplers[an.base_cluster];
        for _ in 0..an.size {
            let mut x = sampler.sample(&base.mean, an.factor_scale, &mut rng);
            for (j, v) in x.iter_mut().enumerate() {
                let e: f64 = StandardNormal.sample(&mut rng);
                *v += an.extra_noise_std * e + an.offset.as_ref().map_or(0.0, |o| o[j]);
            }
            data.extend(x);
            class_ids.push(anomaly_class);
        }
    }
    let rows = class_ids.len();
    let features = DenseMatrix::new(rows, d, data)?;
    let mut ds = LabelledDataset::new(features, class_ids, DataKind::Tabular)?;
    if !spec.anomalies.is_empty() {
        ds.anomaly_class = Some(anomaly_class);
    }
    Ok(ds)
}

fn random_unit_columns(dim: usize, q: usize, rng: &mut ChaCha8Rng, scale: f64) -> Vec<Vec<f64>> {
    let mut cols: Vec<Vec<f64>> = Vec::new();
    for _ in 0..q {
        // Gram-Schmidt against the previous columns
        let mut v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        for c in &cols {
            let dot: f64 = v.iter().zip(c).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(c).for_each(|(a, b)| *a -= dot * b);
        }
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        v.iter_mut().for_each(|a| *a /= norm);
        cols.push(v);
    }
    (0..dim)
        .map(|i| cols.iter().map(|c| scale * c[i]).collect())
        .collect()
}

fn random_mean(dim: usize, radius: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    v.into_iter().map(|a| radius * a / norm).collect()
}

impl SyntheticSpec {
    /// Two-cluster heteroscedastic set in 12 dimensions.
    ///
    /// Cluster 0 varies a lot off its 2-d manifold, cluster 1 barely at all.
    /// Anomalies are cluster-1 samples with moderate extra noise: their raw
    /// reconstruction error sits below that of typical cluster-0 normals but
    /// far above their cluster-1 neighbours.
    pub fn heteroscedastic_benchmark() -> Self {
        let dim = 12;
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
        let clusters = vec![
            ClusterSpec {
                mean: random_mean(dim, 6.0, &mut rng),
                covariance: Covariance::LowRank {
                    factors: random_unit_columns(dim, 2, &mut rng, 2.0),
                    noise_std: 0.6,
                },
                size: 2500,
            },
            ClusterSpec {
                mean: random_mean(dim, 6.0, &mut rng),
                covariance: Covariance::LowRank {
                    factors: random_unit_columns(dim, 2, &mut rng, 2.0),
                    noise_std: 0.05,
                },
                size: 2500,
            },
        ];
        Self {
            dim,
            clusters,
            anomalies: vec![AnomalySpec {
                base_cluster: 1,
                size: 1000,
                extra_noise_std: 0.35,
                offset: None,
                factor_scale: 1.0,
            }],
        }
    }

    /// Three normal clusters with different noise levels and two anomaly
    /// types: noisy copies of the quietest cluster, and clean points pushed
    /// far along a cluster's own manifold.
    pub fn multi_cluster_benchmark() -> Self {
        let dim = 12;
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0002);
        let noise = [0.5, 0.05, 0.2];
        let clusters = noise
            .iter()
            .map(|&n| ClusterSpec {
                mean: random_mean(dim, 7.0, &mut rng),
                covariance: Covariance::LowRank {
                    factors: random_unit_columns(dim, 2, &mut rng, 1.5),
                    noise_std: n,
                },
                size: 1700,
            })
            .collect();
        Self {
            dim,
            clusters,
            anomalies: vec![
                AnomalySpec {
                    base_cluster: 1,
                    size: 500,
                    extra_noise_std: 0.3,
                    offset: None,
                    factor_scale: 1.0,
                },
                AnomalySpec {
                    base_cluster: 2,
                    size: 500,
                    extra_noise_std: 0.0,
                    offset: None,
                    factor_scale: 3.5,
                },
            ],
        }
    }

    /// `classes` isotropic Gaussian classes with no designated anomaly label,
    /// for the one-class and multi-class normality protocols.
    pub fn gaussian_classes(classes: usize, dim: usize, size: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0003);
        let clusters = (0..classes)
            .map(|c| ClusterSpec {
                mean: random_mean(dim, 5.0, &mut rng),
                covariance: Covariance::LowRank {
                    factors: random_unit_columns(dim, 2, &mut rng, 1.5),
                    noise_std: 0.1 + 0.3 * c as f64 / classes.max(1) as f64,
                },
                size,
            })
            .collect();
        Self {
            dim,
            clusters,
            anomalies: Vec::new(),
        }
    }
}
