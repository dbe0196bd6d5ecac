//! The combined anomaly score `s(x) = r(x) + alpha * d(x)` and its parts.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::autoencoder::AutoencoderModel;
use crate::density::{DensityMethod, DensityScorer};
use crate::error::{ensure, Result};
use crate::latent::LatentIndex;
use crate::math::{median, DenseMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AresConfig {
    /// Neighbours whose stored errors form the local baseline.
    pub k_reconstruction: usize,
    pub alpha: f64,
    pub density: DensityMethod,
}

impl Default for AresConfig {
    fn default() -> Self {
        Self {
            k_reconstruction: 10,
            alpha: 0.5,
            density: DensityMethod::default(),
        }
    }
}

impl AresConfig {
    pub fn validate(&self) -> Result<()> {
        ensure!(self.k_reconstruction >= 1, Config, "k_reconstruction must be at least 1");
        ensure!(
            self.alpha.is_finite() && self.alpha >= 0.0,
            Config,
            "alpha must be a non-negative number, got {}",
            self.alpha
        );
        match self.density {
            DensityMethod::Lof { k } | DensityMethod::Knn { k } => {
                ensure!(k >= 1, Config, "density k must be at least 1");
            }
            DensityMethod::NormalizingFlow => {
                return Err(crate::error::AresError::Unsupported(
                    "normalizing-flow density is not implemented; use lof, knn, gd-euclidean or gd-mahalanobis".into(),
                ))
            }
            DensityMethod::GaussianDistance { .. } => {}
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreBreakdown {
    /// `s(x)`
    pub total: f64,
    /// `r(x)`
    pub local_reconstruction: f64,
    /// `d(x)`
    pub local_density: f64,
    /// `||x - x_hat||^2`
    pub raw_reconstruction: f64,
    pub neighbour_median_error: f64,
}

/// One line of a score JSONL file.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub id: usize,
    pub total: f64,
    pub r: f64,
    pub d: f64,
    pub raw: f64,
    pub neighbour_median: f64,
}

impl ScoreBreakdown {
    pub fn record(&self, id: usize) -> ScoreRecord {
        ScoreRecord {
            id,
            total: self.total,
            r: self.local_reconstruction,
            d: self.local_density,
            raw: self.raw_reconstruction,
            neighbour_median: self.neighbour_median_error,
        }
    }

    pub fn value(&self, kind: ScoreKind) -> f64 {
        match kind {
            ScoreKind::Ares => self.total,
            ScoreKind::AeBaseline => self.raw_reconstruction,
            ScoreKind::LocalReconstruction => self.local_reconstruction,
            ScoreKind::LocalDensity => self.local_density,
        }
    }
}

/// Which part of the breakdown a scorer ranks by.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreKind {
    Ares,
    /// Plain reconstruction error.
    AeBaseline,
    LocalReconstruction,
    LocalDensity,
}

/// `(error - median(neighbour_errors), median)`.
pub fn local_reconstruction_from_errors(test_error: f64, neighbour_errors: &[f64]) -> Result<(f64, f64)> {
    let m = median(neighbour_errors)?;
    Ok((test_error - m, m))
}

/// `r + alpha * d`.
pub fn compose(r: f64, d: f64, alpha: f64) -> f64 {
    r + alpha * d
}

/// `(r(x), neighbour median error)` for one input row.
pub fn local_reconstruction_score(
    model: &AutoencoderModel,
    index: &LatentIndex,
    x: &[f64],
    k: usize,
) -> Result<(f64, f64)> {
    let (z, errors) = model.encode_with_errors(&DenseMatrix::row_vector(x)?)?;
    let neighbours = index.query_knn(z.row(0), k)?;
    let stored: Vec<f64> = neighbours.indices.iter().map(|&i| index.recon_errors()[i]).collect();
    local_reconstruction_from_errors(errors[0], &stored)
}

/// A model, its index and a fitted density scorer, ready to score rows.
#[derive(Clone, Debug)]
pub struct AresScorer<'a> {
    model: &'a AutoencoderModel,
    index: &'a LatentIndex,
    density: DensityScorer,
    config: AresConfig,
}

impl<'a> AresScorer<'a> {
    pub fn fit(model: &'a AutoencoderModel, index: &'a LatentIndex, config: &AresConfig) -> Result<Self> {
        config.validate()?;
        ensure!(
            model.latent_dim() == index.dim(),
            Dimension,
            "index holds {}-d encodings but the model bottleneck is {}",
            index.dim(),
            model.latent_dim()
        );
        ensure!(
            config.k_reconstruction <= index.len(),
            InvalidArgument,
            "k = {} exceeds the {} indexed training points",
            config.k_reconstruction,
            index.len()
        );
        let density = DensityScorer::fit(&config.density, index)?;
        Ok(Self {
            model,
            index,
            density,
            config: *config,
        })
    }

    pub fn config(&self) -> &AresConfig {
        &self.config
    }

    pub fn density(&self) -> &DensityScorer {
        &self.density
    }

    pub fn score(&self, x: &[f64]) -> Result<ScoreBreakdown> {
        Ok(self.score_batch(&DenseMatrix::row_vector(x)?)?.remove(0))
    }

    /// Scores every row independently; output order follows the input.
    pub fn score_batch(&self, x: &DenseMatrix) -> Result<Vec<ScoreBreakdown>> {
        ensure!(x.rows() > 0, InvalidArgument, "nothing to score");
        let (z, errors) = self.model.encode_with_errors(x)?;
        (0..x.rows())
            .into_par_iter()
            .map(|i| self.score_encoded(z.row(i), errors[i]))
            .collect()
    }

    /// Scores a row given its encoding and reconstruction error.
    pub fn score_encoded(&self, z: &[f64], raw: f64) -> Result<ScoreBreakdown> {
        let neighbours = self.index.query_knn(z, self.config.k_reconstruction)?;
        let stored: Vec<f64> = neighbours
            .indices
            .iter()
            .map(|&i| self.index.recon_errors()[i])
            .collect();
        let (r, m) = local_reconstruction_from_errors(raw, &stored)?;
        let d = self.density.score(self.index, z)?;
        Ok(ScoreBreakdown {
            total: compose(r, d, self.config.alpha),
            local_reconstruction: r,
            local_density: d,
            raw_reconstruction: raw,
            neighbour_median_error: m,
        })
    }
}

/// Scores one row. Fits the density scorer on every call; use [`AresScorer`]
/// for repeated scoring.
pub fn ares_score(
    model: &AutoencoderModel,
    index: &LatentIndex,
    x: &[f64],
    config: &AresConfig,
) -> Result<ScoreBreakdown> {
    AresScorer::fit(model, index, config)?.score(x)
}

pub fn score_batch(
    model: &AutoencoderModel,
    index: &LatentIndex,
    x: &DenseMatrix,
    config: &AresConfig,
) -> Result<Vec<ScoreBreakdown>> {
    AresScorer::fit(model, index, config)?.score_batch(x)
}
