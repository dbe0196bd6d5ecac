use serde::{Deserialize, Serialize};

use super::{FeatureScaling, LabelledDataset, SplitAssignment};
use crate::autoencoder::DataKind;
use crate::binio::fnv1a;
use crate::error::{ensure, Result};
use crate::math::DenseMatrix;

/// Per-feature z-score transform fitted on a training split.
///
/// Zero-variance features pass through unchanged and are listed in
/// `constant_features`. `fit_fingerprint` hashes the row indices the
/// parameters were fitted on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub constant_features: Vec<usize>,
    pub fit_rows: usize,
    pub fit_fingerprint: u64,
}

impl Standardizer {
    /// Fits on the listed rows of `features` (population standard deviation).
    pub fn fit(features: &DenseMatrix, rows: &[usize]) -> Result<Self> {
        ensure!(!rows.is_empty(), InvalidArgument, "cannot standardize on zero rows");
        let d = features.cols();
        let n = rows.len() as f64;
        let mut mean = vec![0.0; d];
        for &i in rows {
            for (m, v) in mean.iter_mut().zip(features.row(i)) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; d];
        for &i in rows {
            for (j, v) in features.row(i).iter().enumerate() {
                var[j] += (v - mean[j]).powi(2);
            }
        }
        let std: Vec<f64> = var.iter().map(|v| (v / n).sqrt()).collect();
        let constant_features = std
            .iter()
            .enumerate()
            .filter(|(j, s)| **s <= 1e-12 * mean[*j].abs().max(1.0))
            .map(|(j, _)| j)
            .collect();
        let bytes: Vec<u8> = rows.iter().flat_map(|&i| (i as u64).to_le_bytes()).collect();
        Ok(Self {
            mean,
            std,
            constant_features,
            fit_rows: rows.len(),
            fit_fingerprint: fnv1a(&bytes),
        })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn transform(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        ensure!(
            x.cols() == self.dim(),
            Dimension,
            "standardizer fitted on {} features, got {}",
            self.dim(),
            x.cols()
        );
        let mut out = x.clone();
        let mut scale: Vec<Option<f64>> = self.std.iter().map(|s| Some(*s)).collect();
        for &j in &self.constant_features {
            scale[j] = None;
        }
        for i in 0..out.rows() {
            for (j, v) in out.row_mut(i).iter_mut().enumerate() {
                if let Some(s) = scale[j] {
                    *v = (*v - self.mean[j]) / s;
                }
            }
        }
        Ok(out)
    }
}

/// Z-scores tabular features with parameters from the training split only.
/// Image datasets are already on the unit interval and are returned unchanged.
pub fn standardize(dataset: &LabelledDataset, split: &SplitAssignment) -> Result<LabelledDataset> {
    match dataset.kind {
        DataKind::Image => Ok(dataset.clone()),
        DataKind::Tabular => {
            let fitted = Standardizer::fit(&dataset.features, &split.train_indices)?;
            let mut out = dataset.clone();
            out.features = fitted.transform(&dataset.features)?;
            out.scaling = FeatureScaling::Zscore(fitted);
            Ok(out)
        }
    }
}
