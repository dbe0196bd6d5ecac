//! Dataset loading, preprocessing, splitting and synthesis.

mod csv_io;
mod idx;
mod split;
mod standardize;
mod synthetic;

use serde::{Deserialize, Serialize};

pub use csv_io::{load_csv, load_csv_with_anomaly_label, write_csv};
pub use idx::{load_idx_images, write_idx_images, write_idx_labels, IDX_IMAGE_MAGIC, IDX_LABEL_MAGIC};
pub use split::{make_split, SplitAssignment, SplitParams};
pub use standardize::{standardize, Standardizer};
pub use synthetic::{make_synthetic, AnomalySpec, ClusterSpec, Covariance, SyntheticSpec};

use crate::autoencoder::DataKind;
use crate::error::{ensure, Result};
use crate::math::DenseMatrix;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum FeatureScaling {
    None,
    UnitInterval,
    Zscore(Standardizer),
}

/// Feature matrix with one class id per row.
///
/// Datasets with ground-truth normal/anomaly labels mark the anomalous class
/// in `anomaly_class`; every other class id is normal.
#[derive(Clone, Debug, PartialEq)]
pub struct LabelledDataset {
    pub features: DenseMatrix,
    pub class_ids: Vec<u32>,
    pub kind: DataKind,
    pub anomaly_class: Option<u32>,
    pub scaling: FeatureScaling,
}

impl LabelledDataset {
    pub fn new(features: DenseMatrix, class_ids: Vec<u32>, kind: DataKind) -> Result<Self> {
        ensure!(
            class_ids.len() == features.rows(),
            Dimension,
            "{} labels for {} rows",
            class_ids.len(),
            features.rows()
        );
        Ok(Self {
            features,
            class_ids,
            kind,
            anomaly_class: None,
            scaling: match kind {
                DataKind::Image => FeatureScaling::UnitInterval,
                DataKind::Tabular => FeatureScaling::None,
            },
        })
    }

    pub fn with_anomaly_class(mut self, class: u32) -> Self {
        self.anomaly_class = Some(class);
        self
    }

    pub fn len(&self) -> usize {
        self.features.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.features.rows() == 0
    }

    pub fn dim(&self) -> usize {
        self.features.cols()
    }

    /// Distinct class ids in ascending order.
    pub fn classes(&self) -> Vec<u32> {
        let mut c = self.class_ids.clone();
        c.sort_unstable();
        c.dedup();
        c
    }

    pub fn indices_where(&self, pred: impl Fn(u32) -> bool) -> Vec<usize> {
        self.class_ids
            .iter()
            .enumerate()
            .filter(|(_, c)| pred(**c))
            .map(|(i, _)| i)
            .collect()
    }

    pub fn class_counts(&self) -> Vec<(u32, usize)> {
        self.classes()
            .into_iter()
            .map(|c| (c, self.class_ids.iter().filter(|&&x| x == c).count()))
            .collect()
    }

    pub fn subset(&self, indices: &[usize]) -> LabelledDataset {
        LabelledDataset {
            features: self.features.select_rows(indices),
            class_ids: indices.iter().map(|&i| self.class_ids[i]).collect(),
            kind: self.kind,
            anomaly_class: self.anomaly_class,
            scaling: self.scaling.clone(),
        }
    }

    /// Keeps at most `per_class` rows of every class, chosen with a seeded shuffle.
    /// Row order of the survivors is preserved.
    pub fn subsample_per_class(&self, per_class: usize, seed: u64) -> LabelledDataset {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut keep = Vec::new();
        for c in self.classes() {
            let mut idx = self.indices_where(|x| x == c);
            idx.shuffle(&mut rng);
            idx.truncate(per_class);
            keep.extend(idx);
        }
        keep.sort_unstable();
        self.subset(&keep)
    }
}
