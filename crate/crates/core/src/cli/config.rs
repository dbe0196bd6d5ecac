use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::datasets::{load_csv_with_anomaly_label, load_idx_images, make_synthetic, LabelledDataset, SyntheticSpec};
use crate::error::{ensure, AresError, Result};
use crate::eval::{ArchitectureOverrides, ExperimentPlan, ModelOptions, ScorerSpec};
use crate::nn::TrainConfig;
use crate::scoring::{AresConfig, ScoreKind};

/// Where the data comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetSpec {
    /// A generated set: a named preset or an explicit spec.
    Synthetic {
        #[serde(default = "default_preset")]
        preset: String,
        #[serde(default = "default_classes")]
        classes: usize,
        #[serde(default = "default_dim")]
        dim: usize,
        #[serde(default = "default_size")]
        size: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        spec: Option<SyntheticSpec>,
    },
    /// Numeric CSV with a header row and a label column.
    Csv {
        path: PathBuf,
        #[serde(default = "default_label_column")]
        label_column: String,
        /// Label value marking anomalies, for single-class runs.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        anomaly_label: Option<String>,
    },
    /// IDX image and label files.
    Idx {
        images: PathBuf,
        labels: PathBuf,
        /// Keep at most this many images per class.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        per_class: Option<usize>,
    },
}

fn default_preset() -> String {
    "heteroscedastic".into()
}
fn default_classes() -> usize {
    4
}
fn default_dim() -> usize {
    12
}
fn default_size() -> usize {
    1500
}
fn default_label_column() -> String {
    "label".into()
}

impl Default for DatasetSpec {
    fn default() -> Self {
        DatasetSpec::Synthetic {
            preset: default_preset(),
            classes: default_classes(),
            dim: default_dim(),
            size: default_size(),
            spec: None,
        }
    }
}

impl DatasetSpec {
    pub fn name(&self) -> String {
        match self {
            DatasetSpec::Synthetic { spec: Some(_), .. } => "synthetic".into(),
            DatasetSpec::Synthetic { preset, .. } => format!("synthetic-{preset}"),
            DatasetSpec::Csv { path, .. } => stem(path),
            DatasetSpec::Idx { images, .. } => stem(images),
        }
    }

    pub fn load(&self, seed: u64) -> Result<LabelledDataset> {
        match self {
            DatasetSpec::Synthetic {
                preset,
                classes,
                dim,
                size,
                spec,
            } => {
                let spec = match spec {
                    Some(s) => s.clone(),
                    None => match preset.as_str() {
                        "heteroscedastic" => SyntheticSpec::heteroscedastic_benchmark(),
                        "multi_cluster" => SyntheticSpec::multi_cluster_benchmark(),
                        "gaussian_classes" => SyntheticSpec::gaussian_classes(*classes, *dim, *size),
                        other => {
                            return Err(AresError::Config(format!(
                                "unknown synthetic preset {other:?} (expected heteroscedastic, multi_cluster or gaussian_classes)"
                            )))
                        }
                    },
                };
                make_synthetic(&spec, seed)
            }
            DatasetSpec::Csv {
                path,
                label_column,
                anomaly_label,
            } => load_csv_with_anomaly_label(path, label_column, anomaly_label.as_deref()),
            DatasetSpec::Idx {
                images,
                labels,
                per_class,
            } => {
                let data = load_idx_images(images, labels)?;
                Ok(match per_class {
                    Some(n) => data.subsample_per_class(*n, seed),
                    None => data,
                })
            }
        }
    }
}

fn stem(p: &Path) -> String {
    p.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".into())
}

/// Everything a run needs. Unknown keys are rejected.
///
/// The top-level `seed` drives data generation, splitting and training; it
/// overwrites the nested `experiment.seed` and `train.seed` when resolved.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub dataset: DatasetSpec,
    pub architecture: ArchitectureOverrides,
    pub train: TrainConfig,
    pub ares: AresConfig,
    /// Scorers default to ARES (with the `ares` section), the plain
    /// autoencoder, and the two ARES components on their own.
    pub experiment: ExperimentPlan,
    /// Scorer pairs `"a,b"` to test for "a beats b".
    pub compare: Vec<String>,
    /// Sweeps to run: `alpha`, `density` or `contamination`, optionally with
    /// a grid, e.g. `alpha=0.1,0.5,2`.
    pub sweeps: Vec<String>,
    /// Emit neighbourhood-error scatter data for the first arrangement.
    pub diagnostic: bool,
    pub output_dir: PathBuf,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            dataset: DatasetSpec::default(),
            architecture: ArchitectureOverrides::default(),
            train: TrainConfig::default(),
            ares: AresConfig::default(),
            experiment: ExperimentPlan {
                normality: crate::eval::Normality::SingleClass,
                ..ExperimentPlan::default()
            },
            compare: Vec::new(),
            sweeps: Vec::new(),
            diagnostic: true,
            output_dir: PathBuf::from("ares-out"),
            seed: 0,
        }
    }
}

/// A parsed `--sweep` request.
#[derive(Clone, Debug, PartialEq)]
pub enum SweepRequest {
    Alpha(Option<Vec<f64>>),
    Density,
    Contamination(Option<Vec<f64>>),
}

impl SweepRequest {
    pub fn parse(s: &str) -> Result<Self> {
        let (name, values) = match s.split_once('=') {
            Some((n, v)) => (n.trim(), Some(v)),
            None => (s.trim(), None),
        };
        let numbers = |v: &str| -> Result<Vec<f64>> {
            let out = v
                .split(',')
                .map(|x| {
                    x.trim()
                        .parse::<f64>()
                        .map_err(|_| AresError::Config(format!("sweep value {x:?} is not a number")))
                })
                .collect::<Result<Vec<f64>>>()?;
            ensure!(!out.is_empty(), Config, "empty sweep grid");
            Ok(out)
        };
        match (name, values) {
            ("alpha", v) => Ok(SweepRequest::Alpha(v.map(numbers).transpose()?)),
            ("density", None) => Ok(SweepRequest::Density),
            ("contamination", v) => Ok(SweepRequest::Contamination(v.map(numbers).transpose()?)),
            ("density", Some(_)) => Err(AresError::Config(
                "the density sweep takes its grids from experiment.sweeps.lof_k / knn_k".into(),
            )),
            (other, _) => Err(AresError::Config(format!(
                "unknown sweep {other:?} (expected alpha, density or contamination)"
            ))),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| AresError::Config(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| AresError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| AresError::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes") + "\n"
    }

    /// Fills derived fields so that the config replays exactly.
    pub fn resolve(mut self) -> Result<Self> {
        self.train.seed = self.seed;
        self.experiment.seed = self.seed;
        if self.experiment.dataset_id == ExperimentPlan::default().dataset_id {
            self.experiment.dataset_id = self.dataset.name();
        }
        if self.experiment.scorers.is_empty() {
            let c = self.ares;
            self.experiment.scorers = vec![
                ScorerSpec::new("ares", ScoreKind::Ares, c),
                ScorerSpec::new("ae", ScoreKind::AeBaseline, c),
                ScorerSpec::new("r", ScoreKind::LocalReconstruction, c),
                ScorerSpec::new("d", ScoreKind::LocalDensity, c),
            ];
        }
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        self.train.validate()?;
        self.architecture.validate()?;
        self.ares.validate()?;
        self.experiment.validate()?;
        for pair in &self.compare {
            self.compare_pair(pair)?;
        }
        for s in &self.sweeps {
            SweepRequest::parse(s)?;
        }
        Ok(())
    }

    pub fn compare_pair(&self, pair: &str) -> Result<(String, String)> {
        let (a, b) = pair
            .split_once(',')
            .ok_or_else(|| AresError::Config(format!("comparison {pair:?} must look like \"a,b\"")))?;
        let (a, b) = (a.trim().to_string(), b.trim().to_string());
        for id in [&a, &b] {
            ensure!(
                self.experiment.scorers.is_empty() || self.experiment.scorers.iter().any(|s| &s.id == id),
                Config,
                "comparison names unknown scorer {id:?}"
            );
        }
        Ok((a, b))
    }

    pub fn model_options(&self) -> ModelOptions {
        ModelOptions {
            train: self.train.clone(),
            architecture: self.architecture.clone(),
        }
    }
}
