use std::collections::{BTreeMap, HashSet};
use std::time::Instant;

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{auc, mean_and_std, wilcoxon_signed_rank, WilcoxonResult};
use crate::autoencoder::{tabular_architecture, ArchitectureSpec, AutoencoderModel, DataKind, IMAGE_ENCODER_SIZES};
use crate::datasets::{make_split, standardize, LabelledDataset, SplitAssignment, SplitParams};
use crate::density::{DensityMethod, UNLABELLED};
use crate::error::{ensure, AresError, Result};
use crate::latent::LatentIndex;
use crate::math::{fit_pca, DenseMatrix};
use crate::nn::TrainConfig;
use crate::scoring::{AresConfig, AresScorer, ScoreBreakdown, ScoreKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normality {
    /// One class is normal, every other class anomalous; one run per class.
    OneClass,
    /// Every class but one is normal; one run per held-out class.
    MultiClass,
    /// The dataset's own `anomaly_class` is anomalous; a single run.
    SingleClass,
}

/// A named way of turning a score breakdown into a ranking.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScorerSpec {
    pub id: String,
    pub kind: ScoreKind,
    #[serde(default)]
    pub config: AresConfig,
}

impl ScorerSpec {
    pub fn new(id: impl Into<String>, kind: ScoreKind, config: AresConfig) -> Self {
        Self {
            id: id.into(),
            kind,
            config,
        }
    }

    /// `s(x)` with k = 10, alpha = 0.5 and LOF.
    pub fn ares_default() -> Self {
        Self::new("ares", ScoreKind::Ares, AresConfig::default())
    }

    /// Plain reconstruction error.
    pub fn ae_baseline() -> Self {
        Self::new("ae", ScoreKind::AeBaseline, AresConfig::default())
    }

    pub fn local_reconstruction() -> Self {
        Self::new("r", ScoreKind::LocalReconstruction, AresConfig::default())
    }

    pub fn local_density() -> Self {
        Self::new("d", ScoreKind::LocalDensity, AresConfig::default())
    }
}

/// Parameter grids for the ablation sweeps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepGrids {
    pub alpha: Vec<f64>,
    pub lof_k: Vec<usize>,
    pub knn_k: Vec<usize>,
    pub contamination_percent: Vec<f64>,
    pub contamination_k: Vec<usize>,
}

impl Default for SweepGrids {
    fn default() -> Self {
        Self {
            alpha: vec![0.1, 0.25, 0.5, 1.0, 2.0],
            lof_k: vec![10, 40, 100],
            knn_k: vec![5, 20, 40],
            contamination_percent: vec![0.0, 0.5, 1.0, 2.0, 3.0, 5.0, 10.0],
            contamination_k: vec![10, 50, 100, 200, 500],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentPlan {
    pub dataset_id: String,
    pub normality: Normality,
    pub scorers: Vec<ScorerSpec>,
    pub contamination_percent: f64,
    pub seed: u64,
    pub test_fraction: f64,
    pub val_fraction: f64,
    /// Restricts the runs to these held classes (the normal class in
    /// one-class mode, the anomalous class in multi-class mode).
    pub arrangements: Option<Vec<u32>>,
    pub sweeps: SweepGrids,
}

impl Default for ExperimentPlan {
    fn default() -> Self {
        let split = SplitParams::default();
        Self {
            dataset_id: "dataset".into(),
            normality: Normality::OneClass,
            scorers: Vec::new(),
            contamination_percent: 0.0,
            seed: 0,
            test_fraction: split.test_fraction,
            val_fraction: split.val_fraction,
            arrangements: None,
            sweeps: SweepGrids::default(),
        }
    }
}

/// Normal and anomalous classes of one run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Arrangement {
    pub label: String,
    pub held_class: u32,
    pub normal_classes: Vec<u32>,
    pub anomaly_classes: Vec<u32>,
}

impl ExperimentPlan {
    pub fn new(dataset_id: impl Into<String>, normality: Normality, scorers: Vec<ScorerSpec>) -> Self {
        Self {
            dataset_id: dataset_id.into(),
            normality,
            scorers,
            ..Self::default()
        }
    }

    pub fn one_class(dataset_id: impl Into<String>, scorers: Vec<ScorerSpec>) -> Self {
        Self::new(dataset_id, Normality::OneClass, scorers)
    }

    pub fn multi_class(dataset_id: impl Into<String>, scorers: Vec<ScorerSpec>) -> Self {
        Self::new(dataset_id, Normality::MultiClass, scorers)
    }

    pub fn single_class(dataset_id: impl Into<String>, scorers: Vec<ScorerSpec>) -> Self {
        Self::new(dataset_id, Normality::SingleClass, scorers)
    }

    pub fn split_params(&self) -> SplitParams {
        SplitParams {
            test_fraction: self.test_fraction,
            val_fraction: self.val_fraction,
            contamination_percent: self.contamination_percent,
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(!self.scorers.is_empty(), Config, "plan has no scorers");
        let mut seen = HashSet::new();
        for s in &self.scorers {
            ensure!(seen.insert(s.id.as_str()), Config, "duplicate scorer id {:?}", s.id);
            s.config.validate()?;
        }
        ensure!(
            self.test_fraction > 0.0 && self.test_fraction < 1.0,
            Config,
            "test_fraction must be in (0, 1)"
        );
        ensure!(
            self.val_fraction > 0.0 && self.val_fraction < 1.0,
            Config,
            "val_fraction must be in (0, 1)"
        );
        ensure!(
            (0.0..=100.0).contains(&self.contamination_percent),
            Config,
            "contamination_percent must be within 0..=100"
        );
        Ok(())
    }

    /// The runs this plan performs on `data`, in ascending class order.
    pub fn arrangements(&self, data: &LabelledDataset) -> Result<Vec<Arrangement>> {
        let classes = data.classes();
        let all: Vec<Arrangement> = match self.normality {
            Normality::SingleClass => {
                let anomaly = data.anomaly_class.ok_or_else(|| {
                    AresError::Config("single_class normality needs a dataset with an anomaly class".into())
                })?;
                let normal: Vec<u32> = classes.iter().copied().filter(|&c| c != anomaly).collect();
                vec![Arrangement {
                    label: format!("anomaly={anomaly}"),
                    held_class: anomaly,
                    normal_classes: normal,
                    anomaly_classes: vec![anomaly],
                }]
            }
            Normality::OneClass | Normality::MultiClass => {
                ensure!(
                    data.anomaly_class.is_none(),
                    Config,
                    "dataset carries an explicit anomaly class; use single_class normality"
                );
                ensure!(
                    classes.len() >= 2,
                    Config,
                    "{:?} normality needs at least 2 classes, found {}",
                    self.normality,
                    classes.len()
                );
                classes
                    .iter()
                    .map(|&c| {
                        let others: Vec<u32> = classes.iter().copied().filter(|&o| o != c).collect();
                        if self.normality == Normality::OneClass {
                            Arrangement {
                                label: format!("normal={c}"),
                                held_class: c,
                                normal_classes: vec![c],
                                anomaly_classes: others,
                            }
                        } else {
                            Arrangement {
                                label: format!("anomaly={c}"),
                                held_class: c,
                                normal_classes: others,
                                anomaly_classes: vec![c],
                            }
                        }
                    })
                    .collect()
            }
        };
        match &self.arrangements {
            None => Ok(all),
            Some(wanted) => {
                for w in wanted {
                    ensure!(
                        all.iter().any(|a| a.held_class == *w),
                        Config,
                        "arrangement class {w} is not in the dataset"
                    );
                }
                Ok(all.into_iter().filter(|a| wanted.contains(&a.held_class)).collect())
            }
        }
    }
}

/// Departures from the reference architecture.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArchitectureOverrides {
    /// Full encoder widths, input first.
    pub encoder_sizes: Option<Vec<usize>>,
    /// Fixed tabular bottleneck instead of the PCA-derived one.
    pub bottleneck: Option<usize>,
    /// Explained-variance share that sets the tabular bottleneck.
    pub variance_threshold: f64,
}

impl Default for ArchitectureOverrides {
    fn default() -> Self {
        Self {
            encoder_sizes: None,
            bottleneck: None,
            variance_threshold: crate::autoencoder::BOTTLENECK_VARIANCE,
        }
    }
}

impl ArchitectureOverrides {
    pub fn validate(&self) -> Result<()> {
        ensure!(
            self.variance_threshold > 0.0 && self.variance_threshold <= 1.0,
            Config,
            "variance_threshold must be in (0, 1]"
        );
        if let Some(b) = self.bottleneck {
            ensure!(b >= 1, Config, "bottleneck must be at least 1");
        }
        Ok(())
    }

    /// Architecture for `kind` data whose training rows are `train`.
    pub fn resolve(&self, kind: DataKind, train: &DenseMatrix) -> Result<ArchitectureSpec> {
        let dim = train.cols();
        if let Some(sizes) = &self.encoder_sizes {
            ensure!(
                sizes.first() == Some(&dim),
                Config,
                "encoder_sizes must start with the input width {dim}"
            );
            return ArchitectureSpec::new(kind, sizes.clone()).map_err(|e| AresError::Config(e.to_string()));
        }
        match kind {
            DataKind::Image => {
                ensure!(
                    dim == IMAGE_ENCODER_SIZES[0],
                    Dimension,
                    "image architecture expects {} inputs, got {dim}",
                    IMAGE_ENCODER_SIZES[0]
                );
                ArchitectureSpec::new(kind, IMAGE_ENCODER_SIZES.to_vec())
            }
            DataKind::Tabular => {
                ensure!(dim >= 2, Data, "tabular data needs at least 2 features");
                let b = match self.bottleneck {
                    Some(b) => b,
                    None => {
                        let pca = fit_pca(train, dim.min(train.rows()))?;
                        pca.components_for_variance(self.variance_threshold)?
                    }
                };
                let capped = b.min(dim - 1);
                if capped != b {
                    warn!("bottleneck {b} capped to {capped} so the autoencoder compresses");
                }
                tabular_architecture(dim, capped)
            }
        }
    }
}

/// Model-building choices shared by every run of an experiment.
///
/// `train.seed` is replaced in each run by a seed derived from the plan seed
/// and the arrangement.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelOptions {
    pub train: TrainConfig,
    pub architecture: ArchitectureOverrides,
}

impl ModelOptions {
    pub fn validate(&self) -> Result<()> {
        self.train.validate()?;
        self.architecture.validate()
    }
}

/// Wall-clock seconds spent in each phase of a run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunTimings {
    pub train_secs: f64,
    pub baseline_score_secs: f64,
    pub ares_score_secs: f64,
}

/// What happened in one arrangement.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub arrangement: Arrangement,
    pub seed: u64,
    pub n_train: usize,
    pub n_val: usize,
    pub n_contaminants: usize,
    pub n_test_normal: usize,
    pub n_test_anomaly: usize,
    pub bottleneck: usize,
    pub best_epoch: usize,
    pub epochs_run: usize,
    pub best_val_loss: f64,
    /// Informational only; not serialized so result files stay reproducible.
    #[serde(skip)]
    pub timings: RunTimings,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkippedRun {
    pub arrangement: String,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub scorer_id: String,
    pub kind: ScoreKind,
    pub config: AresConfig,
    /// AUC of each completed run, in the order of `ExperimentOutcome::runs`.
    pub per_run_auc: Vec<f64>,
    pub mean_auc: f64,
    /// Population standard deviation (divisor N) over runs.
    pub std_auc: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub a: String,
    pub b: String,
    pub result: Option<WilcoxonResult>,
    /// Why no p-value could be computed.
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentOutcome {
    pub plan: ExperimentPlan,
    pub options: ModelOptions,
    pub preprocessing: String,
    pub std_divisor: String,
    pub runs: Vec<RunRecord>,
    pub skipped: Vec<SkippedRun>,
    pub results: Vec<ExperimentResult>,
}

impl ExperimentOutcome {
    pub fn result(&self, scorer_id: &str) -> Option<&ExperimentResult> {
        self.results.iter().find(|r| r.scorer_id == scorer_id)
    }

    /// One-sided Wilcoxon test that scorer `a` beats scorer `b`, pairing
    /// their per-run AUCs.
    pub fn compare(&self, a: &str, b: &str) -> Result<Comparison> {
        let ra = self
            .result(a)
            .ok_or_else(|| AresError::Config(format!("unknown scorer id {a:?}")))?;
        let rb = self
            .result(b)
            .ok_or_else(|| AresError::Config(format!("unknown scorer id {b:?}")))?;
        let (result, error) = match wilcoxon_signed_rank(&ra.per_run_auc, &rb.per_run_auc) {
            Ok(r) => (Some(r), None),
            Err(e) => (None, Some(e.to_string())),
        };
        Ok(Comparison {
            a: a.into(),
            b: b.into(),
            result,
            error,
        })
    }
}

/// A model trained for one arrangement, with its index and test set.
pub struct TrainedArrangement {
    pub arrangement: Arrangement,
    pub split: SplitAssignment,
    /// The dataset after train-split standardization.
    pub data: LabelledDataset,
    pub model: AutoencoderModel,
    pub index: LatentIndex,
    pub test_x: DenseMatrix,
    pub test_labels: Vec<bool>,
    pub train_secs: f64,
}

/// SplitMix64 finaliser, used to derive independent per-run seeds.
pub(crate) fn mix_seed(base: u64, salt: u64) -> u64 {
    let mut z = base ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Splits, standardizes, trains and indexes one arrangement.
pub fn train_arrangement(
    data: &LabelledDataset,
    plan: &ExperimentPlan,
    options: &ModelOptions,
    arrangement: &Arrangement,
) -> Result<TrainedArrangement> {
    let normal = data.indices_where(|c| arrangement.normal_classes.contains(&c));
    let anomalous = data.indices_where(|c| arrangement.anomaly_classes.contains(&c));
    let seed = mix_seed(plan.seed, arrangement.held_class as u64);
    let split = make_split(&normal, &anomalous, &plan.split_params(), seed)?;
    let data = standardize(data, &split)?;

    let train_x = data.features.select_rows(&split.train_indices);
    let val_x = data.features.select_rows(&split.val_indices);
    let arch = options.architecture.resolve(data.kind, &train_x)?;
    let mut train_config = options.train.clone();
    train_config.seed = mix_seed(seed, 1);

    let start = Instant::now();
    let mut model = AutoencoderModel::fit(arch, &train_x, &val_x, &train_config)?;
    let train_secs = start.elapsed().as_secs_f64();
    if let crate::datasets::FeatureScaling::Zscore(s) = &data.scaling {
        model.preprocessing = Some(s.clone());
    }

    let contaminants: HashSet<usize> = split.contaminant_indices.iter().copied().collect();
    let class_ids = split
        .train_indices
        .iter()
        .map(|i| if contaminants.contains(i) { UNLABELLED } else { data.class_ids[*i] })
        .collect();
    let index = LatentIndex::build(&model, &train_x, Some(class_ids))?;

    let (rows, test_labels) = split.test_rows();
    let test_x = data.features.select_rows(&rows);
    Ok(TrainedArrangement {
        arrangement: arrangement.clone(),
        split,
        data,
        model,
        index,
        test_x,
        test_labels,
        train_secs,
    })
}

struct RunOutput {
    record: RunRecord,
    aucs: Vec<f64>,
}

fn run_one(data: &LabelledDataset, plan: &ExperimentPlan, options: &ModelOptions, arrangement: &Arrangement) -> Result<RunOutput> {
    let t = train_arrangement(data, plan, options, arrangement)?;
    let report = &t.model.training.as_ref().expect("trained model").report;

    let start = Instant::now();
    let baseline = t.model.reconstruction_errors(&t.test_x)?;
    let baseline_score_secs = start.elapsed().as_secs_f64();

    // scorers sharing a configuration share one pass over the test set
    let start = Instant::now();
    let mut breakdowns: Vec<(AresConfig, Vec<ScoreBreakdown>)> = Vec::new();
    let mut aucs = Vec::with_capacity(plan.scorers.len());
    for spec in &plan.scorers {
        let scores: Vec<f64> = if spec.kind == ScoreKind::AeBaseline {
            baseline.clone()
        } else {
            let pos = match breakdowns.iter().position(|(c, _)| *c == spec.config) {
                Some(p) => p,
                None => {
                    let scorer = AresScorer::fit(&t.model, &t.index, &spec.config)?;
                    breakdowns.push((spec.config, scorer.score_batch(&t.test_x)?));
                    breakdowns.len() - 1
                }
            };
            breakdowns[pos].1.iter().map(|b| b.value(spec.kind)).collect()
        };
        aucs.push(auc(&scores, &t.test_labels)?);
    }
    let ares_score_secs = start.elapsed().as_secs_f64();

    let record = RunRecord {
        arrangement: arrangement.clone(),
        seed: t.split.seed,
        n_train: t.split.train_indices.len(),
        n_val: t.split.val_indices.len(),
        n_contaminants: t.split.contaminant_indices.len(),
        n_test_normal: t.split.test_normal_indices.len(),
        n_test_anomaly: t.split.test_anomaly_indices.len(),
        bottleneck: t.model.latent_dim(),
        best_epoch: report.best_epoch,
        epochs_run: report.history.len(),
        best_val_loss: report.best_val_loss,
        timings: RunTimings {
            train_secs: t.train_secs,
            baseline_score_secs,
            ares_score_secs,
        },
    };
    Ok(RunOutput { record, aucs })
}

/// Runs every arrangement of `plan` and aggregates per-scorer AUCs.
///
/// Arrangements whose classes are too small to split are skipped and listed
/// in the outcome; any other failure aborts the experiment.
pub fn run_normality_experiment(
    data: &LabelledDataset,
    plan: &ExperimentPlan,
    options: &ModelOptions,
) -> Result<ExperimentOutcome> {
    plan.validate()?;
    options.validate()?;
    let arrangements = plan.arrangements(data)?;
    info!(
        "{}: {} arrangement(s), {} scorer(s)",
        plan.dataset_id,
        arrangements.len(),
        plan.scorers.len()
    );
    let outputs: Vec<Result<RunOutput>> = arrangements
        .par_iter()
        .map(|a| run_one(data, plan, options, a))
        .collect();

    let mut runs = Vec::new();
    let mut skipped = Vec::new();
    let mut per_scorer: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for (a, out) in arrangements.iter().zip(outputs) {
        match out {
            Ok(o) => {
                info!("{}: done, best epoch {}", a.label, o.record.best_epoch);
                for (i, v) in o.aucs.into_iter().enumerate() {
                    per_scorer.entry(i).or_default().push(v);
                }
                runs.push(o.record);
            }
            Err(AresError::Data(reason)) => {
                warn!("skipping {}: {reason}", a.label);
                skipped.push(SkippedRun {
                    arrangement: a.label.clone(),
                    reason,
                });
            }
            Err(e) => return Err(e),
        }
    }
    ensure!(!runs.is_empty(), Data, "every arrangement was skipped");

    let results = plan
        .scorers
        .iter()
        .enumerate()
        .map(|(i, spec)| {
            let per_run_auc = per_scorer.remove(&i).unwrap_or_default();
            let (mean_auc, std_auc) = mean_and_std(&per_run_auc);
            ExperimentResult {
                scorer_id: spec.id.clone(),
                kind: spec.kind,
                config: spec.config,
                per_run_auc,
                mean_auc,
                std_auc,
            }
        })
        .collect();

    Ok(ExperimentOutcome {
        plan: plan.clone(),
        options: options.clone(),
        preprocessing: match data.kind {
            DataKind::Image => "unit_interval".into(),
            DataKind::Tabular => "zscore_train_split".into(),
        },
        std_divisor: "N".into(),
        runs,
        skipped,
        results,
    })
}

/// Scorer with `s(x)` built from `k` neighbours for both the local
/// reconstruction and LOF.
pub fn ares_with_k(k: usize) -> ScorerSpec {
    ScorerSpec::new(
        format!("ares-k{k}"),
        ScoreKind::Ares,
        AresConfig {
            k_reconstruction: k,
            density: DensityMethod::Lof { k },
            ..AresConfig::default()
        },
    )
}
