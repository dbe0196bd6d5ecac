use serde::{Deserialize, Serialize};

use super::metrics::mean_and_std;
use super::protocol::{ares_with_k, run_normality_experiment, ExperimentOutcome, ExperimentPlan, ModelOptions, ScorerSpec};
use crate::datasets::LabelledDataset;
use crate::density::{DensityMethod, GdMetric};
use crate::error::{ensure, Result};
use crate::scoring::{AresConfig, ScoreKind};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub label: String,
    pub mean_auc: f64,
    pub std_auc: f64,
    pub per_run_auc: Vec<f64>,
}

/// Mean AUC for each value of one swept parameter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub parameter: String,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn from_outcome(parameter: &str, outcome: &ExperimentOutcome) -> Self {
        Self {
            parameter: parameter.into(),
            rows: outcome
                .results
                .iter()
                .map(|r| SweepRow {
                    label: r.scorer_id.clone(),
                    mean_auc: r.mean_auc,
                    std_auc: r.std_auc,
                    per_run_auc: r.per_run_auc.clone(),
                })
                .collect(),
        }
    }

    /// `<parameter>,mean_auc,std_auc`
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([self.parameter.as_str(), "mean_auc", "std_auc"])
            .map_err(super::csv_error)?;
        for r in &self.rows {
            w.write_record([r.label.clone(), format!("{:?}", r.mean_auc), format!("{:?}", r.std_auc)])
                .map_err(super::csv_error)?;
        }
        super::finish_csv(w)
    }
}

fn format_number(x: f64) -> String {
    format!("{x}")
}

/// ARES scorers differing only in `alpha`; ids are the alpha values.
pub fn alpha_sweep_scorers(alphas: &[f64], base: AresConfig) -> Vec<ScorerSpec> {
    alphas
        .iter()
        .map(|&a| ScorerSpec::new(format_number(a), ScoreKind::Ares, AresConfig { alpha: a, ..base }))
        .collect()
}

/// ARES scorers with LOF and KNN over the given `k` values plus the four
/// Gaussian-distance variants; ids are the density labels.
pub fn density_sweep_scorers(lof_k: &[usize], knn_k: &[usize], base: AresConfig) -> Vec<ScorerSpec> {
    let mut methods: Vec<DensityMethod> = lof_k.iter().map(|&k| DensityMethod::Lof { k }).collect();
    methods.extend(knn_k.iter().map(|&k| DensityMethod::Knn { k }));
    for metric in [GdMetric::Euclidean, GdMetric::Mahalanobis] {
        for multimodal in [false, true] {
            methods.push(DensityMethod::GaussianDistance { metric, multimodal });
        }
    }
    methods
        .into_iter()
        .map(|density| ScorerSpec::new(density.label(), ScoreKind::Ares, AresConfig { density, ..base }))
        .collect()
}

/// Runs `plan` with `scorers` in place of its own and tabulates the result.
pub fn run_scorer_sweep(
    data: &LabelledDataset,
    plan: &ExperimentPlan,
    options: &ModelOptions,
    parameter: &str,
    scorers: Vec<ScorerSpec>,
) -> Result<(SweepTable, ExperimentOutcome)> {
    let mut p = plan.clone();
    p.scorers = scorers;
    let outcome = run_normality_experiment(data, &p, options)?;
    Ok((SweepTable::from_outcome(parameter, &outcome), outcome))
}

/// Mean AUC of ARES per (contamination %, k) cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContaminationSweep {
    pub percents: Vec<f64>,
    pub ks: Vec<usize>,
    /// `mean_auc[i][j]` is the cell for `percents[i]` and `ks[j]`.
    pub mean_auc: Vec<Vec<f64>>,
    pub std_auc: Vec<Vec<f64>>,
    pub outcomes: Vec<ExperimentOutcome>,
}

impl ContaminationSweep {
    pub fn cell(&self, percent: f64, k: usize) -> Option<f64> {
        let i = self.percents.iter().position(|&p| p == percent)?;
        let j = self.ks.iter().position(|&x| x == k)?;
        Some(self.mean_auc[i][j])
    }

    /// One row per contamination level, one column per `k`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["contamination_percent".to_string()];
        header.extend(self.ks.iter().map(|k| format!("k={k}")));
        w.write_record(&header).map_err(super::csv_error)?;
        for (p, row) in self.percents.iter().zip(&self.mean_auc) {
            let mut rec = vec![format_number(*p)];
            rec.extend(row.iter().map(|v| format!("{v:?}")));
            w.write_record(&rec).map_err(super::csv_error)?;
        }
        super::finish_csv(w)
    }
}

/// Trains with each contamination level in `plan.sweeps.contamination_percent`
/// and scores with ARES at each `plan.sweeps.contamination_k`, the same `k`
/// serving both the local reconstruction and LOF.
///
/// Contaminants are anomalies from the plan's anomaly classes added to the
/// training split and treated as normal; the test sets do not change with the
/// contamination level.
pub fn run_contamination_sweep(
    data: &LabelledDataset,
    plan: &ExperimentPlan,
    options: &ModelOptions,
) -> Result<ContaminationSweep> {
    let percents = plan.sweeps.contamination_percent.clone();
    let ks = plan.sweeps.contamination_k.clone();
    ensure!(!percents.is_empty() && !ks.is_empty(), Config, "empty contamination sweep grid");
    let scorers: Vec<ScorerSpec> = ks.iter().map(|&k| ares_with_k(k)).collect();
    let mut mean_auc = Vec::new();
    let mut std_auc = Vec::new();
    let mut outcomes = Vec::new();
    for &p in &percents {
        let mut cell_plan = plan.clone();
        cell_plan.contamination_percent = p;
        cell_plan.scorers = scorers.clone();
        let outcome = run_normality_experiment(data, &cell_plan, options)?;
        let (m, s): (Vec<f64>, Vec<f64>) = outcome
            .results
            .iter()
            .map(|r| mean_and_std(&r.per_run_auc))
            .unzip();
        mean_auc.push(m);
        std_auc.push(s);
        outcomes.push(outcome);
    }
    Ok(ContaminationSweep {
        percents,
        ks,
        mean_auc,
        std_auc,
        outcomes,
    })
}
