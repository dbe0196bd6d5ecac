//! Command-line front end: `train`, `score`, `experiment`, `sweep` and
//! `diagnose`.
//!
//! Settings come from a JSON [`RunConfig`] (`--config`), then flags override
//! individual fields. Exit codes: 0 success, 2 configuration error, 3 data
//! error, 4 numeric failure.

mod config;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use log::info;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub use config::{DatasetSpec, RunConfig, SweepRequest};

use crate::autoencoder::{load_model, save_model, AutoencoderModel, DataKind};
use crate::datasets::Standardizer;
use crate::density::DensityMethod;
use crate::error::{ensure, AresError, Result};
use crate::eval::{
    alpha_sweep_scorers, density_sweep_scorers, neighbourhood_error_diagnostic, run_contamination_sweep,
    run_normality_experiment, run_scorer_sweep, train_arrangement, Comparison, ContaminationSweep,
    ExperimentOutcome, NeighbourhoodDiagnostic, SweepTable,
};
use crate::latent::LatentIndex;
use crate::nn::TrainReport;
use crate::scoring::AresScorer;

#[derive(Debug, Parser)]
#[command(name = "ares", version, about = "Locally adaptive anomaly scoring for autoencoders")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Neighbourhood size for the local reconstruction score and LOF/KNN.
    #[arg(long, global = true)]
    pub k: Option<usize>,
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    /// lof, knn, gd-euclidean or gd-mahalanobis.
    #[arg(long, global = true)]
    pub density: Option<String>,
    /// Worker threads.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// CSV file to use instead of the configured dataset.
    #[arg(long, global = true)]
    pub data: Option<PathBuf>,
    /// Model file for `score`.
    #[arg(long, global = true)]
    pub model: Option<PathBuf>,
    /// Sweep to run, e.g. `alpha=0.1,0.25,0.5,1,2`; repeatable.
    #[arg(long, global = true)]
    pub sweep: Vec<String>,
    /// Scorer pair `a,b` to compare with a one-sided Wilcoxon test; repeatable.
    #[arg(long, global = true)]
    pub compare: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Train an autoencoder on the normal rows and write the model.
    Train,
    /// Score every row of a dataset with a trained model.
    Score,
    /// Run the normality protocol, optional sweeps and comparisons.
    Experiment,
    /// Run only the requested sweeps (alpha by default).
    Sweep,
    /// Neighbourhood reconstruction-error scatter for the first arrangement.
    Diagnose,
}

/// Entry point for the binary; returns the process exit code.
pub fn run() -> i32 {
    run_with_args(std::env::args_os())
}

pub fn run_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::new().filter_or("ARES_LOG", "warn")).try_init();
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Applies the file, then the flags, and resolves the result.
pub fn build_config(cli: &Cli) -> Result<RunConfig> {
    let mut c = match &cli.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        c.seed = seed;
    }
    if let Some(name) = &cli.density {
        let k = cli.k.or(match c.ares.density {
            DensityMethod::Lof { k } | DensityMethod::Knn { k } => Some(k),
            _ => None,
        });
        let multimodal = match c.ares.density {
            DensityMethod::GaussianDistance { multimodal, .. } => Some(multimodal),
            _ => None,
        };
        c.ares.density = DensityMethod::from_name(name, k, multimodal)?;
    }
    if let Some(k) = cli.k {
        c.ares.k_reconstruction = k;
        match &mut c.ares.density {
            DensityMethod::Lof { k: dk } | DensityMethod::Knn { k: dk } => *dk = k,
            _ => {}
        }
    }
    if let Some(alpha) = cli.alpha {
        c.ares.alpha = alpha;
    }
    if let Some(out) = &cli.out {
        c.output_dir = out.clone();
    }
    if let Some(path) = &cli.data {
        c.dataset = match &c.dataset {
            DatasetSpec::Csv {
                label_column,
                anomaly_label,
                ..
            } => DatasetSpec::Csv {
                path: path.clone(),
                label_column: label_column.clone(),
                anomaly_label: anomaly_label.clone(),
            },
            _ => DatasetSpec::Csv {
                path: path.clone(),
                label_column: "label".into(),
                anomaly_label: None,
            },
        };
    }
    if !cli.sweep.is_empty() {
        c.sweeps = cli.sweep.clone();
    }
    if !cli.compare.is_empty() {
        c.compare = cli.compare.clone();
    }
    c.resolve()
}

fn execute(cli: &Cli) -> Result<()> {
    let config = build_config(cli)?;
    let work = || match cli.command {
        Command::Train => cmd_train(&config).map(|s| {
            println!(
                "trained {} -> {} (best epoch {}, val loss {:.6})",
                s.architecture,
                s.model_path.display(),
                s.best_epoch,
                s.best_val_loss
            )
        }),
        Command::Score => {
            let model = cli.model.clone().unwrap_or_else(|| config.output_dir.join(MODEL_FILE));
            cmd_score(&config, &model).map(|s| println!("{}", s.summary_line()))
        }
        Command::Experiment => cmd_experiment(&config).map(|b| print_summary(&b)),
        Command::Sweep => cmd_sweep(&config).map(|b| print_summary(&b)),
        Command::Diagnose => cmd_diagnose(&config).map(|d| {
            let corr = d.correlation.map_or("n/a".to_string(), |c| format!("{c:.4}"));
            println!("{} test rows, neighbourhood-error correlation {corr}", d.len())
        }),
    };
    match cli.jobs {
        Some(j) => {
            ensure!(j >= 1, Config, "--jobs must be at least 1");
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(j)
                .build()
                .map_err(|e| AresError::Config(e.to_string()))?;
            pool.install(work)
        }
        None => work(),
    }
}

pub const MODEL_FILE: &str = "model.bin";
pub const CONFIG_FILE: &str = "config.json";
pub const RESULTS_FILE: &str = "results.json";
/// Wall-clock timings; the only output that differs between identical runs.
pub const RUNTIMES_FILE: &str = "runtimes.csv";

/// Sidecar holding the latent index of a model file.
pub fn index_path(model_path: &Path) -> PathBuf {
    model_path.with_extension("idx")
}

fn write_text(dir: &Path, name: &str, text: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, text)?;
    Ok(path)
}

fn csv_text(header: &[String], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| AresError::Io(std::io::Error::other(e));
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(r).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| AresError::Io(std::io::Error::other(e.to_string())))?;
    Ok(String::from_utf8(bytes).expect("utf-8"))
}

#[derive(Clone, Debug)]
pub struct TrainSummary {
    pub model_path: PathBuf,
    pub architecture: String,
    pub best_epoch: usize,
    pub best_val_loss: f64,
    pub report: TrainReport,
}

/// Trains on the dataset's normal rows (every row not in its anomaly class),
/// split 80:20 into train and validation, and writes the model, its index
/// sidecar, `loss_history.csv` and the resolved config.
pub fn cmd_train(config: &RunConfig) -> Result<TrainSummary> {
    let data = config.dataset.load(config.seed)?;
    let mut normal = data.indices_where(|c| Some(c) != data.anomaly_class);
    ensure!(normal.len() >= 4, Data, "need at least 4 normal rows to train, got {}", normal.len());
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    normal.shuffle(&mut rng);
    let n_val = ((config.experiment.val_fraction * normal.len() as f64).round() as usize).clamp(1, normal.len() - 2);
    let (val_idx, train_idx) = normal.split_at(n_val);

    let (features, preprocessing) = match data.kind {
        DataKind::Tabular => {
            let s = Standardizer::fit(&data.features, train_idx)?;
            (s.transform(&data.features)?, Some(s))
        }
        DataKind::Image => (data.features.clone(), None),
    };
    let train_x = features.select_rows(train_idx);
    let val_x = features.select_rows(val_idx);
    let arch = config.architecture.resolve(data.kind, &train_x)?;
    let sizes = format!("{:?}", arch.encoder_sizes);
    info!("training {sizes} on {} rows", train_x.rows());
    let mut model = AutoencoderModel::fit(arch, &train_x, &val_x, &config.train)?;
    model.preprocessing = preprocessing;
    let class_ids = train_idx.iter().map(|&i| data.class_ids[i]).collect();
    let index = LatentIndex::build(&model, &train_x, Some(class_ids))?;

    let dir = &config.output_dir;
    std::fs::create_dir_all(dir)?;
    let model_path = dir.join(MODEL_FILE);
    save_model(&model, &model_path)?;
    index.save(index_path(&model_path))?;
    let report = model.training.as_ref().expect("trained").report.clone();
    let rows: Vec<Vec<String>> = report
        .history
        .iter()
        .map(|e| vec![e.epoch.to_string(), format!("{:?}", e.train_loss), format!("{:?}", e.val_loss)])
        .collect();
    let header = ["epoch", "train_loss", "val_loss"].map(String::from);
    write_text(dir, "loss_history.csv", &csv_text(&header, &rows)?)?;
    write_text(dir, CONFIG_FILE, &config.to_json())?;
    Ok(TrainSummary {
        model_path,
        architecture: sizes,
        best_epoch: report.best_epoch,
        best_val_loss: report.best_val_loss,
        report,
    })
}

#[derive(Clone, Debug)]
pub struct ScoreSummary {
    pub output: PathBuf,
    pub rows: usize,
    /// Min, 25%, median, 75% and max of the total score.
    pub quantiles: [f64; 5],
}

impl ScoreSummary {
    pub fn summary_line(&self) -> String {
        let q = self.quantiles;
        format!(
            "scored {} rows -> {}; total score min {:.6} q25 {:.6} median {:.6} q75 {:.6} max {:.6}",
            self.rows,
            self.output.display(),
            q[0],
            q[1],
            q[2],
            q[3],
            q[4]
        )
    }
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Scores every row of the configured dataset with a saved model and writes
/// `scores.jsonl`, one record per row in input order.
pub fn cmd_score(config: &RunConfig, model_path: &Path) -> Result<ScoreSummary> {
    let model = load_model(model_path)?;
    let index = LatentIndex::load(index_path(model_path))?;
    let data = config.dataset.load(config.seed)?;
    ensure!(
        data.dim() == model.input_dim(),
        Data,
        "data has {} features but the model expects {}",
        data.dim(),
        model.input_dim()
    );
    ensure!(!data.is_empty(), Data, "no rows to score");
    let x = match &model.preprocessing {
        Some(s) => s.transform(&data.features)?,
        None => data.features.clone(),
    };
    let scorer = AresScorer::fit(&model, &index, &config.ares)?;
    let scores = scorer.score_batch(&x)?;
    let mut out = String::new();
    for (i, s) in scores.iter().enumerate() {
        out.push_str(&serde_json::to_string(&s.record(i)).expect("record serializes"));
        out.push('\n');
    }
    let output = write_text(&config.output_dir, "scores.jsonl", &out)?;
    let mut totals: Vec<f64> = scores.iter().map(|s| s.total).collect();
    totals.sort_by(|a, b| a.total_cmp(b));
    let quantiles = [0.0, 0.25, 0.5, 0.75, 1.0].map(|q| quantile(&totals, q));
    Ok(ScoreSummary {
        output,
        rows: scores.len(),
        quantiles,
    })
}

/// Everything an experiment or sweep writes to `results.json`.
#[derive(Clone, Debug, Serialize)]
pub struct ResultBundle {
    pub config: RunConfig,
    pub seed: u64,
    pub outcome: Option<ExperimentOutcome>,
    pub comparisons: Vec<Comparison>,
    pub alpha_sweep: Option<SweepTable>,
    pub density_sweep: Option<SweepTable>,
    pub contamination_sweep: Option<ContaminationSummary>,
    pub diagnostic: Option<DiagnosticSummary>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ContaminationSummary {
    pub percents: Vec<f64>,
    pub ks: Vec<usize>,
    pub mean_auc: Vec<Vec<f64>>,
    pub std_auc: Vec<Vec<f64>>,
}

impl From<&ContaminationSweep> for ContaminationSummary {
    fn from(s: &ContaminationSweep) -> Self {
        Self {
            percents: s.percents.clone(),
            ks: s.ks.clone(),
            mean_auc: s.mean_auc.clone(),
            std_auc: s.std_auc.clone(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DiagnosticSummary {
    pub arrangement: String,
    pub k: usize,
    pub rows: usize,
    pub correlation: Option<f64>,
}

fn print_summary(b: &ResultBundle) {
    if let Some(o) = &b.outcome {
        for r in &o.results {
            println!("{:<12} mean AUC {:.4} (std {:.4}, {} runs)", r.scorer_id, r.mean_auc, r.std_auc, r.per_run_auc.len());
        }
    }
    for c in &b.comparisons {
        match (&c.result, &c.error) {
            (Some(r), _) => println!("{} > {}: p = {:.6} ({:?}, n = {})", c.a, c.b, r.p_value, r.method, r.n),
            (None, Some(e)) => println!("{} > {}: no test ({e})", c.a, c.b),
            _ => {}
        }
    }
    for t in [&b.alpha_sweep, &b.density_sweep].into_iter().flatten() {
        for r in &t.rows {
            println!("{} {:<22} mean AUC {:.4}", t.parameter, r.label, r.mean_auc);
        }
    }
    if let Some(c) = &b.contamination_sweep {
        for (p, row) in c.percents.iter().zip(&c.mean_auc) {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.4}")).collect();
            println!("contamination {p}%: {}", cells.join(" "));
        }
    }
    println!("results in {}", b.config.output_dir.display());
}

fn write_outcome_tables(dir: &Path, outcome: &ExperimentOutcome) -> Result<()> {
    let mut header = vec!["arrangement".to_string()];
    header.extend(outcome.results.iter().map(|r| r.scorer_id.clone()));
    let rows: Vec<Vec<String>> = outcome
        .runs
        .iter()
        .enumerate()
        .map(|(i, run)| {
            let mut row = vec![run.arrangement.label.clone()];
            row.extend(outcome.results.iter().map(|r| format!("{:?}", r.per_run_auc[i])));
            row
        })
        .collect();
    write_text(dir, "per_run_auc.csv", &csv_text(&header, &rows)?)?;
    Ok(())
}

fn runtime_rows(outcome: &ExperimentOutcome, phase: &str, rows: &mut Vec<Vec<String>>) {
    for run in &outcome.runs {
        let t = run.timings;
        rows.push(vec![
            phase.to_string(),
            run.arrangement.label.clone(),
            format!("{:.3}", t.train_secs),
            format!("{:.3}", t.baseline_score_secs),
            format!("{:.3}", t.ares_score_secs),
        ]);
    }
}

fn run_bundle(config: &RunConfig, main_experiment: bool, default_sweep: bool) -> Result<ResultBundle> {
    let data = config.dataset.load(config.seed)?;
    let options = config.model_options();
    let plan = &config.experiment;
    let dir = &config.output_dir;
    std::fs::create_dir_all(dir)?;
    let mut runtimes = Vec::new();

    let mut bundle = ResultBundle {
        config: config.clone(),
        seed: config.seed,
        outcome: None,
        comparisons: Vec::new(),
        alpha_sweep: None,
        density_sweep: None,
        contamination_sweep: None,
        diagnostic: None,
    };

    if main_experiment {
        let outcome = run_normality_experiment(&data, plan, &options)?;
        write_outcome_tables(dir, &outcome)?;
        runtime_rows(&outcome, "experiment", &mut runtimes);
        for pair in &config.compare {
            let (a, b) = config.compare_pair(pair)?;
            bundle.comparisons.push(outcome.compare(&a, &b)?);
        }
        bundle.outcome = Some(outcome);
    }

    let mut requests: Vec<SweepRequest> = config
        .sweeps
        .iter()
        .map(|s| SweepRequest::parse(s))
        .collect::<Result<_>>()?;
    if requests.is_empty() && default_sweep {
        requests.push(SweepRequest::Alpha(None));
    }
    for req in requests {
        match req {
            SweepRequest::Alpha(grid) => {
                let grid = grid.unwrap_or_else(|| plan.sweeps.alpha.clone());
                let (table, outcome) =
                    run_scorer_sweep(&data, plan, &options, "alpha", alpha_sweep_scorers(&grid, config.ares))?;
                write_text(dir, "sweep_alpha.csv", &table.to_csv()?)?;
                runtime_rows(&outcome, "sweep_alpha", &mut runtimes);
                bundle.alpha_sweep = Some(table);
            }
            SweepRequest::Density => {
                let scorers = density_sweep_scorers(&plan.sweeps.lof_k, &plan.sweeps.knn_k, config.ares);
                let (table, outcome) = run_scorer_sweep(&data, plan, &options, "density", scorers)?;
                write_text(dir, "sweep_density.csv", &table.to_csv()?)?;
                runtime_rows(&outcome, "sweep_density", &mut runtimes);
                bundle.density_sweep = Some(table);
            }
            SweepRequest::Contamination(grid) => {
                let mut p = plan.clone();
                if let Some(g) = grid {
                    p.sweeps.contamination_percent = g;
                }
                let sweep = run_contamination_sweep(&data, &p, &options)?;
                write_text(dir, "sweep_contamination.csv", &sweep.to_csv()?)?;
                for o in &sweep.outcomes {
                    runtime_rows(o, &format!("contamination_{}", o.plan.contamination_percent), &mut runtimes);
                }
                bundle.contamination_sweep = Some((&sweep).into());
            }
        }
    }

    if main_experiment && config.diagnostic {
        let (d, label) = diagnostic_for_first_arrangement(config, &data)?;
        write_text(dir, "diagnostic.csv", &d.to_csv()?)?;
        bundle.diagnostic = Some(DiagnosticSummary {
            arrangement: label,
            k: d.k,
            rows: d.len(),
            correlation: d.correlation,
        });
    }

    let header = ["phase", "arrangement", "train_secs", "baseline_score_secs", "ares_score_secs"].map(String::from);
    write_text(dir, RUNTIMES_FILE, &csv_text(&header, &runtimes)?)?;
    write_text(dir, CONFIG_FILE, &config.to_json())?;
    let json = serde_json::to_string_pretty(&bundle).expect("bundle serializes") + "\n";
    write_text(dir, RESULTS_FILE, &json)?;
    Ok(bundle)
}

/// Runs the configured normality experiment, comparisons, requested sweeps
/// and the diagnostic, writing the full bundle to the output directory.
pub fn cmd_experiment(config: &RunConfig) -> Result<ResultBundle> {
    run_bundle(config, true, false)
}

/// Runs only the requested sweeps; the alpha sweep if none are requested.
pub fn cmd_sweep(config: &RunConfig) -> Result<ResultBundle> {
    run_bundle(config, false, true)
}

fn diagnostic_for_first_arrangement(
    config: &RunConfig,
    data: &crate::datasets::LabelledDataset,
) -> Result<(NeighbourhoodDiagnostic, String)> {
    let plan = &config.experiment;
    let arrangement = plan
        .arrangements(data)?
        .into_iter()
        .next()
        .ok_or_else(|| AresError::Data("no arrangements".into()))?;
    let t = train_arrangement(data, plan, &config.model_options(), &arrangement)?;
    let d = neighbourhood_error_diagnostic(&t.model, &t.index, &t.test_x, config.ares.k_reconstruction)?;
    Ok((d, arrangement.label))
}

/// Writes `diagnostic.csv` for the first arrangement of the plan.
pub fn cmd_diagnose(config: &RunConfig) -> Result<NeighbourhoodDiagnostic> {
    let data = config.dataset.load(config.seed)?;
    let (d, _) = diagnostic_for_first_arrangement(config, &data)?;
    write_text(&config.output_dir, "diagnostic.csv", &d.to_csv()?)?;
    write_text(&config.output_dir, CONFIG_FILE, &config.to_json())?;
    Ok(d)
}
