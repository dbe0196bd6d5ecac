//! Metrics and experiment protocols.

mod diagnostic;
mod metrics;
mod protocol;
mod sweep;

pub use diagnostic::{neighbourhood_error_diagnostic, NeighbourhoodDiagnostic};
pub use metrics::{
    auc, average_ranks, mean_and_std, wilcoxon_one_sided, wilcoxon_signed_rank, WilcoxonMethod, WilcoxonResult,
    WILCOXON_EXACT_MAX, WILCOXON_MIN_PAIRS,
};
pub use protocol::{
    ares_with_k, run_normality_experiment, train_arrangement, ArchitectureOverrides, Arrangement, Comparison, ExperimentOutcome,
    ExperimentPlan, ExperimentResult, ModelOptions, Normality, RunRecord, RunTimings, ScorerSpec, SkippedRun,
    SweepGrids, TrainedArrangement,
};
pub use sweep::{
    alpha_sweep_scorers, density_sweep_scorers, run_contamination_sweep, run_scorer_sweep, ContaminationSweep,
    SweepRow, SweepTable,
};

use crate::error::{AresError, Result};

fn csv_error(e: csv::Error) -> AresError {
    AresError::Io(std::io::Error::other(e))
}

fn finish_csv(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| AresError::Io(std::io::Error::other(e.to_string())))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
