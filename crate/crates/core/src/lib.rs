//! Locally adaptive anomaly scoring for dense autoencoders.
//!
//! An autoencoder is trained on normal data only. At test time every sample is
//! judged against its neighbourhood in the latent space rather than against a
//! single global threshold:
//!
//! * the **local reconstruction score** `r(x)` is the sample's squared
//!   reconstruction error minus the median error of its `k` nearest training
//!   encodings;
//! * the **local density score** `d(x)` measures how sparse the latent region
//!   around the sample is (local outlier factor by default);
//! * the combined score is `s(x) = r(x) + alpha * d(x)`.
//!
//! The crate also carries everything needed to evaluate the score: dataset
//! loaders and a synthetic heteroscedastic generator, the one-class /
//! multi-class normality protocol, AUC, the one-sided Wilcoxon signed-rank
//! test and the ablation sweeps.
//!
//! ```no_run
//! use ares::prelude::*;
//!
//! let data = make_synthetic(&SyntheticSpec::heteroscedastic_benchmark(), 7).unwrap();
//! let plan = ExperimentPlan::single_class("synthetic", vec![
//!     ScorerSpec::ares_default(),
//!     ScorerSpec::ae_baseline(),
//! ]);
//! let outcome = run_normality_experiment(&data, &plan, &ModelOptions::default()).unwrap();
//! for result in &outcome.results {
//!     println!("{}: {:.4}", result.scorer_id, result.mean_auc);
//! }
//! ```

pub mod autoencoder;
mod binio;
pub mod cli;
pub mod datasets;
pub mod density;
pub mod error;
pub mod eval;
pub mod latent;
pub mod math;
pub mod nn;
pub mod scoring;

pub use error::{AresError, Result};

pub mod prelude {
    pub use crate::autoencoder::{
        build_architecture, load_model, save_model, ArchitectureSpec, AutoencoderModel, DataKind,
    };
    pub use crate::datasets::{
        load_csv, load_idx_images, make_synthetic, standardize, LabelledDataset, SplitAssignment,
        SyntheticSpec,
    };
    pub use crate::density::{DensityMethod, DensityScorer, GdMetric};
    pub use crate::error::{AresError, Result};
    pub use crate::eval::{
        auc, run_contamination_sweep, run_normality_experiment, wilcoxon_one_sided,
        ExperimentOutcome, ExperimentPlan, ExperimentResult, ModelOptions, Normality, ScorerSpec,
    };
    pub use crate::latent::{LatentIndex, NeighbourSet};
    pub use crate::math::{fit_pca, median, DenseMatrix, PcaModel};
    pub use crate::nn::TrainConfig;
    pub use crate::scoring::{ares_score, score_batch, AresConfig, ScoreBreakdown};
}
