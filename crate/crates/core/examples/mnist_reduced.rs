//! Reduced MNIST run: 1000 images per digit, two arrangements per
//! normality mode, narrower hidden layers.
//!
//! Usage: `cargo run --release --example mnist_reduced -- <dir>` where `<dir>`
//! holds `train-images-idx3-ubyte` and `train-labels-idx1-ubyte`.

use std::path::PathBuf;

use ares::prelude::*;

fn main() -> ares::Result<()> {
    let Some(dir) = std::env::args().nth(1).map(PathBuf::from) else {
        eprintln!("usage: mnist_reduced <dir with MNIST IDX files>");
        std::process::exit(2);
    };
    let data = load_idx_images(dir.join("train-images-idx3-ubyte"), dir.join("train-labels-idx1-ubyte"))?
        .subsample_per_class(1000, 6);
    let mut options = ModelOptions::default();
    options.architecture.encoder_sizes = Some(vec![784, 256, 128, 64, 20]);
    options.train.max_epochs = 60;
    let scorers = vec![ScorerSpec::ares_default(), ScorerSpec::ae_baseline()];
    for mut plan in [ExperimentPlan::one_class("mnist", scorers.clone()), ExperimentPlan::multi_class("mnist", scorers.clone())] {
        plan.seed = 6;
        plan.arrangements = Some(vec![0, 1]);
        let outcome = run_normality_experiment(&data, &plan, &options)?;
        for r in &outcome.results {
            println!("{:?} {:>5}: mean AUC {:.4} (std {:.4})", plan.normality, r.scorer_id, r.mean_auc, r.std_auc);
        }
    }
    Ok(())
}
