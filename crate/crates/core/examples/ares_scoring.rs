//! Scores a few rows with ARES and prints the parts of each score.

use ares::eval::{train_arrangement, ExperimentPlan};
use ares::prelude::*;
use ares::scoring::AresScorer;

fn main() -> ares::Result<()> {
    let data = make_synthetic(&SyntheticSpec::heteroscedastic_benchmark(), 7)?;
    let mut plan = ExperimentPlan::single_class("heteroscedastic", vec![]);
    plan.seed = 7;
    let arrangement = plan.arrangements(&data)?.remove(0);
    let run = train_arrangement(&data, &plan, &ModelOptions::default(), &arrangement)?;

    for density in ["lof", "gd-mahalanobis"] {
        let config = AresConfig {
            density: DensityMethod::from_name(density, None, None)?,
            ..AresConfig::default()
        };
        let scorer = AresScorer::fit(&run.model, &run.index, &config)?;
        let scores = scorer.score_batch(&run.test_x)?;
        let totals: Vec<f64> = scores.iter().map(|s| s.total).collect();
        println!("{density}: AUC {:.4}", auc(&totals, &run.test_labels)?);
        for i in [0, run.test_labels.len() - 1] {
            let s = &scores[i];
            println!(
                "  row {i} (anomaly {}): total {:.4} = r {:.4} + 0.5 * d {:.4}; raw error {:.4}, neighbour median {:.4}",
                run.test_labels[i], s.total, s.local_reconstruction, s.local_density, s.raw_reconstruction, s.neighbour_median_error
            );
        }
    }
    Ok(())
}
