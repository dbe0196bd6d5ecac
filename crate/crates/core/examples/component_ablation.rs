//! Ranks by the local reconstruction score alone, the local density score
//! alone, and their combination, on three normal clusters.

use ares::eval::ScorerSpec;
use ares::prelude::*;

fn main() -> ares::Result<()> {
    let data = make_synthetic(&SyntheticSpec::multi_cluster_benchmark(), 11)?;
    let mut plan = ExperimentPlan::single_class(
        "multi-cluster",
        vec![
            ScorerSpec::ares_default(),
            ScorerSpec::local_reconstruction(),
            ScorerSpec::local_density(),
            ScorerSpec::ae_baseline(),
        ],
    );
    plan.seed = 11;
    let outcome = run_normality_experiment(&data, &plan, &ModelOptions::default())?;
    for r in &outcome.results {
        println!("{:>6}  AUC {:.4}", r.scorer_id, r.mean_auc);
    }
    Ok(())
}
