//! ARES against plain reconstruction error on two normal clusters with very
//! different noise levels, where anomalies are small perturbations of the
//! quiet cluster.

use ares::eval::ScorerSpec;
use ares::prelude::*;

fn main() -> ares::Result<()> {
    let data = make_synthetic(&SyntheticSpec::heteroscedastic_benchmark(), 7)?;
    let mut plan = ExperimentPlan::single_class(
        "heteroscedastic",
        vec![
            ScorerSpec::ares_default(),
            ScorerSpec::ae_baseline(),
            ScorerSpec::local_reconstruction(),
            ScorerSpec::local_density(),
        ],
    );
    plan.test_fraction = 0.1;
    plan.seed = 7;
    let outcome = run_normality_experiment(&data, &plan, &ModelOptions::default())?;
    let run = &outcome.runs[0];
    println!(
        "train {} / val {} / test {}+{}, bottleneck {}, best epoch {} of {}",
        run.n_train, run.n_val, run.n_test_normal, run.n_test_anomaly, run.bottleneck, run.best_epoch, run.epochs_run
    );
    for r in &outcome.results {
        println!("{:>6}  AUC {:.4}", r.scorer_id, r.mean_auc);
    }
    println!("train {:.1}s", run.timings.train_secs);
    Ok(())
}
