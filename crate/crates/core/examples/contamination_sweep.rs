//! Mean ARES AUC as anomalies leak into the training set, for several
//! neighbourhood sizes. One Gaussian class is normal and the other three
//! supply the test anomalies and the contaminants.

use ares::prelude::*;

fn main() -> ares::Result<()> {
    let data = make_synthetic(&SyntheticSpec::gaussian_classes(4, 12, 7000), 5)?;
    let mut plan = ExperimentPlan::one_class("gaussian-classes", vec![]);
    plan.seed = 5;
    plan.arrangements = Some(vec![0]);
    plan.sweeps.contamination_percent = vec![0.0, 5.0, 10.0];
    plan.sweeps.contamination_k = vec![10, 100, 500];
    let sweep = run_contamination_sweep(&data, &plan, &ModelOptions::default())?;
    print!("{}", sweep.to_csv()?);
    Ok(())
}
