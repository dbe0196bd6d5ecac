//! Correlation between each test row's reconstruction error and the mean
//! stored error of its latent neighbours.

use ares::eval::{neighbourhood_error_diagnostic, train_arrangement, ExperimentPlan};
use ares::prelude::*;

fn main() -> ares::Result<()> {
    let data = make_synthetic(&SyntheticSpec::heteroscedastic_benchmark(), 3)?;
    let mut plan = ExperimentPlan::single_class("heteroscedastic", vec![]);
    plan.seed = 3;
    let arrangement = plan.arrangements(&data)?.remove(0);
    let run = train_arrangement(&data, &plan, &ModelOptions::default(), &arrangement)?;
    let d = neighbourhood_error_diagnostic(&run.model, &run.index, &run.test_x, 10)?;
    match d.correlation {
        Some(c) => println!("{} test rows, Pearson correlation {c:.4}", d.len()),
        None => println!("{} test rows, correlation undefined", d.len()),
    }
    Ok(())
}
