#![allow(dead_code)]

pub mod invariants;
pub mod oracles;

use std::sync::OnceLock;

use ares::datasets::{make_synthetic, SyntheticSpec};
use ares::eval::{train_arrangement, ExperimentPlan, ModelOptions, TrainedArrangement};
use ares::math::DenseMatrix;
use ares::nn::{BatchNormLayer, DenseLayer, Layer, Network};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_rows(n: usize, d: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect()).collect()
}

pub fn matrix(rows: &[Vec<f64>]) -> DenseMatrix {
    DenseMatrix::from_rows(rows).unwrap()
}

/// Dense layers of the given widths, each hidden one followed by Leaky ReLU
/// and (optionally) batch norm with randomized affine parameters.
pub fn random_network(widths: &[usize], batch_norm: bool, seed: u64) -> Network {
    let mut r = rng(seed);
    let mut layers = Vec::new();
    for (i, w) in widths.windows(2).enumerate() {
        layers.push(Layer::Dense(DenseLayer::init(w[0], w[1], 0.01, &mut r)));
        if i + 2 < widths.len() {
            layers.push(Layer::LeakyRelu { slope: 0.01 });
            if batch_norm {
                let mut bn = BatchNormLayer::new(w[1]);
                for g in bn.gamma.iter_mut() {
                    *g = r.random_range(0.5..1.5);
                }
                for b in bn.beta.iter_mut() {
                    *b = r.random_range(-0.5..0.5);
                }
                layers.push(Layer::BatchNorm(bn));
            }
        }
    }
    Network::new(layers).unwrap()
}

/// The heteroscedastic benchmark split 4500 / 500+500 and trained with the
/// default settings, shared within one test binary.
pub fn heteroscedastic_run() -> &'static TrainedArrangement {
    static RUN: OnceLock<TrainedArrangement> = OnceLock::new();
    RUN.get_or_init(|| {
        let data = make_synthetic(&SyntheticSpec::heteroscedastic_benchmark(), 7).unwrap();
        let plan = heteroscedastic_plan(vec![]);
        let a = plan.arrangements(&data).unwrap().remove(0);
        train_arrangement(&data, &plan, &ModelOptions::default(), &a).unwrap()
    })
}

pub fn heteroscedastic_plan(scorers: Vec<ares::eval::ScorerSpec>) -> ExperimentPlan {
    let mut plan = ExperimentPlan::single_class("heteroscedastic", scorers);
    plan.test_fraction = 0.1;
    plan.seed = 7;
    plan
}
