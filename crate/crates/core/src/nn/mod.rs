//! Minimal feed-forward stack: dense layers, Leaky ReLU, batch normalization,
//! mean-squared-error loss, Adam and an early-stopping trainer.

mod adam;
mod layers;
mod train;

pub use adam::{AdamConfig, AdamState};
pub use layers::{
    mse_loss, BatchNormLayer, DenseLayer, ForwardCache, Gradients, Layer, LayerGrad, Mode, Network,
};
pub use train::{train, EpochLoss, TrainConfig, TrainReport};

pub const DEFAULT_LEAKY_SLOPE: f64 = 0.01;
pub const BATCH_NORM_EPSILON: f64 = 1e-5;
pub const BATCH_NORM_MOMENTUM: f64 = 0.1;
