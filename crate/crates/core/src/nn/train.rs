use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::adam::{AdamConfig, AdamState};
use super::layers::{mse_loss, Mode, Network};
use crate::error::{ensure, AresError, Result};
use crate::math::DenseMatrix;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub max_epochs: usize,
    pub patience: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_epsilon: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        let adam = AdamConfig::default();
        Self {
            max_epochs: 350,
            patience: 20,
            batch_size: 250,
            learning_rate: adam.learning_rate,
            beta1: adam.beta1,
            beta2: adam.beta2,
            adam_epsilon: adam.epsilon,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        ensure!(self.max_epochs >= 1, Config, "max_epochs must be at least 1");
        ensure!(self.patience >= 1, Config, "patience must be at least 1");
        ensure!(
            self.patience <= self.max_epochs,
            Config,
            "patience ({}) exceeds max_epochs ({})",
            self.patience,
            self.max_epochs
        );
        ensure!(self.batch_size >= 1, Config, "batch_size must be at least 1");
        ensure!(
            self.learning_rate > 0.0 && self.learning_rate.is_finite(),
            Config,
            "learning_rate must be positive"
        );
        ensure!(
            (0.0..1.0).contains(&self.beta1) && (0.0..1.0).contains(&self.beta2),
            Config,
            "Adam betas must lie in [0, 1)"
        );
        ensure!(self.adam_epsilon > 0.0, Config, "adam_epsilon must be positive");
        Ok(())
    }

    fn adam(&self) -> AdamConfig {
        AdamConfig {
            learning_rate: self.learning_rate,
            beta1: self.beta1,
            beta2: self.beta2,
            epsilon: self.adam_epsilon,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochLoss {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub history: Vec<EpochLoss>,
    /// Epoch (1-based) whose parameters were restored.
    pub best_epoch: usize,
    pub best_val_loss: f64,
    pub stopped_early: bool,
}

/// Batch boundaries for `n` rows. A trailing batch of a single row is merged
/// into the previous one so that batch statistics stay defined.
pub(crate) fn batch_ranges(n: usize, batch_size: usize) -> Vec<std::ops::Range<usize>> {
    let mut ranges = Vec::new();
    let mut start = 0;
    while start < n {
        let end = (start + batch_size).min(n);
        ranges.push(start..end);
        start = end;
    }
    if ranges.len() >= 2 && ranges.last().is_some_and(|r| r.len() < 2) {
        let last = ranges.pop().unwrap();
        ranges.last_mut().unwrap().end = last.end;
    }
    ranges
}

/// Trains `network` as an autoencoder (target = input) with Adam on mean
/// squared error, early-stopping on validation loss.
///
/// On return `network` holds the parameters of the best validation epoch.
pub fn train(
    network: &mut Network,
    train_data: &DenseMatrix,
    val_data: &DenseMatrix,
    config: &TrainConfig,
) -> Result<TrainReport> {
    config.validate()?;
    ensure!(
        train_data.rows() > 0 && val_data.rows() > 0,
        InvalidArgument,
        "training and validation sets must be non-empty"
    );
    ensure!(
        train_data.cols() == val_data.cols(),
        Dimension,
        "train has {} features, validation {}",
        train_data.cols(),
        val_data.cols()
    );

    let shapes: Vec<usize> = network.params().iter().map(|p| p.len()).collect();
    let mut adam = AdamState::new(config.adam(), &shapes);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..train_data.rows()).collect();
    let ranges = batch_ranges(order.len(), config.batch_size);

    let mut history = Vec::new();
    let mut best: Option<(usize, f64, Network)> = None;
    let mut since_best = 0;
    let mut stopped_early = false;

    for epoch in 1..=config.max_epochs {
        order.shuffle(&mut rng);
        let mut weighted = 0.0;
        for (b, range) in ranges.iter().enumerate() {
            let batch = train_data.select_rows(&order[range.clone()]);
            let (output, cache) = network.forward(&batch, Mode::Train)?;
            let (loss, grad) = mse_loss(&output, &batch)?;
            if !loss.is_finite() {
                return Err(AresError::Numeric(format!(
                    "training loss became non-finite at epoch {epoch}, batch {b}"
                )));
            }
            weighted += loss * batch.rows() as f64;
            let (grads, _) = network.backward(&cache, &grad)?;
            network.update_running_stats(&cache)?;
            adam.step(network.params_mut(), &grads.slices())?;
        }
        if !network.all_finite() {
            return Err(AresError::Numeric(format!(
                "parameters became non-finite at epoch {epoch}"
            )));
        }
        let train_loss = weighted / train_data.rows() as f64;
        let val_out = network.predict(val_data)?;
        let (val_loss, _) = mse_loss(&val_out, val_data)?;
        if !val_loss.is_finite() {
            return Err(AresError::Numeric(format!(
                "validation loss became non-finite at epoch {epoch}"
            )));
        }
        history.push(EpochLoss {
            epoch,
            train_loss,
            val_loss,
        });

        let improved = best.as_ref().is_none_or(|(_, b, _)| val_loss < *b);
        if improved {
            best = Some((epoch, val_loss, network.clone()));
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= config.patience {
                stopped_early = true;
                break;
            }
        }
    }

    let (best_epoch, best_val_loss, best_net) = best.expect("at least one epoch ran");
    *network = best_net;
    Ok(TrainReport {
        history,
        best_epoch,
        best_val_loss,
        stopped_early,
    })
}
