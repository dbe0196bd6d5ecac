use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::arch::ArchitectureSpec;
use crate::datasets::Standardizer;
use crate::error::{ensure, Result};
use crate::math::DenseMatrix;
use crate::nn::{self, BatchNormLayer, DenseLayer, Layer, Network, TrainConfig, TrainReport};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub config: TrainConfig,
    pub report: TrainReport,
}

/// Encoder `g` and decoder `f` stored as one layer stack; the first
/// `encoder_layers` layers form the encoder.
#[derive(Clone, Debug, PartialEq)]
pub struct AutoencoderModel {
    pub(crate) architecture: ArchitectureSpec,
    pub(crate) network: Network,
    pub(crate) encoder_layers: usize,
    pub training: Option<TrainingMeta>,
    /// Feature transform the model was trained under, applied by callers
    /// before encoding raw rows.
    pub preprocessing: Option<Standardizer>,
}

fn block(layers: &mut Vec<Layer>, inputs: usize, outputs: usize, slope: f64, rng: &mut ChaCha8Rng, activated: bool) {
    layers.push(Layer::Dense(DenseLayer::init(inputs, outputs, slope, rng)));
    if activated {
        layers.push(Layer::LeakyRelu { slope });
        layers.push(Layer::BatchNorm(BatchNormLayer::new(outputs)));
    }
}

impl AutoencoderModel {
    /// Freshly initialized (untrained) model for `architecture`.
    pub fn new(architecture: ArchitectureSpec, seed: u64) -> Result<Self> {
        architecture.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let slope = architecture.leaky_slope;
        let mut layers = Vec::new();
        for w in architecture.encoder_sizes.windows(2) {
            block(&mut layers, w[0], w[1], slope, &mut rng, true);
        }
        let encoder_layers = layers.len();
        let dec = &architecture.decoder_sizes;
        for (i, w) in dec.windows(2).enumerate() {
            let last = i + 2 == dec.len();
            block(&mut layers, w[0], w[1], slope, &mut rng, !last);
        }
        Ok(Self {
            architecture,
            network: Network::new(layers)?,
            encoder_layers,
            training: None,
            preprocessing: None,
        })
    }

    /// Assembles a model from explicit encoder and decoder stacks.
    pub fn from_parts(architecture: ArchitectureSpec, encoder: Network, decoder: Network) -> Result<Self> {
        architecture.validate()?;
        let input = architecture.input_dim();
        let bottleneck = architecture.bottleneck();
        ensure!(
            encoder.input_dim() == Some(input) && encoder.output_dim() == Some(bottleneck),
            Dimension,
            "encoder must map {input} -> {bottleneck}"
        );
        ensure!(
            decoder.input_dim() == Some(bottleneck) && decoder.output_dim() == Some(input),
            Dimension,
            "decoder must map {bottleneck} -> {input}"
        );
        let encoder_layers = encoder.layers().len();
        let mut layers = encoder.layers().to_vec();
        layers.extend_from_slice(decoder.layers());
        Ok(Self {
            architecture,
            network: Network::new(layers)?,
            encoder_layers,
            training: None,
            preprocessing: None,
        })
    }

    /// Builds and trains a model, keeping the best-validation parameters.
    pub fn fit(
        architecture: ArchitectureSpec,
        train_data: &DenseMatrix,
        val_data: &DenseMatrix,
        config: &TrainConfig,
    ) -> Result<Self> {
        let mut model = Self::new(architecture, config.seed)?;
        model.train(train_data, val_data, config)?;
        Ok(model)
    }

    pub fn train(&mut self, train_data: &DenseMatrix, val_data: &DenseMatrix, config: &TrainConfig) -> Result<&TrainReport> {
        self.check_dim(train_data.cols())?;
        let report = nn::train(&mut self.network, train_data, val_data, config)?;
        self.training = Some(TrainingMeta {
            config: config.clone(),
            report,
        });
        Ok(&self.training.as_ref().unwrap().report)
    }

    pub fn architecture(&self) -> &ArchitectureSpec {
        &self.architecture
    }

    pub fn network(&self) -> &Network {
        &self.network
    }

    pub fn input_dim(&self) -> usize {
        self.architecture.input_dim()
    }

    pub fn latent_dim(&self) -> usize {
        self.architecture.bottleneck()
    }

    fn check_dim(&self, cols: usize) -> Result<()> {
        ensure!(
            cols == self.input_dim(),
            Dimension,
            "model expects {} features, got {cols}",
            self.input_dim()
        );
        Ok(())
    }

    /// Latent encodings, one row per input row.
    pub fn encode(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        self.check_dim(x.cols())?;
        Ok(self.network.predict_layers(x.clone(), 0..self.encoder_layers))
    }

    pub fn encode_row(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.encode(&DenseMatrix::row_vector(x)?)?.into_data())
    }

    pub fn reconstruct(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        self.check_dim(x.cols())?;
        self.network.predict(x)
    }

    /// Encodings and squared reconstruction errors in one pass.
    pub fn encode_with_errors(&self, x: &DenseMatrix) -> Result<(DenseMatrix, Vec<f64>)> {
        self.check_dim(x.cols())?;
        let z = self.network.predict_layers(x.clone(), 0..self.encoder_layers);
        let x_hat = self
            .network
            .predict_layers(z.clone(), self.encoder_layers..self.network.layers().len());
        let errors = x
            .iter_rows()
            .zip(x_hat.iter_rows())
            .map(|(a, b)| crate::math::squared_distance(a, b))
            .collect();
        Ok((z, errors))
    }

    /// `||x - f(g(x))||^2` per row.
    pub fn reconstruction_errors(&self, x: &DenseMatrix) -> Result<Vec<f64>> {
        Ok(self.encode_with_errors(x)?.1)
    }

    pub fn reconstruction_error(&self, x: &[f64]) -> Result<f64> {
        Ok(self.reconstruction_errors(&DenseMatrix::row_vector(x)?)?[0])
    }
}
