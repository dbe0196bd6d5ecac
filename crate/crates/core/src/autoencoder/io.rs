use std::path::Path;

use serde::{Deserialize, Serialize};

use super::arch::{ArchitectureSpec, DataKind};
use super::model::{AutoencoderModel, TrainingMeta};
use crate::binio::{write_file, Reader, Writer};
use crate::datasets::Standardizer;
use crate::error::{AresError, Result};
use crate::math::DenseMatrix;
use crate::nn::{BatchNormLayer, DenseLayer, Layer, Network};

pub const MODEL_MAGIC: &[u8; 8] = b"ARESMDL1";
pub const MODEL_FORMAT_VERSION: u32 = 1;

const TAG_DENSE: u8 = 0;
const TAG_LEAKY_RELU: u8 = 1;
const TAG_BATCH_NORM: u8 = 2;

#[derive(Serialize, Deserialize)]
struct Metadata {
    training: Option<TrainingMeta>,
    preprocessing: Option<Standardizer>,
}

pub(crate) fn encode_model(model: &AutoencoderModel) -> Vec<u8> {
    let mut w = Writer::default();
    let arch = &model.architecture;
    w.u8(match arch.kind {
        DataKind::Image => 0,
        DataKind::Tabular => 1,
    });
    w.f64(arch.leaky_slope);
    w.len_u32(arch.encoder_sizes.len());
    for &s in &arch.encoder_sizes {
        w.len_u32(s);
    }
    w.len_u32(model.encoder_layers);
    let layers = model.network.layers();
    w.len_u32(layers.len());
    for layer in layers {
        match layer {
            Layer::Dense(d) => {
                w.u8(TAG_DENSE);
                w.tensor(d.inputs(), d.outputs(), d.weights.data());
                w.tensor(1, d.bias.len(), &d.bias);
            }
            Layer::LeakyRelu { slope } => {
                w.u8(TAG_LEAKY_RELU);
                w.f64(*slope);
            }
            Layer::BatchNorm(b) => {
                w.u8(TAG_BATCH_NORM);
                w.f64(b.epsilon);
                w.f64(b.momentum);
                let f = b.features();
                w.tensor(1, f, &b.gamma);
                w.tensor(1, f, &b.beta);
                w.tensor(1, f, &b.running_mean);
                w.tensor(1, f, &b.running_var);
            }
        }
    }
    let meta = Metadata {
        training: model.training.clone(),
        preprocessing: model.preprocessing.clone(),
    };
    w.bytes(&serde_json::to_vec(&meta).expect("metadata serializes"));
    w.finish(MODEL_MAGIC, MODEL_FORMAT_VERSION)
}

fn corrupt<E: std::fmt::Display>(e: E) -> AresError {
    AresError::Corrupt(e.to_string())
}

pub(crate) fn decode_model(bytes: &[u8]) -> Result<AutoencoderModel> {
    let mut r = Reader::open(bytes, MODEL_MAGIC, MODEL_FORMAT_VERSION)?;
    let kind = match r.u8()? {
        0 => DataKind::Image,
        1 => DataKind::Tabular,
        k => return Err(AresError::Corrupt(format!("unknown data kind tag {k}"))),
    };
    let leaky_slope = r.f64()?;
    let n_sizes = r.u32()? as usize;
    if n_sizes > 1024 {
        return Err(AresError::Corrupt(format!("implausible layer count {n_sizes}")));
    }
    let sizes = (0..n_sizes)
        .map(|_| r.u32().map(|v| v as usize))
        .collect::<Result<Vec<_>>>()?;
    let mut architecture = ArchitectureSpec::new(kind, sizes).map_err(corrupt)?;
    architecture.leaky_slope = leaky_slope;
    architecture.validate().map_err(corrupt)?;

    let encoder_layers = r.u32()? as usize;
    let n_layers = r.u32()? as usize;
    let mut layers = Vec::with_capacity(n_layers.min(4096));
    for _ in 0..n_layers {
        let layer = match r.u8()? {
            TAG_DENSE => {
                let (rows, cols, w) = r.tensor()?;
                let bias = r.vector(cols)?;
                let weights = DenseMatrix::new(rows, cols, w).map_err(corrupt)?;
                Layer::Dense(DenseLayer::new(weights, bias).map_err(corrupt)?)
            }
            TAG_LEAKY_RELU => Layer::LeakyRelu { slope: r.f64()? },
            TAG_BATCH_NORM => {
                let epsilon = r.f64()?;
                let momentum = r.f64()?;
                let (_, f, gamma) = r.tensor()?;
                Layer::BatchNorm(BatchNormLayer {
                    gamma,
                    beta: r.vector(f)?,
                    running_mean: r.vector(f)?,
                    running_var: r.vector(f)?,
                    epsilon,
                    momentum,
                })
            }
            t => return Err(AresError::Corrupt(format!("unknown layer tag {t}"))),
        };
        layers.push(layer);
    }
    let meta: Metadata = serde_json::from_slice(r.bytes()?).map_err(corrupt)?;
    r.finish()?;

    if encoder_layers > layers.len() {
        return Err(AresError::Corrupt("encoder layer count exceeds stack".into()));
    }
    let network = Network::new(layers).map_err(corrupt)?;
    let (encoder, decoder) = network.split_at(encoder_layers);
    let mut model = AutoencoderModel::from_parts(architecture, encoder, decoder).map_err(corrupt)?;
    model.training = meta.training;
    model.preprocessing = meta.preprocessing;
    Ok(model)
}

/// Writes the versioned `ARESMDL1` container.
pub fn save_model(model: &AutoencoderModel, path: impl AsRef<Path>) -> Result<()> {
    write_file(path.as_ref(), &encode_model(model))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<AutoencoderModel> {
    let bytes = std::fs::read(path)?;
    decode_model(&bytes)
}
