use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, AresError, Result};
use crate::math::matrix::gemm;
use crate::math::DenseMatrix;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    /// `inputs x outputs`
    pub weights: DenseMatrix,
    pub bias: Vec<f64>,
}

impl DenseLayer {
    pub fn new(weights: DenseMatrix, bias: Vec<f64>) -> Result<Self> {
        ensure!(
            bias.len() == weights.cols(),
            Dimension,
            "bias length {} does not match {} outputs",
            bias.len(),
            weights.cols()
        );
        Ok(Self { weights, bias })
    }

    /// Uniform fan-in initialization scaled for a Leaky ReLU with `slope`; zero bias.
    pub fn init<R: Rng + ?Sized>(inputs: usize, outputs: usize, slope: f64, rng: &mut R) -> Self {
        let gain = (2.0 / (1.0 + slope * slope)).sqrt();
        let bound = gain * (3.0 / inputs.max(1) as f64).sqrt();
        let data = (0..inputs * outputs)
            .map(|_| rng.random_range(-bound..bound))
            .collect();
        Self {
            weights: DenseMatrix::new(inputs, outputs, data).expect("finite init"),
            bias: vec![0.0; outputs],
        }
    }

    pub fn inputs(&self) -> usize {
        self.weights.rows()
    }

    pub fn outputs(&self) -> usize {
        self.weights.cols()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatchNormLayer {
    pub gamma: Vec<f64>,
    pub beta: Vec<f64>,
    pub running_mean: Vec<f64>,
    pub running_var: Vec<f64>,
    pub epsilon: f64,
    pub momentum: f64,
}

impl BatchNormLayer {
    pub fn new(features: usize) -> Self {
        Self {
            gamma: vec![1.0; features],
            beta: vec![0.0; features],
            running_mean: vec![0.0; features],
            running_var: vec![1.0; features],
            epsilon: super::BATCH_NORM_EPSILON,
            momentum: super::BATCH_NORM_MOMENTUM,
        }
    }

    pub fn features(&self) -> usize {
        self.gamma.len()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Layer {
    Dense(DenseLayer),
    LeakyRelu { slope: f64 },
    BatchNorm(BatchNormLayer),
}

impl Layer {
    fn signature(&self) -> (u8, usize, usize) {
        match self {
            Layer::Dense(d) => (0, d.inputs(), d.outputs()),
            Layer::LeakyRelu { .. } => (1, 0, 0),
            Layer::BatchNorm(b) => (2, b.features(), b.features()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

#[derive(Clone, Debug)]
enum LayerCache {
    Dense { input: DenseMatrix },
    LeakyRelu { input: DenseMatrix },
    BatchNorm {
        normalized: DenseMatrix,
        inv_std: Vec<f64>,
        batch_mean: Vec<f64>,
        batch_var_unbiased: Vec<f64>,
    },
    Eval,
}

/// Intermediates of one forward pass, consumed by [`Network::backward`].
#[derive(Clone, Debug)]
pub struct ForwardCache {
    mode: Mode,
    version: u64,
    signature: Vec<(u8, usize, usize)>,
    output_shape: (usize, usize),
    entries: Vec<LayerCache>,
}

impl ForwardCache {
    pub fn mode(&self) -> Mode {
        self.mode
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum LayerGrad {
    Dense { weights: DenseMatrix, bias: Vec<f64> },
    BatchNorm { gamma: Vec<f64>, beta: Vec<f64> },
    None,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Gradients {
    pub layers: Vec<LayerGrad>,
}

impl Gradients {
    /// Gradient slices in the same order as [`Network::params_mut`].
    pub fn slices(&self) -> Vec<&[f64]> {
        let mut out = Vec::new();
        for g in &self.layers {
            match g {
                LayerGrad::Dense { weights, bias } => {
                    out.push(weights.data());
                    out.push(bias.as_slice());
                }
                LayerGrad::BatchNorm { gamma, beta } => {
                    out.push(gamma.as_slice());
                    out.push(beta.as_slice());
                }
                LayerGrad::None => {}
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.slices()
            .iter()
            .flat_map(|s| s.iter())
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Sequential stack of layers.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Network {
    layers: Vec<Layer>,
    // bumped on every parameter mutation so stale caches can be detected
    #[serde(skip)]
    version: u64,
}

impl PartialEq for Network {
    fn eq(&self, other: &Self) -> bool {
        self.layers == other.layers
    }
}

impl Network {
    pub fn new(layers: Vec<Layer>) -> Result<Self> {
        let mut width: Option<usize> = None;
        for (i, layer) in layers.iter().enumerate() {
            match layer {
                Layer::Dense(d) => {
                    if let Some(w) = width {
                        ensure!(
                            w == d.inputs(),
                            Dimension,
                            "layer {i} expects {} inputs but receives {w}",
                            d.inputs()
                        );
                    }
                    width = Some(d.outputs());
                }
                Layer::BatchNorm(b) => {
                    ensure!(
                        b.beta.len() == b.features()
                            && b.running_mean.len() == b.features()
                            && b.running_var.len() == b.features(),
                        Dimension,
                        "batch-norm layer {i} has inconsistent parameter lengths"
                    );
                    ensure!(
                        b.running_var.iter().all(|v| *v >= 0.0),
                        InvalidArgument,
                        "batch-norm layer {i} has negative running variance"
                    );
                    if let Some(w) = width {
                        ensure!(
                            w == b.features(),
                            Dimension,
                            "batch-norm layer {i} has {} features but receives {w}",
                            b.features()
                        );
                    }
                    width = Some(b.features());
                }
                Layer::LeakyRelu { slope } => {
                    ensure!(slope.is_finite(), InvalidArgument, "non-finite slope");
                }
            }
        }
        Ok(Self { layers, version: 0 })
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn input_dim(&self) -> Option<usize> {
        self.layers.iter().find_map(|l| match l {
            Layer::Dense(d) => Some(d.inputs()),
            Layer::BatchNorm(b) => Some(b.features()),
            Layer::LeakyRelu { .. } => None,
        })
    }

    pub fn output_dim(&self) -> Option<usize> {
        self.layers.iter().rev().find_map(|l| match l {
            Layer::Dense(d) => Some(d.outputs()),
            Layer::BatchNorm(b) => Some(b.features()),
            Layer::LeakyRelu { .. } => None,
        })
    }

    pub fn has_batch_norm(&self) -> bool {
        self.layers.iter().any(|l| matches!(l, Layer::BatchNorm(_)))
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| match l {
                Layer::Dense(d) => d.weights.data().len() + d.bias.len(),
                Layer::BatchNorm(b) => 2 * b.features(),
                Layer::LeakyRelu { .. } => 0,
            })
            .sum()
    }

    /// Splits off the layers from `at` onwards into a second network.
    pub fn split_at(&self, at: usize) -> (Network, Network) {
        let head = Network {
            layers: self.layers[..at].to_vec(),
            version: 0,
        };
        let tail = Network {
            layers: self.layers[at..].to_vec(),
            version: 0,
        };
        (head, tail)
    }

    fn signature(&self) -> Vec<(u8, usize, usize)> {
        self.layers.iter().map(Layer::signature).collect()
    }

    /// Runs the stack. Train mode normalizes with batch statistics and needs
    /// at least two rows whenever a batch-norm layer is present.
    pub fn forward(&self, input: &DenseMatrix, mode: Mode) -> Result<(DenseMatrix, ForwardCache)> {
        self.check_input(input)?;
        if mode == Mode::Train && self.has_batch_norm() {
            ensure!(
                input.rows() >= 2,
                InvalidArgument,
                "train-mode batch normalization needs at least 2 rows, got {}",
                input.rows()
            );
        }
        let mut entries = Vec::with_capacity(self.layers.len());
        let mut x = input.clone();
        for layer in &self.layers {
            let (next, entry) = forward_layer(layer, x, mode);
            entries.push(entry);
            x = next;
        }
        let cache = ForwardCache {
            mode,
            version: self.version,
            signature: self.signature(),
            output_shape: x.shape(),
            entries,
        };
        Ok((x, cache))
    }

    /// Eval-mode forward pass without keeping intermediates.
    pub fn predict(&self, input: &DenseMatrix) -> Result<DenseMatrix> {
        self.check_input(input)?;
        Ok(self.predict_layers(input.clone(), 0..self.layers.len()))
    }

    /// Eval-mode pass through a sub-range of layers; widths are not checked.
    pub(crate) fn predict_layers(&self, mut x: DenseMatrix, range: std::ops::Range<usize>) -> DenseMatrix {
        for layer in &self.layers[range] {
            x = eval_layer(layer, x);
        }
        x
    }

    fn check_input(&self, input: &DenseMatrix) -> Result<()> {
        if let Some(d) = self.input_dim() {
            ensure!(
                input.cols() == d,
                Dimension,
                "network expects {d} input features, got {}",
                input.cols()
            );
        }
        Ok(())
    }

    /// Backpropagates `output_grad` (dL/d output) through a train-mode cache.
    ///
    /// Returns parameter gradients and dL/d input.
    pub fn backward(
        &self,
        cache: &ForwardCache,
        output_grad: &DenseMatrix,
    ) -> Result<(Gradients, DenseMatrix)> {
        ensure!(
            cache.mode == Mode::Train,
            InvalidArgument,
            "backward needs a train-mode cache"
        );
        ensure!(
            cache.signature == self.signature() && cache.entries.len() == self.layers.len(),
            InvalidArgument,
            "cache was produced by a different network"
        );
        ensure!(
            cache.version == self.version,
            InvalidArgument,
            "stale cache: network parameters changed after the forward pass"
        );
        ensure!(
            output_grad.shape() == cache.output_shape,
            Dimension,
            "output gradient is {:?}, forward output was {:?}",
            output_grad.shape(),
            cache.output_shape
        );

        let mut grads = vec![LayerGrad::None; self.layers.len()];
        let mut g = output_grad.clone();
        for (i, (layer, entry)) in self.layers.iter().zip(&cache.entries).enumerate().rev() {
            let (layer_grad, input_grad) = backward_layer(layer, entry, g)?;
            grads[i] = layer_grad;
            g = input_grad;
        }
        Ok((Gradients { layers: grads }, g))
    }

    /// Folds the batch statistics of a train-mode pass into the running estimates.
    pub fn update_running_stats(&mut self, cache: &ForwardCache) -> Result<()> {
        ensure!(
            cache.mode == Mode::Train && cache.signature == self.signature(),
            InvalidArgument,
            "running statistics need a train-mode cache from this network"
        );
        for (layer, entry) in self.layers.iter_mut().zip(&cache.entries) {
            if let (
                Layer::BatchNorm(bn),
                LayerCache::BatchNorm {
                    batch_mean,
                    batch_var_unbiased,
                    ..
                },
            ) = (layer, entry)
            {
                let m = bn.momentum;
                for j in 0..bn.features() {
                    bn.running_mean[j] = (1.0 - m) * bn.running_mean[j] + m * batch_mean[j];
                    bn.running_var[j] = (1.0 - m) * bn.running_var[j] + m * batch_var_unbiased[j];
                }
            }
        }
        self.version += 1;
        Ok(())
    }

    /// Mutable parameter slices: weights then bias per dense layer, gamma then
    /// beta per batch-norm layer.
    pub fn params_mut(&mut self) -> Vec<&mut [f64]> {
        self.version += 1;
        let mut out = Vec::new();
        for layer in &mut self.layers {
            match layer {
                Layer::Dense(d) => {
                    out.push(d.weights.data_mut());
                    out.push(d.bias.as_mut_slice());
                }
                Layer::BatchNorm(b) => {
                    out.push(b.gamma.as_mut_slice());
                    out.push(b.beta.as_mut_slice());
                }
                Layer::LeakyRelu { .. } => {}
            }
        }
        out
    }

    pub fn params(&self) -> Vec<&[f64]> {
        let mut out = Vec::new();
        for layer in &self.layers {
            match layer {
                Layer::Dense(d) => {
                    out.push(d.weights.data());
                    out.push(d.bias.as_slice());
                }
                Layer::BatchNorm(b) => {
                    out.push(b.gamma.as_slice());
                    out.push(b.beta.as_slice());
                }
                Layer::LeakyRelu { .. } => {}
            }
        }
        out
    }

    pub fn all_finite(&self) -> bool {
        self.params().iter().all(|s| s.iter().all(|v| v.is_finite()))
    }
}

fn add_bias(out: &mut DenseMatrix, bias: &[f64]) {
    for i in 0..out.rows() {
        for (v, b) in out.row_mut(i).iter_mut().zip(bias) {
            *v += b;
        }
    }
}

fn leaky(x: &mut DenseMatrix, slope: f64) {
    for v in x.data_mut() {
        if *v < 0.0 {
            *v *= slope;
        }
    }
}

fn eval_layer(layer: &Layer, mut x: DenseMatrix) -> DenseMatrix {
    match layer {
        Layer::Dense(d) => {
            let mut out = gemm(&x, false, &d.weights, false);
            add_bias(&mut out, &d.bias);
            out
        }
        Layer::LeakyRelu { slope } => {
            leaky(&mut x, *slope);
            x
        }
        Layer::BatchNorm(bn) => {
            let scale: Vec<f64> = bn
                .running_var
                .iter()
                .zip(&bn.gamma)
                .map(|(v, g)| g / (v + bn.epsilon).sqrt())
                .collect();
            for i in 0..x.rows() {
                for (j, v) in x.row_mut(i).iter_mut().enumerate() {
                    *v = (*v - bn.running_mean[j]) * scale[j] + bn.beta[j];
                }
            }
            x
        }
    }
}

fn forward_layer(layer: &Layer, x: DenseMatrix, mode: Mode) -> (DenseMatrix, LayerCache) {
    if mode == Mode::Eval {
        return (eval_layer(layer, x), LayerCache::Eval);
    }
    match layer {
        Layer::Dense(d) => {
            let mut out = gemm(&x, false, &d.weights, false);
            add_bias(&mut out, &d.bias);
            (out, LayerCache::Dense { input: x })
        }
        Layer::LeakyRelu { slope } => {
            let mut out = x.clone();
            leaky(&mut out, *slope);
            (out, LayerCache::LeakyRelu { input: x })
        }
        Layer::BatchNorm(bn) => {
            let (n, f) = x.shape();
            let batch_mean = x.column_means();
            let mut var = vec![0.0; f];
            for row in x.iter_rows() {
                for j in 0..f {
                    var[j] += (row[j] - batch_mean[j]).powi(2);
                }
            }
            let batch_var_unbiased: Vec<f64> = var.iter().map(|v| v / (n - 1) as f64).collect();
            let inv_std: Vec<f64> = var
                .iter()
                .map(|v| 1.0 / (v / n as f64 + bn.epsilon).sqrt())
                .collect();
            let mut normalized = x;
            for i in 0..n {
                for (j, v) in normalized.row_mut(i).iter_mut().enumerate() {
                    *v = (*v - batch_mean[j]) * inv_std[j];
                }
            }
            let mut out = normalized.clone();
            for i in 0..n {
                for (j, v) in out.row_mut(i).iter_mut().enumerate() {
                    *v = *v * bn.gamma[j] + bn.beta[j];
                }
            }
            (
                out,
                LayerCache::BatchNorm {
                    normalized,
                    inv_std,
                    batch_mean,
                    batch_var_unbiased,
                },
            )
        }
    }
}

fn backward_layer(
    layer: &Layer,
    entry: &LayerCache,
    g: DenseMatrix,
) -> Result<(LayerGrad, DenseMatrix)> {
    match (layer, entry) {
        (Layer::Dense(d), LayerCache::Dense { input }) => {
            let weights = gemm(input, true, &g, false);
            let mut bias = vec![0.0; d.outputs()];
            for row in g.iter_rows() {
                for (b, v) in bias.iter_mut().zip(row) {
                    *b += v;
                }
            }
            let input_grad = gemm(&g, false, &d.weights, true);
            Ok((LayerGrad::Dense { weights, bias }, input_grad))
        }
        (Layer::LeakyRelu { slope }, LayerCache::LeakyRelu { input }) => {
            let mut out = g;
            for (v, x) in out.data_mut().iter_mut().zip(input.data()) {
                if *x < 0.0 {
                    *v *= slope;
                }
            }
            Ok((LayerGrad::None, out))
        }
        (
            Layer::BatchNorm(bn),
            LayerCache::BatchNorm {
                normalized,
                inv_std,
                ..
            },
        ) => {
            let (n, f) = g.shape();
            let mut gamma = vec![0.0; f];
            let mut beta = vec![0.0; f];
            for (grow, xrow) in g.iter_rows().zip(normalized.iter_rows()) {
                for j in 0..f {
                    gamma[j] += grow[j] * xrow[j];
                    beta[j] += grow[j];
                }
            }
            // dx = inv_std / n * (n * dxhat - sum(dxhat) - xhat * sum(dxhat * xhat)),
            // with dxhat = g * gamma, so the sums are beta*gamma and gamma_grad*gamma
            let nf = n as f64;
            let mut input_grad = g;
            for i in 0..n {
                let xrow = normalized.row(i);
                for (j, v) in input_grad.row_mut(i).iter_mut().enumerate() {
                    let dxhat = *v * bn.gamma[j];
                    *v = inv_std[j] / nf
                        * (nf * dxhat - beta[j] * bn.gamma[j] - xrow[j] * gamma[j] * bn.gamma[j]);
                }
            }
            Ok((LayerGrad::BatchNorm { gamma, beta }, input_grad))
        }
        _ => Err(AresError::InvalidArgument(
            "cache entry does not match layer kind".into(),
        )),
    }
}

/// Mean squared error over all entries and its gradient with respect to `output`.
pub fn mse_loss(output: &DenseMatrix, target: &DenseMatrix) -> Result<(f64, DenseMatrix)> {
    ensure!(
        output.shape() == target.shape(),
        Dimension,
        "output {:?} vs target {:?}",
        output.shape(),
        target.shape()
    );
    let count = output.data().len().max(1) as f64;
    let mut grad = DenseMatrix::zeros(output.rows(), output.cols());
    let mut loss = 0.0;
    for ((g, o), t) in grad.data_mut().iter_mut().zip(output.data()).zip(target.data()) {
        let diff = o - t;
        loss += diff * diff;
        *g = 2.0 * diff / count;
    }
    Ok((loss / count, grad))
}
