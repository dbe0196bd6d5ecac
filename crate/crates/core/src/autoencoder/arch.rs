use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};
use crate::math::PcaModel;
use crate::nn::DEFAULT_LEAKY_SLOPE;

/// Encoder widths for 28x28 images, input first.
pub const IMAGE_ENCODER_SIZES: [usize; 8] = [784, 600, 500, 400, 300, 200, 100, 20];

/// Linear layers per half for tabular data.
pub const TABULAR_DEPTH: usize = 6;

/// Fraction of variance the tabular bottleneck must explain.
pub const BOTTLENECK_VARIANCE: f64 = 0.9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataKind {
    Image,
    Tabular,
}

/// Layer widths of a mirrored autoencoder.
///
/// `encoder_sizes` starts with the input width and ends with the bottleneck;
/// `decoder_sizes` is its exact reverse. Every linear layer is followed by
/// Leaky ReLU and batch normalization except the decoder's output layer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArchitectureSpec {
    pub kind: DataKind,
    pub encoder_sizes: Vec<usize>,
    pub decoder_sizes: Vec<usize>,
    pub leaky_slope: f64,
}

impl ArchitectureSpec {
    pub fn new(kind: DataKind, encoder_sizes: Vec<usize>) -> Result<Self> {
        let decoder_sizes = encoder_sizes.iter().rev().copied().collect();
        let spec = Self {
            kind,
            encoder_sizes,
            decoder_sizes,
            leaky_slope: DEFAULT_LEAKY_SLOPE,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(
            self.encoder_sizes.len() >= 2,
            InvalidArgument,
            "an encoder needs an input and a bottleneck width"
        );
        ensure!(
            self.encoder_sizes.iter().all(|&s| s >= 1),
            InvalidArgument,
            "layer widths must be positive"
        );
        ensure!(
            self.decoder_sizes.iter().eq(self.encoder_sizes.iter().rev()),
            InvalidArgument,
            "decoder widths must mirror the encoder"
        );
        ensure!(
            self.leaky_slope.is_finite() && self.leaky_slope >= 0.0,
            InvalidArgument,
            "leaky slope must be a non-negative finite number"
        );
        Ok(())
    }

    pub fn input_dim(&self) -> usize {
        self.encoder_sizes[0]
    }

    pub fn bottleneck(&self) -> usize {
        *self.encoder_sizes.last().unwrap()
    }

    /// Linear layers in the encoder (same count in the decoder).
    pub fn depth(&self) -> usize {
        self.encoder_sizes.len() - 1
    }
}

/// Widths interpolated linearly from `input_dim` to `bottleneck` over `depth`
/// layers, rounded half-up.
pub fn tabular_architecture(input_dim: usize, bottleneck: usize) -> Result<ArchitectureSpec> {
    ensure!(bottleneck >= 1, InvalidArgument, "bottleneck must be at least 1");
    ensure!(
        bottleneck < input_dim,
        InvalidArgument,
        "bottleneck ({bottleneck}) must be smaller than the input width ({input_dim})"
    );
    let depth = TABULAR_DEPTH;
    let sizes = (0..=depth)
        .map(|i| (input_dim * (depth - i) + bottleneck * i + depth / 2) / depth)
        .collect();
    ArchitectureSpec::new(DataKind::Tabular, sizes)
}

/// The reference architecture for `kind`. Tabular inputs take their
/// bottleneck from the number of principal components explaining 90% of the
/// variance.
pub fn build_architecture(
    input_dim: usize,
    kind: DataKind,
    pca: Option<&PcaModel>,
) -> Result<ArchitectureSpec> {
    match kind {
        DataKind::Image => {
            ensure!(
                input_dim == IMAGE_ENCODER_SIZES[0],
                Dimension,
                "image architecture expects {} inputs, got {input_dim}",
                IMAGE_ENCODER_SIZES[0]
            );
            ArchitectureSpec::new(DataKind::Image, IMAGE_ENCODER_SIZES.to_vec())
        }
        DataKind::Tabular => {
            let pca = pca.ok_or_else(|| {
                crate::AresError::InvalidArgument(
                    "tabular architecture needs a fitted PCA model".into(),
                )
            })?;
            ensure!(
                pca.dim() == input_dim,
                Dimension,
                "PCA fitted on {} features, input has {input_dim}",
                pca.dim()
            );
            let bottleneck = pca.components_for_variance(BOTTLENECK_VARIANCE)?;
            tabular_architecture(input_dim, bottleneck)
        }
    }
}
