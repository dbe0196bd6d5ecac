//! Dense linear algebra, descriptive statistics and PCA.

pub(crate) mod matrix;
mod pca;
mod stats;

pub use matrix::DenseMatrix;
pub use pca::{fit_pca, PcaModel};
pub use stats::{mean, median, pearson, population_std, squared_distance};
