//! Autoencoder architectures, training, persistence and inference.

mod arch;
mod io;
mod model;

pub use arch::{
    build_architecture, tabular_architecture, ArchitectureSpec, DataKind, BOTTLENECK_VARIANCE, IMAGE_ENCODER_SIZES,
    TABULAR_DEPTH,
};
pub use io::{load_model, save_model, MODEL_FORMAT_VERSION, MODEL_MAGIC};
pub use model::{AutoencoderModel, TrainingMeta};
