//! Learned localization from CSI residuals: wavelet background removal,
//! feature standardization and a small multilayer perceptron trained with
//! mini-batch gradient descent.

pub mod features;
pub mod mat;
pub mod mlp;
pub mod model;
pub mod train;
pub mod wavelet;

pub use features::{extract_features, FeatureMode, FeatureStats};
pub use mat::{Exec, Mat};
pub use mlp::Mlp;
pub use model::{LocalizerModel, ModelOutput};
pub use train::{train, train_seq, EpochStats, TrainConfig, TrainLog};
pub use wavelet::{denoise_lowpass, wavelet_background, WaveletKind};

use csiloc_core::CoreError;

#[derive(Debug, thiserror::Error)]
pub enum AnnError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid training data: {0}")]
    InvalidData(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("not enough history: {0}")]
    InsufficientHistory(String),
    #[error("malformed model file: {0}")]
    MalformedModel(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, AnnError>;
