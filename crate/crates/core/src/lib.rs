//! Shared foundation of the CSI localization testbed: waveform grids,
//! antenna/scene geometry, snapshot and dataset containers, multi-source
//! alignment and the on-disk dataset format.

pub mod align;
pub mod geometry;
pub mod io;
pub mod scene;
pub mod snapshot;
pub mod waveform;

pub use align::{align_snapshots, AlignResult};
pub use geometry::{AntennaArray, Point2, Region};
pub use scene::{Scatterer, Scene};
pub use snapshot::{CsiSnapshot, Dataset};
pub use waveform::{WaveformConfig, WaveformKind};

/// Propagation speed used throughout, in m/s.
///
/// The conventional radar figure 3×10⁸ is used instead of the exact vacuum
/// value so that the advertised resolution table (0.75 / 1.5 / 3.75 m range
/// bins, 150 / 300 / 480 m unambiguous range) comes out exact.
pub const SPEED_OF_LIGHT: f64 = 3.0e8;

/// Errors produced by the foundation types and the dataset reader/writer.
#[derive(Debug, thiserror::Error)]
pub enum CoreError {
    #[error("invalid waveform: {0}")]
    InvalidWaveform(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("malformed snapshot record {index}: {reason}")]
    MalformedRecord { index: usize, reason: String },
    #[error("truncated payload: snapshot {index} needs {expected} bytes, got {got}")]
    TruncatedPayload {
        index: usize,
        expected: usize,
        got: usize,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, CoreError>;
