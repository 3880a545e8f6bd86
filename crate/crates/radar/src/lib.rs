//! Classical localization on CSI tensors: background subtraction, virtual
//! aperture synthesis, 2-D range-azimuth imaging and peak detection.

pub mod background;
pub mod detect;
pub mod export;
pub mod map;
pub mod pipeline;
pub mod varray;

pub use background::{estimate_background_median, subtract_background};
pub use detect::{detect, Detection, RadarParams};
pub use export::{write_detections_jsonl, write_map_csv};
pub use map::{range_azimuth_map, RangeAzimuthMap};
pub use pipeline::{radar_localize, radar_localize_seq, FrameDetections};
pub use varray::{collapse_to_virtual, VirtualArray};

use csiloc_core::CoreError;

#[derive(Debug, thiserror::Error)]
pub enum RadarError {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("not enough history: {0}")]
    InsufficientHistory(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, RadarError>;
