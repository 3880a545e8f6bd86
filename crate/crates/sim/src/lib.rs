//! Synthetic CSI channel simulator.
//!
//! Generates the complex channel tensor a co-located transceiver array would
//! measure in a room full of static point scatterers plus a few moving
//! targets: single-bounce geometric paths with 1/(r_tx·r_rx) spreading,
//! static inter-element coupling, and complex white Gaussian noise scaled to
//! a configured SNR.

pub mod config;
pub mod script;
pub mod simulate;

pub use config::SimConfig;
pub use script::{ScatterersSpec, SceneSpec, ScriptSpec};
pub use simulate::{
    noiseless_csi, simulate_snapshot, simulate_snapshot_at, simulate_trajectory,
    simulate_trajectory_seq, TrajectoryStep, DEFAULT_SOURCE_ID,
};

/// Errors produced while building scenes or synthesizing channels.
#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid scene: {0}")]
    InvalidScene(String),
    #[error(
        "singular geometry: {0} (a scatterer or element pair coincides, the path loss diverges)"
    )]
    SingularGeometry(String),
    #[error(transparent)]
    Core(#[from] csiloc_core::CoreError),
}

pub type Result<T> = std::result::Result<T, SimError>;
