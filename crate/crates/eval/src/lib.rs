//! Scoring harness for the localization methods: per-target matching,
//! error statistics, distancing-threshold accuracy, frozen benchmark runs
//! and cross-method comparison tables.

pub mod benchmark;
pub mod metrics;
pub mod report;
pub mod run;

pub use benchmark::{
    benchmark_config, build_recording, run_single_target, run_two_target, BenchConfig,
    MethodPair, Recording, Scenario, BENCHMARK_JSON,
};
pub use metrics::{location_error, match_targets, threshold_accuracy, MatchedPair, Matching};
pub use report::{compare_report, Comparison, ComparisonRow};
pub use run::{evaluate, evaluate_seq, EvalParams, EvalReport, FramePrediction, Predictor};

/// Errors surfaced while scoring or running the benchmark.
#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error("incompatible inputs: {0}")]
    Incompatible(String),
    #[error("invalid dataset: {0}")]
    InvalidData(String),
    #[error(transparent)]
    Core(#[from] csiloc_core::CoreError),
    #[error(transparent)]
    Radar(#[from] csiloc_radar::RadarError),
    #[error(transparent)]
    Ann(#[from] csiloc_ann::AnnError),
    #[error(transparent)]
    Sim(#[from] csiloc_sim::SimError),
}

pub type Result<T> = std::result::Result<T, EvalError>;
