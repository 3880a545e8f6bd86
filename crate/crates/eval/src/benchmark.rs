//! The frozen synthetic benchmark behind the headline numbers: fixed room,
//! clutter, seeds and training recipe, so every comparison is a reproducible
//! run rather than an anecdote.
//!
//! Fingerprinting runs in the classic offline/online split: the offline
//! phase surveys the room along a serpentine path, revisiting each anchor
//! several times, and the online phase walks the same anchors again under
//! an independent noise draw. The radar pipeline gets the identical online
//! recording, so both methods face the same scene and the same noise.

use serde::{Deserialize, Serialize};

use csiloc_ann::{train, TrainConfig, TrainLog};
use csiloc_core::{Dataset, Region, WaveformKind};
use csiloc_radar::RadarParams;
use csiloc_sim::{simulate_trajectory, ScatterersSpec, SceneSpec, ScriptSpec, SimConfig};

use crate::run::{evaluate, EvalParams, EvalReport, Predictor};
use crate::Result;

/// The benchmark definition shipped with this crate.
pub const BENCHMARK_JSON: &str = include_str!("../benchmark.json");

/// One simulated recording: a target script plus the noise seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recording {
    pub script: ScriptSpec,
    pub sim_seed: u64,
}

/// A train/test pair of recordings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub train: Recording,
    pub test: Recording,
}

/// Everything a benchmark run depends on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    /// Per-subcarrier SNR of every recording, in dB.
    pub snr_db: f64,
    pub region: Region,
    pub array_elements: usize,
    /// Fixed miscalibration of the RF chains, shared by every recording:
    /// the same hardware serves the survey and the online pass. The radar
    /// pipeline assumes an ideal array and eats the resulting bias; the
    /// fingerprint absorbs it into the learned map.
    #[serde(default)]
    pub element_gains: Option<Vec<num_complex::Complex64>>,
    pub static_scatterers: ScatterersSpec,
    pub radar: RadarParams,
    pub eval: EvalParams,
    /// Run once per waveform preset.
    pub single_target: Scenario,
    /// Waveform the distancing scenario runs on.
    pub two_target_waveform: WaveformKind,
    pub two_target: Scenario,
    pub train: TrainConfig,
    pub two_target_train: TrainConfig,
}

/// Parses the embedded definition. The file ships inside the binary, so a
/// parse failure is a build defect, not a runtime condition.
pub fn benchmark_config() -> BenchConfig {
    serde_json::from_str(BENCHMARK_JSON).expect("embedded benchmark definition parses")
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        self.region.validate()?;
        if let Some(gains) = &self.element_gains {
            if gains.len() != self.array_elements {
                return Err(crate::EvalError::InvalidParams(format!(
                    "{} element gains for {} array elements",
                    gains.len(),
                    self.array_elements
                )));
            }
        }
        self.radar.validate().map_err(crate::EvalError::Radar)?;
        self.eval.validate()?;
        self.train.validate().map_err(crate::EvalError::Ann)?;
        self.two_target_train
            .validate()
            .map_err(crate::EvalError::Ann)?;
        Ok(())
    }
}

/// Simulates one recording of the benchmark scene with the given waveform.
pub fn build_recording(cfg: &BenchConfig, kind: WaveformKind, rec: &Recording) -> Result<Dataset> {
    let wf = kind.config();
    let spec = SceneSpec {
        region: cfg.region,
        array_elements: cfg.array_elements,
        array_spacing_m: None,
        static_scatterers: cfg.static_scatterers.clone(),
        script: rec.script.clone(),
    };
    let (scene, steps) = spec.build(&wf)?;
    let sim = SimConfig {
        snr_db: Some(cfg.snr_db),
        rng_seed: rec.sim_seed,
        element_gains: cfg.element_gains.clone(),
        ..SimConfig::default()
    };
    Ok(simulate_trajectory(&scene, &steps, &wf, &sim)?)
}

/// Both methods' scores on one waveform, plus the training history that
/// produced the fingerprinting model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodPair {
    pub waveform: String,
    pub radar: EvalReport,
    pub ann: EvalReport,
    pub ann_training: TrainLog,
}

/// Single-target leg for one waveform: simulate the offline survey and the
/// online pass, train the fingerprinting model on the survey, then score
/// both methods on the online pass.
pub fn run_single_target(cfg: &BenchConfig, kind: WaveformKind) -> Result<MethodPair> {
    cfg.validate()?;
    let train_set = build_recording(cfg, kind, &cfg.single_target.train)?;
    let test_set = build_recording(cfg, kind, &cfg.single_target.test)?;
    let (model, log) = train(&train_set, &cfg.train)?;
    let radar = evaluate(&test_set, Predictor::Radar(&cfg.radar), &cfg.eval)?;
    let ann = evaluate(&test_set, Predictor::Ann(&model), &cfg.eval)?;
    Ok(MethodPair {
        waveform: kind.config().name,
        radar,
        ann,
        ann_training: log,
    })
}

/// Distancing leg: two targets sweeping their separation through the
/// threshold, scored with the fingerprinting model.
pub fn run_two_target(cfg: &BenchConfig) -> Result<(EvalReport, TrainLog)> {
    cfg.validate()?;
    let kind = cfg.two_target_waveform;
    let train_set = build_recording(cfg, kind, &cfg.two_target.train)?;
    let test_set = build_recording(cfg, kind, &cfg.two_target.test)?;
    let (model, log) = train(&train_set, &cfg.two_target_train)?;
    let report = evaluate(&test_set, Predictor::Ann(&model), &cfg.eval)?;
    Ok((report, log))
}
