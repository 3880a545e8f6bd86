//! Runs a localizer over a recorded dataset frame by frame and aggregates
//! the error statistics the comparison reports are built from.

use serde::{Deserialize, Serialize};

use csiloc_ann::{Exec, LocalizerModel};
use csiloc_core::{Dataset, Point2};
use csiloc_radar::{radar_localize, radar_localize_seq, RadarParams};

use crate::metrics::{match_targets, threshold_accuracy};
use crate::{EvalError, Result};

/// The localizer under evaluation.
#[derive(Debug, Clone, Copy)]
pub enum Predictor<'a> {
    /// Classical range-azimuth processing with the given detector settings.
    Radar(&'a RadarParams),
    /// A trained fingerprinting model.
    Ann(&'a LocalizerModel),
}

impl Predictor<'_> {
    pub fn method_name(&self) -> &'static str {
        match self {
            Predictor::Radar(_) => "radar",
            Predictor::Ann(_) => "ann",
        }
    }
}

/// Scoring knobs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalParams {
    /// Distancing threshold applied to two-target frames, in meters.
    pub threshold_m: f64,
}

impl Default for EvalParams {
    fn default() -> Self {
        EvalParams { threshold_m: 1.5 }
    }
}

impl EvalParams {
    pub fn validate(&self) -> Result<()> {
        if !self.threshold_m.is_finite() || self.threshold_m <= 0.0 {
            return Err(EvalError::InvalidParams(format!(
                "threshold {} m must be finite and positive",
                self.threshold_m
            )));
        }
        Ok(())
    }
}

/// What one frame contributed to the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FramePrediction {
    pub timestamp: f64,
    /// `false` while the method is still warming up (background medians or
    /// wavelet history not yet filled); such frames carry no statistics.
    pub evaluated: bool,
    pub predicted: Vec<Point2>,
    pub truth: Vec<Point2>,
    /// Errors of the matched targets, ascending by truth index, in meters.
    pub errors_m: Vec<f64>,
    /// Ground-truth targets no prediction was assigned to.
    pub missed: usize,
}

/// Aggregated scores of one method on one recording.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub method: String,
    pub waveform: String,
    pub threshold_m: f64,
    pub n_frames: usize,
    /// Frames past warm-up, i.e. those that contribute statistics.
    pub n_evaluated: usize,
    /// Ground-truth target slots across evaluated frames.
    pub n_targets: usize,
    pub n_matched: usize,
    /// Truth slots without a prediction; excluded from the error mean and
    /// reported here instead.
    pub n_missed: usize,
    /// `n_matched / n_targets`; absent when no evaluated frame had targets.
    pub detection_rate: Option<f64>,
    pub mean_error_m: Option<f64>,
    pub median_error_m: Option<f64>,
    /// Fraction of evaluated two-target frames classified on the correct
    /// side of the distancing threshold; absent without such frames.
    pub threshold_accuracy: Option<f64>,
    pub n_threshold_frames: usize,
    /// Matched-target errors in frame order (the multiset behind the mean).
    pub errors_m: Vec<f64>,
    /// Cumulative error distribution: (error_m, fraction ≤ error_m),
    /// nondecreasing in both coordinates.
    pub cdf: Vec<[f64; 2]>,
    pub frames: Vec<FramePrediction>,
}

/// Scores `predictor` on every snapshot of `dataset`. Work across frames
/// runs in parallel; the aggregation itself is frame-ordered, so the report
/// is identical to [`evaluate_seq`].
pub fn evaluate(dataset: &Dataset, predictor: Predictor, params: &EvalParams) -> Result<EvalReport> {
    evaluate_with(dataset, predictor, params, Exec::Par)
}

/// Single-threaded twin of [`evaluate`].
pub fn evaluate_seq(
    dataset: &Dataset,
    predictor: Predictor,
    params: &EvalParams,
) -> Result<EvalReport> {
    evaluate_with(dataset, predictor, params, Exec::Seq)
}

fn evaluate_with(
    dataset: &Dataset,
    predictor: Predictor,
    params: &EvalParams,
    exec: Exec,
) -> Result<EvalReport> {
    params.validate()?;
    dataset.validate()?;
    for (i, snap) in dataset.snapshots.iter().enumerate() {
        if snap.ground_truth.is_none() {
            return Err(EvalError::InvalidData(format!(
                "snapshot {i} carries no ground truth; scoring needs labeled recordings"
            )));
        }
    }
    let rows = predictions(dataset, predictor, exec)?;
    Ok(score_frames(
        dataset,
        rows,
        predictor.method_name(),
        params,
    ))
}

/// Runs the method itself: one `(past_warmup, predicted_positions)` row per
/// snapshot.
fn predictions(
    dataset: &Dataset,
    predictor: Predictor,
    exec: Exec,
) -> Result<Vec<(bool, Vec<Point2>)>> {
    match predictor {
        Predictor::Radar(rp) => {
            let frames = match exec {
                Exec::Par => radar_localize(dataset, rp)?,
                Exec::Seq => radar_localize_seq(dataset, rp)?,
            };
            Ok(frames
                .into_iter()
                .map(|f| {
                    let positions = f.detections.iter().map(|d| d.position).collect();
                    (f.warmed_up, positions)
                })
                .collect())
        }
        Predictor::Ann(model) => {
            model.validate()?;
            if model.waveform_name != dataset.waveform.name {
                return Err(EvalError::Incompatible(format!(
                    "model was trained on '{}' but the recording uses '{}'",
                    model.waveform_name, dataset.waveform.name
                )));
            }
            let min_history = 1usize << model.wavelet_levels;
            let per_frame = |i: usize| -> Result<(bool, Vec<Point2>)> {
                if i + 1 < min_history {
                    return Ok((false, Vec::new()));
                }
                let out = model.infer_frame(&dataset.snapshots[..=i], exec)?;
                Ok((true, out.positions().to_vec()))
            };
            let indices: Vec<usize> = (0..dataset.snapshots.len()).collect();
            match exec {
                #[cfg(feature = "parallel")]
                Exec::Par => {
                    use rayon::prelude::*;
                    indices.par_iter().map(|&i| per_frame(i)).collect()
                }
                _ => indices.iter().map(|&i| per_frame(i)).collect(),
            }
        }
    }
}

/// Frame-ordered aggregation of prediction rows into a report.
fn score_frames(
    dataset: &Dataset,
    rows: Vec<(bool, Vec<Point2>)>,
    method: &str,
    params: &EvalParams,
) -> EvalReport {
    let mut frames = Vec::with_capacity(rows.len());
    let mut errors_m = Vec::new();
    let mut n_evaluated = 0;
    let mut n_targets = 0;
    let mut n_matched = 0;
    let mut n_missed = 0;
    let mut n_threshold_frames = 0;
    let mut n_threshold_correct = 0usize;

    for (snap, (evaluated, predicted)) in dataset.snapshots.iter().zip(rows) {
        let truth = snap.ground_truth.clone().unwrap_or_default();
        if !evaluated {
            frames.push(FramePrediction {
                timestamp: snap.timestamp,
                evaluated: false,
                predicted,
                truth,
                errors_m: Vec::new(),
                missed: 0,
            });
            continue;
        }
        n_evaluated += 1;
        let matching = match_targets(&predicted, &truth);
        n_targets += truth.len();
        n_matched += matching.pairs.len();
        n_missed += matching.unmatched_truths.len();
        let frame_errors: Vec<f64> = matching.pairs.iter().map(|p| p.error_m).collect();
        errors_m.extend_from_slice(&frame_errors);

        if truth.len() == 2 {
            n_threshold_frames += 1;
            // Needs a prediction for both people; anything less cannot
            // classify their spacing and counts as wrong.
            if matching.pairs.len() == 2 {
                let pred_pair = [
                    predicted[matching.pairs[0].pred],
                    predicted[matching.pairs[1].pred],
                ];
                let true_pair = [truth[0], truth[1]];
                if threshold_accuracy(&pred_pair, &true_pair, params.threshold_m) {
                    n_threshold_correct += 1;
                }
            }
        }

        frames.push(FramePrediction {
            timestamp: snap.timestamp,
            evaluated: true,
            predicted,
            truth,
            errors_m: frame_errors,
            missed: matching.unmatched_truths.len(),
        });
    }

    let mut sorted = errors_m.clone();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let mean_error_m = (n > 0).then(|| sorted.iter().sum::<f64>() / n as f64);
    let median_error_m = (n > 0).then(|| {
        if n % 2 == 1 {
            sorted[n / 2]
        } else {
            0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
        }
    });
    let cdf = sorted
        .iter()
        .enumerate()
        .map(|(i, &e)| [e, (i + 1) as f64 / n as f64])
        .collect();

    EvalReport {
        method: method.to_string(),
        waveform: dataset.waveform.name.clone(),
        threshold_m: params.threshold_m,
        n_frames: dataset.snapshots.len(),
        n_evaluated,
        n_targets,
        n_matched,
        n_missed,
        detection_rate: (n_targets > 0).then(|| n_matched as f64 / n_targets as f64),
        mean_error_m,
        median_error_m,
        threshold_accuracy: (n_threshold_frames > 0)
            .then(|| n_threshold_correct as f64 / n_threshold_frames as f64),
        n_threshold_frames,
        errors_m,
        cdf,
        frames,
    }
}
