//! Trained localizer: network plus everything needed to reproduce its
//! preprocessing at inference time.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use csiloc_core::{CsiSnapshot, Point2, Region};

use crate::{
    extract_features, wavelet_background, AnnError, Exec, FeatureMode, FeatureStats, Mat, Mlp,
    Result, WaveletKind,
};

const MODEL_TAG: &str = "csiloc.model";
const MODEL_VERSION: u32 = 1;

/// A fingerprinting localizer: preprocessing recipe, feature statistics and
/// network weights.
///
/// The output layer carries `n_p + 1` occupancy logits (how many targets are
/// present) followed by `n_p` coordinate pairs normalized to `[-1, 1]` over
/// `region`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalizerModel {
    /// Name of the waveform the model was trained on.
    pub waveform_name: String,
    pub feature_mode: FeatureMode,
    pub wavelet: WaveletKind,
    pub wavelet_levels: usize,
    /// Trailing snapshots considered for the background estimate.
    pub history_window: usize,
    /// Area the coordinate head is normalized over.
    pub region: Region,
    /// Maximum simultaneous targets the head can report.
    pub n_p: usize,
    pub stats: FeatureStats,
    pub mlp: Mlp,
}

/// Decoded network output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelOutput {
    /// Probability of 0, 1, ... `n_p` targets being present.
    pub count_probs: Vec<f64>,
    /// All `n_p` coordinate slots, denormalized to meters.
    pub coords_m: Vec<Point2>,
}

impl ModelOutput {
    /// Most probable target count (smallest index wins ties).
    pub fn predicted_count(&self) -> usize {
        let mut best = 0;
        for (i, p) in self.count_probs.iter().enumerate() {
            if *p > self.count_probs[best] {
                best = i;
            }
        }
        best
    }

    /// The coordinate slots actually claimed by the predicted count.
    pub fn positions(&self) -> Vec<Point2> {
        self.coords_m[..self.predicted_count()].to_vec()
    }
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Training loss for one sample: cross entropy on the count logits plus the
/// mean squared coordinate error over the true targets, in normalized units.
/// Returns `(total, count_term, coord_term)` with the weights applied.
pub fn loss_terms(
    raw: &[f64],
    truth_norm: &[Point2],
    n_p: usize,
    w_count: f64,
    w_coord: f64,
) -> (f64, f64, f64) {
    let c = truth_norm.len();
    debug_assert!(c <= n_p);
    debug_assert_eq!(raw.len(), output_dim(n_p));
    let logits = &raw[..=n_p];
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let log_sum: f64 = logits.iter().map(|l| (l - max).exp()).sum::<f64>().ln();
    let ce = log_sum - (logits[c] - max);
    let mut coord = 0.0;
    for (j, t) in truth_norm.iter().enumerate() {
        let px = raw[n_p + 1 + 2 * j];
        let py = raw[n_p + 1 + 2 * j + 1];
        coord += (px - t[0]) * (px - t[0]) + (py - t[1]) * (py - t[1]);
    }
    if c > 0 {
        coord /= c as f64;
    }
    (w_count * ce + w_coord * coord, w_count * ce, w_coord * coord)
}

/// Gradient of [`loss_terms`] with respect to the raw output vector.
pub fn output_delta(
    raw: &[f64],
    truth_norm: &[Point2],
    n_p: usize,
    w_count: f64,
    w_coord: f64,
) -> Vec<f64> {
    let c = truth_norm.len();
    let probs = softmax(&raw[..=n_p]);
    let mut delta = vec![0.0; raw.len()];
    for (i, p) in probs.iter().enumerate() {
        delta[i] = w_count * (p - if i == c { 1.0 } else { 0.0 });
    }
    for (j, t) in truth_norm.iter().enumerate() {
        let ix = n_p + 1 + 2 * j;
        delta[ix] = w_coord * 2.0 * (raw[ix] - t[0]) / c as f64;
        delta[ix + 1] = w_coord * 2.0 * (raw[ix + 1] - t[1]) / c as f64;
    }
    delta
}

/// Width of the output layer for a given target capacity.
pub fn output_dim(n_p: usize) -> usize {
    n_p + 1 + 2 * n_p
}

impl LocalizerModel {
    pub fn validate(&self) -> Result<()> {
        self.region.validate()?;
        if self.n_p == 0 {
            return Err(AnnError::InvalidConfig("n_p must be at least 1".into()));
        }
        if self.mlp.input_dim() != self.stats.dim() {
            return Err(AnnError::ShapeMismatch(format!(
                "network expects {} features, statistics carry {}",
                self.mlp.input_dim(),
                self.stats.dim()
            )));
        }
        if self.mlp.output_dim() != output_dim(self.n_p) {
            return Err(AnnError::ShapeMismatch(format!(
                "network emits {} values, head for {} targets needs {}",
                self.mlp.output_dim(),
                self.n_p,
                output_dim(self.n_p)
            )));
        }
        Ok(())
    }

    /// Maps meters onto the `[-1, 1]` head range.
    pub fn normalize_position(&self, p: Point2) -> Point2 {
        let cx = (self.region.x_min + self.region.x_max) / 2.0;
        let cy = (self.region.y_min + self.region.y_max) / 2.0;
        [
            (p[0] - cx) / (self.region.width() / 2.0),
            (p[1] - cy) / (self.region.height() / 2.0),
        ]
    }

    /// Inverse of [`LocalizerModel::normalize_position`].
    pub fn denormalize_position(&self, p: Point2) -> Point2 {
        let cx = (self.region.x_min + self.region.x_max) / 2.0;
        let cy = (self.region.y_min + self.region.y_max) / 2.0;
        [
            cx + p[0] * (self.region.width() / 2.0),
            cy + p[1] * (self.region.height() / 2.0),
        ]
    }

    /// Runs the head on an unstandardized feature row.
    pub fn predict_features(&self, features: &[f64], exec: Exec) -> Result<ModelOutput> {
        let mut row = features.to_vec();
        self.stats.apply(&mut row)?;
        let x = Mat {
            rows: 1,
            cols: row.len(),
            data: row,
        };
        let raw = self.mlp.output(&x, exec);
        Ok(self.decode(raw.row(0)))
    }

    /// Full inference for the newest snapshot of `history`: wavelet
    /// background over the trailing window, residual features, network.
    pub fn infer_frame(&self, history: &[CsiSnapshot], exec: Exec) -> Result<ModelOutput> {
        let current = history
            .last()
            .ok_or_else(|| AnnError::InsufficientHistory("no snapshots given".into()))?;
        let take = history.len().min(self.history_window.max(1));
        let window = &history[history.len() - take..];
        let background = wavelet_background(window, self.wavelet, self.wavelet_levels)?;
        let mut residual = background.mapv(|z| -z);
        for (cell, z) in residual.iter_mut().zip(current.csi.iter()) {
            *cell += Complex64::new(f64::from(z.re), f64::from(z.im));
        }
        let features = extract_features(&residual, self.feature_mode);
        self.predict_features(&features, exec)
    }

    /// Decodes a raw output row into probabilities and meters. Coordinates
    /// are clamped to the region so callers never see out-of-bounds fixes.
    pub fn decode(&self, raw: &[f64]) -> ModelOutput {
        let count_probs = softmax(&raw[..=self.n_p]);
        let coords_m = (0..self.n_p)
            .map(|j| {
                self.region.clamp(self.denormalize_position([
                    raw[self.n_p + 1 + 2 * j],
                    raw[self.n_p + 1 + 2 * j + 1],
                ]))
            })
            .collect();
        ModelOutput {
            count_probs,
            coords_m,
        }
    }

    /// Writes the model: a JSON header line, then little-endian binary
    /// blocks (per layer the weights row-major then biases, as `f32`;
    /// finally the feature means and deviations as `f64`).
    pub fn save<W: Write>(&self, mut w: W) -> Result<()> {
        self.validate()?;
        let header = ModelHeader {
            format: MODEL_TAG.to_string(),
            version: MODEL_VERSION,
            waveform_name: self.waveform_name.clone(),
            feature_mode: self.feature_mode,
            wavelet: self.wavelet,
            wavelet_levels: self.wavelet_levels,
            history_window: self.history_window,
            region: self.region,
            n_p: self.n_p,
            dims: self.mlp.dims(),
        };
        let mut text = serde_json::to_string(&header)
            .map_err(|e| AnnError::MalformedModel(e.to_string()))?;
        text.push('\n');
        w.write_all(text.as_bytes())?;
        for layer in &self.mlp.layers {
            for v in &layer.w.data {
                w.write_all(&(*v as f32).to_le_bytes())?;
            }
            for v in &layer.b {
                w.write_all(&(*v as f32).to_le_bytes())?;
            }
        }
        for v in &self.stats.mean {
            w.write_all(&v.to_le_bytes())?;
        }
        for v in &self.stats.std {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn load<R: Read>(reader: R) -> Result<Self> {
        let mut r = BufReader::new(reader);
        let mut line = String::new();
        r.read_line(&mut line)?;
        let header: ModelHeader = serde_json::from_str(line.trim_end())
            .map_err(|e| AnnError::MalformedModel(format!("header does not parse: {e}")))?;
        if header.format != MODEL_TAG {
            return Err(AnnError::MalformedModel(format!(
                "unknown format tag `{}`",
                header.format
            )));
        }
        if header.version != MODEL_VERSION {
            return Err(AnnError::MalformedModel(format!(
                "unsupported version {}",
                header.version
            )));
        }
        if header.dims.len() < 2 {
            return Err(AnnError::MalformedModel("header lists no layers".into()));
        }

        let mut layers = Vec::with_capacity(header.dims.len() - 1);
        for pair in header.dims.windows(2) {
            let (fan_in, fan_out) = (pair[0], pair[1]);
            let mut w = Mat::zeros(fan_out, fan_in);
            read_f32_block(&mut r, &mut w.data)?;
            let mut b = vec![0.0; fan_out];
            read_f32_block(&mut r, &mut b)?;
            layers.push(crate::mlp::Layer { w, b });
        }
        let dim = header.dims[0];
        let mut mean = vec![0.0; dim];
        let mut std = vec![0.0; dim];
        read_f64_block(&mut r, &mut mean)?;
        read_f64_block(&mut r, &mut std)?;

        let model = LocalizerModel {
            waveform_name: header.waveform_name,
            feature_mode: header.feature_mode,
            wavelet: header.wavelet,
            wavelet_levels: header.wavelet_levels,
            history_window: header.history_window,
            region: header.region,
            n_p: header.n_p,
            stats: FeatureStats { mean, std },
            mlp: Mlp { layers },
        };
        model.validate()?;
        Ok(model)
    }

    pub fn save_file<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.save(std::io::BufWriter::new(file))
    }

    pub fn load_file<P: AsRef<Path>>(path: P) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::load(BufReader::new(file))
    }
}

#[derive(Serialize, Deserialize)]
struct ModelHeader {
    format: String,
    version: u32,
    waveform_name: String,
    feature_mode: FeatureMode,
    wavelet: WaveletKind,
    wavelet_levels: usize,
    history_window: usize,
    region: Region,
    n_p: usize,
    dims: Vec<usize>,
}

fn read_f32_block<R: Read>(r: &mut R, out: &mut [f64]) -> Result<()> {
    let mut bytes = vec![0u8; out.len() * 4];
    r.read_exact(&mut bytes).map_err(truncated)?;
    for (v, chunk) in out.iter_mut().zip(bytes.chunks_exact(4)) {
        *v = f64::from(f32::from_le_bytes([chunk[0], chunk[1], chunk[2], chunk[3]]));
    }
    Ok(())
}

fn read_f64_block<R: Read>(r: &mut R, out: &mut [f64]) -> Result<()> {
    let mut bytes = vec![0u8; out.len() * 8];
    r.read_exact(&mut bytes).map_err(truncated)?;
    for (v, chunk) in out.iter_mut().zip(bytes.chunks_exact(8)) {
        let mut arr = [0u8; 8];
        arr.copy_from_slice(chunk);
        *v = f64::from_le_bytes(arr);
    }
    Ok(())
}

fn truncated(e: std::io::Error) -> AnnError {
    if e.kind() == std::io::ErrorKind::UnexpectedEof {
        AnnError::MalformedModel("weight payload ends before the header says it should".into())
    } else {
        AnnError::Io(e)
    }
}
