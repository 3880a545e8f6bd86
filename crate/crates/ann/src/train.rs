//! Mini-batch training of the fingerprinting localizer from a labeled
//! snapshot sequence.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use csiloc_core::{Dataset, Point2, Region};

use crate::model::{loss_terms, output_dim, output_delta};
use crate::{
    extract_features, wavelet_background, AnnError, Exec, FeatureMode, FeatureStats,
    LocalizerModel, Mat, Mlp, Result, WaveletKind,
};

/// Everything that shapes a training run. All fields have serde defaults so a
/// config file only needs to spell out what it changes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    /// Hidden layer widths, input to output.
    pub hidden: Vec<usize>,
    pub learning_rate: f64,
    /// Classical momentum factor; 0 is plain gradient descent.
    pub momentum: f64,
    pub batch_size: usize,
    pub epochs: usize,
    /// Weight of the target-count cross entropy.
    pub w_count: f64,
    /// Weight of the normalized coordinate error.
    pub w_coord: f64,
    /// Fraction of usable frames held out for validation. A nonzero split
    /// always holds out at least one frame and the best-validation snapshot
    /// is returned; zero disables the holdout and training returns the
    /// final-epoch model.
    pub val_split: f64,
    pub rng_seed: u64,
    pub wavelet: WaveletKind,
    pub wavelet_levels: usize,
    /// Trailing snapshots per background estimate.
    pub history_window: usize,
    pub feature_mode: FeatureMode,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            hidden: vec![512, 256, 128],
            learning_rate: 1e-3,
            momentum: 0.0,
            batch_size: 32,
            epochs: 30,
            w_count: 1.0,
            w_coord: 1.0,
            val_split: 0.2,
            rng_seed: 0,
            wavelet: WaveletKind::Db4,
            wavelet_levels: 3,
            history_window: 32,
            feature_mode: FeatureMode::ReIm,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hidden.contains(&0) {
            return Err(AnnError::InvalidConfig(
                "hidden layer widths must be positive".into(),
            ));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(AnnError::InvalidConfig(
                "learning rate must be finite and positive".into(),
            ));
        }
        if !(self.momentum.is_finite() && (0.0..1.0).contains(&self.momentum)) {
            return Err(AnnError::InvalidConfig("momentum must lie in [0, 1)".into()));
        }
        if self.batch_size == 0 || self.epochs == 0 {
            return Err(AnnError::InvalidConfig(
                "batch size and epoch count must be positive".into(),
            ));
        }
        if !(self.val_split.is_finite() && (0.0..1.0).contains(&self.val_split)) {
            return Err(AnnError::InvalidConfig(
                "validation split must lie in [0, 1)".into(),
            ));
        }
        if !(self.w_count.is_finite()
            && self.w_coord.is_finite()
            && self.w_count >= 0.0
            && self.w_coord >= 0.0)
        {
            return Err(AnnError::InvalidConfig(
                "loss weights must be finite and non-negative".into(),
            ));
        }
        if self.wavelet_levels == 0 {
            return Err(AnnError::InvalidConfig(
                "background needs at least one decomposition level".into(),
            ));
        }
        let min_window = 1usize << self.wavelet_levels;
        if self.history_window < min_window {
            return Err(AnnError::InvalidConfig(format!(
                "history window {} cannot feed a {}-level background (needs {})",
                self.history_window, self.wavelet_levels, min_window
            )));
        }
        Ok(())
    }
}

/// Per-epoch progress. Training numbers are accumulated while the epoch
/// runs (each batch measured just before its step); validation numbers come
/// from one forward pass after the epoch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    /// Mean slot-wise position error over training targets, in meters;
    /// absent when the training split holds no targets.
    pub train_err_m: Option<f64>,
    /// Absent when the validation split is disabled.
    pub val_loss: Option<f64>,
    /// Mean slot-wise position error over validation targets, in meters;
    /// absent when there is no validation split or it holds no targets.
    pub val_err_m: Option<f64>,
}

/// What a training run did, next to the model it produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainLog {
    pub epochs: Vec<EpochStats>,
    pub n_train: usize,
    pub n_val: usize,
    pub n_p: usize,
    pub feature_dim: usize,
    /// Epoch whose validation loss was lowest; the returned model is that
    /// epoch's snapshot.
    pub best_epoch: usize,
    /// Snapshot indices that ended up in the training split, ascending.
    pub train_frames: Vec<usize>,
    /// Snapshot indices held out for validation, ascending.
    pub val_frames: Vec<usize>,
}

/// One usable frame: residual features plus its sorted true positions.
struct Sample {
    features: Vec<f64>,
    truth_m: Vec<Point2>,
    truth_norm: Vec<Point2>,
}

/// Trains a localizer on `dataset`, running the linear algebra in parallel
/// when the `parallel` feature is on. Returns the snapshot with the best
/// validation loss.
pub fn train(dataset: &Dataset, config: &TrainConfig) -> Result<(LocalizerModel, TrainLog)> {
    train_with(dataset, config, Exec::Par)
}

/// Sequential twin of [`train`]; produces bit-identical results because every
/// parallel reduction in the pipeline is ordered.
pub fn train_seq(dataset: &Dataset, config: &TrainConfig) -> Result<(LocalizerModel, TrainLog)> {
    train_with(dataset, config, Exec::Seq)
}

fn train_with(
    dataset: &Dataset,
    config: &TrainConfig,
    exec: Exec,
) -> Result<(LocalizerModel, TrainLog)> {
    config.validate()?;
    dataset.validate()?;
    let mut samples = build_samples(dataset, config)?;
    let n = samples.len();
    if n < 2 {
        return Err(AnnError::InvalidData(format!(
            "only {n} usable frame(s); training needs at least 2 (frames become usable once \
             {} snapshots of history exist)",
            1usize << config.wavelet_levels
        )));
    }
    let dim = samples[0].features.len();
    let n_p = samples
        .iter()
        .map(|s| s.truth_m.len())
        .max()
        .unwrap_or(0)
        .max(1);

    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let n_val = if config.val_split > 0.0 {
        ((config.val_split * n as f64).round() as usize).clamp(1, n - 1)
    } else {
        0
    };
    let n_train = n - n_val;
    let train_idx = order[..n_train].to_vec();
    let val_idx = order[n_train..].to_vec();

    // Geometry and feature statistics come from the training split alone.
    let region = region_from_targets(train_idx.iter().flat_map(|&i| samples[i].truth_m.iter()))?;
    let train_rows: Vec<Vec<f64>> = train_idx
        .iter()
        .map(|&i| samples[i].features.clone())
        .collect();
    let stats = FeatureStats::fit(&train_rows)?;
    drop(train_rows);
    for s in samples.iter_mut() {
        stats.apply(&mut s.features)?;
        s.truth_norm = s.truth_m.iter().map(|&p| normalize(region, p)).collect();
    }

    let mut dims = Vec::with_capacity(config.hidden.len() + 2);
    dims.push(dim);
    dims.extend_from_slice(&config.hidden);
    dims.push(output_dim(n_p));
    let mut mlp = Mlp::new(&dims, &mut rng)?;
    let mut velocity = mlp.zero_grads();

    let mut best: Option<(f64, usize, Mlp)> = None;
    let mut epochs_log = Vec::with_capacity(config.epochs);
    let mut shuffled = train_idx.clone();
    for epoch in 0..config.epochs {
        shuffled.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        let mut err_sum = 0.0;
        let mut err_count = 0usize;
        for batch in shuffled.chunks(config.batch_size) {
            let b = batch.len();
            let mut x = Mat::zeros(b, dim);
            for (r, &si) in batch.iter().enumerate() {
                x.row_mut(r).copy_from_slice(&samples[si].features);
            }
            let acts = mlp.forward(&x, exec);
            let out = acts.last().expect("forward always yields activations");
            let mut delta = Mat::zeros(b, out.cols);
            for (r, &si) in batch.iter().enumerate() {
                let s = &samples[si];
                let raw = out.row(r);
                loss_sum += loss_terms(raw, &s.truth_norm, n_p, config.w_count, config.w_coord).0;
                for (j, t) in s.truth_m.iter().enumerate() {
                    let pred =
                        denormalize(region, [raw[n_p + 1 + 2 * j], raw[n_p + 1 + 2 * j + 1]]);
                    err_sum += ((pred[0] - t[0]).powi(2) + (pred[1] - t[1]).powi(2)).sqrt();
                    err_count += 1;
                }
                let d = output_delta(raw, &s.truth_norm, n_p, config.w_count, config.w_coord);
                for (slot, v) in delta.row_mut(r).iter_mut().zip(d) {
                    *slot = v / b as f64;
                }
            }
            let grads = mlp.backward(&acts, delta, exec);
            mlp.apply_step(&mut velocity, &grads, config.learning_rate, config.momentum);
        }
        let train_loss = loss_sum / n_train as f64;
        let train_err_m = (err_count > 0).then(|| err_sum / err_count as f64);

        let (val_loss, val_err_m) = if n_val > 0 {
            let (vl, ve) = validation_pass(&mlp, &samples, &val_idx, region, n_p, config, exec);
            if best.as_ref().is_none_or(|(b, _, _)| vl < *b) {
                best = Some((vl, epoch, mlp.clone()));
            }
            (Some(vl), ve)
        } else {
            (None, None)
        };
        epochs_log.push(EpochStats {
            epoch,
            train_loss,
            train_err_m,
            val_loss,
            val_err_m,
        });
    }

    // Without a validation split the final weights are the result.
    let (best_epoch, best_mlp) = match best {
        Some((_, epoch, weights)) => (epoch, weights),
        None => (config.epochs - 1, mlp),
    };
    let first_frame = (1usize << config.wavelet_levels) - 1;
    let mut train_frames: Vec<usize> = train_idx.iter().map(|&i| first_frame + i).collect();
    let mut val_frames: Vec<usize> = val_idx.iter().map(|&i| first_frame + i).collect();
    train_frames.sort_unstable();
    val_frames.sort_unstable();
    let model = LocalizerModel {
        waveform_name: dataset.waveform.name.clone(),
        feature_mode: config.feature_mode,
        wavelet: config.wavelet,
        wavelet_levels: config.wavelet_levels,
        history_window: config.history_window,
        region,
        n_p,
        stats,
        mlp: best_mlp,
    };
    model.validate()?;
    let log = TrainLog {
        epochs: epochs_log,
        n_train,
        n_val,
        n_p,
        feature_dim: dim,
        best_epoch,
        train_frames,
        val_frames,
    };
    Ok((model, log))
}

/// Residual features for every frame with enough trailing history, paired
/// with its sorted ground truth. Mirrors the preprocessing of
/// [`LocalizerModel::infer_frame`] exactly.
fn build_samples(dataset: &Dataset, config: &TrainConfig) -> Result<Vec<Sample>> {
    let snaps = &dataset.snapshots;
    let first = (1usize << config.wavelet_levels) - 1;
    let mut samples = Vec::new();
    for i in first..snaps.len() {
        let take = (i + 1).min(config.history_window);
        let window = &snaps[i + 1 - take..=i];
        let background = wavelet_background(window, config.wavelet, config.wavelet_levels)?;
        let mut residual = background.mapv(|z| -z);
        for (cell, z) in residual.iter_mut().zip(snaps[i].csi.iter()) {
            *cell += num_complex::Complex64::new(f64::from(z.re), f64::from(z.im));
        }
        let features = extract_features(&residual, config.feature_mode);
        let gt = snaps[i].ground_truth.as_ref().ok_or_else(|| {
            AnnError::InvalidData(format!("snapshot {i} carries no ground truth"))
        })?;
        let mut truth_m = gt.clone();
        truth_m.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
        samples.push(Sample {
            features,
            truth_m,
            truth_norm: Vec::new(),
        });
    }
    Ok(samples)
}

/// Bounding box of the training targets, padded by a tenth of each span so
/// the normalized head keeps a little slack; degenerate spans (and target-free
/// sets) fall back to a half-meter box.
fn region_from_targets<'a, I: Iterator<Item = &'a Point2>>(targets: I) -> Result<Region> {
    let mut x_min = f64::INFINITY;
    let mut x_max = f64::NEG_INFINITY;
    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    let mut any = false;
    for p in targets {
        any = true;
        x_min = x_min.min(p[0]);
        x_max = x_max.max(p[0]);
        y_min = y_min.min(p[1]);
        y_max = y_max.max(p[1]);
    }
    if !any {
        x_min = 0.0;
        x_max = 0.0;
        y_min = 0.0;
        y_max = 0.0;
    }
    let pad_x = ((x_max - x_min) * 0.1).max(f64::EPSILON);
    let pad_y = ((y_max - y_min) * 0.1).max(f64::EPSILON);
    let (x_min, x_max) = if x_max - x_min > 0.0 {
        (x_min - pad_x, x_max + pad_x)
    } else {
        (x_min - 0.5, x_max + 0.5)
    };
    let (y_min, y_max) = if y_max - y_min > 0.0 {
        (y_min - pad_y, y_max + pad_y)
    } else {
        (y_min - 0.5, y_max + 0.5)
    };
    Ok(Region::new(x_min, x_max, y_min, y_max)?)
}

fn normalize(region: Region, p: Point2) -> Point2 {
    let cx = (region.x_min + region.x_max) / 2.0;
    let cy = (region.y_min + region.y_max) / 2.0;
    [
        (p[0] - cx) / (region.width() / 2.0),
        (p[1] - cy) / (region.height() / 2.0),
    ]
}

fn denormalize(region: Region, p: Point2) -> Point2 {
    let cx = (region.x_min + region.x_max) / 2.0;
    let cy = (region.y_min + region.y_max) / 2.0;
    [
        cx + p[0] * (region.width() / 2.0),
        cy + p[1] * (region.height() / 2.0),
    ]
}

/// Forward-only pass over the validation split: mean loss plus the mean
/// meter error of the coordinate slots against the (sorted) true targets.
fn validation_pass(
    mlp: &Mlp,
    samples: &[Sample],
    val_idx: &[usize],
    region: Region,
    n_p: usize,
    config: &TrainConfig,
    exec: Exec,
) -> (f64, Option<f64>) {
    let dim = samples[0].features.len();
    let mut x = Mat::zeros(val_idx.len(), dim);
    for (r, &si) in val_idx.iter().enumerate() {
        x.row_mut(r).copy_from_slice(&samples[si].features);
    }
    let out = mlp.output(&x, exec);
    let mut loss_sum = 0.0;
    let mut err_sum = 0.0;
    let mut err_count = 0usize;
    for (r, &si) in val_idx.iter().enumerate() {
        let s = &samples[si];
        let raw = out.row(r);
        loss_sum += loss_terms(raw, &s.truth_norm, n_p, config.w_count, config.w_coord).0;
        for (j, t) in s.truth_m.iter().enumerate() {
            let pred = denormalize(region, [raw[n_p + 1 + 2 * j], raw[n_p + 1 + 2 * j + 1]]);
            err_sum += ((pred[0] - t[0]).powi(2) + (pred[1] - t[1]).powi(2)).sqrt();
            err_count += 1;
        }
    }
    let val_loss = loss_sum / val_idx.len() as f64;
    let val_err = (err_count > 0).then(|| err_sum / err_count as f64);
    (val_loss, val_err)
}
