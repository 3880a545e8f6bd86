//! Peak extraction from range-azimuth maps.

use csiloc_core::Point2;
use serde::{Deserialize, Serialize};

use crate::{RadarError, RangeAzimuthMap, Result};

/// Tuning knobs of the classical localization chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RadarParams {
    /// Sliding median window for background estimation, in snapshots.
    pub k_background: usize,
    /// FFT oversampling factor on both map axes.
    pub zero_pad: usize,
    /// Detection threshold above the map's median magnitude, in dB.
    pub threshold_db: f64,
    /// A detection inside this radius of one from the previous frame keeps
    /// that track's identity.
    pub gate_radius_m: f64,
    /// Keep at most this many detections per frame, strongest first.
    pub max_targets: usize,
}

impl Default for RadarParams {
    fn default() -> Self {
        RadarParams {
            k_background: 31,
            zero_pad: 8,
            threshold_db: 10.0,
            gate_radius_m: 1.0,
            max_targets: 4,
        }
    }
}

impl RadarParams {
    pub fn validate(&self) -> Result<()> {
        if self.k_background == 0 {
            return Err(RadarError::InvalidParams("k_background must be at least 1".into()));
        }
        if self.zero_pad == 0 {
            return Err(RadarError::InvalidParams("zero_pad must be at least 1".into()));
        }
        if !self.threshold_db.is_finite() {
            return Err(RadarError::InvalidParams("threshold_db must be finite".into()));
        }
        if !(self.gate_radius_m.is_finite() && self.gate_radius_m > 0.0) {
            return Err(RadarError::InvalidParams("gate_radius_m must be positive".into()));
        }
        if self.max_targets == 0 {
            return Err(RadarError::InvalidParams("max_targets must be at least 1".into()));
        }
        Ok(())
    }
}

/// One localized reflection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    /// Cartesian position `[x, y]` in array coordinates (array along x,
    /// looking toward +y), meters.
    pub position: Point2,
    pub range_m: f64,
    pub sin_theta: f64,
    /// Interpolated map magnitude at the peak.
    pub magnitude: f64,
    /// Persistent identity carried across frames by gating; `None` until a
    /// tracking pass assigns one.
    pub track_id: Option<u64>,
}

/// Extracts target detections from a map.
///
/// A cell qualifies when it exceeds the map's median magnitude by
/// `threshold_db`, strictly dominates its eight neighbors and lies in the
/// visible region. Peaks are refined to sub-bin accuracy by fitting a
/// parabola through the log magnitudes along each axis. The strongest
/// `max_targets` survivors are returned, inheriting track identities from
/// `prev` where they fall within the gate radius.
pub fn detect(map: &RangeAzimuthMap, prev: &[Detection], params: &RadarParams) -> Vec<Detection> {
    let mut dets = find_candidates(map, params);
    inherit_tracks(&mut dets, prev, params.gate_radius_m);
    dets
}

pub(crate) fn find_candidates(map: &RangeAzimuthMap, params: &RadarParams) -> Vec<Detection> {
    let (n_r, n_a) = map.magnitudes.dim();
    let floor = median_magnitude(map);
    let threshold = floor * 10f64.powf(params.threshold_db / 20.0);

    let mut dets = Vec::new();
    for p in 1..n_r.saturating_sub(1) {
        for a in 1..n_a.saturating_sub(1) {
            let c = map.magnitudes[(p, a)];
            if c <= threshold || map.sin_theta_axis[a].abs() > 1.0 {
                continue;
            }
            let dominated = (-1i64..=1)
                .flat_map(|dp| (-1i64..=1).map(move |da| (dp, da)))
                .filter(|&(dp, da)| dp != 0 || da != 0)
                .any(|(dp, da)| {
                    map.magnitudes[((p as i64 + dp) as usize, (a as i64 + da) as usize)] >= c
                });
            if dominated {
                continue;
            }

            let dr = log_parabola_offset(
                map.magnitudes[(p - 1, a)],
                c,
                map.magnitudes[(p + 1, a)],
            );
            let da = log_parabola_offset(
                map.magnitudes[(p, a - 1)],
                c,
                map.magnitudes[(p, a + 1)],
            );
            let range_m = (p as f64 + dr) * map.range_bin_m;
            let sin_theta =
                (map.sin_theta_axis[a] + da * map.sin_theta_step()).clamp(-1.0, 1.0);
            let cos_theta = (1.0 - sin_theta * sin_theta).max(0.0).sqrt();
            dets.push(Detection {
                position: [range_m * sin_theta, range_m * cos_theta],
                range_m,
                sin_theta,
                magnitude: c,
                track_id: None,
            });
        }
    }
    dets.sort_by(|a, b| b.magnitude.total_cmp(&a.magnitude));
    dets.truncate(params.max_targets);
    dets
}

/// Matches detections to the previous frame greedily, strongest first; each
/// previous detection hands its identity to at most one successor.
pub(crate) fn inherit_tracks(dets: &mut [Detection], prev: &[Detection], gate_radius_m: f64) {
    let mut claimed = vec![false; prev.len()];
    for det in dets.iter_mut() {
        let mut best: Option<(usize, f64)> = None;
        for (i, old) in prev.iter().enumerate() {
            if claimed[i] {
                continue;
            }
            let d = csiloc_core::geometry::distance(det.position, old.position);
            if d <= gate_radius_m && best.is_none_or(|(_, bd)| d < bd) {
                best = Some((i, d));
            }
        }
        if let Some((i, _)) = best {
            claimed[i] = true;
            det.track_id = prev[i].track_id;
        }
    }
}

/// Map-wide median magnitude, the noise-floor estimate the threshold builds
/// on.
fn median_magnitude(map: &RangeAzimuthMap) -> f64 {
    let mut vals: Vec<f64> = map.magnitudes.iter().copied().collect();
    vals.sort_unstable_by(f64::total_cmp);
    let n = vals.len();
    if n % 2 == 1 {
        vals[n / 2]
    } else {
        (vals[n / 2 - 1] + vals[n / 2]) / 2.0
    }
}

/// Vertex offset of the parabola through `ln` of three equally spaced
/// magnitudes, clamped to half a bin. Exact for a Gaussian-shaped peak.
fn log_parabola_offset(left: f64, center: f64, right: f64) -> f64 {
    let l = left.max(1e-300).ln();
    let c = center.max(1e-300).ln();
    let r = right.max(1e-300).ln();
    let denom = l - 2.0 * c + r;
    if denom == 0.0 {
        return 0.0;
    }
    (0.5 * (l - r) / denom).clamp(-0.5, 0.5)
}
