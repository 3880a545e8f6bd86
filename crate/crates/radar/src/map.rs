//! 2-D range-azimuth imaging of a virtual-aperture CSI matrix.

use ndarray::Array2;
use num_complex::Complex64;
use rustfft::FftPlanner;

use csiloc_core::{WaveformConfig, SPEED_OF_LIGHT};

use crate::{RadarError, Result, VirtualArray};

/// Magnitude image over range and direction sine, plus its axes.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeAzimuthMap {
    /// `(n_range, n_azimuth)` magnitudes, unitary-transform scaling.
    pub magnitudes: Array2<f64>,
    /// Range of each row in meters.
    pub range_axis_m: Vec<f64>,
    /// Direction sine of each column; values beyond ±1 are outside the
    /// visible region and only appear because the FFT grid is rectangular.
    pub sin_theta_axis: Vec<f64>,
    /// Range covered by one row.
    pub range_bin_m: f64,
}

impl RangeAzimuthMap {
    pub fn n_range(&self) -> usize {
        self.magnitudes.nrows()
    }

    pub fn n_azimuth(&self) -> usize {
        self.magnitudes.ncols()
    }

    /// Grid pitch of the direction-sine axis.
    pub fn sin_theta_step(&self) -> f64 {
        self.sin_theta_axis[1] - self.sin_theta_axis[0]
    }
}

/// Symmetric raised-cosine taper; a single point gets weight 1.
fn hann(n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![1.0];
    }
    (0..n)
        .map(|i| 0.5 - 0.5 * (std::f64::consts::TAU * i as f64 / (n - 1) as f64).cos())
        .collect()
}

/// Transforms a `(v, n_c)` virtual-aperture matrix into a range-azimuth
/// magnitude map.
///
/// Rows: active subcarriers are tapered, embedded at grid slot
/// `k mod n_range` (so gapped layouts keep their true frequencies) and
/// inverse-transformed; a grid of `ifft_length * zero_pad` bins spans the
/// unambiguous range. Columns: tapered, zero-padded to `v * zero_pad` and
/// forward-transformed, then rotated so direction sine is centered. The
/// overall scaling is unitary, so energy in equals energy out when
/// `zero_pad == 1`.
pub fn range_azimuth_map(
    virtual_csi: &Array2<Complex64>,
    va: &VirtualArray,
    wf: &WaveformConfig,
    zero_pad: usize,
) -> Result<RangeAzimuthMap> {
    wf.validate()?;
    if zero_pad == 0 {
        return Err(RadarError::InvalidParams("zero_pad must be at least 1".into()));
    }
    let v = va.len();
    if v < 2 {
        return Err(RadarError::InvalidParams(
            "azimuth transform needs at least two phase centers".into(),
        ));
    }
    let n_c = wf.active_count();
    if virtual_csi.dim() != (v, n_c) {
        return Err(RadarError::ShapeMismatch(format!(
            "virtual matrix is {:?}, expected ({v}, {n_c})",
            virtual_csi.dim()
        )));
    }

    let n_r = wf.ifft_length * zero_pad;
    let n_a = v * zero_pad;
    let w_range = hann(n_c);
    let w_az = hann(v);

    let mut planner = FftPlanner::new();
    let range_fft = planner.plan_fft_inverse(n_r);
    let azimuth_fft = planner.plan_fft_forward(n_a);

    // Range profiles per phase center.
    let mut profiles = Array2::from_elem((v, n_r), Complex64::new(0.0, 0.0));
    let mut row = vec![Complex64::new(0.0, 0.0); n_r];
    for vi in 0..v {
        row.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        for (ki, &k) in wf.active_subcarriers.iter().enumerate() {
            let slot = (i64::from(k)).rem_euclid(n_r as i64) as usize;
            row[slot] = virtual_csi[(vi, ki)] * w_range[ki];
        }
        range_fft.process(&mut row);
        for (p, z) in row.iter().enumerate() {
            profiles[(vi, p)] = *z;
        }
    }

    // Azimuth transform across phase centers, one range bin at a time.
    let scale = 1.0 / ((n_r * n_a) as f64).sqrt();
    let mut magnitudes = Array2::from_elem((n_r, n_a), 0.0);
    let mut col = vec![Complex64::new(0.0, 0.0); n_a];
    for p in 0..n_r {
        col.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        for vi in 0..v {
            col[vi] = profiles[(vi, p)] * w_az[vi];
        }
        azimuth_fft.process(&mut col);
        for a in 0..n_a {
            let raw = (a + n_a - n_a / 2) % n_a;
            magnitudes[(p, a)] = col[raw].norm() * scale;
        }
    }

    let range_bin_m = SPEED_OF_LIGHT / (2.0 * wf.bandwidth_hz * zero_pad as f64);
    let range_axis_m = (0..n_r).map(|p| p as f64 * range_bin_m).collect();
    // One-way spacing of the phase centers is half the element pitch; the
    // round-trip phase doubles it back, giving sin(theta) steps of
    // lambda / (2 * spacing * n_a).
    let sin_step = wf.center_wavelength_m() / (2.0 * va.spacing_m * n_a as f64);
    let sin_theta_axis = (0..n_a)
        .map(|a| (a as f64 - (n_a / 2) as f64) * sin_step)
        .collect();

    Ok(RangeAzimuthMap {
        magnitudes,
        range_axis_m,
        sin_theta_axis,
        range_bin_m,
    })
}
