//! Periodized orthogonal wavelet transforms for background extraction.

use ndarray::Array3;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use csiloc_core::CsiSnapshot;

use crate::{AnnError, Result};

/// Analysis filter family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WaveletKind {
    Haar,
    Db4,
}

impl WaveletKind {
    /// Orthonormal lowpass taps.
    fn lowpass(self) -> Vec<f64> {
        match self {
            WaveletKind::Haar => {
                let h = 1.0 / 2f64.sqrt();
                vec![h, h]
            }
            WaveletKind::Db4 => {
                let s3 = 3f64.sqrt();
                let norm = 4.0 * 2f64.sqrt();
                vec![
                    (1.0 + s3) / norm,
                    (3.0 + s3) / norm,
                    (3.0 - s3) / norm,
                    (1.0 - s3) / norm,
                ]
            }
        }
    }

    /// Matching highpass taps by alternating-sign reversal.
    fn highpass(self) -> Vec<f64> {
        let lo = self.lowpass();
        let l = lo.len();
        (0..l)
            .map(|n| if n % 2 == 0 { lo[l - 1 - n] } else { -lo[l - 1 - n] })
            .collect()
    }
}

/// One analysis split of an even-length signal with circular extension.
fn analyze(x: &[f64], lo: &[f64], hi: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = x.len();
    let half = n / 2;
    let mut approx = vec![0.0; half];
    let mut detail = vec![0.0; half];
    for i in 0..half {
        let mut a = 0.0;
        let mut d = 0.0;
        for (t, (&l, &h)) in lo.iter().zip(hi.iter()).enumerate() {
            let v = x[(2 * i + t) % n];
            a += l * v;
            d += h * v;
        }
        approx[i] = a;
        detail[i] = d;
    }
    (approx, detail)
}

/// Transpose of [`analyze`]; for orthonormal filters this is the inverse.
fn synthesize(approx: &[f64], detail: &[f64], lo: &[f64], hi: &[f64]) -> Vec<f64> {
    let half = approx.len();
    let n = 2 * half;
    let mut x = vec![0.0; n];
    for i in 0..half {
        for (t, (&l, &h)) in lo.iter().zip(hi.iter()).enumerate() {
            x[(2 * i + t) % n] += l * approx[i] + h * detail[i];
        }
    }
    x
}

/// Removes everything above the coarsest scale: `levels` analysis passes,
/// all detail coefficients dropped, then synthesis back to full length.
///
/// The input length must be a positive multiple of `2^levels`.
pub fn denoise_lowpass(x: &[f64], kind: WaveletKind, levels: usize) -> Result<Vec<f64>> {
    if levels == 0 {
        return Err(AnnError::InvalidConfig(
            "wavelet denoising needs at least one level".into(),
        ));
    }
    let block = 1usize << levels;
    if x.is_empty() || !x.len().is_multiple_of(block) {
        return Err(AnnError::InvalidData(format!(
            "signal length {} is not a positive multiple of 2^{levels}",
            x.len()
        )));
    }
    let lo = kind.lowpass();
    let hi = kind.highpass();
    let mut approx = x.to_vec();
    for _ in 0..levels {
        approx = analyze(&approx, &lo, &hi).0;
    }
    let mut rec = approx;
    for _ in 0..levels {
        let zeros = vec![0.0; rec.len()];
        rec = synthesize(&rec, &zeros, &lo, &hi);
    }
    Ok(rec)
}

/// Static background estimate from the trailing snapshots: per tensor cell,
/// the real and imaginary time series are lowpass-reconstructed and their
/// final values form the background.
///
/// Uses the last `T` snapshots of `history`, where `T` is the largest
/// multiple of `2^levels` available; fails if even one block does not fit.
pub fn wavelet_background(
    history: &[CsiSnapshot],
    kind: WaveletKind,
    levels: usize,
) -> Result<Array3<Complex64>> {
    if levels == 0 {
        return Err(AnnError::InvalidConfig(
            "wavelet denoising needs at least one level".into(),
        ));
    }
    let block = 1usize << levels;
    if history.len() < block {
        return Err(AnnError::InsufficientHistory(format!(
            "{} snapshots cannot fill one block of 2^{levels}",
            history.len()
        )));
    }
    let t = (history.len() / block) * block;
    let window = &history[history.len() - t..];
    let dim = window[0].csi.dim();
    for snap in window {
        if snap.csi.dim() != dim {
            return Err(AnnError::ShapeMismatch(
                "snapshots in a denoising window must share one tensor shape".into(),
            ));
        }
    }

    let mut re = vec![0.0f64; t];
    let mut im = vec![0.0f64; t];
    let mut bg = Array3::from_elem(dim, Complex64::new(0.0, 0.0));
    for ((i, j, c), cell) in bg.indexed_iter_mut() {
        for (s, snap) in window.iter().enumerate() {
            let z = snap.csi[(i, j, c)];
            re[s] = f64::from(z.re);
            im[s] = f64::from(z.im);
        }
        let re_smooth = denoise_lowpass(&re, kind, levels)?;
        let im_smooth = denoise_lowpass(&im, kind, levels)?;
        *cell = Complex64::new(re_smooth[t - 1], im_smooth[t - 1]);
    }
    Ok(bg)
}
