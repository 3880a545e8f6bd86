//! Static-clutter estimation by sliding per-cell median.

use ndarray::Array3;
use num_complex::Complex64;

use csiloc_core::CsiSnapshot;

use crate::{RadarError, Result};

/// Per-cell median over the last `k` snapshots of `history`, real and
/// imaginary parts taken separately.
///
/// The median tracks the static scene while staying insensitive to a target
/// that occupies any one cell for under half the window, which is what makes
/// the residual after subtraction target-dominated.
pub fn estimate_background_median(
    history: &[CsiSnapshot],
    k: usize,
) -> Result<Array3<Complex64>> {
    if k == 0 {
        return Err(RadarError::InvalidParams(
            "median window must cover at least one snapshot".into(),
        ));
    }
    if history.len() < k {
        return Err(RadarError::InsufficientHistory(format!(
            "window of {k} requested, only {} snapshots given",
            history.len()
        )));
    }
    let window = &history[history.len() - k..];
    let dim = window[0].csi.dim();
    for snap in window {
        if snap.csi.dim() != dim {
            return Err(RadarError::ShapeMismatch(
                "snapshots in a median window must share one tensor shape".into(),
            ));
        }
    }

    let mut re = vec![0.0f32; k];
    let mut im = vec![0.0f32; k];
    let mut bg = Array3::from_elem(dim, Complex64::new(0.0, 0.0));
    for ((i, j, c), cell) in bg.indexed_iter_mut() {
        for (t, snap) in window.iter().enumerate() {
            let z = snap.csi[(i, j, c)];
            re[t] = z.re;
            im[t] = z.im;
        }
        *cell = Complex64::new(median(&mut re), median(&mut im));
    }
    Ok(bg)
}

/// Median of a scratch buffer; an even count averages the two middle values.
fn median(vals: &mut [f32]) -> f64 {
    let n = vals.len();
    vals.sort_unstable_by(f32::total_cmp);
    if n % 2 == 1 {
        f64::from(vals[n / 2])
    } else {
        (f64::from(vals[n / 2 - 1]) + f64::from(vals[n / 2])) / 2.0
    }
}

/// Residual tensor `snapshot - background` in double precision.
pub fn subtract_background(
    snapshot: &CsiSnapshot,
    background: &Array3<Complex64>,
) -> Result<Array3<Complex64>> {
    if snapshot.csi.dim() != background.dim() {
        return Err(RadarError::ShapeMismatch(format!(
            "snapshot is {:?}, background is {:?}",
            snapshot.csi.dim(),
            background.dim()
        )));
    }
    let mut out = background.mapv(|z| -z);
    for (cell, z) in out.iter_mut().zip(snapshot.csi.iter()) {
        *cell += Complex64::new(f64::from(z.re), f64::from(z.im));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array3;
    use num_complex::Complex32;

    fn snap_with(values: &[f32], t: f64) -> CsiSnapshot {
        // One value per cell of a (1, 1, n) tensor keeps medians inspectable.
        let n = values.len();
        let csi = Array3::from_shape_fn((1, 1, n), |(_, _, k)| {
            Complex32::new(values[k], -2.0 * values[k])
        });
        CsiSnapshot {
            timestamp: t,
            source_id: "ap0".into(),
            csi,
            ground_truth: None,
        }
    }

    /// Brute-force reference median: full sort of an owned copy.
    fn median_oracle(mut vals: Vec<f64>) -> f64 {
        vals.sort_by(f64::total_cmp);
        let n = vals.len();
        if n % 2 == 1 {
            vals[n / 2]
        } else {
            (vals[n / 2 - 1] + vals[n / 2]) / 2.0
        }
    }

    #[test]
    fn matches_sorting_oracle_per_cell() {
        let frames: Vec<CsiSnapshot> = [
            [3.0f32, -1.0, 0.5],
            [1.0, 4.0, 0.5],
            [2.0, -2.0, 0.75],
            [-5.0, 0.0, 0.25],
            [0.0, 1.0, 0.5],
        ]
        .iter()
        .enumerate()
        .map(|(i, vals)| snap_with(vals, i as f64))
        .collect();

        for k in [1usize, 2, 3, 4, 5] {
            let bg = estimate_background_median(&frames, k).unwrap();
            for c in 0..3 {
                let tail: Vec<f64> = frames[frames.len() - k..]
                    .iter()
                    .map(|s| f64::from(s.csi[(0, 0, c)].re))
                    .collect();
                assert_eq!(bg[(0, 0, c)].re, median_oracle(tail.clone()));
                assert_eq!(
                    bg[(0, 0, c)].im,
                    median_oracle(tail.iter().map(|v| -2.0 * v).collect())
                );
            }
        }
    }

    #[test]
    fn constant_history_is_reproduced_exactly() {
        let frames: Vec<CsiSnapshot> =
            (0..7).map(|i| snap_with(&[0.3, -1.7, 9.25], i as f64)).collect();
        let bg = estimate_background_median(&frames, 7).unwrap();
        assert_eq!(bg[(0, 0, 0)], Complex64::new(0.3f32 as f64, -0.6f32 as f64));
        assert_eq!(bg[(0, 0, 2)], Complex64::new(9.25, -18.5));
    }

    #[test]
    fn subtraction_isolates_the_transient() {
        let mut frames: Vec<CsiSnapshot> =
            (0..9).map(|i| snap_with(&[1.0, 2.0, 3.0], i as f64)).collect();
        // A short-lived disturbance in the last frame must survive in the
        // residual while the static part cancels.
        frames[8].csi[(0, 0, 1)] += Complex32::new(0.5, 0.0);
        let bg = estimate_background_median(&frames, 9).unwrap();
        let residual = subtract_background(&frames[8], &bg).unwrap();
        assert_eq!(residual[(0, 0, 0)], Complex64::new(0.0, 0.0));
        assert_eq!(residual[(0, 0, 1)], Complex64::new(0.5, 0.0));
        assert_eq!(residual[(0, 0, 2)], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn window_errors() {
        let frames: Vec<CsiSnapshot> = (0..3).map(|i| snap_with(&[1.0], i as f64)).collect();
        assert!(matches!(
            estimate_background_median(&frames, 0),
            Err(RadarError::InvalidParams(_))
        ));
        assert!(matches!(
            estimate_background_median(&frames, 4),
            Err(RadarError::InsufficientHistory(_))
        ));
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let a = snap_with(&[1.0, 2.0], 0.0);
        let b = snap_with(&[1.0, 2.0, 3.0], 1.0);
        assert!(estimate_background_median(&[a.clone(), b], 2).is_err());

        let bg = Array3::from_elem((1, 1, 5), Complex64::new(0.0, 0.0));
        assert!(subtract_background(&a, &bg).is_err());
    }
}
