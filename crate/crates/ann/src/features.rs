//! Flattening CSI residuals into standardized feature vectors.

use ndarray::Array3;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{AnnError, Result};

/// How a complex residual cell is encoded as two real features.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FeatureMode {
    /// Real and imaginary part. Smooth everywhere, the default.
    #[default]
    ReIm,
    /// Magnitude and principal-value phase. Phase wraps, so this mode is
    /// mainly useful for experiments.
    MagPhase,
}

/// Flattens a residual tensor in row-major `(tx, rx, subcarrier)` order,
/// two features per cell.
pub fn extract_features(residual: &Array3<Complex64>, mode: FeatureMode) -> Vec<f64> {
    let mut out = Vec::with_capacity(residual.len() * 2);
    for z in residual.iter() {
        match mode {
            FeatureMode::ReIm => {
                out.push(z.re);
                out.push(z.im);
            }
            FeatureMode::MagPhase => {
                out.push(z.norm());
                out.push(z.arg());
            }
        }
    }
    out
}

/// Per-feature standardization parameters, fitted on the training split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

/// A feature whose spread is below this is considered constant and left
/// unscaled to avoid amplifying numerical dust.
const MIN_STD: f64 = 1e-12;

impl FeatureStats {
    /// Population mean and standard deviation per feature column.
    pub fn fit(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(AnnError::InvalidData("cannot fit statistics on no rows".into()));
        }
        let dim = rows[0].len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(AnnError::ShapeMismatch("feature rows differ in length".into()));
        }
        let n = rows.len() as f64;
        let mut mean = vec![0.0; dim];
        for row in rows {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; dim];
        for row in rows {
            for ((s, v), m) in var.iter_mut().zip(row).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let std = var
            .into_iter()
            .map(|s| {
                let sd = (s / n).sqrt();
                if sd < MIN_STD {
                    1.0
                } else {
                    sd
                }
            })
            .collect();
        Ok(FeatureStats { mean, std })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Standardizes one row in place.
    pub fn apply(&self, row: &mut [f64]) -> Result<()> {
        if row.len() != self.dim() {
            return Err(AnnError::ShapeMismatch(format!(
                "row has {} features, statistics expect {}",
                row.len(),
                self.dim()
            )));
        }
        for ((v, m), s) in row.iter_mut().zip(&self.mean).zip(&self.std) {
            *v = (*v - m) / s;
        }
        Ok(())
    }
}
