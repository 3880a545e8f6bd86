//! Simulator knobs.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Result, SimError};

/// Channel/noise configuration for one simulation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    /// Per-subcarrier average signal-to-noise ratio in dB; `None` disables
    /// noise entirely. Noise power is scaled from the mean power of the
    /// noiseless tensor, so the ratio holds regardless of scene strength.
    pub snr_db: Option<f64>,
    /// Seed of the noise generator. Snapshot `i` of a trajectory draws from
    /// stream `i` of this seed, which makes results independent of the order
    /// in which frames are synthesized.
    pub rng_seed: u64,
    /// Adds the static transmitter→receiver leakage term between element
    /// pairs.
    pub include_direct_coupling: bool,
    /// Linear amplitude of the inter-element coupling at 1 m separation
    /// (self-leakage uses this value flat). The default puts adjacent
    /// elements of a half-wavelength array near −22 dB isolation; much
    /// stronger and the leakage dominates the tensor's mean power, which
    /// drags the SNR-referenced noise floor up over the person echoes.
    pub coupling_gain: f64,
    /// Transmit power; a global amplitude factor of the noiseless tensor.
    pub tx_power_dbm: f64,
    /// Per-element complex gain of the RF chains, applied at both ends of
    /// every path (cell `(i, j)` picks up `g_i · g_j`). Real front ends are
    /// never perfectly matched; a fixed draw here models that uncalibrated
    /// hardware. `None` means ideal unit gains; a list must cover every
    /// element of the array being simulated.
    pub element_gains: Option<Vec<Complex64>>,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            snr_db: Some(20.0),
            rng_seed: 0,
            include_direct_coupling: true,
            coupling_gain: 0.005,
            tx_power_dbm: 12.0,
            element_gains: None,
        }
    }
}

impl SimConfig {
    /// Copy with noise disabled; handy for reference tensors.
    pub fn noiseless(&self) -> Self {
        SimConfig {
            snr_db: None,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(snr) = self.snr_db {
            if !snr.is_finite() {
                return Err(SimError::InvalidConfig("snr_db must be finite".into()));
            }
        }
        if !(self.coupling_gain.is_finite() && self.coupling_gain >= 0.0) {
            return Err(SimError::InvalidConfig(
                "coupling_gain must be finite and non-negative".into(),
            ));
        }
        if !self.tx_power_dbm.is_finite() {
            return Err(SimError::InvalidConfig("tx_power_dbm must be finite".into()));
        }
        if let Some(gains) = &self.element_gains {
            if gains.is_empty() {
                return Err(SimError::InvalidConfig(
                    "element_gains must cover at least one element".into(),
                ));
            }
            for (i, g) in gains.iter().enumerate() {
                if !(g.re.is_finite() && g.im.is_finite()) || g.norm_sqr() == 0.0 {
                    return Err(SimError::InvalidConfig(format!(
                        "element gain {i} must be finite and nonzero"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Linear amplitude factor implied by the transmit power.
    pub fn tx_amplitude(&self) -> f64 {
        10f64.powf(self.tx_power_dbm / 20.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_validates() {
        SimConfig::default().validate().unwrap();
    }

    #[test]
    fn rejects_bad_values() {
        let cfg = SimConfig {
            snr_db: Some(f64::NAN),
            ..SimConfig::default()
        };
        assert!(cfg.validate().is_err());

        let cfg = SimConfig {
            coupling_gain: -0.1,
            ..SimConfig::default()
        };
        assert!(cfg.validate().is_err());

        let cfg = SimConfig {
            element_gains: Some(vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]),
            ..SimConfig::default()
        };
        assert!(cfg.validate().is_err());

        let cfg = SimConfig {
            element_gains: Some(vec![]),
            ..SimConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn noiseless_copy_only_touches_noise() {
        let cfg = SimConfig {
            rng_seed: 9,
            ..SimConfig::default()
        };
        let quiet = cfg.noiseless();
        assert_eq!(quiet.snr_db, None);
        assert_eq!(quiet.rng_seed, 9);
        assert_eq!(quiet.include_direct_coupling, cfg.include_direct_coupling);
    }
}
