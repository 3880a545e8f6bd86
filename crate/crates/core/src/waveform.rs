//! OFDM waveform grids: carrier layout, derived radar resolutions and the
//! three built-in presets (WAIC band, 100 MHz Wi-Fi, 40 MHz Wi-Fi).

use serde::{Deserialize, Serialize};

use crate::{CoreError, Result, SPEED_OF_LIGHT};

/// Selector for the built-in waveform presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WaveformKind {
    Waic,
    Wifi100,
    Wifi40,
}

impl WaveformKind {
    pub const ALL: [WaveformKind; 3] = [
        WaveformKind::Waic,
        WaveformKind::Wifi100,
        WaveformKind::Wifi40,
    ];

    /// Materializes the preset grid for this kind.
    pub fn config(self) -> WaveformConfig {
        match self {
            WaveformKind::Waic => WaveformConfig::waic(),
            WaveformKind::Wifi100 => WaveformConfig::wifi100(),
            WaveformKind::Wifi40 => WaveformConfig::wifi40(),
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "waic" => Ok(WaveformKind::Waic),
            "wifi100" => Ok(WaveformKind::Wifi100),
            "wifi40" => Ok(WaveformKind::Wifi40),
            other => Err(CoreError::InvalidWaveform(format!(
                "unknown waveform `{other}` (expected waic, wifi100 or wifi40)"
            ))),
        }
    }
}

/// One OFDM sounding grid.
///
/// Subcarrier `k` sits at `f_center_hz + k * subcarrier_spacing_hz`; only the
/// indices in `active_subcarriers` carry measurements. `ifft_length` is the
/// full transform grid the active set embeds into, so `bandwidth_hz =
/// ifft_length * subcarrier_spacing_hz` always holds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveformConfig {
    pub name: String,
    pub f_center_hz: f64,
    pub bandwidth_hz: f64,
    pub subcarrier_spacing_hz: f64,
    /// Full OFDM grid length L.
    pub ifft_length: usize,
    /// Signed active indices, sorted ascending, each in [-L/2, L/2).
    pub active_subcarriers: Vec<i32>,
}

impl WaveformConfig {
    /// 4.3 GHz WAIC band sounding: 200 MHz over 200 active carriers.
    pub fn waic() -> Self {
        WaveformConfig {
            name: "WAIC".to_string(),
            f_center_hz: 4.3e9,
            bandwidth_hz: 200e6,
            subcarrier_spacing_hz: 1e6,
            ifft_length: 200,
            active_subcarriers: (-100..100).collect(),
        }
    }

    /// 2.45 GHz Wi-Fi-style sounding: 100 MHz over 200 active carriers.
    pub fn wifi100() -> Self {
        WaveformConfig {
            name: "WIFI100".to_string(),
            f_center_hz: 2.45e9,
            bandwidth_hz: 100e6,
            subcarrier_spacing_hz: 0.5e6,
            ifft_length: 200,
            active_subcarriers: (-100..100).collect(),
        }
    }

    /// 2.45 GHz 40 MHz Wi-Fi sounding: 114 active carriers of a 128 grid,
    /// with guard bands and a 3-carrier DC gap left silent.
    pub fn wifi40() -> Self {
        let active: Vec<i32> = (-58..=-2).chain(2..=58).collect();
        WaveformConfig {
            name: "WIFI40".to_string(),
            f_center_hz: 2.45e9,
            bandwidth_hz: 40e6,
            subcarrier_spacing_hz: 312.5e3,
            ifft_length: 128,
            active_subcarriers: active,
        }
    }

    /// Number of active subcarriers N (the tensor depth N_C).
    pub fn active_count(&self) -> usize {
        self.active_subcarriers.len()
    }

    /// Absolute frequency of every active subcarrier, in active-index order.
    pub fn subcarrier_frequencies(&self) -> Vec<f64> {
        self.active_subcarriers
            .iter()
            .map(|&k| self.f_center_hz + f64::from(k) * self.subcarrier_spacing_hz)
            .collect()
    }

    /// Range bin extent c / (2B).
    pub fn range_resolution_m(&self) -> f64 {
        SPEED_OF_LIGHT / (2.0 * self.bandwidth_hz)
    }

    /// Maximum unambiguous range c / (2Δf).
    pub fn max_unambiguous_range_m(&self) -> f64 {
        SPEED_OF_LIGHT / (2.0 * self.subcarrier_spacing_hz)
    }

    /// Wavelength at the center frequency.
    pub fn center_wavelength_m(&self) -> f64 {
        SPEED_OF_LIGHT / self.f_center_hz
    }

    /// Wavelength at the top band edge; antenna pitch is half of this so the
    /// visible region stays free of grating lobes.
    pub fn min_wavelength_m(&self) -> f64 {
        SPEED_OF_LIGHT / (self.f_center_hz + self.bandwidth_hz / 2.0)
    }

    /// Checks the grid invariants. Every constructor path through the crate
    /// calls this before a config is used.
    pub fn validate(&self) -> Result<()> {
        if !(self.f_center_hz.is_finite() && self.f_center_hz > 0.0) {
            return Err(CoreError::InvalidWaveform(
                "center frequency must be finite and positive".into(),
            ));
        }
        if !(self.subcarrier_spacing_hz.is_finite() && self.subcarrier_spacing_hz > 0.0) {
            return Err(CoreError::InvalidWaveform(
                "subcarrier spacing must be finite and positive".into(),
            ));
        }
        if self.ifft_length == 0 {
            return Err(CoreError::InvalidWaveform("ifft length must be >= 1".into()));
        }
        let grid_bw = self.ifft_length as f64 * self.subcarrier_spacing_hz;
        if ((self.bandwidth_hz - grid_bw) / grid_bw).abs() > 1e-9 {
            return Err(CoreError::InvalidWaveform(format!(
                "bandwidth {} Hz does not match grid L*df = {} Hz",
                self.bandwidth_hz, grid_bw
            )));
        }
        if self.active_subcarriers.is_empty() {
            return Err(CoreError::InvalidWaveform("no active subcarriers".into()));
        }
        if self.active_subcarriers.len() > self.ifft_length {
            return Err(CoreError::InvalidWaveform(
                "more active subcarriers than grid slots".into(),
            ));
        }
        let half = self.ifft_length as i64 / 2;
        for pair in self.active_subcarriers.windows(2) {
            if pair[0] >= pair[1] {
                return Err(CoreError::InvalidWaveform(
                    "active subcarriers must be sorted ascending without duplicates".into(),
                ));
            }
        }
        for &k in &self.active_subcarriers {
            let k = i64::from(k);
            if k < -half || k >= (self.ifft_length as i64 - half) {
                return Err(CoreError::InvalidWaveform(format!(
                    "active index {k} outside grid [-{half}, {})",
                    self.ifft_length as i64 - half
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        for kind in WaveformKind::ALL {
            kind.config().validate().unwrap();
        }
    }

    #[test]
    fn resolution_table_is_exact() {
        // The advertised bins/ranges are exact with the rounded propagation
        // constant; equality is intentional, not an approximate check.
        let waic = WaveformConfig::waic();
        assert_eq!(waic.range_resolution_m(), 0.75);
        assert_eq!(waic.max_unambiguous_range_m(), 150.0);

        let wifi100 = WaveformConfig::wifi100();
        assert_eq!(wifi100.range_resolution_m(), 1.5);
        assert_eq!(wifi100.max_unambiguous_range_m(), 300.0);

        let wifi40 = WaveformConfig::wifi40();
        assert_eq!(wifi40.range_resolution_m(), 3.75);
        assert_eq!(wifi40.max_unambiguous_range_m(), 480.0);
    }

    #[test]
    fn active_counts_match_presets() {
        assert_eq!(WaveformConfig::waic().active_count(), 200);
        assert_eq!(WaveformConfig::wifi100().active_count(), 200);
        assert_eq!(WaveformConfig::wifi40().active_count(), 114);
    }

    #[test]
    fn waic_band_edges_stay_inside_allocation() {
        let f = WaveformConfig::waic().subcarrier_frequencies();
        let lo = f.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = f.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!(lo >= 4.2e9, "lowest carrier {lo} below the band");
        assert!(hi <= 4.4e9, "highest carrier {hi} above the band");
    }

    #[test]
    fn wifi40_index_two_frequency() {
        let wf = WaveformConfig::wifi40();
        let freqs = wf.subcarrier_frequencies();
        let pos = wf.active_subcarriers.iter().position(|&k| k == 2).unwrap();
        assert_eq!(freqs[pos], 2.45e9 + 625e3);
    }

    #[test]
    fn wifi40_gap_structure() {
        let wf = WaveformConfig::wifi40();
        let f = wf.subcarrier_frequencies();
        let df = wf.subcarrier_spacing_hz;
        let mut wide_steps = 0;
        for pair in f.windows(2) {
            let step = pair[1] - pair[0];
            if (step - df).abs() < 1e-3 {
                continue;
            }
            // The only irregularity is the 3-index DC gap: a 4*df step.
            assert!((step - 4.0 * df).abs() < 1e-3, "unexpected step {step}");
            wide_steps += 1;
        }
        assert_eq!(wide_steps, 1);
    }

    #[test]
    fn frequencies_strictly_increasing() {
        for kind in WaveformKind::ALL {
            let f = kind.config().subcarrier_frequencies();
            assert!(f.windows(2).all(|p| p[0] < p[1]));
        }
    }

    #[test]
    fn rejects_malformed_grids() {
        let mut wf = WaveformConfig::waic();
        wf.active_subcarriers[0] = wf.active_subcarriers[1];
        assert!(wf.validate().is_err(), "duplicate indices must fail");

        let mut wf = WaveformConfig::waic();
        wf.active_subcarriers.push(100); // == L/2, aliases with -100
        assert!(wf.validate().is_err(), "out-of-grid index must fail");

        let mut wf = WaveformConfig::wifi40();
        wf.bandwidth_hz = 39e6;
        assert!(wf.validate().is_err(), "bandwidth/grid mismatch must fail");
    }

    #[test]
    fn serde_round_trip() {
        let wf = WaveformConfig::wifi40();
        let text = serde_json::to_string(&wf).unwrap();
        let back: WaveformConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(wf, back);
    }
}
