//! CSI snapshot and dataset containers.

use ndarray::Array3;
use num_complex::Complex32;

use crate::{AntennaArray, CoreError, Point2, Result, WaveformConfig};

/// One CSI measurement: the complex channel matrix of every transmit/receive
/// element pair over all active subcarriers, captured at one instant.
///
/// Tensor layout is `[tx, rx, subcarrier]` with the subcarrier axis in
/// active-index order. Values are stored single-precision, matching the wire
/// format, so file round trips are bit exact.
#[derive(Debug, Clone, PartialEq)]
pub struct CsiSnapshot {
    /// Capture time in seconds since the start of the recording.
    pub timestamp: f64,
    /// Identifier of the emitting access point.
    pub source_id: String,
    /// Complex CSI tensor, shape `(n_tx, n_rx, n_c)`.
    pub csi: Array3<Complex32>,
    /// True target positions when the snapshot comes from the simulator;
    /// `None` for unlabeled captures.
    pub ground_truth: Option<Vec<Point2>>,
}

impl CsiSnapshot {
    pub fn n_tx(&self) -> usize {
        self.csi.shape()[0]
    }

    pub fn n_rx(&self) -> usize {
        self.csi.shape()[1]
    }

    pub fn n_c(&self) -> usize {
        self.csi.shape()[2]
    }

    pub fn validate(&self) -> Result<()> {
        if !self.timestamp.is_finite() {
            return Err(CoreError::InvalidArgument("timestamp must be finite".into()));
        }
        if self.csi.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(CoreError::InvalidArgument("CSI entries must be finite".into()));
        }
        if let Some(gt) = &self.ground_truth {
            if gt.iter().any(|p| !(p[0].is_finite() && p[1].is_finite())) {
                return Err(CoreError::InvalidArgument(
                    "ground-truth positions must be finite".into(),
                ));
            }
        }
        Ok(())
    }
}

/// A recorded sequence of snapshots plus the context needed to interpret
/// them: the sounding waveform, the array geometry and the maximum number of
/// simultaneous targets the recording was set up for.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub waveform: WaveformConfig,
    pub array: AntennaArray,
    /// Upper bound on simultaneous targets (the localizer head size).
    pub n_p_max: usize,
    pub snapshots: Vec<CsiSnapshot>,
}

impl Dataset {
    pub fn new(
        waveform: WaveformConfig,
        array: AntennaArray,
        n_p_max: usize,
        snapshots: Vec<CsiSnapshot>,
    ) -> Result<Self> {
        let ds = Dataset {
            waveform,
            array,
            n_p_max,
            snapshots,
        };
        ds.validate()?;
        Ok(ds)
    }

    pub fn validate(&self) -> Result<()> {
        self.waveform.validate()?;
        self.array.validate()?;
        let m = self.array.len();
        let n_c = self.waveform.active_count();
        let mut last_per_source: std::collections::HashMap<&str, f64> =
            std::collections::HashMap::new();
        for (i, snap) in self.snapshots.iter().enumerate() {
            snap.validate()?;
            if snap.csi.shape() != [m, m, n_c] {
                return Err(CoreError::ShapeMismatch(format!(
                    "snapshot {i} has shape {:?}, dataset expects ({m}, {m}, {n_c})",
                    snap.csi.shape()
                )));
            }
            if let Some(gt) = &snap.ground_truth {
                if gt.len() > self.n_p_max {
                    return Err(CoreError::InvalidArgument(format!(
                        "snapshot {i} lists {} targets, dataset allows {}",
                        gt.len(),
                        self.n_p_max
                    )));
                }
            }
            if let Some(&prev) = last_per_source.get(snap.source_id.as_str()) {
                if snap.timestamp <= prev {
                    return Err(CoreError::InvalidArgument(format!(
                        "timestamps of source `{}` are not strictly increasing at snapshot {i}",
                        snap.source_id
                    )));
                }
            }
            last_per_source.insert(snap.source_id.as_str(), snap.timestamp);
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }
}
