//! Frame-by-frame localization over a recorded dataset.

use serde::{Deserialize, Serialize};

use csiloc_core::Dataset;

use crate::{
    collapse_to_virtual, detect::find_candidates, detect::inherit_tracks,
    estimate_background_median, range_azimuth_map, subtract_background, Detection, RadarParams,
    Result, VirtualArray,
};

/// Localization output for one snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameDetections {
    pub timestamp: f64,
    /// False while the sliding background window is still filling up; early
    /// frames subtract a shorter median and are less trustworthy.
    pub warmed_up: bool,
    pub detections: Vec<Detection>,
}

/// Runs the classical chain over every snapshot of `dataset`: sliding-median
/// background subtraction, virtual-aperture collapse, range-azimuth imaging
/// and peak detection, followed by a gating pass that threads track
/// identities through time.
///
/// Frame `i` uses the trailing window `[i + 1 - k, i]` (shortened at the
/// start of the recording), so the output for a frame never depends on later
/// frames. Per-frame work runs in parallel when the `parallel` feature is
/// enabled; results are identical either way.
pub fn radar_localize(dataset: &Dataset, params: &RadarParams) -> Result<Vec<FrameDetections>> {
    let candidates = frame_candidates(dataset, params, Exec::Auto)?;
    Ok(thread_tracks(dataset, candidates, params))
}

/// Sequential twin of [`radar_localize`].
pub fn radar_localize_seq(
    dataset: &Dataset,
    params: &RadarParams,
) -> Result<Vec<FrameDetections>> {
    let candidates = frame_candidates(dataset, params, Exec::Sequential)?;
    Ok(thread_tracks(dataset, candidates, params))
}

#[derive(Clone, Copy)]
enum Exec {
    Auto,
    Sequential,
}

fn frame_candidates(
    dataset: &Dataset,
    params: &RadarParams,
    exec: Exec,
) -> Result<Vec<Vec<Detection>>> {
    params.validate()?;
    dataset.validate()?;
    let va = VirtualArray::new(&dataset.array)?;

    let one_frame = |i: usize| -> Result<Vec<Detection>> {
        let k_eff = params.k_background.min(i + 1);
        let history = &dataset.snapshots[i + 1 - k_eff..=i];
        let background = estimate_background_median(history, k_eff)?;
        let residual = subtract_background(&dataset.snapshots[i], &background)?;
        let folded = collapse_to_virtual(&residual, &va)?;
        let map = range_azimuth_map(&folded, &va, &dataset.waveform, params.zero_pad)?;
        Ok(find_candidates(&map, params))
    };

    match exec {
        Exec::Sequential => (0..dataset.len()).map(one_frame).collect(),
        Exec::Auto => {
            #[cfg(feature = "parallel")]
            {
                use rayon::prelude::*;
                (0..dataset.len()).into_par_iter().map(one_frame).collect()
            }
            #[cfg(not(feature = "parallel"))]
            {
                (0..dataset.len()).map(one_frame).collect()
            }
        }
    }
}

/// Sequential gating pass: inherit identities from the previous frame, then
/// mint fresh ones for whoever is left.
fn thread_tracks(
    dataset: &Dataset,
    candidates: Vec<Vec<Detection>>,
    params: &RadarParams,
) -> Vec<FrameDetections> {
    let mut next_id = 0u64;
    let mut out: Vec<FrameDetections> = Vec::with_capacity(candidates.len());
    for (i, mut dets) in candidates.into_iter().enumerate() {
        if let Some(prev) = out.last() {
            inherit_tracks(&mut dets, &prev.detections, params.gate_radius_m);
        }
        for det in dets.iter_mut() {
            if det.track_id.is_none() {
                det.track_id = Some(next_id);
                next_id += 1;
            }
        }
        out.push(FrameDetections {
            timestamp: dataset.snapshots[i].timestamp,
            warmed_up: i + 1 >= params.k_background,
            detections: dets,
        });
    }
    out
}
