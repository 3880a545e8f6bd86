//! Serialization of localization results for downstream tooling.

use std::io::Write;

use crate::{FrameDetections, RangeAzimuthMap, Result};

/// Writes one JSON object per frame, newline delimited.
pub fn write_detections_jsonl<W: Write>(mut w: W, frames: &[FrameDetections]) -> Result<()> {
    for frame in frames {
        serde_json::to_writer(&mut w, frame)
            .map_err(std::io::Error::other)?;
        writeln!(w)?;
    }
    Ok(())
}

/// Writes a map as CSV: one row per range bin, one column per direction
/// bin, with the direction sines in the header row.
pub fn write_map_csv<W: Write>(mut w: W, map: &RangeAzimuthMap) -> Result<()> {
    write!(w, "range_m")?;
    for s in &map.sin_theta_axis {
        write!(w, ",{s}")?;
    }
    writeln!(w)?;
    for (p, row) in map.magnitudes.outer_iter().enumerate() {
        write!(w, "{}", map.range_axis_m[p])?;
        for m in row.iter() {
            write!(w, ",{m}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}
