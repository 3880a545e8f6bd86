//! Dataset wire format.
//!
//! A dataset file is a UTF-8 JSON header line followed, per snapshot, by one
//! JSON metadata line and a raw little-endian binary block of
//! `n_tx * n_rx * n_c` complex values (f32 real, f32 imaginary), laid out
//! row-major over `(tx, rx, subcarrier)`. Tensors are stored single-precision
//! end to end, so write→read→write round trips are byte identical.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::Array3;
use num_complex::Complex32;
use serde::{Deserialize, Serialize};

use crate::{
    AntennaArray, CoreError, CsiSnapshot, Dataset, Point2, Result, WaveformConfig,
};

const FORMAT_TAG: &str = "csiloc.dataset";
const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct DatasetHeader {
    format: String,
    version: u32,
    waveform: WaveformConfig,
    n_tx: usize,
    n_rx: usize,
    /// Active subcarrier count; must agree with the waveform's active list.
    n_c: usize,
    n_p_max: usize,
    array_positions: Vec<Point2>,
    snapshot_count: usize,
    /// Free-form provenance (seed, config hash). Preserved on read.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    meta: Option<serde_json::Value>,
}

#[derive(Debug, Serialize, Deserialize)]
struct SnapshotHeader {
    timestamp: f64,
    source_id: String,
    ground_truth: Option<Vec<Point2>>,
}

/// Serializes `dataset` to `writer`. `meta` is embedded verbatim in the
/// header (the CLI stores the RNG seed and a config hash there).
pub fn write_dataset<W: Write>(
    writer: W,
    dataset: &Dataset,
    meta: Option<serde_json::Value>,
) -> Result<()> {
    dataset.validate()?;
    let mut w = BufWriter::new(writer);
    let m = dataset.array.len();
    let header = DatasetHeader {
        format: FORMAT_TAG.to_string(),
        version: FORMAT_VERSION,
        waveform: dataset.waveform.clone(),
        n_tx: m,
        n_rx: m,
        n_c: dataset.waveform.active_count(),
        n_p_max: dataset.n_p_max,
        array_positions: dataset.array.positions.clone(),
        snapshot_count: dataset.snapshots.len(),
        meta,
    };
    serde_json::to_writer(&mut w, &header).map_err(to_io)?;
    w.write_all(b"\n")?;

    let mut block = Vec::with_capacity(m * m * header.n_c * 8);
    for snap in &dataset.snapshots {
        let line = SnapshotHeader {
            timestamp: snap.timestamp,
            source_id: snap.source_id.clone(),
            ground_truth: snap.ground_truth.clone(),
        };
        serde_json::to_writer(&mut w, &line).map_err(to_io)?;
        w.write_all(b"\n")?;

        block.clear();
        for z in snap.csi.iter() {
            block.extend_from_slice(&z.re.to_le_bytes());
            block.extend_from_slice(&z.im.to_le_bytes());
        }
        w.write_all(&block)?;
    }
    w.flush()?;
    Ok(())
}

/// Convenience wrapper writing to a file path.
pub fn write_dataset_file<P: AsRef<Path>>(
    path: P,
    dataset: &Dataset,
    meta: Option<serde_json::Value>,
) -> Result<()> {
    write_dataset(File::create(path)?, dataset, meta)
}

/// Parses a dataset plus the optional provenance object from its header.
pub fn read_dataset<R: Read>(reader: R) -> Result<(Dataset, Option<serde_json::Value>)> {
    let mut r = BufReader::new(reader);

    let mut header_line = Vec::new();
    if r.read_until(b'\n', &mut header_line)? == 0 {
        return Err(CoreError::MalformedHeader("empty file".into()));
    }
    let header_text = std::str::from_utf8(&header_line)
        .map_err(|_| CoreError::MalformedHeader("header line is not UTF-8".into()))?;
    let header: DatasetHeader = serde_json::from_str(header_text.trim_end())
        .map_err(|e| CoreError::MalformedHeader(e.to_string()))?;
    if header.format != FORMAT_TAG {
        return Err(CoreError::MalformedHeader(format!(
            "unexpected format tag `{}`",
            header.format
        )));
    }
    if header.version != FORMAT_VERSION {
        return Err(CoreError::MalformedHeader(format!(
            "unsupported version {}",
            header.version
        )));
    }
    header
        .waveform
        .validate()
        .map_err(|e| CoreError::MalformedHeader(e.to_string()))?;
    if header.n_c != header.waveform.active_count() {
        return Err(CoreError::ShapeMismatch(format!(
            "header n_c = {} disagrees with {} active subcarriers",
            header.n_c,
            header.waveform.active_count()
        )));
    }
    if header.n_tx != header.array_positions.len() || header.n_rx != header.array_positions.len() {
        return Err(CoreError::ShapeMismatch(format!(
            "header n_tx/n_rx = {}/{} disagree with {} array elements",
            header.n_tx,
            header.n_rx,
            header.array_positions.len()
        )));
    }

    let cell_count = header.n_tx * header.n_rx * header.n_c;
    let block_len = cell_count * 8;
    let mut block = vec![0u8; block_len];
    let mut snapshots = Vec::with_capacity(header.snapshot_count);

    for index in 0..header.snapshot_count {
        let mut line = Vec::new();
        if r.read_until(b'\n', &mut line)? == 0 {
            return Err(CoreError::MalformedRecord {
                index,
                reason: "file ends before snapshot metadata".into(),
            });
        }
        // A metadata line that fails to parse mid-file almost always means the
        // payload blocks are sized differently from the header's tensor shape,
        // shifting every later record boundary; report it as such.
        let boundary_err = || {
            CoreError::ShapeMismatch(format!(
                "snapshot {index} metadata line does not parse; payload block size \
                 disagrees with the header tensor shape"
            ))
        };
        let snap_header: SnapshotHeader = std::str::from_utf8(&line)
            .ok()
            .and_then(|text| serde_json::from_str(text.trim_end()).ok())
            .ok_or_else(boundary_err)?;

        let mut got = 0usize;
        while got < block_len {
            let n = r.read(&mut block[got..])?;
            if n == 0 {
                return Err(CoreError::TruncatedPayload {
                    index,
                    expected: block_len,
                    got,
                });
            }
            got += n;
        }
        let mut values = Vec::with_capacity(cell_count);
        for cell in block.chunks_exact(8) {
            let re = f32::from_le_bytes([cell[0], cell[1], cell[2], cell[3]]);
            let im = f32::from_le_bytes([cell[4], cell[5], cell[6], cell[7]]);
            values.push(Complex32::new(re, im));
        }
        let csi = Array3::from_shape_vec((header.n_tx, header.n_rx, header.n_c), values)
            .map_err(|e| CoreError::ShapeMismatch(e.to_string()))?;
        snapshots.push(CsiSnapshot {
            timestamp: snap_header.timestamp,
            source_id: snap_header.source_id,
            csi,
            ground_truth: snap_header.ground_truth,
        });
    }

    let dataset = Dataset::new(
        header.waveform,
        AntennaArray {
            positions: header.array_positions,
        },
        header.n_p_max,
        snapshots,
    )?;
    Ok((dataset, header.meta))
}

/// Convenience wrapper reading from a file path.
pub fn read_dataset_file<P: AsRef<Path>>(path: P) -> Result<(Dataset, Option<serde_json::Value>)> {
    read_dataset(File::open(path)?)
}

fn to_io(e: serde_json::Error) -> CoreError {
    CoreError::Io(std::io::Error::new(std::io::ErrorKind::InvalidData, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::WaveformConfig;

    fn sample_dataset(snapshot_count: usize) -> Dataset {
        let wf = WaveformConfig::wifi40();
        let array = AntennaArray::for_waveform(&wf, 4).unwrap();
        let n_c = wf.active_count();
        let snapshots = (0..snapshot_count)
            .map(|i| CsiSnapshot {
                timestamp: i as f64 * 0.1,
                source_id: "ap0".into(),
                csi: Array3::from_shape_fn((4, 4, n_c), |(a, b, c)| {
                    Complex32::new(
                        (a * 31 + b * 7 + c + i) as f32 * 0.01,
                        (c as f32 - b as f32) * 0.125,
                    )
                }),
                ground_truth: if i % 2 == 0 {
                    Some(vec![[0.1 * i as f64, 2.0]])
                } else {
                    Some(vec![])
                },
            })
            .collect();
        Dataset::new(wf, array, 1, snapshots).unwrap()
    }

    #[test]
    fn round_trip_is_byte_identical() {
        let ds = sample_dataset(3);
        let mut bytes = Vec::new();
        write_dataset(&mut bytes, &ds, None).unwrap();

        let (back, meta) = read_dataset(bytes.as_slice()).unwrap();
        assert!(meta.is_none());
        assert_eq!(back, ds);

        let mut bytes2 = Vec::new();
        write_dataset(&mut bytes2, &back, None).unwrap();
        assert_eq!(bytes, bytes2);
    }

    #[test]
    fn meta_survives_round_trip() {
        let ds = sample_dataset(1);
        let meta = serde_json::json!({"seed": 7, "config_hash": "abc123"});
        let mut bytes = Vec::new();
        write_dataset(&mut bytes, &ds, Some(meta.clone())).unwrap();
        let (_, back) = read_dataset(bytes.as_slice()).unwrap();
        assert_eq!(back, Some(meta));
    }

    #[test]
    fn empty_dataset_is_valid() {
        let ds = sample_dataset(0);
        let mut bytes = Vec::new();
        write_dataset(&mut bytes, &ds, None).unwrap();
        let (back, _) = read_dataset(bytes.as_slice()).unwrap();
        assert!(back.is_empty());
    }

    #[test]
    fn malformed_header_is_distinct() {
        let err = read_dataset(&b"{ not json\n"[..]).unwrap_err();
        assert!(matches!(err, CoreError::MalformedHeader(_)), "{err:?}");
    }

    #[test]
    fn truncated_payload_is_distinct() {
        let ds = sample_dataset(1);
        let mut bytes = Vec::new();
        write_dataset(&mut bytes, &ds, None).unwrap();
        bytes.truncate(bytes.len() - 32);
        let err = read_dataset(bytes.as_slice()).unwrap_err();
        assert!(matches!(err, CoreError::TruncatedPayload { .. }), "{err:?}");
    }

    #[test]
    fn payload_shape_disagreement_is_distinct() {
        // Write a two-snapshot WIFI40 dataset, then forge the header to claim
        // a 200-carrier grid. The oversized first read eats into the second
        // metadata line, which must surface as a shape mismatch.
        let ds = sample_dataset(2);
        let mut bytes = Vec::new();
        write_dataset(&mut bytes, &ds, None).unwrap();

        let newline = bytes.iter().position(|&b| b == b'\n').unwrap();
        let header = String::from_utf8(bytes[..newline].to_vec()).unwrap();
        let mut v: serde_json::Value = serde_json::from_str(&header).unwrap();
        let wide: Vec<i32> = (-100..100).collect();
        v["waveform"]["active_subcarriers"] = serde_json::json!(wide);
        v["waveform"]["bandwidth_hz"] = serde_json::json!(62.5e6);
        v["waveform"]["ifft_length"] = serde_json::json!(200);
        v["n_c"] = serde_json::json!(200);
        let mut forged = serde_json::to_vec(&v).unwrap();
        forged.extend_from_slice(&bytes[newline..]);

        let err = read_dataset(forged.as_slice()).unwrap_err();
        assert!(
            matches!(err, CoreError::ShapeMismatch(_) | CoreError::TruncatedPayload { .. }),
            "{err:?}"
        );
    }

    #[test]
    fn header_n_c_disagreement_is_shape_mismatch() {
        let ds = sample_dataset(1);
        let mut bytes = Vec::new();
        write_dataset(&mut bytes, &ds, None).unwrap();
        let newline = bytes.iter().position(|&b| b == b'\n').unwrap();
        let mut v: serde_json::Value =
            serde_json::from_slice(&bytes[..newline]).unwrap();
        v["n_c"] = serde_json::json!(200);
        let mut forged = serde_json::to_vec(&v).unwrap();
        forged.extend_from_slice(&bytes[newline..]);
        let err = read_dataset(forged.as_slice()).unwrap_err();
        assert!(matches!(err, CoreError::ShapeMismatch(_)), "{err:?}");
    }
}
