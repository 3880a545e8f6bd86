//! Timestamp alignment of snapshot streams from multiple access points.

use std::collections::VecDeque;

use crate::{CoreError, CsiSnapshot, Result};

/// Outcome of [`align_snapshots`]: complete cross-source groups plus the
/// number of snapshots that could not be grouped.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignResult {
    /// Each group holds exactly one snapshot per input stream, sorted by
    /// source id; timestamps within a group differ pairwise by at most the
    /// tolerance.
    pub groups: Vec<Vec<CsiSnapshot>>,
    pub dropped: usize,
}

/// Groups concurrently captured snapshots across source streams.
///
/// Greedy sweep over the globally earliest unconsumed snapshot `s`: if every
/// stream's oldest unconsumed snapshot lies within `[t(s), t(s) + tolerance]`
/// a group is formed from those heads, otherwise `s` alone is dropped. Since
/// all members of a group share that window, their timestamps pairwise differ
/// by at most the tolerance. The result does not depend on the order of the
/// input streams.
///
/// Each stream must be sorted by timestamp (datasets always are).
pub fn align_snapshots(
    streams: Vec<Vec<CsiSnapshot>>,
    tolerance_s: f64,
) -> Result<AlignResult> {
    if !(tolerance_s.is_finite() && tolerance_s >= 0.0) {
        return Err(CoreError::InvalidArgument(
            "alignment tolerance must be finite and non-negative".into(),
        ));
    }
    for stream in &streams {
        for pair in stream.windows(2) {
            if pair[0].timestamp > pair[1].timestamp {
                return Err(CoreError::InvalidArgument(
                    "streams must be sorted by timestamp".into(),
                ));
            }
        }
    }

    let mut queues: Vec<VecDeque<CsiSnapshot>> =
        streams.into_iter().map(VecDeque::from).collect();
    let mut groups = Vec::new();
    let mut dropped = 0usize;

    loop {
        // Earliest unconsumed snapshot across all streams; ties broken by
        // source id so the sweep is independent of stream order.
        let earliest = queues
            .iter()
            .enumerate()
            .filter_map(|(idx, q)| q.front().map(|s| (idx, s.timestamp, &s.source_id)))
            .min_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.2.cmp(b.2)));
        let Some((lead_idx, t0, _)) = earliest else {
            break;
        };

        let complete = queues
            .iter()
            .all(|q| matches!(q.front(), Some(s) if s.timestamp - t0 <= tolerance_s));
        if complete {
            let mut group: Vec<CsiSnapshot> = queues
                .iter_mut()
                .map(|q| q.pop_front().expect("checked non-empty"))
                .collect();
            group.sort_by(|a, b| a.source_id.cmp(&b.source_id));
            groups.push(group);
        } else {
            queues[lead_idx].pop_front();
            dropped += 1;
        }
    }

    Ok(AlignResult { groups, dropped })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array3;
    use num_complex::Complex32;

    fn snap(t: f64, source: &str) -> CsiSnapshot {
        CsiSnapshot {
            timestamp: t,
            source_id: source.to_string(),
            csi: Array3::from_elem((1, 1, 2), Complex32::new(1.0, 0.0)),
            ground_truth: None,
        }
    }

    fn stream(source: &str, times: &[f64]) -> Vec<CsiSnapshot> {
        times.iter().map(|&t| snap(t, source)).collect()
    }

    #[test]
    fn pairs_up_close_timestamps() {
        let res = align_snapshots(
            vec![stream("a", &[0.00, 0.10]), stream("b", &[0.001, 0.102])],
            0.005,
        )
        .unwrap();
        assert_eq!(res.groups.len(), 2);
        assert_eq!(res.dropped, 0);
        assert_eq!(res.groups[0][0].source_id, "a");
        assert_eq!(res.groups[0][1].source_id, "b");
    }

    #[test]
    fn single_stream_yields_singleton_groups() {
        let res = align_snapshots(vec![stream("a", &[0.0, 0.1, 0.2])], 0.001).unwrap();
        assert_eq!(res.groups.len(), 3);
        assert!(res.groups.iter().all(|g| g.len() == 1));
        assert_eq!(res.dropped, 0);
    }

    #[test]
    fn far_apart_snapshots_are_dropped() {
        let res =
            align_snapshots(vec![stream("a", &[0.00]), stream("b", &[0.02])], 0.005).unwrap();
        assert!(res.groups.is_empty());
        assert_eq!(res.dropped, 2);
    }

    #[test]
    fn negative_tolerance_rejected() {
        assert!(align_snapshots(vec![stream("a", &[0.0])], -1.0).is_err());
    }

    #[test]
    fn unsorted_stream_rejected() {
        assert!(align_snapshots(vec![stream("a", &[0.1, 0.0])], 0.01).is_err());
    }

    #[test]
    fn partial_overlap_drops_leaders() {
        // Stream a starts 1 s before b; its early snapshots have no partner.
        let res = align_snapshots(
            vec![stream("a", &[0.0, 0.5, 1.0, 1.5]), stream("b", &[1.001, 1.502])],
            0.01,
        )
        .unwrap();
        assert_eq!(res.groups.len(), 2);
        assert_eq!(res.dropped, 2);
    }
}
