//! Property tests for the foundation types: alignment must not care about
//! stream order, and the wire format must round-trip arbitrary datasets.

use ndarray::Array3;
use num_complex::Complex32;
use proptest::prelude::*;

use csiloc_core::{
    align_snapshots, io, AntennaArray, CsiSnapshot, Dataset, WaveformConfig,
};

fn snap(t: f64, source: &str, m: usize, n_c: usize, fill: f32) -> CsiSnapshot {
    CsiSnapshot {
        timestamp: t,
        source_id: source.to_string(),
        csi: Array3::from_shape_fn((m, m, n_c), |(i, j, k)| {
            Complex32::new(fill + (i * 5 + j) as f32, k as f32 * 0.5 - fill)
        }),
        ground_truth: None,
    }
}

fn sorted_times() -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(0.0f64..10.0, 0..8).prop_map(|mut v| {
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn alignment_ignores_stream_order(
        times_a in sorted_times(),
        times_b in sorted_times(),
        times_c in sorted_times(),
        tol in 0.0f64..0.5,
    ) {
        let make = |name: &str, times: &[f64]| -> Vec<CsiSnapshot> {
            times.iter().map(|&t| snap(t, name, 1, 2, 0.0)).collect()
        };
        let forward = align_snapshots(
            vec![make("a", &times_a), make("b", &times_b), make("c", &times_c)],
            tol,
        ).unwrap();
        let reversed = align_snapshots(
            vec![make("c", &times_c), make("b", &times_b), make("a", &times_a)],
            tol,
        ).unwrap();

        prop_assert_eq!(forward.dropped, reversed.dropped);
        prop_assert_eq!(forward.groups.len(), reversed.groups.len());
        for (g1, g2) in forward.groups.iter().zip(reversed.groups.iter()) {
            let key1: Vec<_> = g1.iter().map(|s| (s.source_id.clone(), s.timestamp.to_bits())).collect();
            let key2: Vec<_> = g2.iter().map(|s| (s.source_id.clone(), s.timestamp.to_bits())).collect();
            prop_assert_eq!(key1, key2);
        }
    }

    #[test]
    fn aligned_groups_respect_tolerance(
        times_a in sorted_times(),
        times_b in sorted_times(),
        tol in 0.0f64..0.5,
    ) {
        let make = |name: &str, times: &[f64]| -> Vec<CsiSnapshot> {
            times.iter().map(|&t| snap(t, name, 1, 2, 0.0)).collect()
        };
        let total = times_a.len() + times_b.len();
        let res = align_snapshots(vec![make("a", &times_a), make("b", &times_b)], tol).unwrap();
        for group in &res.groups {
            prop_assert_eq!(group.len(), 2);
            for x in group {
                for y in group {
                    prop_assert!((x.timestamp - y.timestamp).abs() <= tol);
                }
            }
        }
        prop_assert_eq!(res.groups.len() * 2 + res.dropped, total);
    }

    #[test]
    fn dataset_io_round_trips(
        n_snaps in 0usize..4,
        seed in 0u32..1000,
    ) {
        let wf = WaveformConfig {
            name: "TINY".into(),
            f_center_hz: 1e9,
            bandwidth_hz: 8e6,
            subcarrier_spacing_hz: 1e6,
            ifft_length: 8,
            active_subcarriers: vec![-3, -1, 0, 2],
        };
        let array = AntennaArray::ula(2, 0.05).unwrap();
        let snapshots = (0..n_snaps)
            .map(|i| {
                let mut s = snap(i as f64 * 0.25, "ap0", 2, 4, seed as f32 * 0.001);
                s.ground_truth = Some(vec![[seed as f64 * 0.01, 1.0 + i as f64]]);
                s
            })
            .collect();
        let ds = Dataset::new(wf, array, 1, snapshots).unwrap();

        let mut bytes = Vec::new();
        io::write_dataset(&mut bytes, &ds, None).unwrap();
        let (back, _) = io::read_dataset(bytes.as_slice()).unwrap();
        prop_assert_eq!(&back, &ds);

        let mut bytes2 = Vec::new();
        io::write_dataset(&mut bytes2, &back, None).unwrap();
        prop_assert_eq!(bytes, bytes2);
    }
}
