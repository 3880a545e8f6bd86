//! Parallel vs sequential scoring of a fingerprinting model over a short
//! simulated walk; per-frame inference dominates the cost.

use criterion::{criterion_group, criterion_main, Criterion};

use csiloc_ann::{train, FeatureMode, TrainConfig, WaveletKind};
use csiloc_core::{AntennaArray, Dataset, Region, Scatterer, Scene, WaveformKind};
use csiloc_eval::{evaluate, evaluate_seq, EvalParams, Predictor};
use csiloc_sim::{simulate_trajectory, SimConfig, TrajectoryStep};
use num_complex::Complex64;

fn walk_dataset(frames: usize) -> Dataset {
    let wf = WaveformKind::Wifi40.config();
    let region = Region::new(-2.5, 2.5, 0.5, 5.5).unwrap();
    let array = AntennaArray::for_waveform(&wf, 4).unwrap();
    let scene = Scene {
        region,
        array,
        static_scatterers: vec![
            Scatterer::new([1.4, 4.2], Complex64::new(0.3, 0.1)),
            Scatterer::new([-1.6, 2.0], Complex64::new(-0.15, 0.2)),
        ],
        targets: vec![],
    };
    let steps: Vec<TrajectoryStep> = (0..frames)
        .map(|i| {
            let a = 0.17 * i as f64;
            TrajectoryStep {
                t: 0.1 * i as f64,
                targets: vec![[1.3 * a.cos(), 3.0 + 1.3 * a.sin()]],
            }
        })
        .collect();
    let sim = SimConfig {
        snr_db: Some(20.0),
        rng_seed: 5,
        ..SimConfig::default()
    };
    simulate_trajectory(&scene, &steps, &wf, &sim).unwrap()
}

fn bench_evaluate(c: &mut Criterion) {
    let dataset = walk_dataset(40);
    let cfg = TrainConfig {
        hidden: vec![64, 32],
        learning_rate: 1e-4,
        epochs: 2,
        batch_size: 8,
        val_split: 0.2,
        rng_seed: 1,
        wavelet: WaveletKind::Db4,
        wavelet_levels: 2,
        history_window: 8,
        feature_mode: FeatureMode::ReIm,
        ..TrainConfig::default()
    };
    let (model, _) = train(&dataset, &cfg).unwrap();
    let params = EvalParams::default();

    let mut group = c.benchmark_group("evaluate_40_frames");
    group.sample_size(10);
    group.bench_function("parallel", |b| {
        b.iter(|| evaluate(&dataset, Predictor::Ann(&model), &params).unwrap())
    });
    group.bench_function("sequential", |b| {
        b.iter(|| evaluate_seq(&dataset, Predictor::Ann(&model), &params).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_evaluate);
criterion_main!(benches);
