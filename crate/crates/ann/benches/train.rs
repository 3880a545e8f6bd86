//! Parallel vs sequential training throughput on a small synthetic set.

use criterion::{criterion_group, criterion_main, Criterion};

use csiloc_ann::{train, train_seq, FeatureMode, TrainConfig, WaveletKind};
use csiloc_core::{AntennaArray, Dataset, Region, Scatterer, Scene, WaveformConfig};
use csiloc_sim::{simulate_trajectory, SimConfig, TrajectoryStep};

fn fixture() -> (Dataset, TrainConfig) {
    let wf = WaveformConfig::wifi40();
    let scene = Scene {
        region: Region::new(-2.5, 2.5, 0.5, 5.5).unwrap(),
        array: AntennaArray::for_waveform(&wf, 4).unwrap(),
        static_scatterers: vec![Scatterer::unit([-1.8, 4.6]), Scatterer::unit([2.1, 1.2])],
        targets: vec![],
    };
    let script: Vec<TrajectoryStep> = (0..40)
        .map(|i| TrajectoryStep {
            t: 0.1 * i as f64,
            targets: {
                let a = 0.5 * i as f64;
                vec![[1.2 * a.cos(), 3.0 + 1.2 * a.sin()]]
            },
        })
        .collect();
    let sim = SimConfig::default();
    let dataset = simulate_trajectory(&scene, &script, &wf, &sim).unwrap();
    let config = TrainConfig {
        hidden: vec![64, 32],
        epochs: 3,
        batch_size: 8,
        wavelet: WaveletKind::Db4,
        wavelet_levels: 2,
        history_window: 8,
        feature_mode: FeatureMode::ReIm,
        ..TrainConfig::default()
    };
    (dataset, config)
}

fn bench_training(c: &mut Criterion) {
    let (dataset, config) = fixture();
    let mut group = c.benchmark_group("train_40_frames");
    group.sample_size(10);
    group.bench_function("parallel", |b| {
        b.iter(|| train(&dataset, &config).unwrap())
    });
    group.bench_function("sequential", |b| {
        b.iter(|| train_seq(&dataset, &config).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_training);
criterion_main!(benches);
