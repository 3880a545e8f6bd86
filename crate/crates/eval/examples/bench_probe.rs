//! Scratch probe for tuning the frozen benchmark; not part of the test
//! suite.

use std::time::Instant;

use csiloc_core::WaveformKind;
use csiloc_eval::{benchmark_config, build_recording, run_two_target};

fn main() {
    let which = std::env::args().nth(1).unwrap_or_else(|| "wifi40".into());
    let cfg = benchmark_config();

    if which == "two" {
        let t0 = Instant::now();
        let (report, log) = run_two_target(&cfg).unwrap();
        println!(
            "two-target: {:?} total, best epoch {}",
            t0.elapsed(),
            log.best_epoch
        );
        for e in &log.epochs {
            println!(
                "  epoch {:3} train {:.5} val {:?} err {:?}",
                e.epoch, e.train_loss, e.val_loss, e.val_err_m
            );
        }
        println!(
            "threshold_accuracy {:?} over {} frames; mean err {:?} detection {:?}",
            report.threshold_accuracy,
            report.n_threshold_frames,
            report.mean_error_m,
            report.detection_rate
        );
        return;
    }

    if which == "geom" {
        feature_geometry(&cfg);
        return;
    }

    if which == "radar" {
        for kind in WaveformKind::ALL {
            let t0 = Instant::now();
            let test_set = build_recording(&cfg, kind, &cfg.single_target.test).unwrap();
            let report = csiloc_eval::evaluate(
                &test_set,
                csiloc_eval::Predictor::Radar(&cfg.radar),
                &cfg.eval,
            )
            .unwrap();
            println!(
                "{:8} radar mean {:?} median {:?} detection {:?} ({:?})",
                test_set.waveform.name,
                report.mean_error_m,
                report.median_error_m,
                report.detection_rate,
                t0.elapsed()
            );
        }
        return;
    }

    let kind = match which.as_str() {
        "waic" => WaveformKind::Waic,
        "wifi100" => WaveformKind::Wifi100,
        _ => WaveformKind::Wifi40,
    };

    let t0 = Instant::now();
    let train_set = build_recording(&cfg, kind, &cfg.single_target.train).unwrap();
    println!("sim train ({} frames): {:?}", train_set.len(), t0.elapsed());
    let t1 = Instant::now();
    let test_set = build_recording(&cfg, kind, &cfg.single_target.test).unwrap();
    println!("sim test ({} frames): {:?}", test_set.len(), t1.elapsed());

    let t2 = Instant::now();
    let (model, log) = csiloc_ann::train(&train_set, &cfg.train).unwrap();
    println!(
        "train: {:?}  (n_train {}, n_val {}, dim {}, best epoch {})",
        t2.elapsed(),
        log.n_train,
        log.n_val,
        log.feature_dim,
        log.best_epoch
    );
    for e in &log.epochs {
        println!(
            "  epoch {:3} train {:.5} err {:?} val {:?} verr {:?}",
            e.epoch, e.train_loss, e.train_err_m, e.val_loss, e.val_err_m
        );
    }

    let t3 = Instant::now();
    let radar = csiloc_eval::evaluate(
        &test_set,
        csiloc_eval::Predictor::Radar(&cfg.radar),
        &cfg.eval,
    )
    .unwrap();
    println!("radar eval: {:?}", t3.elapsed());
    let t4 = Instant::now();
    let ann = csiloc_eval::evaluate(&test_set, csiloc_eval::Predictor::Ann(&model), &cfg.eval).unwrap();
    println!("ann eval: {:?}", t4.elapsed());

    println!(
        "RADAR mean {:?} median {:?} detection {:?} missed {}",
        radar.mean_error_m, radar.median_error_m, radar.detection_rate, radar.n_missed
    );
    println!(
        "ANN   mean {:?} median {:?} detection {:?} missed {}",
        ann.mean_error_m, ann.median_error_m, ann.detection_rate, ann.n_missed
    );
    println!("total {:?}", t0.elapsed());
}

/// How far apart are feature vectors for (same position, fresh noise) vs
/// (neighboring position, same recording)? Decides whether the residual
/// features carry echo or noise.
fn feature_geometry(cfg: &csiloc_eval::BenchConfig) {
    use csiloc_ann::{extract_features, wavelet_background, FeatureMode};
    use num_complex::Complex64;

    let kind = WaveformKind::Wifi40;
    let train = build_recording(cfg, kind, &cfg.single_target.train).unwrap();
    let test = build_recording(cfg, kind, &cfg.single_target.test).unwrap();

    let feats = |ds: &csiloc_core::Dataset, i: usize| -> Vec<f64> {
        let take = (i + 1).min(cfg.train.history_window);
        let window = &ds.snapshots[i + 1 - take..=i];
        let bg = wavelet_background(window, cfg.train.wavelet, cfg.train.wavelet_levels).unwrap();
        let mut residual = bg.mapv(|z| -z);
        for (cell, z) in residual.iter_mut().zip(ds.snapshots[i].csi.iter()) {
            *cell += Complex64::new(f64::from(z.re), f64::from(z.im));
        }
        extract_features(&residual, FeatureMode::ReIm)
    };
    let l2 = |a: &[f64], b: &[f64]| -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt()
    };

    for i in [60usize, 100, 150, 200] {
        let p_test = test.snapshots[i].ground_truth.as_ref().unwrap()[0];
        let p_train = train.snapshots[i].ground_truth.as_ref().unwrap()[0];
        let f_test = feats(&test, i);
        let f_same = feats(&train, i);
        let f_next = feats(&train, i + 1);
        let f_far = feats(&train, i + 120);
        println!(
            "i {i}: pos offset {:.2e} m | same-pos fresh-noise d {:.3} | 4cm-neighbor d {:.3} | far d {:.3} | ||f|| {:.3}",
            csiloc_core::geometry::distance(p_test, p_train),
            l2(&f_test, &f_same),
            l2(&f_test, &f_next),
            l2(&f_test, &f_far),
            l2(&f_test, &vec![0.0; f_test.len()]),
        );
    }
}
