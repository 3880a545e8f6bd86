//! Channel synthesis: single-bounce path sums, coupling, noise.

use ndarray::{Array3, ArrayViewMut1};
use num_complex::{Complex32, Complex64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use csiloc_core::{
    geometry::distance, CsiSnapshot, Dataset, Point2, Scatterer, Scene, WaveformConfig,
    SPEED_OF_LIGHT,
};

use crate::{Result, SimConfig, SimError};

/// Source label stamped on simulated snapshots.
pub const DEFAULT_SOURCE_ID: &str = "ap0";

const MIN_PATH_M: f64 = 1e-9;

/// One frame of a target script: a timestamp and the target positions at that
/// instant (targets are modeled as unit reflectors).
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TrajectoryStep {
    pub t: f64,
    pub targets: Vec<Point2>,
}

/// Noise-free channel tensor of `scene` in double precision.
///
/// Cell `(i, j, k)` sums, over all scatterers, the single-bounce path
/// `ρ · exp(-j·2π·f_k·(r_i + r_j)/c) / (r_i · r_j)` plus, when enabled, the
/// static leakage `κ · exp(-j·2π·f_k·d_ij/c) / d_ij` between distinct
/// elements and a flat `κ` on the diagonal; everything is scaled by the
/// transmit amplitude, and configured element gains multiply cell `(i, j)`
/// by `g_i · g_j`. Summation order is fixed (statics, then targets), so
/// results are reproducible bit for bit and the tensor is exactly symmetric
/// in (i, j).
pub fn noiseless_csi(
    scene: &Scene,
    wf: &WaveformConfig,
    cfg: &SimConfig,
) -> Result<Array3<Complex64>> {
    scene.validate()?;
    wf.validate()?;
    cfg.validate()?;

    let m = scene.array.len();
    if let Some(gains) = &cfg.element_gains {
        if gains.len() != m {
            return Err(SimError::InvalidConfig(format!(
                "{} element gains configured for a {m}-element array",
                gains.len()
            )));
        }
    }
    let n_c = wf.active_count();
    let amp = cfg.tx_amplitude();
    let df = wf.subcarrier_spacing_hz;
    let k_min = f64::from(wf.active_subcarriers[0]);
    let f_min = wf.f_center_hz + k_min * df;

    let mut csi = Array3::from_elem((m, m, n_c), Complex64::new(0.0, 0.0));
    for i in 0..m {
        for j in 0..m {
            let mut row = csi.slice_mut(ndarray::s![i, j, ..]);
            let el_i = scene.array.positions[i];
            let el_j = scene.array.positions[j];
            for s in scene.static_scatterers.iter().chain(scene.targets.iter()) {
                let r_i = distance(el_i, s.position);
                let r_j = distance(el_j, s.position);
                if r_i < MIN_PATH_M || r_j < MIN_PATH_M {
                    return Err(SimError::SingularGeometry(format!(
                        "scatterer at ({}, {}) coincides with an array element",
                        s.position[0], s.position[1]
                    )));
                }
                let weight = s.reflectivity * (amp / (r_i * r_j));
                accumulate_path(&mut row, wf, weight, (r_i + r_j) / SPEED_OF_LIGHT, f_min, df);
            }
            if cfg.include_direct_coupling {
                if i == j {
                    let leak = Complex64::new(amp * cfg.coupling_gain, 0.0);
                    for cell in row.iter_mut() {
                        *cell += leak;
                    }
                } else {
                    let d = distance(el_i, el_j);
                    if d < MIN_PATH_M {
                        return Err(SimError::SingularGeometry(format!(
                            "array elements {i} and {j} coincide"
                        )));
                    }
                    let weight = Complex64::new(amp * cfg.coupling_gain / d, 0.0);
                    accumulate_path(&mut row, wf, weight, d / SPEED_OF_LIGHT, f_min, df);
                }
            }
        }
    }
    if let Some(gains) = &cfg.element_gains {
        for ((i, j, _), cell) in csi.indexed_iter_mut() {
            *cell *= gains[i] * gains[j];
        }
    }
    Ok(csi)
}

/// Adds `weight · exp(-j·2π·f_k·τ)` to every active-subcarrier cell of `row`.
///
/// The phase is advanced across the grid by a unit-magnitude rotation per
/// subcarrier step instead of calling sin/cos per cell; inactive grid indices
/// advance the phase but contribute nothing.
fn accumulate_path(
    row: &mut ArrayViewMut1<Complex64>,
    wf: &WaveformConfig,
    weight: Complex64,
    tau_s: f64,
    f_min: f64,
    df: f64,
) {
    let theta0 = -2.0 * std::f64::consts::PI * f_min * tau_s;
    let step = Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * df * tau_s);
    let mut val = weight * Complex64::from_polar(1.0, theta0);
    let k_min = wf.active_subcarriers[0];
    let mut next = 0usize;
    for k in k_min..=wf.active_subcarriers[wf.active_count() - 1] {
        if wf.active_subcarriers[next] == k {
            row[next] += val;
            next += 1;
            if next == wf.active_count() {
                break;
            }
        }
        val *= step;
    }
}

/// Simulates one snapshot using noise stream `noise_stream` of the seed.
///
/// Streams decouple noise from synthesis order: a trajectory draws stream `i`
/// for frame `i`, so parallel and sequential generation agree bit for bit.
pub fn simulate_snapshot_at(
    scene: &Scene,
    wf: &WaveformConfig,
    cfg: &SimConfig,
    t: f64,
    noise_stream: u64,
) -> Result<CsiSnapshot> {
    if !t.is_finite() {
        return Err(SimError::InvalidConfig("timestamp must be finite".into()));
    }
    let mut csi = noiseless_csi(scene, wf, cfg)?;

    if let Some(snr_db) = cfg.snr_db {
        let cells = csi.len() as f64;
        let mean_power: f64 = csi.iter().map(|z| z.norm_sqr()).sum::<f64>() / cells;
        // Each complex sample gets variance mean_power / 10^(snr/10), split
        // evenly between the quadratures.
        let sigma = (mean_power * 10f64.powf(-snr_db / 10.0) / 2.0).sqrt();
        if sigma > 0.0 {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
            rng.set_stream(noise_stream);
            for cell in csi.iter_mut() {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                *cell += Complex64::new(re * sigma, im * sigma);
            }
        }
    }

    let snapshot = CsiSnapshot {
        timestamp: t,
        source_id: DEFAULT_SOURCE_ID.to_string(),
        csi: csi.mapv(|z| Complex32::new(z.re as f32, z.im as f32)),
        ground_truth: Some(scene.targets.iter().map(|s| s.position).collect()),
    };
    Ok(snapshot)
}

/// Simulates one snapshot of `scene` at time `t` (noise stream 0).
pub fn simulate_snapshot(
    scene: &Scene,
    wf: &WaveformConfig,
    cfg: &SimConfig,
    t: f64,
) -> Result<CsiSnapshot> {
    simulate_snapshot_at(scene, wf, cfg, t, 0)
}

/// Simulates a whole target script against the static part of `scene`,
/// producing a labeled dataset. Frames are synthesized in parallel when the
/// `parallel` feature is on; outputs are identical either way because frame
/// `i` always uses noise stream `i`.
pub fn simulate_trajectory(
    scene: &Scene,
    script: &[TrajectoryStep],
    wf: &WaveformConfig,
    cfg: &SimConfig,
) -> Result<Dataset> {
    let frames = run_script(scene, script, wf, cfg, Exec::Auto)?;
    assemble(scene, script, wf, frames)
}

/// Sequential twin of [`simulate_trajectory`]; exists so benchmarks and
/// determinism tests can compare both paths in one build.
pub fn simulate_trajectory_seq(
    scene: &Scene,
    script: &[TrajectoryStep],
    wf: &WaveformConfig,
    cfg: &SimConfig,
) -> Result<Dataset> {
    let frames = run_script(scene, script, wf, cfg, Exec::Sequential)?;
    assemble(scene, script, wf, frames)
}

#[derive(Clone, Copy)]
enum Exec {
    Auto,
    Sequential,
}

fn run_script(
    scene: &Scene,
    script: &[TrajectoryStep],
    wf: &WaveformConfig,
    cfg: &SimConfig,
    exec: Exec,
) -> Result<Vec<CsiSnapshot>> {
    for pair in script.windows(2) {
        if pair[0].t >= pair[1].t {
            return Err(SimError::InvalidScene(
                "script timestamps must be strictly increasing".into(),
            ));
        }
    }
    let frame = |(i, step): (usize, &TrajectoryStep)| -> Result<CsiSnapshot> {
        let staged = scene.with_targets(step.targets.iter().map(|&p| Scatterer::unit(p)).collect());
        simulate_snapshot_at(&staged, wf, cfg, step.t, i as u64)
    };

    match exec {
        Exec::Sequential => script.iter().enumerate().map(frame).collect(),
        Exec::Auto => {
            #[cfg(feature = "parallel")]
            {
                use rayon::prelude::*;
                script.par_iter().enumerate().map(frame).collect()
            }
            #[cfg(not(feature = "parallel"))]
            {
                script.iter().enumerate().map(frame).collect()
            }
        }
    }
}

fn assemble(
    scene: &Scene,
    script: &[TrajectoryStep],
    wf: &WaveformConfig,
    snapshots: Vec<CsiSnapshot>,
) -> Result<Dataset> {
    let n_p_max = script.iter().map(|s| s.targets.len()).max().unwrap_or(0);
    Ok(Dataset::new(
        wf.clone(),
        scene.array.clone(),
        n_p_max,
        snapshots,
    )?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use csiloc_core::{AntennaArray, Region};

    fn quiet_cfg() -> SimConfig {
        SimConfig {
            snr_db: None,
            include_direct_coupling: false,
            tx_power_dbm: 0.0,
            ..SimConfig::default()
        }
    }

    fn region() -> Region {
        Region::new(-2.5, 2.5, 0.5, 5.5).unwrap()
    }

    fn scene_with(targets: Vec<Scatterer>, statics: Vec<Scatterer>, elements: usize) -> Scene {
        let wf = WaveformConfig::waic();
        Scene {
            region: region(),
            array: AntennaArray::for_waveform(&wf, elements).unwrap(),
            static_scatterers: statics,
            targets,
        }
    }

    /// Independent per-cell evaluation of the path-sum model: explicit
    /// `from_polar` per subcarrier, no phase recurrence.
    fn oracle_cell(
        scene: &Scene,
        wf: &WaveformConfig,
        cfg: &SimConfig,
        i: usize,
        j: usize,
        k: usize,
    ) -> Complex64 {
        let f = wf.subcarrier_frequencies()[k];
        let amp = cfg.tx_amplitude();
        let el_i = scene.array.positions[i];
        let el_j = scene.array.positions[j];
        let mut sum = Complex64::new(0.0, 0.0);
        for s in scene.static_scatterers.iter().chain(scene.targets.iter()) {
            let r_i = distance(el_i, s.position);
            let r_j = distance(el_j, s.position);
            let phase = -2.0 * std::f64::consts::PI * f * (r_i + r_j) / SPEED_OF_LIGHT;
            sum += s.reflectivity * Complex64::from_polar(amp / (r_i * r_j), phase);
        }
        if cfg.include_direct_coupling {
            if i == j {
                sum += Complex64::new(amp * cfg.coupling_gain, 0.0);
            } else {
                let d = distance(el_i, el_j);
                let phase = -2.0 * std::f64::consts::PI * f * d / SPEED_OF_LIGHT;
                sum += Complex64::from_polar(amp * cfg.coupling_gain / d, phase);
            }
        }
        sum
    }

    #[test]
    fn matches_term_by_term_oracle() {
        let scene = scene_with(
            vec![Scatterer::unit([0.4, 3.1])],
            vec![
                Scatterer::new([-1.0, 2.0], Complex64::new(0.3, -0.1)),
                Scatterer::new([1.5, 4.5], Complex64::new(-0.2, 0.4)),
            ],
            4,
        );
        let wf = WaveformConfig::wifi40();
        let scene = Scene {
            array: AntennaArray::for_waveform(&wf, 4).unwrap(),
            ..scene
        };
        let cfg = SimConfig {
            snr_db: None,
            ..SimConfig::default()
        };
        let csi = noiseless_csi(&scene, &wf, &cfg).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                for &k in &[0usize, 1, 56, 57, 113] {
                    let want = oracle_cell(&scene, &wf, &cfg, i, j, k);
                    let got = csi[(i, j, k)];
                    assert!(
                        (got - want).norm() <= 1e-9 * want.norm().max(1e-12),
                        "cell ({i},{j},{k}): {got} vs {want}"
                    );
                }
            }
        }
    }

    #[test]
    fn phase_slope_encodes_round_trip_delay() {
        // Monostatic co-located pair: one element, broadside target at 3 m.
        let wf = WaveformConfig::waic();
        let scene = Scene {
            region: region(),
            array: AntennaArray::ula(1, 0.0).unwrap(),
            static_scatterers: vec![],
            targets: vec![Scatterer::unit([0.0, 3.0])],
        };
        let csi = noiseless_csi(&scene, &wf, &quiet_cfg()).unwrap();
        let expected = -2.0 * std::f64::consts::PI * wf.subcarrier_spacing_hz * 6.0
            / SPEED_OF_LIGHT;
        for k in 0..wf.active_count() - 1 {
            let step = (csi[(0, 0, k + 1)] * csi[(0, 0, k)].conj()).arg();
            assert_relative_eq!(step, expected, max_relative = 1e-9);
        }
    }

    #[test]
    fn tensor_is_reciprocal_without_noise() {
        let scene = scene_with(
            vec![Scatterer::unit([0.7, 2.2])],
            vec![Scatterer::new([-0.5, 3.3], Complex64::new(0.2, 0.1))],
            4,
        );
        let wf = WaveformConfig::waic();
        let cfg = SimConfig {
            snr_db: None,
            ..SimConfig::default()
        };
        let snap = simulate_snapshot(&scene, &wf, &cfg, 0.0).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..wf.active_count() {
                    assert_eq!(snap.csi[(i, j, k)], snap.csi[(j, i, k)]);
                }
            }
        }
    }

    #[test]
    fn superposition_of_single_scatterer_scenes() {
        let a = Scatterer::new([0.5, 2.0], Complex64::new(0.8, 0.0));
        let b = Scatterer::new([-1.0, 3.5], Complex64::new(0.0, 0.6));
        let wf = WaveformConfig::waic();
        let cfg = quiet_cfg();
        let both = noiseless_csi(&scene_with(vec![], vec![a, b], 4), &wf, &cfg).unwrap();
        let only_a = noiseless_csi(&scene_with(vec![], vec![a], 4), &wf, &cfg).unwrap();
        let only_b = noiseless_csi(&scene_with(vec![], vec![b], 4), &wf, &cfg).unwrap();
        for (z, (x, y)) in both.iter().zip(only_a.iter().zip(only_b.iter())) {
            assert_eq!(*z, x + y);
        }
    }

    #[test]
    fn empty_scene_is_all_zero() {
        let scene = scene_with(vec![], vec![], 4);
        let wf = WaveformConfig::waic();
        let snap = simulate_snapshot(&scene, &wf, &quiet_cfg(), 0.0).unwrap();
        assert!(snap.csi.iter().all(|z| z.re == 0.0 && z.im == 0.0));
    }

    #[test]
    fn element_gains_scale_each_cell_by_both_chains() {
        let scene = scene_with(
            vec![Scatterer::new([1.1, 3.0], Complex64::new(0.1, -0.05))],
            vec![Scatterer::unit([-0.4, 2.4])],
            3,
        );
        let wf = WaveformConfig::wifi40();
        let ideal_cfg = quiet_cfg();
        let gains = vec![
            Complex64::from_polar(0.95, 0.2),
            Complex64::from_polar(1.05, -0.1),
            Complex64::from_polar(1.0, 0.35),
        ];
        let skewed_cfg = SimConfig {
            element_gains: Some(gains.clone()),
            ..ideal_cfg.clone()
        };
        let ideal = noiseless_csi(&scene, &wf, &ideal_cfg).unwrap();
        let skewed = noiseless_csi(&scene, &wf, &skewed_cfg).unwrap();
        for ((i, j, k), z) in skewed.indexed_iter() {
            assert_eq!(*z, ideal[(i, j, k)] * (gains[i] * gains[j]));
        }

        // A gain list that does not cover the array is rejected.
        let short = SimConfig {
            element_gains: Some(gains[..2].to_vec()),
            ..ideal_cfg
        };
        assert!(noiseless_csi(&scene, &wf, &short).is_err());
    }

    #[test]
    fn empirical_snr_matches_configuration() {
        let scene = scene_with(
            vec![Scatterer::unit([0.2, 2.8])],
            vec![
                Scatterer::new([-1.2, 1.8], Complex64::new(0.4, 0.0)),
                Scatterer::new([0.9, 4.0], Complex64::new(0.0, -0.3)),
            ],
            4,
        );
        let wf = WaveformConfig::waic();
        let noisy_cfg = SimConfig {
            snr_db: Some(20.0),
            ..SimConfig::default()
        };
        let clean_cfg = noisy_cfg.noiseless();

        let mut signal_power = 0.0f64;
        let mut noise_power = 0.0f64;
        let mut samples = 0usize;
        for stream in 0..4u64 {
            let noisy = simulate_snapshot_at(&scene, &wf, &noisy_cfg, 0.0, stream).unwrap();
            let clean = simulate_snapshot_at(&scene, &wf, &clean_cfg, 0.0, stream).unwrap();
            for (a, b) in noisy.csi.iter().zip(clean.csi.iter()) {
                let n = Complex64::new((a.re - b.re) as f64, (a.im - b.im) as f64);
                let s = Complex64::new(b.re as f64, b.im as f64);
                signal_power += s.norm_sqr();
                noise_power += n.norm_sqr();
                samples += 1;
            }
        }
        assert!(samples >= 10_000, "need enough samples, got {samples}");
        let snr_db = 10.0 * (signal_power / noise_power).log10();
        assert!(
            (snr_db - 20.0).abs() <= 0.5,
            "empirical SNR {snr_db:.3} dB, configured 20 dB"
        );
    }

    #[test]
    fn fixed_seed_reproduces_bytes_and_streams_differ() {
        let scene = scene_with(vec![Scatterer::unit([0.0, 3.0])], vec![], 4);
        let wf = WaveformConfig::waic();
        let cfg = SimConfig::default();
        let a = simulate_snapshot(&scene, &wf, &cfg, 0.0).unwrap();
        let b = simulate_snapshot(&scene, &wf, &cfg, 0.0).unwrap();
        assert_eq!(a.csi, b.csi);

        let c = simulate_snapshot_at(&scene, &wf, &cfg, 0.0, 1).unwrap();
        assert_ne!(a.csi, c.csi, "different noise streams must differ");
    }

    #[test]
    fn scatterer_on_element_is_singular() {
        let wf = WaveformConfig::waic();
        let array = AntennaArray::for_waveform(&wf, 4).unwrap();
        let on_element = array.positions[1];
        let scene = Scene {
            region: Region::new(-2.5, 2.5, -0.5, 5.5).unwrap(),
            array,
            static_scatterers: vec![],
            targets: vec![Scatterer::unit(on_element)],
        };
        let err = simulate_snapshot(&scene, &wf, &quiet_cfg(), 0.0).unwrap_err();
        assert!(matches!(err, SimError::SingularGeometry(_)), "{err:?}");
    }

    #[test]
    fn trajectory_matches_sequential_twin_and_script() {
        let scene = scene_with(vec![], vec![Scatterer::unit([1.0, 2.0])], 4);
        let wf = WaveformConfig::wifi40();
        let scene = Scene {
            array: AntennaArray::for_waveform(&wf, 4).unwrap(),
            ..scene
        };
        let cfg = SimConfig::default();
        let script: Vec<TrajectoryStep> = (0..12)
            .map(|i| TrajectoryStep {
                t: i as f64 * 0.1,
                targets: vec![[0.1 * i as f64 - 0.5, 2.5]],
            })
            .collect();
        let par = simulate_trajectory(&scene, &script, &wf, &cfg).unwrap();
        let seq = simulate_trajectory_seq(&scene, &script, &wf, &cfg).unwrap();
        assert_eq!(par, seq);

        assert_eq!(par.n_p_max, 1);
        for (snap, step) in par.snapshots.iter().zip(script.iter()) {
            assert_eq!(snap.timestamp, step.t);
            assert_eq!(snap.ground_truth.as_deref(), Some(step.targets.as_slice()));
        }
    }

    #[test]
    fn non_increasing_script_rejected() {
        let scene = scene_with(vec![], vec![], 4);
        let wf = WaveformConfig::waic();
        let script = vec![
            TrajectoryStep { t: 0.0, targets: vec![] },
            TrajectoryStep { t: 0.0, targets: vec![] },
        ];
        assert!(simulate_trajectory(&scene, &script, &wf, &SimConfig::default()).is_err());
    }
}
