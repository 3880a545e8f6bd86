//! Declarative scene + trajectory descriptions, loadable from JSON.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use csiloc_core::{AntennaArray, Point2, Region, Scatterer, Scene, WaveformConfig};

use crate::{Result, SimError, TrajectoryStep};

/// How the static clutter of a scene is populated.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScatterersSpec {
    /// `count` reflectors with uniform positions in the region, reflectivity
    /// magnitude uniform in `reflectivity = [lo, hi]` and uniform phase.
    Random {
        count: usize,
        seed: u64,
        reflectivity: [f64; 2],
    },
    /// A hand-written list.
    Explicit { items: Vec<Scatterer> },
}

/// Target motion over the frames of a recording.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScriptSpec {
    /// Independent random walkers with wall reflection, one per entry of
    /// `targets`. Headings diffuse with per-frame jitter.
    Walk {
        frames: usize,
        dt_s: f64,
        step_m: f64,
        targets: usize,
        seed: u64,
    },
    /// Two targets orbiting a wandering midpoint while their separation
    /// ramps linearly from `sep_min_m` to `sep_max_m`. With `passes > 1`
    /// the identical ramp replays back to back under the same seed, so each
    /// configuration recurs with fresh channel noise.
    SeparationSweep {
        frames: usize,
        dt_s: f64,
        step_m: f64,
        sep_min_m: f64,
        sep_max_m: f64,
        seed: u64,
        #[serde(default = "default_passes")]
        passes: usize,
    },
    /// One target surveying the room in a serpentine sweep: `rows`
    /// horizontal passes in alternating directions, traversed at constant
    /// speed. Deterministic; the classic recording for fingerprint training.
    /// With `passes > 1` the identical anchor sequence is traversed that many
    /// times back to back, so every survey point recurs under fresh noise;
    /// `frames` must divide evenly into the passes.
    Lawnmower {
        frames: usize,
        dt_s: f64,
        rows: usize,
        #[serde(default = "default_passes")]
        passes: usize,
    },
    /// No targets at all; useful for background-only recordings.
    Static { frames: usize, dt_s: f64 },
    /// Fully scripted positions.
    Explicit { steps: Vec<TrajectoryStep> },
}

/// A complete simulation input: room, array, clutter, and target script.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SceneSpec {
    pub region: Region,
    pub array_elements: usize,
    /// Element pitch in meters; defaults to half the shortest wavelength of
    /// the waveform the spec is built against.
    #[serde(default)]
    pub array_spacing_m: Option<f64>,
    pub static_scatterers: ScatterersSpec,
    pub script: ScriptSpec,
}

fn default_passes() -> usize {
    1
}

/// Keep walkers away from the walls so a reflector never lands on the array.
const WALK_MARGIN_M: f64 = 0.25;
const HEADING_JITTER_RAD: f64 = 0.35;
const SWEEP_SPIN_RAD: f64 = 0.07;

impl SceneSpec {
    /// Materializes the spec against a waveform, returning the static scene
    /// and the per-frame target script.
    pub fn build(&self, wf: &WaveformConfig) -> Result<(Scene, Vec<TrajectoryStep>)> {
        let array = match self.array_spacing_m {
            Some(d) => AntennaArray::ula(self.array_elements, d)?,
            None => AntennaArray::for_waveform(wf, self.array_elements)?,
        };
        let statics = self.static_scatterers.materialize(&self.region)?;
        let scene = Scene {
            region: self.region,
            array,
            static_scatterers: statics,
            targets: vec![],
        };
        scene.validate()?;
        let steps = self.script.materialize(&self.region)?;
        Ok((scene, steps))
    }
}

impl ScatterersSpec {
    fn materialize(&self, region: &Region) -> Result<Vec<Scatterer>> {
        match self {
            ScatterersSpec::Explicit { items } => Ok(items.clone()),
            ScatterersSpec::Random {
                count,
                seed,
                reflectivity,
            } => {
                let [lo, hi] = *reflectivity;
                if !(lo.is_finite() && hi.is_finite()) || lo < 0.0 || hi < lo {
                    return Err(SimError::InvalidScene(format!(
                        "reflectivity range [{lo}, {hi}] must satisfy 0 <= lo <= hi"
                    )));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let items = (0..*count)
                    .map(|_| {
                        let x = rng.gen_range(region.x_min..=region.x_max);
                        let y = rng.gen_range(region.y_min..=region.y_max);
                        let mag = rng.gen_range(lo..=hi);
                        let phase = rng.gen_range(0.0..std::f64::consts::TAU);
                        Scatterer::new([x, y], Complex64::from_polar(mag, phase))
                    })
                    .collect();
                Ok(items)
            }
        }
    }
}

impl ScriptSpec {
    fn materialize(&self, region: &Region) -> Result<Vec<TrajectoryStep>> {
        match self {
            ScriptSpec::Explicit { steps } => Ok(steps.clone()),
            ScriptSpec::Static { frames, dt_s } => {
                check_cadence(*frames, *dt_s)?;
                Ok((0..*frames)
                    .map(|i| TrajectoryStep {
                        t: i as f64 * dt_s,
                        targets: vec![],
                    })
                    .collect())
            }
            ScriptSpec::Walk {
                frames,
                dt_s,
                step_m,
                targets,
                seed,
            } => {
                check_cadence(*frames, *dt_s)?;
                let inner = region.shrunk(WALK_MARGIN_M)?;
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let jitter = Normal::new(0.0, HEADING_JITTER_RAD).expect("const stddev");
                let mut walkers: Vec<(Point2, f64)> = (0..*targets)
                    .map(|_| {
                        let p = [
                            rng.gen_range(inner.x_min..=inner.x_max),
                            rng.gen_range(inner.y_min..=inner.y_max),
                        ];
                        (p, rng.gen_range(0.0..std::f64::consts::TAU))
                    })
                    .collect();
                let steps = (0..*frames)
                    .map(|i| {
                        let positions = walkers.iter().map(|(p, _)| *p).collect();
                        for (p, heading) in walkers.iter_mut() {
                            *heading += jitter.sample(&mut rng);
                            let mut x = p[0] + step_m * heading.cos();
                            let mut y = p[1] + step_m * heading.sin();
                            if x < inner.x_min || x > inner.x_max {
                                *heading = std::f64::consts::PI - *heading;
                                x = x.clamp(inner.x_min, inner.x_max);
                            }
                            if y < inner.y_min || y > inner.y_max {
                                *heading = -*heading;
                                y = y.clamp(inner.y_min, inner.y_max);
                            }
                            *p = [x, y];
                        }
                        TrajectoryStep {
                            t: i as f64 * dt_s,
                            targets: positions,
                        }
                    })
                    .collect();
                Ok(steps)
            }
            ScriptSpec::Lawnmower {
                frames,
                dt_s,
                rows,
                passes,
            } => {
                check_cadence(*frames, *dt_s)?;
                if *rows == 0 {
                    return Err(SimError::InvalidScene(
                        "survey sweep needs at least one row".into(),
                    ));
                }
                if *passes == 0 || frames % passes != 0 {
                    return Err(SimError::InvalidScene(format!(
                        "{frames} frames cannot split into {passes} equal passes"
                    )));
                }
                let inner = region.shrunk(WALK_MARGIN_M)?;
                // Polyline through the sweep: row ends are vertically
                // aligned, so the hop to the next row is part of the path.
                let mut verts: Vec<Point2> = Vec::with_capacity(2 * rows);
                for j in 0..*rows {
                    let y = if *rows == 1 {
                        (inner.y_min + inner.y_max) / 2.0
                    } else {
                        inner.y_min + inner.height() * j as f64 / (*rows as f64 - 1.0)
                    };
                    let (x0, x1) = if j % 2 == 0 {
                        (inner.x_min, inner.x_max)
                    } else {
                        (inner.x_max, inner.x_min)
                    };
                    verts.push([x0, y]);
                    verts.push([x1, y]);
                }
                let seg_lens: Vec<f64> = verts
                    .windows(2)
                    .map(|w| ((w[1][0] - w[0][0]).powi(2) + (w[1][1] - w[0][1]).powi(2)).sqrt())
                    .collect();
                let total: f64 = seg_lens.iter().sum();
                let anchors = frames / passes;
                let denom = anchors.max(2) as f64 - 1.0;
                let steps = (0..*frames)
                    .map(|i| {
                        let mut s = total * (i % anchors) as f64 / denom;
                        let mut p = *verts.last().expect("at least one row");
                        for (seg, &len) in verts.windows(2).zip(&seg_lens) {
                            if s <= len || len == 0.0 {
                                let f = if len > 0.0 { s / len } else { 0.0 };
                                p = [
                                    seg[0][0] + f * (seg[1][0] - seg[0][0]),
                                    seg[0][1] + f * (seg[1][1] - seg[0][1]),
                                ];
                                break;
                            }
                            s -= len;
                        }
                        TrajectoryStep {
                            t: i as f64 * dt_s,
                            targets: vec![p],
                        }
                    })
                    .collect();
                Ok(steps)
            }
            ScriptSpec::SeparationSweep {
                frames,
                dt_s,
                step_m,
                sep_min_m,
                sep_max_m,
                seed,
                passes,
            } => {
                check_cadence(*frames, *dt_s)?;
                if !(sep_min_m.is_finite() && sep_max_m.is_finite())
                    || *sep_min_m <= 0.0
                    || sep_max_m < sep_min_m
                {
                    return Err(SimError::InvalidScene(format!(
                        "separation sweep [{sep_min_m}, {sep_max_m}] must satisfy 0 < min <= max"
                    )));
                }
                if *passes == 0 || frames % passes != 0 {
                    return Err(SimError::InvalidScene(format!(
                        "{frames} frames cannot split into {passes} equal passes"
                    )));
                }
                // The midpoint keeps an extra half-separation of margin so
                // both ends of the baton stay inside the room.
                let inner = region.shrunk(WALK_MARGIN_M + sep_max_m / 2.0)?;
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let jitter = Normal::new(0.0, HEADING_JITTER_RAD).expect("const stddev");
                let mut mid = [
                    rng.gen_range(inner.x_min..=inner.x_max),
                    rng.gen_range(inner.y_min..=inner.y_max),
                ];
                let mut heading = rng.gen_range(0.0..std::f64::consts::TAU);
                let mut spin = rng.gen_range(0.0..std::f64::consts::TAU);
                let anchors = frames / passes;
                let denom = anchors.max(2) as f64 - 1.0;
                let one_pass: Vec<Vec<Point2>> = (0..anchors)
                    .map(|i| {
                        let sep = sep_min_m + (sep_max_m - sep_min_m) * i as f64 / denom;
                        let arm = [sep / 2.0 * spin.cos(), sep / 2.0 * spin.sin()];
                        let targets = vec![
                            [mid[0] + arm[0], mid[1] + arm[1]],
                            [mid[0] - arm[0], mid[1] - arm[1]],
                        ];
                        heading += jitter.sample(&mut rng);
                        let mut x = mid[0] + step_m * heading.cos();
                        let mut y = mid[1] + step_m * heading.sin();
                        if x < inner.x_min || x > inner.x_max {
                            heading = std::f64::consts::PI - heading;
                            x = x.clamp(inner.x_min, inner.x_max);
                        }
                        if y < inner.y_min || y > inner.y_max {
                            heading = -heading;
                            y = y.clamp(inner.y_min, inner.y_max);
                        }
                        mid = [x, y];
                        spin += SWEEP_SPIN_RAD;
                        targets
                    })
                    .collect();
                Ok((0..*frames)
                    .map(|i| TrajectoryStep {
                        t: i as f64 * dt_s,
                        targets: one_pass[i % anchors].clone(),
                    })
                    .collect())
            }
        }
    }
}

fn check_cadence(frames: usize, dt_s: f64) -> Result<()> {
    if frames == 0 {
        return Err(SimError::InvalidScene("script needs at least one frame".into()));
    }
    if !dt_s.is_finite() || dt_s <= 0.0 {
        return Err(SimError::InvalidScene(format!(
            "frame interval {dt_s} must be positive"
        )));
    }
    Ok(())
}
