//! Synthetic scenes and click traces from parameterized worker models.
//!
//! Every random draw comes from a ChaCha8 stream seeded through
//! [`substream_seed`], so a (seed, worker, image) triple always produces the
//! same clicks regardless of evaluation order.

use std::f64::consts::PI;
use std::fmt;
use std::fs::File;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::clicks::{ClickRecord, Label};
use crate::error::{Error, Result};
use crate::imaging::{BinaryMask, Raster};

pub const RNG_ALGORITHM: &str = "ChaCha8Rng (rand_chacha 0.9); substream seed = u64 LE of SHA-256(seed LE || 0x1f || stream name || 0x1f || key)";

/// Seed for an independent stream identified by `(seed, name, key)`.
pub fn substream_seed(seed: u64, name: &str, key: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update([0x1f]);
    h.update(name.as_bytes());
    h.update([0x1f]);
    h.update(key.as_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().unwrap())
}

pub fn substream(seed: u64, name: &str, key: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(substream_seed(seed, name, key))
}

// ---------------------------------------------------------------------------
// Scenes
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Shape {
    /// Pixels whose center lies within `radius` of `(cx, cy)`.
    Disc { cx: f64, cy: f64, radius: f64 },
    /// Pixels with `x0 <= x < x1` and `y0 <= y < y1`.
    Rectangle { x0: usize, y0: usize, x1: usize, y1: usize },
    /// A disc whose radius wobbles with angle: `r(t) = radius * (1 + sum a_k cos(k t + p_k))`, k = 2, 3, ...
    Blob {
        cx: f64,
        cy: f64,
        radius: f64,
        harmonics: Vec<(f64, f64)>,
    },
}

impl Shape {
    pub fn contains(&self, x: usize, y: usize) -> bool {
        let (px, py) = (x as f64 + 0.5, y as f64 + 0.5);
        match self {
            Shape::Disc { cx, cy, radius } => (px - cx).powi(2) + (py - cy).powi(2) <= radius * radius,
            Shape::Rectangle { x0, y0, x1, y1 } => (*x0..*x1).contains(&x) && (*y0..*y1).contains(&y),
            Shape::Blob {
                cx,
                cy,
                radius,
                harmonics,
            } => {
                let (dx, dy) = (px - cx, py - cy);
                let t = dy.atan2(dx);
                let wobble: f64 = harmonics
                    .iter()
                    .enumerate()
                    .map(|(i, (a, p))| a * ((i as f64 + 2.0) * t + p).cos())
                    .sum();
                (dx * dx + dy * dy).sqrt() <= radius * (1.0 + wobble)
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Shape::Disc { .. } => "disc",
            Shape::Rectangle { .. } => "rectangle",
            Shape::Blob { .. } => "blob",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub width: usize,
    pub height: usize,
    pub shape: Shape,
    /// Standard deviation of per-pixel color noise; also scales the background texture.
    pub noise_level: f64,
    /// Per-channel offset magnitude (Euclidean, in RGB units) between object and background mean.
    pub contrast: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticScene {
    pub raster: Raster,
    pub truth: BinaryMask,
}

pub const MIN_SCENE_SIDE: usize = 32;
pub const MIN_OBJECT_FRACTION: f64 = 0.05;
pub const MAX_OBJECT_FRACTION: f64 = 0.60;

pub fn generate_scene(spec: &SceneSpec) -> Result<SyntheticScene> {
    let (w, h) = (spec.width, spec.height);
    if w < MIN_SCENE_SIDE || h < MIN_SCENE_SIDE {
        return Err(Error::InvalidParameter(format!(
            "scene must be at least {MIN_SCENE_SIDE}x{MIN_SCENE_SIDE}, got {w}x{h}"
        )));
    }
    if !(spec.noise_level >= 0.0 && spec.contrast >= 0.0) {
        return Err(Error::InvalidParameter("noise_level and contrast must be >= 0".into()));
    }
    let truth = BinaryMask::from_fn(w, h, |x, y| spec.shape.contains(x, y));
    let fraction = truth.count_ones() as f64 / (w * h) as f64;
    if !(MIN_OBJECT_FRACTION..=MAX_OBJECT_FRACTION).contains(&fraction) {
        return Err(Error::InvalidParameter(format!(
            "object covers {:.1}% of the image; must be within 5%..60%",
            fraction * 100.0
        )));
    }

    let mut rng = substream(spec.seed, "scene", "colors");
    let base: [f64; 3] = std::array::from_fn(|_| rng.random_range(60.0..196.0));
    let mut dir: [f64; 3] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
    let norm = dir.iter().map(|d| d * d).sum::<f64>().sqrt().max(1e-9);
    dir.iter_mut().for_each(|d| *d /= norm);
    let object: [f64; 3] = std::array::from_fn(|c| base[c] + spec.contrast * dir[c]);
    let texture_freq = (rng.random_range(0.15..0.35), rng.random_range(0.15..0.35));
    let texture_phase = rng.random_range(0.0..2.0 * PI);

    let mut noise_rng = substream(spec.seed, "scene", "noise");
    let noise = Normal::new(0.0, spec.noise_level.max(f64::MIN_POSITIVE)).unwrap();
    let mut pixels = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let inside = truth.get(x, y);
            let texture = if inside {
                0.0
            } else {
                2.0 * spec.noise_level
                    * (x as f64 * texture_freq.0 + y as f64 * texture_freq.1 + texture_phase).sin()
            };
            let color = if inside { object } else { base };
            let px: [u8; 3] = std::array::from_fn(|c| {
                let n = if spec.noise_level > 0.0 {
                    noise.sample(&mut noise_rng)
                } else {
                    0.0
                };
                (color[c] + texture + n).round().clamp(0.0, 255.0) as u8
            });
            pixels.push(px);
        }
    }
    Ok(SyntheticScene {
        raster: Raster::new(w, h, pixels)?,
        truth,
    })
}

/// A random disc, rectangle or blob whose area fits the 5%..60% bound.
pub fn random_scene_spec(size: usize, noise_level: f64, contrast: f64, seed: u64) -> SceneSpec {
    let mut rng = substream(seed, "scene", "shape");
    let s = size as f64;
    loop {
        let shape = match rng.random_range(0..3) {
            0 => Shape::Disc {
                cx: rng.random_range(0.35 * s..0.65 * s),
                cy: rng.random_range(0.35 * s..0.65 * s),
                radius: rng.random_range(0.15 * s..0.3 * s),
            },
            1 => {
                let (bw, bh) = (
                    rng.random_range(size / 4..size * 3 / 4),
                    rng.random_range(size / 4..size * 3 / 4),
                );
                let (x0, y0) = (rng.random_range(2..size - bw - 1), rng.random_range(2..size - bh - 1));
                Shape::Rectangle {
                    x0,
                    y0,
                    x1: x0 + bw,
                    y1: y0 + bh,
                }
            }
            _ => Shape::Blob {
                cx: rng.random_range(0.4 * s..0.6 * s),
                cy: rng.random_range(0.4 * s..0.6 * s),
                radius: rng.random_range(0.18 * s..0.28 * s),
                harmonics: (0..3)
                    .map(|_| (rng.random_range(0.0..0.15), rng.random_range(0.0..2.0 * PI)))
                    .collect(),
            },
        };
        let spec = SceneSpec {
            width: size,
            height: size,
            shape,
            noise_level,
            contrast,
            seed,
        };
        let area = BinaryMask::from_fn(size, size, |x, y| spec.shape.contains(x, y)).count_ones();
        let fraction = area as f64 / (size * size) as f64;
        if (MIN_OBJECT_FRACTION..=MAX_OBJECT_FRACTION).contains(&fraction) {
            return spec;
        }
    }
}

// ---------------------------------------------------------------------------
// Workers
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WorkerKind {
    /// Uniform positions, labels from the ground truth.
    Perfect,
    /// Perfect labels, but the click lands at a Gaussian-jittered position.
    Sloppy,
    /// Uniform positions, uniform random labels.
    Spammer,
    /// Perfect positions with inverted labels.
    Adversarial,
}

impl fmt::Display for WorkerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WorkerKind::Perfect => "perfect",
            WorkerKind::Sloppy => "sloppy",
            WorkerKind::Spammer => "spammer",
            WorkerKind::Adversarial => "adversarial",
        })
    }
}

impl FromStr for WorkerKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "perfect" => Ok(WorkerKind::Perfect),
            "sloppy" => Ok(WorkerKind::Sloppy),
            "spammer" => Ok(WorkerKind::Spammer),
            "adversarial" => Ok(WorkerKind::Adversarial),
            _ => Err(format!("unknown worker kind `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorkerModel {
    pub kind: WorkerKind,
    pub n_clicks_per_image: usize,
    /// Pixels; only used by sloppy workers.
    pub jitter_sigma: f64,
    pub seed: u64,
}

impl WorkerModel {
    pub fn new(kind: WorkerKind, n_clicks_per_image: usize, seed: u64) -> Self {
        WorkerModel {
            kind,
            n_clicks_per_image,
            jitter_sigma: 0.0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_clicks_per_image == 0 {
            return Err(Error::InvalidParameter("n_clicks_per_image must be >= 1".into()));
        }
        if !(self.jitter_sigma >= 0.0 && self.jitter_sigma.is_finite()) {
            return Err(Error::InvalidParameter("jitter_sigma must be >= 0".into()));
        }
        Ok(())
    }

    pub fn params(&self) -> String {
        match self.kind {
            WorkerKind::Sloppy => format!(
                "n_clicks={};jitter_sigma={}",
                self.n_clicks_per_image, self.jitter_sigma
            ),
            _ => format!("n_clicks={}", self.n_clicks_per_image),
        }
    }
}

pub fn simulate_clicks(
    model: &WorkerModel,
    scene: &SyntheticScene,
    image_id: &str,
    worker_id: &str,
) -> Result<Vec<ClickRecord>> {
    model.validate()?;
    let mut rng = substream(model.seed, worker_id, image_id);
    let (w, h) = scene.truth.dimensions();
    let jitter = Normal::new(0.0, model.jitter_sigma.max(f64::MIN_POSITIVE)).unwrap();
    let mut clicks = Vec::with_capacity(model.n_clicks_per_image);
    for _ in 0..model.n_clicks_per_image {
        let (x, y) = (rng.random_range(0..w), rng.random_range(0..h));
        let truth = Label::from_bit(scene.truth.get(x, y));
        let (cx, cy, label) = match model.kind {
            WorkerKind::Perfect => (x, y, truth),
            WorkerKind::Adversarial => (x, y, truth.flipped()),
            WorkerKind::Spammer => (x, y, Label::from_bit(rng.random_bool(0.5))),
            WorkerKind::Sloppy => {
                let mut shift = |v: usize, max: usize| {
                    let d = if model.jitter_sigma > 0.0 {
                        jitter.sample(&mut rng)
                    } else {
                        0.0
                    };
                    (v as f64 + d).round().clamp(0.0, (max - 1) as f64) as usize
                };
                let jx = shift(x, w);
                let jy = shift(y, h);
                (jx, jy, truth)
            }
        };
        clicks.push(ClickRecord::new(image_id, worker_id, cx as u32, cy as u32, label));
    }
    Ok(clicks)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkerSpec {
    pub worker_id: String,
    pub model: WorkerModel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RosterEntry {
    pub worker_id: String,
    pub kind: WorkerKind,
    pub params: String,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedTraces {
    pub clicks: Vec<ClickRecord>,
    pub roster: Vec<RosterEntry>,
}

/// Clicks of every worker on every scene, worker-major, scenes in the given order.
pub fn simulate_cohort(workers: &[WorkerSpec], scenes: &[(String, &SyntheticScene)]) -> Result<SimulatedTraces> {
    if workers.is_empty() || scenes.is_empty() {
        return Err(Error::EmptyDataset("a cohort needs at least one worker and one scene".into()));
    }
    let pairs: Vec<(&WorkerSpec, &(String, &SyntheticScene))> = workers
        .iter()
        .flat_map(|w| scenes.iter().map(move |s| (w, s)))
        .collect();
    let per_pair = pairs
        .par_iter()
        .map(|(w, (id, scene))| simulate_clicks(&w.model, scene, id, &w.worker_id))
        .collect::<Result<Vec<_>>>()?;
    let roster = workers
        .iter()
        .map(|w| RosterEntry {
            worker_id: w.worker_id.clone(),
            kind: w.model.kind,
            params: w.model.params(),
            seed: w.model.seed,
        })
        .collect();
    Ok(SimulatedTraces {
        clicks: per_pair.into_iter().flatten().collect(),
        roster,
    })
}

/// Worker counts per kind plus shared click settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CohortSpec {
    pub perfect: usize,
    pub sloppy: usize,
    pub spammers: usize,
    pub adversarial: usize,
    pub clicks_per_image: usize,
    pub jitter_sigma: f64,
}

impl Default for CohortSpec {
    fn default() -> Self {
        CohortSpec {
            perfect: 3,
            sloppy: 3,
            spammers: 2,
            adversarial: 2,
            clicks_per_image: 20,
            jitter_sigma: 3.0,
        }
    }
}

impl CohortSpec {
    pub fn total(&self) -> usize {
        self.perfect + self.sloppy + self.spammers + self.adversarial
    }

    /// Workers named `w01`, `w02`, ... with ids assigned to kinds in a seeded
    /// shuffled order, so id-based tie-breaks carry no information about kind.
    pub fn workers(&self, seed: u64) -> Vec<WorkerSpec> {
        let mut kinds = Vec::with_capacity(self.total());
        for (kind, n) in [
            (WorkerKind::Perfect, self.perfect),
            (WorkerKind::Sloppy, self.sloppy),
            (WorkerKind::Spammer, self.spammers),
            (WorkerKind::Adversarial, self.adversarial),
        ] {
            kinds.extend(std::iter::repeat_n(kind, n));
        }
        kinds.shuffle(&mut substream(seed, "cohort", "ids"));
        let width = self.total().to_string().len().max(2);
        kinds
            .into_iter()
            .enumerate()
            .map(|(i, kind)| WorkerSpec {
                worker_id: format!("w{:0width$}", i + 1),
                model: WorkerModel {
                    kind,
                    n_clicks_per_image: self.clicks_per_image,
                    jitter_sigma: if kind == WorkerKind::Sloppy { self.jitter_sigma } else { 0.0 },
                    seed,
                },
            })
            .collect()
    }
}

/// Test and gold scene counts, scene appearance and the worker cohort.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulationConfig {
    pub n_test: usize,
    pub n_gold: usize,
    pub size: usize,
    pub noise_level: f64,
    pub contrast: f64,
    pub cohort: CohortSpec,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            n_test: 10,
            n_gold: 5,
            size: 64,
            noise_level: 8.0,
            contrast: 80.0,
            cohort: CohortSpec::default(),
        }
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_test == 0 {
            return Err(Error::InvalidParameter("n_test must be >= 1".into()));
        }
        if self.size < MIN_SCENE_SIDE {
            return Err(Error::InvalidParameter(format!("size must be >= {MIN_SCENE_SIDE}")));
        }
        if self.cohort.total() == 0 {
            return Err(Error::InvalidParameter("cohort has no workers".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedDataset {
    /// `t01`, `t02`, ...
    pub test: Vec<(String, SyntheticScene)>,
    /// `g01`, `g02`, ...
    pub gold: Vec<(String, SyntheticScene)>,
    pub traces: SimulatedTraces,
}

fn scene_ids(prefix: &str, n: usize) -> Vec<String> {
    let width = n.to_string().len().max(2);
    (1..=n).map(|i| format!("{prefix}{i:0width$}")).collect()
}

/// Random scenes plus every worker's clicks on both the test and the gold scenes.
pub fn simulate_dataset(config: &SimulationConfig, seed: u64) -> Result<SimulatedDataset> {
    config.validate()?;
    let make = |prefix: &str, n: usize| -> Result<Vec<(String, SyntheticScene)>> {
        scene_ids(prefix, n)
            .into_par_iter()
            .map(|id| {
                let spec = random_scene_spec(
                    config.size,
                    config.noise_level,
                    config.contrast,
                    substream_seed(seed, "scene", &id),
                );
                Ok((id, generate_scene(&spec)?))
            })
            .collect()
    };
    let test = make("t", config.n_test)?;
    let gold = make("g", config.n_gold)?;
    let scenes: Vec<(String, &SyntheticScene)> = test.iter().chain(&gold).map(|(id, s)| (id.clone(), s)).collect();
    let traces = simulate_cohort(&config.cohort.workers(seed), &scenes)?;
    Ok(SimulatedDataset { test, gold, traces })
}

pub const ROSTER_HEADER: [&str; 4] = ["worker_id", "kind", "params", "seed"];

pub fn write_roster_to<W: Write>(writer: W, roster: &[RosterEntry]) -> std::io::Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(ROSTER_HEADER)?;
    for r in roster {
        wtr.write_record([r.worker_id.clone(), r.kind.to_string(), r.params.clone(), r.seed.to_string()])?;
    }
    wtr.flush()
}

pub fn write_roster(path: impl AsRef<Path>, roster: &[RosterEntry]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_roster_to(file, roster).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disc_spec(noise: f64) -> SceneSpec {
        SceneSpec {
            width: 64,
            height: 64,
            shape: Shape::Disc {
                cx: 32.0,
                cy: 32.0,
                radius: 16.0,
            },
            noise_level: noise,
            contrast: 80.0,
            seed: 5,
        }
    }

    #[test]
    fn disc_area_matches_lattice_count() {
        let scene = generate_scene(&disc_spec(4.0)).unwrap();
        // lattice count of pixel centers inside the circle
        let mut count = 0;
        for y in 0..64 {
            for x in 0..64 {
                let (dx, dy) = (x as f64 + 0.5 - 32.0, y as f64 + 0.5 - 32.0);
                if dx * dx + dy * dy <= 256.0 {
                    count += 1;
                }
            }
        }
        assert_eq!(scene.truth.count_ones(), count);
    }

    #[test]
    fn scenes_are_deterministic() {
        let a = generate_scene(&disc_spec(6.0)).unwrap();
        let b = generate_scene(&disc_spec(6.0)).unwrap();
        assert_eq!(a, b);
        let spec = random_scene_spec(48, 5.0, 80.0, 99);
        assert_eq!(spec, random_scene_spec(48, 5.0, 80.0, 99));
    }

    #[test]
    fn zero_noise_background_is_constant() {
        let scene = generate_scene(&disc_spec(0.0)).unwrap();
        let bg: Vec<_> = (0..64 * 64)
            .filter(|&i| !scene.truth.bits()[i])
            .map(|i| scene.raster.pixels()[i])
            .collect();
        assert!(bg.iter().all(|&p| p == bg[0]));
    }

    #[test]
    fn degenerate_scenes_rejected() {
        let mut spec = disc_spec(0.0);
        spec.width = 16;
        assert!(generate_scene(&spec).is_err());
        let mut spec = disc_spec(0.0);
        spec.shape = Shape::Disc {
            cx: 32.0,
            cy: 32.0,
            radius: 3.0,
        };
        assert!(generate_scene(&spec).is_err());
    }

    #[test]
    fn random_specs_respect_area_bounds() {
        for seed in 0..40 {
            let spec = random_scene_spec(64, 5.0, 80.0, seed);
            generate_scene(&spec).unwrap();
        }
    }

    #[test]
    fn substreams_are_independent_of_order() {
        let scene = generate_scene(&disc_spec(0.0)).unwrap();
        let model = WorkerModel::new(WorkerKind::Spammer, 10, 3);
        let a = simulate_clicks(&model, &scene, "img1", "w1").unwrap();
        let _ = simulate_clicks(&model, &scene, "img2", "w1").unwrap();
        assert_eq!(a, simulate_clicks(&model, &scene, "img1", "w1").unwrap());
        assert_ne!(a, simulate_clicks(&model, &scene, "img1", "w2").unwrap());
    }

    #[test]
    fn perfect_and_adversarial_labels() {
        let scene = generate_scene(&disc_spec(0.0)).unwrap();
        let p = simulate_clicks(&WorkerModel::new(WorkerKind::Perfect, 50, 1), &scene, "i", "p").unwrap();
        assert!(p.iter().all(|c| c.label.is_foreground() == scene.truth.get(c.x as usize, c.y as usize)));
        let a = simulate_clicks(&WorkerModel::new(WorkerKind::Adversarial, 50, 1), &scene, "i", "a").unwrap();
        assert!(a.iter().all(|c| c.label.is_foreground() != scene.truth.get(c.x as usize, c.y as usize)));
    }

    #[test]
    fn cohort_shape_and_roster() {
        let scene = generate_scene(&disc_spec(0.0)).unwrap();
        let workers = vec![WorkerSpec {
            worker_id: "w1".into(),
            model: WorkerModel::new(WorkerKind::Perfect, 10, 7),
        }];
        let traces = simulate_cohort(&workers, &[("s1".to_string(), &scene)]).unwrap();
        assert_eq!(traces.clicks.len(), 10);
        assert_eq!(traces.roster[0].params, "n_clicks=10");
        assert!(simulate_cohort(&[], &[("s1".to_string(), &scene)]).is_err());

        let spec = CohortSpec::default();
        let ws = spec.workers(11);
        assert_eq!(ws.len(), 10);
        assert_eq!(ws[0].worker_id, "w01");
        let sloppy = ws.iter().filter(|w| w.model.kind == WorkerKind::Sloppy).count();
        assert_eq!(sloppy, 3);
        assert_eq!(ws, spec.workers(11));
    }
}
