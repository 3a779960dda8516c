//! Worker quality from gold-standard images: click error rate, personal
//! Jaccard, the quality score `q`, and top-N worker selection.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs::File;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aggregation::WeightedClicks;
use crate::backend::SegmentationBackend;
use crate::clicks::ClickRecord;
use crate::dataset::PreparedImage;
use crate::error::{Error, Result};
use crate::imaging::{jaccard, BinaryMask};

/// Quality given to workers with no gold-standard clicks.
pub const NEUTRAL_QUALITY: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkerProfile {
    pub worker_id: String,
    pub n_training_clicks: usize,
    pub error_rate: f64,
    pub personal_jaccard: f64,
    pub q: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankingCriterion {
    ByJaccard,
    ByErrorRate,
}

impl fmt::Display for RankingCriterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RankingCriterion::ByJaccard => "by_jaccard",
            RankingCriterion::ByErrorRate => "by_error_rate",
        })
    }
}

impl FromStr for RankingCriterion {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "by_jaccard" => Ok(RankingCriterion::ByJaccard),
            "by_error_rate" => Ok(RankingCriterion::ByErrorRate),
            _ => Err(format!("unknown ranking criterion `{s}`")),
        }
    }
}

fn gold_truth<'a>(gold: &'a [PreparedImage], image_id: &str) -> Result<&'a BinaryMask> {
    gold.iter()
        .find(|g| g.id() == image_id)
        .ok_or_else(|| Error::UnknownImage(image_id.to_string()))?
        .image
        .truth()
}

/// True when some pixel within `radius` of `(x, y)` has truth value `bit`.
fn label_supported(truth: &BinaryMask, x: usize, y: usize, bit: bool, radius: f64) -> bool {
    if truth.get(x, y) == bit {
        return true;
    }
    let r = radius.floor() as isize;
    let (w, h) = (truth.width() as isize, truth.height() as isize);
    for dy in -r..=r {
        for dx in -r..=r {
            let (nx, ny) = (x as isize + dx, y as isize + dy);
            if (dx * dx + dy * dy) as f64 <= radius * radius
                && (0..w).contains(&nx)
                && (0..h).contains(&ny)
                && truth.get(nx as usize, ny as usize) == bit
            {
                return true;
            }
        }
    }
    false
}

/// Fraction of clicks whose label contradicts the ground truth under them. A
/// click within `tolerance_radius` pixels of a truth pixel carrying its label
/// counts as correct. No clicks gives 1.
pub fn click_error_rate(clicks: &[ClickRecord], gold: &[PreparedImage], tolerance_radius: f64) -> Result<f64> {
    if clicks.is_empty() {
        return Ok(1.0);
    }
    let mut errors = 0usize;
    for (i, c) in clicks.iter().enumerate() {
        let truth = gold_truth(gold, &c.image_id)?;
        if !c.in_bounds(truth.width(), truth.height()) {
            return Err(Error::ClickOutOfBounds {
                index: i,
                x: c.x,
                y: c.y,
                width: truth.width(),
                height: truth.height(),
            });
        }
        if !label_supported(truth, c.x as usize, c.y as usize, c.label.is_foreground(), tolerance_radius) {
            errors += 1;
        }
    }
    Ok(errors as f64 / clicks.len() as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PersonalJaccard {
    pub score: f64,
    pub per_image: Vec<(String, f64)>,
    pub diagnostic: Option<String>,
}

/// Mean Jaccard over all gold images of masks segmented from this worker's
/// clicks alone at q = 1; gold images the worker never clicked score 0.
pub fn personal_jaccard(
    worker_clicks: &[ClickRecord],
    gold: &[PreparedImage],
    backend: &dyn SegmentationBackend,
) -> Result<PersonalJaccard> {
    if gold.is_empty() {
        return Err(Error::EmptyDataset("no gold images".into()));
    }
    for c in worker_clicks {
        gold_truth(gold, &c.image_id)?;
    }
    if worker_clicks.is_empty() {
        return Ok(PersonalJaccard {
            score: 0.0,
            per_image: gold.iter().map(|g| (g.id().to_string(), 0.0)).collect(),
            diagnostic: Some("worker has no clicks on gold images".into()),
        });
    }
    let weighted = WeightedClicks::uniform(worker_clicks.to_vec(), 1.0)?;
    let mut per_image = Vec::with_capacity(gold.len());
    for g in gold {
        let own = weighted.for_image(g.id());
        let j = if own.clicks().is_empty() {
            0.0
        } else {
            jaccard(&backend.segment(g, &own)?, g.image.truth()?)?
        };
        per_image.push((g.id().to_string(), j));
    }
    let score = per_image.iter().map(|(_, j)| j).sum::<f64>() / per_image.len() as f64;
    Ok(PersonalJaccard {
        score,
        per_image,
        diagnostic: None,
    })
}

/// `q` equals the personal Jaccard, clamped to `[0, 1]`; workers without gold
/// clicks get the neutral 0.5.
pub fn quality_score(profile: &WorkerProfile) -> f64 {
    if profile.n_training_clicks == 0 {
        NEUTRAL_QUALITY
    } else {
        profile.personal_jaccard.clamp(0.0, 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QualityConfig {
    pub tolerance_radius: f64,
}

impl Default for QualityConfig {
    fn default() -> Self {
        QualityConfig {
            tolerance_radius: 0.0,
        }
    }
}

/// Profiles for every worker in `workers`, computed from their clicks on gold
/// images. Clicks on other images are ignored. Output follows `workers` order.
pub fn compute_profiles(
    workers: &[String],
    clicks: &[ClickRecord],
    gold: &[PreparedImage],
    backend: &dyn SegmentationBackend,
    config: &QualityConfig,
) -> Result<Vec<WorkerProfile>> {
    let gold_ids: BTreeSet<&str> = gold.iter().map(|g| g.id()).collect();
    let mut by_worker: BTreeMap<&str, Vec<ClickRecord>> = BTreeMap::new();
    for c in clicks.iter().filter(|c| gold_ids.contains(c.image_id.as_str())) {
        by_worker.entry(c.worker_id.as_str()).or_default().push(c.clone());
    }
    workers
        .par_iter()
        .map(|w| {
            let own = by_worker.get(w.as_str()).map(Vec::as_slice).unwrap_or(&[]);
            let error_rate = click_error_rate(own, gold, config.tolerance_radius)?;
            let pj = personal_jaccard(own, gold, backend)?;
            if let Some(d) = &pj.diagnostic {
                log::warn!("worker `{w}`: {d}");
            }
            let mut profile = WorkerProfile {
                worker_id: w.clone(),
                n_training_clicks: own.len(),
                error_rate,
                personal_jaccard: pj.score,
                q: 0.0,
            };
            profile.q = quality_score(&profile);
            Ok(profile)
        })
        .collect()
}

/// Descending personal Jaccard or ascending error rate; ties by worker id.
pub fn rank_workers(profiles: &[WorkerProfile], criterion: RankingCriterion) -> Vec<String> {
    let mut sorted: Vec<&WorkerProfile> = profiles.iter().collect();
    sorted.sort_by(|a, b| {
        let primary = match criterion {
            RankingCriterion::ByJaccard => b.personal_jaccard.total_cmp(&a.personal_jaccard),
            RankingCriterion::ByErrorRate => a.error_rate.total_cmp(&b.error_rate),
        };
        primary.then_with(|| a.worker_id.cmp(&b.worker_id))
    });
    sorted.into_iter().map(|p| p.worker_id.clone()).collect()
}

pub fn select_top_n(ranked: &[String], n: usize) -> Result<BTreeSet<String>> {
    if n == 0 || n > ranked.len() {
        return Err(Error::InvalidParameter(format!(
            "top-n must lie in 1..={}, got {n}",
            ranked.len()
        )));
    }
    Ok(ranked[..n].iter().cloned().collect())
}

pub fn qualities(profiles: &[WorkerProfile]) -> BTreeMap<String, f64> {
    profiles.iter().map(|p| (p.worker_id.clone(), p.q)).collect()
}

pub const PROFILE_HEADER: [&str; 5] = ["worker_id", "n_training_clicks", "error_rate", "personal_jaccard", "q"];

pub fn write_profiles_to<W: Write>(writer: W, profiles: &[WorkerProfile]) -> std::io::Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(PROFILE_HEADER)?;
    for p in profiles {
        wtr.write_record([
            p.worker_id.clone(),
            p.n_training_clicks.to_string(),
            format!("{:.6}", p.error_rate),
            format!("{:.6}", p.personal_jaccard),
            format!("{:.6}", p.q),
        ])?;
    }
    wtr.flush()
}

pub fn write_profiles(path: impl AsRef<Path>, profiles: &[WorkerProfile]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_profiles_to(file, profiles).map_err(|e| Error::io(path, e))
}

pub fn read_profiles(path: impl AsRef<Path>) -> Result<Vec<WorkerProfile>> {
    let path = path.as_ref();
    let origin = path.display().to_string();
    let mut rdr = csv::Reader::from_path(path).map_err(|e| Error::Csv {
        origin: origin.clone(),
        line: 0,
        reason: e.to_string(),
    })?;
    let mut out = Vec::new();
    for row in rdr.deserialize::<WorkerProfile>() {
        let row = row.map_err(|e| Error::Csv {
            origin: origin.clone(),
            line: e.position().map_or(0, |p| p.line()),
            reason: e.to_string(),
        })?;
        out.push(row);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::AggregationBackend;
    use crate::clicks::Label::{self, Background as Bg, Foreground as Fg};
    use crate::dataset::LabeledImage;
    use crate::imaging::Raster;
    use crate::superpixels::MultiscaleConfig;

    fn click(image: &str, x: u32, y: u32, label: Label) -> ClickRecord {
        ClickRecord::new(image, "w", x, y, label)
    }

    /// 8x8 image whose left half is the object (and a differently colored region).
    fn gold() -> Vec<PreparedImage> {
        let raster = Raster::new(
            8,
            8,
            (0..64).map(|i| if i % 8 < 4 { [200, 30, 30] } else { [20, 20, 90] }).collect(),
        )
        .unwrap();
        let truth = BinaryMask::from_fn(8, 8, |x, _| x < 4);
        let config = MultiscaleConfig {
            felzenszwalb_k: vec![100.0],
            felzenszwalb_sigma: 0.0,
            felzenszwalb_min_size: 1,
            slic_region_sizes: vec![4],
            ..Default::default()
        };
        ["g1", "g2"]
            .iter()
            .map(|id| {
                PreparedImage::prepare(LabeledImage::new(*id, raster.clone(), Some(truth.clone())).unwrap(), &config)
                    .unwrap()
            })
            .collect()
    }

    fn profile(id: &str, err: f64, pj: f64) -> WorkerProfile {
        WorkerProfile {
            worker_id: id.into(),
            n_training_clicks: 10,
            error_rate: err,
            personal_jaccard: pj,
            q: pj,
        }
    }

    #[test]
    fn error_rate_counts() {
        let g = gold();
        let good = [click("g1", 0, 0, Fg), click("g1", 7, 7, Bg)];
        assert_eq!(click_error_rate(&good, &g, 0.0).unwrap(), 0.0);
        let bad = [click("g1", 0, 0, Bg), click("g2", 7, 7, Fg)];
        assert_eq!(click_error_rate(&bad, &g, 0.0).unwrap(), 1.0);
        let mixed = [click("g1", 0, 0, Fg), click("g1", 1, 0, Fg), click("g1", 6, 0, Bg), click("g1", 6, 1, Fg)];
        assert_eq!(click_error_rate(&mixed, &g, 0.0).unwrap(), 0.25);
        assert_eq!(click_error_rate(&[], &g, 0.0).unwrap(), 1.0);
        assert!(matches!(
            click_error_rate(&[click("nope", 0, 0, Fg)], &g, 0.0),
            Err(Error::UnknownImage(_))
        ));
    }

    #[test]
    fn tolerance_radius_forgives_boundary_clicks() {
        let g = gold();
        let near = [click("g1", 4, 3, Fg)];
        assert_eq!(click_error_rate(&near, &g, 0.0).unwrap(), 1.0);
        assert_eq!(click_error_rate(&near, &g, 1.0).unwrap(), 0.0);
        let far = [click("g1", 6, 3, Fg)];
        assert_eq!(click_error_rate(&far, &g, 1.5).unwrap(), 1.0);
    }

    #[test]
    fn personal_jaccard_rules() {
        let g = gold();
        let backend = AggregationBackend::default();
        let none = personal_jaccard(&[], &g, &backend).unwrap();
        assert_eq!(none.score, 0.0);
        assert!(none.diagnostic.is_some());

        let clicks = [click("g1", 1, 1, Fg), click("g1", 6, 6, Bg), click("g1", 2, 6, Fg), click("g1", 5, 2, Bg)];
        let one = personal_jaccard(&clicks, &g, &backend).unwrap();
        assert_eq!(one.per_image[0].1, 1.0);
        // g2 was never clicked and contributes 0
        assert_eq!(one.per_image[1].1, 0.0);
        assert_eq!(one.score, 0.5);
    }

    #[test]
    fn quality_score_rules() {
        assert_eq!(quality_score(&profile("a", 0.1, 0.86)), 0.86);
        let mut p = profile("a", 1.0, 0.0);
        p.n_training_clicks = 0;
        assert_eq!(quality_score(&p), 0.5);
    }

    #[test]
    fn ranking_and_selection() {
        let ps = [profile("B", 0.5, 0.4), profile("A", 0.1, 0.9)];
        assert_eq!(rank_workers(&ps, RankingCriterion::ByJaccard), vec!["A", "B"]);
        assert_eq!(rank_workers(&ps, RankingCriterion::ByErrorRate), vec!["A", "B"]);
        let tied = [profile("z", 0.2, 0.5), profile("m", 0.2, 0.5), profile("a", 0.2, 0.5)];
        assert_eq!(rank_workers(&tied, RankingCriterion::ByJaccard), vec!["a", "m", "z"]);
        assert_eq!(rank_workers(&tied, RankingCriterion::ByErrorRate), vec!["a", "m", "z"]);

        let ranked = rank_workers(&ps, RankingCriterion::ByJaccard);
        assert_eq!(select_top_n(&ranked, 1).unwrap(), BTreeSet::from(["A".to_string()]));
        assert_eq!(select_top_n(&ranked, 2).unwrap().len(), 2);
        assert!(select_top_n(&ranked, 0).is_err());
        assert!(select_top_n(&ranked, 3).is_err());
    }

    #[test]
    fn profiles_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.csv");
        let ps = vec![profile("a", 0.125, 0.5), profile("b", 1.0, 0.0)];
        write_profiles(&path, &ps).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("worker_id,n_training_clicks,error_rate,personal_jaccard,q\n"));
        assert_eq!(read_profiles(&path).unwrap(), ps);
    }

    #[test]
    fn absent_worker_gets_neutral_profile() {
        let g = gold();
        let workers = vec!["w".to_string(), "ghost".to_string()];
        let clicks = vec![click("g1", 1, 1, Fg), click("test_img", 1, 1, Fg)];
        let ps = compute_profiles(&workers, &clicks, &g, &AggregationBackend::default(), &QualityConfig::default())
            .unwrap();
        assert_eq!(ps[0].n_training_clicks, 1);
        assert_eq!(ps[1].n_training_clicks, 0);
        assert_eq!(ps[1].error_rate, 1.0);
        assert_eq!(ps[1].q, 0.5);
    }
}
