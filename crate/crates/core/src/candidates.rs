//! Candidate-combination segmentation.
//!
//! Object candidates are unions of up to three connected superpixels taken from
//! each partition (or masks loaded from disk). A greedy loop unions in the
//! candidate that most improves agreement with the clicks.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fs;
use std::hash::{Hash, Hasher};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use crate::aggregation::WeightedClicks;
use crate::backend::SegmentationBackend;
use crate::clicks::ClickRecord;
use crate::dataset::PreparedImage;
use crate::error::{Error, Result};
use crate::imaging::{load_mask, BinaryMask};
use crate::superpixels::Partition;

pub const DEFAULT_MAX_CANDIDATES: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Generated,
    Loaded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub mask: BinaryMask,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSet {
    candidates: Vec<Candidate>,
}

impl CandidateSet {
    pub fn new(candidates: Vec<Candidate>) -> Result<Self> {
        let first = candidates
            .first()
            .ok_or_else(|| Error::InvalidParameter("candidate set is empty".into()))?;
        let dims = first.mask.dimensions();
        if let Some(c) = candidates.iter().find(|c| c.mask.dimensions() != dims) {
            return Err(Error::DimensionMismatch {
                expected: dims,
                found: c.mask.dimensions(),
            });
        }
        Ok(CandidateSet { candidates })
    }

    pub fn from_masks(masks: Vec<BinaryMask>, provenance: Provenance) -> Result<Self> {
        CandidateSet::new(
            masks
                .into_iter()
                .map(|mask| Candidate { mask, provenance })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn candidates(&self) -> &[Candidate] {
        &self.candidates
    }

    pub fn dimensions(&self) -> (usize, usize) {
        self.candidates[0].mask.dimensions()
    }
}

/// Superpixel id sets of size 1..=3 whose union is 4-connected, in a fixed order:
/// singletons, then adjacent pairs, then connected triples, each lexicographic.
pub fn connected_groups(partition: &Partition) -> Vec<Vec<u32>> {
    let adj = partition.adjacency();
    let mut groups: Vec<Vec<u32>> = (0..partition.count() as u32).map(|i| vec![i]).collect();
    for (a, nbs) in adj.iter().enumerate() {
        for &b in nbs.iter().filter(|&&b| b > a as u32) {
            groups.push(vec![a as u32, b]);
        }
    }
    let mut triples = BTreeSet::new();
    for (v, nbs) in adj.iter().enumerate() {
        for (i, &u) in nbs.iter().enumerate() {
            for &w in &nbs[i + 1..] {
                let mut t = [u, v as u32, w];
                t.sort_unstable();
                triples.insert(t);
            }
        }
    }
    groups.extend(triples.into_iter().map(|t| t.to_vec()));
    groups
}

/// Deduplicated superpixel-union candidates from every partition, truncated to
/// `max_candidates` by descending area (ties keep generation order).
pub fn generate_candidates<'a>(
    partitions: impl IntoIterator<Item = &'a Partition>,
    max_candidates: usize,
) -> Result<CandidateSet> {
    let mut seen: HashSet<Vec<u32>> = HashSet::new();
    let mut pixel_sets: Vec<Vec<u32>> = Vec::new();
    let mut dims = None;
    for partition in partitions {
        match dims {
            None => dims = Some(partition.dimensions()),
            Some(d) if d != partition.dimensions() => {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: partition.dimensions(),
                })
            }
            _ => {}
        }
        let members = partition.members();
        for group in connected_groups(partition) {
            let mut pixels: Vec<u32> = group
                .iter()
                .flat_map(|sp| members[sp].iter().map(|&p| p as u32))
                .collect();
            pixels.sort_unstable();
            if seen.insert(pixels.clone()) {
                pixel_sets.push(pixels);
            }
        }
    }
    let (w, h) = dims.ok_or_else(|| Error::InvalidParameter("need at least one partition".into()))?;
    pixel_sets.sort_by(|a, b| b.len().cmp(&a.len()));
    pixel_sets.truncate(max_candidates.max(1));
    let masks = pixel_sets
        .into_iter()
        .map(|pixels| {
            let mut bits = vec![false; w * h];
            for p in pixels {
                bits[p as usize] = true;
            }
            BinaryMask::new(w, h, bits)
        })
        .collect::<Result<Vec<_>>>()?;
    CandidateSet::from_masks(masks, Provenance::Generated)
}

/// Reads `<dir>/<image_id>/cand_<k>.{pgm,png}` ordered by `k`.
pub fn load_candidates(dir: &Path, image_id: &str) -> Result<CandidateSet> {
    let sub = dir.join(image_id);
    let entries = fs::read_dir(&sub).map_err(|e| Error::io(&sub, e))?;
    let mut indexed = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(&sub, e))?.path();
        let k = path
            .file_stem()
            .and_then(|s| s.to_str())
            .and_then(|s| s.strip_prefix("cand_"))
            .and_then(|k| k.parse::<usize>().ok());
        if let Some(k) = k {
            indexed.push((k, path));
        }
    }
    indexed.sort();
    let masks = indexed
        .into_iter()
        .map(|(_, p)| load_mask(p))
        .collect::<Result<Vec<_>>>()?;
    CandidateSet::from_masks(masks, Provenance::Loaded)
}

/// Fraction of clicks consistent with the mask: fg on 1-pixels, bg on 0-pixels.
/// Zero clicks score 0.
pub fn score_candidate(mask: &BinaryMask, clicks: &[ClickRecord]) -> f64 {
    if clicks.is_empty() {
        return 0.0;
    }
    let agree = clicks
        .iter()
        .filter(|c| mask.get(c.x as usize, c.y as usize) == c.label.is_foreground())
        .count();
    agree as f64 / clicks.len() as f64
}

/// Greedy union starting from the empty mask. Each step adds the candidate with
/// the largest strict score gain, ties to the smaller index.
pub fn combine_candidates(candidates: &CandidateSet, clicks: &[ClickRecord]) -> Result<BinaryMask> {
    let (w, h) = candidates.dimensions();
    crate::clicks::check_bounds(clicks, w, h)?;
    let mut result = BinaryMask::empty(w, h);
    if clicks.is_empty() {
        return Ok(result);
    }
    let mut clicks_at: HashMap<usize, Vec<usize>> = HashMap::new();
    for (i, c) in clicks.iter().enumerate() {
        clicks_at.entry(c.y as usize * w + c.x as usize).or_default().push(i);
    }
    let covers: Vec<Vec<usize>> = candidates
        .candidates()
        .iter()
        .map(|cand| {
            let mut idx: Vec<usize> = clicks_at
                .iter()
                .filter(|(&p, _)| cand.mask.bits()[p])
                .flat_map(|(_, v)| v.iter().copied())
                .collect();
            idx.sort_unstable();
            idx
        })
        .collect();
    let mut covered = vec![false; clicks.len()];
    loop {
        let mut best: Option<(usize, i64)> = None;
        for (k, cov) in covers.iter().enumerate() {
            let gain: i64 = cov
                .iter()
                .filter(|&&i| !covered[i])
                .map(|&i| if clicks[i].label.is_foreground() { 1 } else { -1 })
                .sum();
            if gain > 0 && best.is_none_or(|(_, g)| gain > g) {
                best = Some((k, gain));
            }
        }
        let Some((k, _)) = best else { break };
        result.union_with(&candidates.candidates()[k].mask)?;
        for &i in &covers[k] {
            covered[i] = true;
        }
    }
    Ok(result)
}

/// Candidate combination over a prepared image's partitions. Candidates are
/// cached per image id and partition contents; qualities are ignored.
pub struct CandidateBackend {
    pub max_candidates: usize,
    /// When set, candidates are read from `<dir>/<image_id>/cand_<k>.pgm` instead of generated.
    pub candidates_dir: Option<PathBuf>,
    cache: Mutex<HashMap<(String, u64), Arc<CandidateSet>>>,
}

fn partition_fingerprint(image: &PreparedImage) -> u64 {
    let mut h = std::collections::hash_map::DefaultHasher::new();
    for p in image.partitions() {
        p.dimensions().hash(&mut h);
        p.labels().hash(&mut h);
    }
    h.finish()
}

impl CandidateBackend {
    pub fn new(max_candidates: usize) -> Self {
        CandidateBackend {
            max_candidates,
            candidates_dir: None,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn from_dir(dir: impl Into<PathBuf>) -> Self {
        CandidateBackend {
            candidates_dir: Some(dir.into()),
            ..CandidateBackend::new(DEFAULT_MAX_CANDIDATES)
        }
    }

    pub fn candidates_for(&self, image: &PreparedImage) -> Result<Arc<CandidateSet>> {
        let key = (image.id().to_string(), partition_fingerprint(image));
        if let Some(c) = self.cache.lock().unwrap().get(&key) {
            return Ok(Arc::clone(c));
        }
        let set = Arc::new(match &self.candidates_dir {
            Some(dir) => load_candidates(dir, image.id())?,
            None => generate_candidates(image.partitions(), self.max_candidates)?,
        });
        if set.dimensions() != image.image.raster.dimensions() {
            return Err(Error::DimensionMismatch {
                expected: image.image.raster.dimensions(),
                found: set.dimensions(),
            });
        }
        self.cache.lock().unwrap().insert(key, Arc::clone(&set));
        Ok(set)
    }
}

impl Default for CandidateBackend {
    fn default() -> Self {
        CandidateBackend::new(DEFAULT_MAX_CANDIDATES)
    }
}

impl SegmentationBackend for CandidateBackend {
    fn name(&self) -> &str {
        "candidates"
    }

    fn segment(&self, image: &PreparedImage, weighted: &WeightedClicks) -> Result<BinaryMask> {
        let set = self.candidates_for(image)?;
        combine_candidates(&set, weighted.clicks())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clicks::Label::{self, Background as Bg, Foreground as Fg};

    fn click(x: u32, y: u32, label: Label) -> ClickRecord {
        ClickRecord::new("img", "w", x, y, label)
    }

    #[test]
    fn single_superpixel_gives_full_frame() {
        let p = Partition::new(3, 2, vec![0; 6]).unwrap();
        let set = generate_candidates([&p], 100).unwrap();
        assert_eq!(set.len(), 1);
        assert_eq!(set.candidates()[0].mask.count_ones(), 6);
        assert_eq!(set.candidates()[0].provenance, Provenance::Generated);
    }

    #[test]
    fn two_superpixels_give_three_candidates() {
        let p = Partition::new(3, 1, vec![0, 1, 1]).unwrap();
        let set = generate_candidates([&p], 100).unwrap();
        let areas: Vec<usize> = set.candidates().iter().map(|c| c.mask.count_ones()).collect();
        assert_eq!(areas, vec![3, 2, 1]);
        // duplicates across partitions collapse
        let again = generate_candidates([&p, &p], 100).unwrap();
        assert_eq!(again.len(), 3);
        assert_eq!(generate_candidates([&p], 2).unwrap().len(), 2);
    }

    #[test]
    fn score_examples() {
        let mask = BinaryMask::from_fn(4, 1, |x, _| x < 2);
        assert_eq!(score_candidate(&mask, &[click(0, 0, Fg), click(3, 0, Bg)]), 1.0);
        assert_eq!(score_candidate(&mask, &[click(0, 0, Bg), click(3, 0, Fg)]), 0.0);
        let c = [click(0, 0, Fg), click(1, 0, Fg), click(2, 0, Bg), click(3, 0, Fg)];
        assert_eq!(score_candidate(&mask, &c), 0.75);
        assert_eq!(score_candidate(&mask, &[]), 0.0);
    }

    #[test]
    fn combine_picks_clicked_object() {
        let object = BinaryMask::from_fn(4, 4, |x, y| x < 2 && y < 2);
        let set = CandidateSet::from_masks(vec![object.clone()], Provenance::Loaded).unwrap();
        let clicks = [click(0, 0, Fg), click(1, 1, Fg), click(3, 3, Bg)];
        assert_eq!(combine_candidates(&set, &clicks).unwrap(), object);
        assert!(combine_candidates(&set, &[]).unwrap().is_empty());
    }

    #[test]
    fn combine_unions_and_stops() {
        let a = BinaryMask::from_fn(4, 1, |x, _| x == 0);
        let b = BinaryMask::from_fn(4, 1, |x, _| x == 1);
        let c = BinaryMask::from_fn(4, 1, |x, _| x >= 2);
        let set = CandidateSet::from_masks(vec![a, b, c], Provenance::Generated).unwrap();
        let clicks = [click(0, 0, Fg), click(1, 0, Fg), click(2, 0, Bg), click(3, 0, Fg)];
        let m = combine_candidates(&set, &clicks).unwrap();
        // c has gain 0 (one fg, one bg) and is not added
        assert_eq!(m.bits(), &[true, true, false, false]);
    }

    #[test]
    fn out_of_bounds_clicks_rejected() {
        let set = CandidateSet::from_masks(vec![BinaryMask::empty(2, 2)], Provenance::Loaded).unwrap();
        assert!(combine_candidates(&set, &[click(5, 0, Fg)]).is_err());
    }

    #[test]
    fn empty_or_mismatched_sets_rejected() {
        assert!(CandidateSet::new(vec![]).is_err());
        let masks = vec![BinaryMask::empty(2, 2), BinaryMask::empty(3, 2)];
        assert!(CandidateSet::from_masks(masks, Provenance::Loaded).is_err());
    }

    #[test]
    fn load_from_directory() {
        let dir = tempfile::tempdir().unwrap();
        let sub = dir.path().join("img7");
        fs::create_dir(&sub).unwrap();
        let m0 = BinaryMask::from_fn(3, 3, |x, _| x == 0);
        let m1 = BinaryMask::from_fn(3, 3, |_, y| y == 2);
        crate::imaging::save_mask(&m1, sub.join("cand_10.pgm")).unwrap();
        crate::imaging::save_mask(&m0, sub.join("cand_2.pgm")).unwrap();
        fs::write(sub.join("notes.txt"), "x").unwrap();
        let set = load_candidates(dir.path(), "img7").unwrap();
        assert_eq!(set.len(), 2);
        assert_eq!(set.candidates()[0].mask, m0);
        assert_eq!(set.candidates()[1].mask, m1);
        assert_eq!(set.candidates()[0].provenance, Provenance::Loaded);
    }
}
