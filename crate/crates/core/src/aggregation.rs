//! Quality-weighted superpixel voting over multiple partitions.
//!
//! For each partition, every foreground click adds its worker's quality `q` to
//! the superpixel under it and every background click adds `1 - q`. Scores are
//! averaged by click count, min–max normalized across the partition, and
//! broadcast to pixels. The per-partition maps are averaged into a foreground
//! map, which is thresholded into the object mask.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::clicks::{check_bounds, ClickRecord};
use crate::error::{Error, Result};
use crate::imaging::{BinaryMask, FloatMap, Raster};
use crate::superpixels::{multiscale_partitions, MultiscaleConfig, Partition};

pub const DEFAULT_THRESHOLD: f64 = 0.56;

/// Clicks plus a quality score for every worker that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedClicks {
    clicks: Vec<ClickRecord>,
    qualities: BTreeMap<String, f64>,
}

impl WeightedClicks {
    pub fn new(clicks: Vec<ClickRecord>, qualities: BTreeMap<String, f64>) -> Result<Self> {
        if let Some((w, q)) = qualities.iter().find(|(_, q)| !(0.0..=1.0).contains(*q)) {
            return Err(Error::InvalidParameter(format!(
                "quality {q} of worker `{w}` outside [0, 1]"
            )));
        }
        if let Some(c) = clicks.iter().find(|c| !qualities.contains_key(&c.worker_id)) {
            return Err(Error::MissingQuality(c.worker_id.clone()));
        }
        Ok(WeightedClicks { clicks, qualities })
    }

    /// Every worker gets the same quality.
    pub fn uniform(clicks: Vec<ClickRecord>, q: f64) -> Result<Self> {
        let qualities = clicks.iter().map(|c| (c.worker_id.clone(), q)).collect();
        WeightedClicks::new(clicks, qualities)
    }

    pub fn clicks(&self) -> &[ClickRecord] {
        &self.clicks
    }

    pub fn qualities(&self) -> &BTreeMap<String, f64> {
        &self.qualities
    }

    pub fn quality(&self, worker_id: &str) -> f64 {
        self.qualities[worker_id]
    }

    /// Contribution of one click to its superpixel's score.
    pub fn contribution(&self, click: &ClickRecord) -> f64 {
        let q = self.quality(&click.worker_id);
        if click.label.is_foreground() {
            q
        } else {
            1.0 - q
        }
    }

    /// Same qualities, restricted to the clicks of one image.
    pub fn for_image(&self, image_id: &str) -> WeightedClicks {
        WeightedClicks {
            clicks: self
                .clicks
                .iter()
                .filter(|c| c.image_id == image_id)
                .cloned()
                .collect(),
            qualities: self.qualities.clone(),
        }
    }

    /// Every clicking worker sits at q = 0.5, where fg and bg clicks weigh the same.
    pub fn is_uninformative(&self) -> bool {
        !self.clicks.is_empty()
            && self
                .clicks
                .iter()
                .all(|c| self.quality(&c.worker_id) == 0.5)
    }
}

/// Range over which per-superpixel averages are min–max normalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalizationScope {
    /// All superpixels, unclicked ones included at 0.
    #[default]
    AllSuperpixels,
    /// Only clicked superpixels set the range; unclicked ones stay at 0.
    ClickedOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AggregationParams {
    pub threshold: f64,
    pub normalization: NormalizationScope,
    pub partitions: MultiscaleConfig,
}

impl Default for AggregationParams {
    fn default() -> Self {
        AggregationParams {
            threshold: DEFAULT_THRESHOLD,
            normalization: NormalizationScope::default(),
            partitions: MultiscaleConfig::default(),
        }
    }
}

impl AggregationParams {
    pub fn validate(&self) -> Result<()> {
        check_threshold(self.threshold)?;
        self.partitions.validate()
    }
}

fn check_threshold(threshold: f64) -> Result<()> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "threshold must lie in (0, 1), got {threshold}"
        )));
    }
    Ok(())
}

/// Per-superpixel mean contribution, `None` where nobody clicked.
pub fn superpixel_scores(partition: &Partition, weighted: &WeightedClicks) -> Result<Vec<Option<f64>>> {
    check_bounds(weighted.clicks(), partition.width(), partition.height())?;
    let mut sum = vec![0.0; partition.count()];
    let mut n = vec![0usize; partition.count()];
    for c in weighted.clicks() {
        let sp = partition.label_at(c.x as usize, c.y as usize) as usize;
        sum[sp] += weighted.contribution(c);
        n[sp] += 1;
    }
    Ok(sum
        .into_iter()
        .zip(n)
        .map(|(s, n)| (n > 0).then(|| s / n as f64))
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMap {
    pub map: FloatMap,
    /// Normalization had a zero range; the map is uniformly 0.
    pub degenerate: bool,
}

pub fn partition_score_map(
    partition: &Partition,
    weighted: &WeightedClicks,
    scope: NormalizationScope,
) -> Result<ScoreMap> {
    let scores = superpixel_scores(partition, weighted)?;
    let ranged: Vec<f64> = match scope {
        NormalizationScope::AllSuperpixels => scores.iter().map(|s| s.unwrap_or(0.0)).collect(),
        NormalizationScope::ClickedOnly => scores.iter().flatten().copied().collect(),
    };
    let min = ranged.iter().copied().fold(f64::INFINITY, f64::min);
    let max = ranged.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (w, h) = partition.dimensions();
    if ranged.is_empty() || max <= min {
        return Ok(ScoreMap {
            map: FloatMap::zeros(w, h),
            degenerate: true,
        });
    }
    let normalized: Vec<f64> = scores
        .iter()
        .map(|s| match s {
            Some(v) => ((v - min) / (max - min)).clamp(0.0, 1.0),
            None => match scope {
                NormalizationScope::AllSuperpixels => ((0.0 - min) / (max - min)).clamp(0.0, 1.0),
                NormalizationScope::ClickedOnly => 0.0,
            },
        })
        .collect();
    let values = partition
        .labels()
        .iter()
        .map(|&l| normalized[l as usize])
        .collect();
    Ok(ScoreMap {
        map: FloatMap::new(w, h, values)?,
        degenerate: false,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForegroundMap {
    pub map: FloatMap,
    pub warnings: Vec<String>,
}

/// Pixelwise mean of the per-partition score maps.
pub fn foreground_map<'a>(
    partitions: impl IntoIterator<Item = &'a Partition>,
    weighted: &WeightedClicks,
    scope: NormalizationScope,
) -> Result<ForegroundMap> {
    let mut acc: Option<Vec<f64>> = None;
    let mut dims = (0, 0);
    let mut n = 0usize;
    let mut warnings = Vec::new();
    for (i, partition) in partitions.into_iter().enumerate() {
        if n > 0 && partition.dimensions() != dims {
            return Err(Error::DimensionMismatch {
                expected: dims,
                found: partition.dimensions(),
            });
        }
        dims = partition.dimensions();
        let sm = partition_score_map(partition, weighted, scope)?;
        if sm.degenerate {
            warnings.push(format!("partition {i}: score range is zero, map set to 0"));
        }
        let acc = acc.get_or_insert_with(|| vec![0.0; dims.0 * dims.1]);
        for (a, v) in acc.iter_mut().zip(sm.map.values()) {
            *a += v;
        }
        n += 1;
    }
    let acc = acc.ok_or_else(|| Error::InvalidParameter("foreground map needs at least one partition".into()))?;
    let values = acc.into_iter().map(|s| (s / n as f64).clamp(0.0, 1.0)).collect();
    if weighted.is_uninformative() {
        warnings.push("every worker has q = 0.5; the map carries no label information".into());
    }
    Ok(ForegroundMap {
        map: FloatMap::new(dims.0, dims.1, values)?,
        warnings,
    })
}

/// Bit set iff value > threshold.
pub fn binarize(map: &FloatMap, threshold: f64) -> Result<BinaryMask> {
    check_threshold(threshold)?;
    let bits = map.values().iter().map(|&v| v > threshold).collect();
    BinaryMask::new(map.width(), map.height(), bits)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Aggregation {
    pub mask: BinaryMask,
    pub map: FloatMap,
    pub warnings: Vec<String>,
}

/// Aggregation over already computed partitions.
pub fn aggregate_partitions<'a>(
    partitions: impl IntoIterator<Item = &'a Partition>,
    weighted: &WeightedClicks,
    threshold: f64,
    scope: NormalizationScope,
) -> Result<Aggregation> {
    check_threshold(threshold)?;
    let fg = foreground_map(partitions, weighted, scope)?;
    Ok(Aggregation {
        mask: binarize(&fg.map, threshold)?,
        map: fg.map,
        warnings: fg.warnings,
    })
}

/// Multiscale partitions, foreground map, binarization.
pub fn aggregate(raster: &Raster, weighted: &WeightedClicks, params: &AggregationParams) -> Result<Aggregation> {
    params.validate()?;
    let ms = multiscale_partitions(raster, &params.partitions)?;
    let mut out = aggregate_partitions(ms.partitions(), weighted, params.threshold, params.normalization)?;
    out.warnings.splice(0..0, ms.warnings);
    Ok(out)
}
