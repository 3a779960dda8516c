//! Batch experiments over labeled test images: filter comparison, top-N
//! worker sweeps, quality weighting and threshold calibration.
//!
//! Every experiment evaluates images in parallel and assembles its records
//! in image order, so reports are byte-stable for fixed inputs.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs::File;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::aggregation::{binarize, foreground_map, NormalizationScope, WeightedClicks};
use crate::backend::SegmentationBackend;
use crate::clicks::ClickRecord;
use crate::dataset::PreparedImage;
use crate::error::{Error, Result};
use crate::filtering::ClickFilter;
use crate::imaging::{jaccard, FloatMap};
use crate::quality::{rank_workers, select_top_n, RankingCriterion, WorkerProfile, NEUTRAL_QUALITY};
use crate::superpixels::{felzenszwalb, slic, FelzParams, Partition, SlicParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JaccardRecord {
    pub image_id: String,
    pub method: String,
    pub n_users: usize,
    pub jaccard: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub method: String,
    pub n_users: usize,
    pub mean_jaccard: f64,
    /// Relative to the baseline method with the same `n_users`, in percent.
    pub gain_pct: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    /// Hex SHA-256 of the serialized run configuration.
    pub config_hash: String,
    pub seeds: Vec<u64>,
    pub toolkit_version: String,
}

impl Provenance {
    pub fn new(config_json: &str, seeds: Vec<u64>) -> Self {
        let digest = Sha256::digest(config_json.as_bytes());
        Provenance {
            config_hash: digest.iter().map(|b| format!("{b:02x}")).collect(),
            seeds,
            toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

impl Default for Provenance {
    fn default() -> Self {
        Provenance::new("{}", Vec::new())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub records: Vec<JaccardRecord>,
    pub summary: Vec<SummaryRow>,
    pub provenance: Provenance,
}

/// Means grouped by `(method, n_users)` in order of first appearance.
pub fn summarize(records: &[JaccardRecord], baseline: Option<&str>) -> Vec<SummaryRow> {
    let mut order: Vec<(String, usize)> = Vec::new();
    let mut sums: BTreeMap<(String, usize), (f64, usize)> = BTreeMap::new();
    for r in records {
        let key = (r.method.clone(), r.n_users);
        let entry = sums.entry(key.clone()).or_insert_with(|| {
            order.push(key);
            (0.0, 0)
        });
        entry.0 += r.jaccard;
        entry.1 += 1;
    }
    let mean = |k: &(String, usize)| sums[k].0 / sums[k].1 as f64;
    order
        .iter()
        .map(|k| {
            let m = mean(k);
            let gain_pct = baseline.and_then(|b| {
                let base_key = (b.to_string(), k.1);
                let base = sums.get(&base_key).map(|&(s, n)| s / n as f64)?;
                (base > 0.0).then(|| (m - base) / base * 100.0)
            });
            SummaryRow {
                method: k.0.clone(),
                n_users: k.1,
                mean_jaccard: m,
                gain_pct,
            }
        })
        .collect()
}

impl ExperimentReport {
    pub fn from_records(records: Vec<JaccardRecord>, baseline: Option<&str>, provenance: Provenance) -> Self {
        let summary = summarize(&records, baseline);
        ExperimentReport {
            records,
            summary,
            provenance,
        }
    }

    pub fn mean(&self, method: &str) -> Option<f64> {
        self.summary.iter().find(|r| r.method == method).map(|r| r.mean_jaccard)
    }

    pub fn write_records_to<W: Write>(&self, writer: W) -> std::io::Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(RECORD_HEADER)?;
        for r in &self.records {
            wtr.write_record([
                r.image_id.clone(),
                r.method.clone(),
                r.n_users.to_string(),
                format!("{:.6}", r.jaccard),
            ])?;
        }
        wtr.flush()
    }

    pub fn write_summary_to<W: Write>(&self, writer: W) -> std::io::Result<()> {
        write_summary_rows_to(writer, &self.summary)
    }

    /// `<stem>_records.csv`, `<stem>_summary.csv` and `<stem>_provenance.json` in `dir`.
    pub fn write(&self, dir: &Path, stem: &str) -> Result<()> {
        let path = dir.join(format!("{stem}_records.csv"));
        let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
        self.write_records_to(file).map_err(|e| Error::io(&path, e))?;
        let path = dir.join(format!("{stem}_summary.csv"));
        let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
        self.write_summary_to(file).map_err(|e| Error::io(&path, e))?;
        let path = dir.join(format!("{stem}_provenance.json"));
        let json = serde_json::to_string_pretty(&self.provenance).expect("provenance serializes");
        std::fs::write(&path, json + "\n").map_err(|e| Error::io(&path, e))
    }
}

pub const RECORD_HEADER: [&str; 4] = ["image_id", "method", "n_users", "jaccard"];
pub const SUMMARY_HEADER: [&str; 4] = ["method", "n_users", "mean_jaccard", "gain_pct"];
pub const CURVE_HEADER: [&str; 5] = ["criterion", "filter", "partition", "n", "mean_jaccard"];

pub fn write_summary_rows_to<W: Write>(writer: W, rows: &[SummaryRow]) -> std::io::Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(SUMMARY_HEADER)?;
    for r in rows {
        wtr.write_record([
            r.method.clone(),
            r.n_users.to_string(),
            format!("{:.6}", r.mean_jaccard),
            r.gain_pct.map(|g| format!("{g:.2}")).unwrap_or_default(),
        ])?;
    }
    wtr.flush()
}

/// Summary rows of several reports, concatenated.
pub fn combined_summary(reports: &[&ExperimentReport]) -> Vec<SummaryRow> {
    reports.iter().flat_map(|r| r.summary.iter().cloned()).collect()
}

// ---------------------------------------------------------------------------
// Shared plumbing
// ---------------------------------------------------------------------------

pub fn clicks_by_image(clicks: &[ClickRecord]) -> BTreeMap<String, Vec<ClickRecord>> {
    let mut map: BTreeMap<String, Vec<ClickRecord>> = BTreeMap::new();
    for c in clicks {
        map.entry(c.image_id.clone()).or_default().push(c.clone());
    }
    map
}

fn distinct_workers(clicks: &[ClickRecord]) -> usize {
    clicks.iter().map(|c| c.worker_id.as_str()).collect::<BTreeSet<_>>().len()
}

fn check_dataset(images: &[PreparedImage]) -> Result<()> {
    if images.is_empty() {
        return Err(Error::EmptyDataset("no test images".into()));
    }
    for img in images {
        img.image.truth()?;
    }
    Ok(())
}

/// Partition algorithm used to detect conflicting clicks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterPartition {
    Slic,
    Felzenszwalb,
}

impl std::fmt::Display for FilterPartition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            FilterPartition::Slic => "slic",
            FilterPartition::Felzenszwalb => "felzenszwalb",
        })
    }
}

impl std::str::FromStr for FilterPartition {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "slic" => Ok(FilterPartition::Slic),
            "felzenszwalb" => Ok(FilterPartition::Felzenszwalb),
            _ => Err(format!("unknown filter partition `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FilterPartitionConfig {
    pub slic: SlicParams,
    pub felzenszwalb: FelzParams,
}

impl Default for FilterPartitionConfig {
    fn default() -> Self {
        FilterPartitionConfig {
            slic: SlicParams::with_region_size(8),
            felzenszwalb: FelzParams::with_k(3.0),
        }
    }
}

/// One SLIC and one Felzenszwalb partition per image, in image order.
#[derive(Debug, Clone)]
pub struct FilterPartitions {
    slic: Vec<Partition>,
    felzenszwalb: Vec<Partition>,
}

impl FilterPartitions {
    pub fn compute(images: &[PreparedImage], config: &FilterPartitionConfig) -> Result<Self> {
        let pairs = images
            .par_iter()
            .map(|img| {
                Ok((
                    slic(&img.image.raster, &config.slic)?,
                    felzenszwalb(&img.image.raster, &config.felzenszwalb)?,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        let (slic, felzenszwalb) = pairs.into_iter().unzip();
        Ok(FilterPartitions { slic, felzenszwalb })
    }

    pub fn get(&self, algorithm: FilterPartition, index: usize) -> &Partition {
        match algorithm {
            FilterPartition::Slic => &self.slic[index],
            FilterPartition::Felzenszwalb => &self.felzenszwalb[index],
        }
    }
}

/// How the clicks on one image are prepared before segmentation.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Treatment {
    filter: ClickFilter,
    partition: FilterPartition,
}

/// Per-image Jaccard of `backend` on each image's clicks, optionally
/// filtered, weighted with `qualities` (missing workers get 0.5) or q = 1.
fn evaluate_images(
    images: &[PreparedImage],
    clicks: &BTreeMap<String, Vec<ClickRecord>>,
    partitions: Option<&FilterPartitions>,
    treatment: Treatment,
    qualities: Option<&BTreeMap<String, f64>>,
    backend: &dyn SegmentationBackend,
) -> Result<Vec<f64>> {
    images
        .par_iter()
        .enumerate()
        .map(|(i, img)| {
            let raw = clicks.get(img.id()).map(Vec::as_slice).unwrap_or(&[]);
            let kept = match (treatment.filter, partitions) {
                (ClickFilter::None, _) => raw.to_vec(),
                (f, Some(p)) => f.apply(p.get(treatment.partition, i), raw)?,
                (_, None) => unreachable!("filtering requested without partitions"),
            };
            let weighted = match qualities {
                None => WeightedClicks::uniform(kept, 1.0)?,
                Some(q) => {
                    let q = kept
                        .iter()
                        .map(|c| {
                            let v = q.get(&c.worker_id).copied().unwrap_or(NEUTRAL_QUALITY);
                            (c.worker_id.clone(), v)
                        })
                        .collect();
                    WeightedClicks::new(kept, q)?
                }
            };
            let mask = backend.segment(img, &weighted)?;
            jaccard(&mask, img.image.truth()?)
        })
        .collect()
}

fn records_for(images: &[PreparedImage], method: &str, n_users: usize, scores: Vec<f64>) -> Vec<JaccardRecord> {
    images
        .iter()
        .zip(scores)
        .map(|(img, jaccard)| JaccardRecord {
            image_id: img.id().to_string(),
            method: method.to_string(),
            n_users,
            jaccard,
        })
        .collect()
}

fn restrict_images(clicks: &[ClickRecord], images: &[PreparedImage]) -> Vec<ClickRecord> {
    let ids: BTreeSet<&str> = images.iter().map(|i| i.id()).collect();
    clicks.iter().filter(|c| ids.contains(c.image_id.as_str())).cloned().collect()
}

// ---------------------------------------------------------------------------
// Experiments
// ---------------------------------------------------------------------------

pub const TABLE1_METHODS: [(&str, ClickFilter, FilterPartition); 5] = [
    ("raw", ClickFilter::None, FilterPartition::Slic),
    ("keep_majority_slic", ClickFilter::KeepMajority, FilterPartition::Slic),
    ("keep_majority_felzenszwalb", ClickFilter::KeepMajority, FilterPartition::Felzenszwalb),
    ("discard_all_slic", ClickFilter::DiscardAll, FilterPartition::Slic),
    ("discard_all_felzenszwalb", ClickFilter::DiscardAll, FilterPartition::Felzenszwalb),
];

/// Raw clicks against the two filters on each of the two filter partitions,
/// all segmented at q = 1; gains are relative to `raw`.
pub fn table1_experiment(
    images: &[PreparedImage],
    clicks: &[ClickRecord],
    config: &FilterPartitionConfig,
    backend: &dyn SegmentationBackend,
    provenance: Provenance,
) -> Result<ExperimentReport> {
    check_dataset(images)?;
    let clicks = restrict_images(clicks, images);
    let n_users = distinct_workers(&clicks);
    let by_image = clicks_by_image(&clicks);
    let partitions = FilterPartitions::compute(images, config)?;
    let mut records = Vec::new();
    for (method, filter, partition) in TABLE1_METHODS {
        let scores = evaluate_images(
            images,
            &by_image,
            Some(&partitions),
            Treatment { filter, partition },
            None,
            backend,
        )?;
        records.extend(records_for(images, method, n_users, scores));
    }
    Ok(ExperimentReport::from_records(records, Some("raw"), provenance))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub criterion: RankingCriterion,
    pub filter: ClickFilter,
    /// `None` when no click filter is applied.
    pub partition: Option<FilterPartition>,
    pub n: usize,
    pub mean_jaccard: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopNSweep {
    pub curve: Vec<CurvePoint>,
    pub report: ExperimentReport,
}

impl TopNSweep {
    pub fn max(&self) -> f64 {
        self.curve.iter().map(|p| p.mean_jaccard).fold(f64::NEG_INFINITY, f64::max)
    }
}

pub fn sweep_method_name(criterion: RankingCriterion, filter: ClickFilter, partition: Option<FilterPartition>) -> String {
    match partition {
        Some(p) if filter != ClickFilter::None => format!("{criterion}_{filter}_{p}"),
        _ => format!("{criterion}_{filter}"),
    }
}

/// For N = 1..=|workers|: keep the clicks of the N best-ranked workers,
/// optionally filter them, segment at q = 1 and record the mean Jaccard.
pub fn topn_sweep(
    images: &[PreparedImage],
    clicks: &[ClickRecord],
    profiles: &[WorkerProfile],
    criterion: RankingCriterion,
    filter: ClickFilter,
    partition: FilterPartition,
    config: &FilterPartitionConfig,
    backend: &dyn SegmentationBackend,
    provenance: Provenance,
) -> Result<TopNSweep> {
    check_dataset(images)?;
    if profiles.is_empty() {
        return Err(Error::EmptyDataset("no worker profiles to rank".into()));
    }
    let clicks = restrict_images(clicks, images);
    let ranked = rank_workers(profiles, criterion);
    let partitions = match filter {
        ClickFilter::None => None,
        _ => Some(FilterPartitions::compute(images, config)?),
    };
    let shown_partition = (filter != ClickFilter::None).then_some(partition);
    let method = sweep_method_name(criterion, filter, shown_partition);
    let mut records = Vec::new();
    let mut curve = Vec::new();
    for n in 1..=ranked.len() {
        let top = select_top_n(&ranked, n)?;
        let kept: Vec<ClickRecord> = clicks.iter().filter(|c| top.contains(&c.worker_id)).cloned().collect();
        let scores = evaluate_images(
            images,
            &clicks_by_image(&kept),
            partitions.as_ref(),
            Treatment { filter, partition },
            None,
            backend,
        )?;
        let mean = scores.iter().sum::<f64>() / scores.len() as f64;
        records.extend(records_for(images, &method, n, scores));
        curve.push(CurvePoint {
            criterion,
            filter,
            partition: shown_partition,
            n,
            mean_jaccard: mean,
        });
    }
    Ok(TopNSweep {
        curve,
        report: ExperimentReport::from_records(records, None, provenance),
    })
}

pub fn write_curve_to<W: Write>(writer: W, points: &[CurvePoint]) -> std::io::Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(CURVE_HEADER)?;
    for p in points {
        wtr.write_record([
            p.criterion.to_string(),
            p.filter.to_string(),
            p.partition.map(|p| p.to_string()).unwrap_or_else(|| "none".into()),
            p.n.to_string(),
            format!("{:.6}", p.mean_jaccard),
        ])?;
    }
    wtr.flush()
}

pub fn write_curve(path: impl AsRef<Path>, points: &[CurvePoint]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_curve_to(file, points).map_err(|e| Error::io(path, e))
}

/// All clicks weighted by the profiles' `q` against the same clicks at q = 1.
pub fn weighted_experiment(
    images: &[PreparedImage],
    clicks: &[ClickRecord],
    profiles: &[WorkerProfile],
    backend: &dyn SegmentationBackend,
    provenance: Provenance,
) -> Result<ExperimentReport> {
    check_dataset(images)?;
    let clicks = restrict_images(clicks, images);
    let n_users = distinct_workers(&clicks);
    let by_image = clicks_by_image(&clicks);
    let q: BTreeMap<String, f64> = profiles.iter().map(|p| (p.worker_id.clone(), p.q)).collect();
    let none = Treatment {
        filter: ClickFilter::None,
        partition: FilterPartition::Slic,
    };
    let mut records = Vec::new();
    let weighted = evaluate_images(images, &by_image, None, none, Some(&q), backend)?;
    records.extend(records_for(images, "weighted", n_users, weighted));
    let unweighted = evaluate_images(images, &by_image, None, none, None, backend)?;
    records.extend(records_for(images, "unweighted", n_users, unweighted));
    Ok(ExperimentReport::from_records(records, Some("unweighted"), provenance))
}

// ---------------------------------------------------------------------------
// Threshold calibration
// ---------------------------------------------------------------------------

/// Thresholds 0.05, 0.06, ..., 0.95.
pub fn threshold_grid() -> Vec<f64> {
    (5..=95).map(|i| i as f64 / 100.0).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub threshold: f64,
    pub mean_jaccard: f64,
    pub curve: Vec<(f64, f64)>,
}

/// Mean Jaccard of binarized foreground maps over the gold images at every
/// grid threshold; the smallest threshold reaching the maximum wins.
pub fn calibrate_threshold(
    gold: &[PreparedImage],
    weighted: &WeightedClicks,
    normalization: NormalizationScope,
) -> Result<Calibration> {
    check_dataset(gold)?;
    let maps: Vec<FloatMap> = gold
        .par_iter()
        .map(|g| Ok(foreground_map(g.partitions(), &weighted.for_image(g.id()), normalization)?.map))
        .collect::<Result<_>>()?;
    let curve = threshold_grid()
        .into_par_iter()
        .map(|t| {
            let mut sum = 0.0;
            for (g, map) in gold.iter().zip(&maps) {
                sum += jaccard(&binarize(map, t)?, g.image.truth()?)?;
            }
            Ok((t, sum / gold.len() as f64))
        })
        .collect::<Result<Vec<_>>>()?;
    let (threshold, mean_jaccard) = curve
        .iter()
        .copied()
        .fold((f64::NAN, f64::NEG_INFINITY), |best, (t, j)| if j > best.1 { (t, j) } else { best });
    Ok(Calibration {
        threshold,
        mean_jaccard,
        curve,
    })
}

// ---------------------------------------------------------------------------
// SVG
// ---------------------------------------------------------------------------

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Line chart of mean Jaccard against N, one series per configuration.
pub fn curves_svg(points: &[CurvePoint]) -> String {
    let (w, h, margin) = (640.0, 400.0, 50.0);
    let mut series: BTreeMap<String, Vec<(usize, f64)>> = BTreeMap::new();
    for p in points {
        let name = sweep_method_name(p.criterion, p.filter, p.partition);
        series.entry(name).or_default().push((p.n, p.mean_jaccard));
    }
    let max_n = points.iter().map(|p| p.n).max().unwrap_or(1).max(2);
    let sx = |n: usize| margin + (n - 1) as f64 / (max_n - 1) as f64 * (w - 2.0 * margin);
    let sy = |j: f64| h - margin - j.clamp(0.0, 1.0) * (h - 2.0 * margin);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let (x0, y0, x1, y1) = (margin, h - margin, w - margin, margin);
    let _ = writeln!(svg, r#"<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>"#);
    let _ = writeln!(svg, r#"<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>"#);
    for n in 1..=max_n {
        let _ = writeln!(svg, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{n}</text>"#, sx(n), y0 + 16.0);
    }
    for i in 0..=5 {
        let j = i as f64 / 5.0;
        let _ = writeln!(svg, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{j:.1}</text>"#, x0 - 6.0, sy(j) + 4.0);
    }
    let _ = writeln!(svg, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">top N users</text>"#, w / 2.0, h - 10.0);
    for (i, (name, pts)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let coords: Vec<String> = pts.iter().map(|&(n, j)| format!("{:.1},{:.1}", sx(n), sy(j))).collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
            coords.join(" ")
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" fill="{color}">{name}</text>"#,
            x1 - 150.0,
            y1 + 16.0 * (i as f64 + 1.0)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(image: &str, method: &str, j: f64) -> JaccardRecord {
        JaccardRecord {
            image_id: image.into(),
            method: method.into(),
            n_users: 3,
            jaccard: j,
        }
    }

    #[test]
    fn summary_means_and_gain() {
        let records = vec![
            rec("a", "raw", 0.1),
            rec("b", "raw", 0.3),
            rec("a", "keep", 0.2),
            rec("b", "keep", 0.4),
        ];
        let s = summarize(&records, Some("raw"));
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].mean_jaccard, (0.1 + 0.3) / 2.0);
        assert_eq!(s[0].gain_pct, Some(0.0));
        assert!((s[1].gain_pct.unwrap() - 50.0).abs() < 1e-9);
    }

    #[test]
    fn zero_baseline_has_no_gain() {
        let s = summarize(&[rec("a", "raw", 0.0), rec("a", "x", 0.5)], Some("raw"));
        assert_eq!(s[1].gain_pct, None);
    }

    #[test]
    fn grid_spans_endpoints() {
        let g = threshold_grid();
        assert_eq!(g.len(), 91);
        assert_eq!(g[0], 0.05);
        assert_eq!(g[51], 0.56);
        assert_eq!(*g.last().unwrap(), 0.95);
    }

    #[test]
    fn provenance_hash_is_stable() {
        let a = Provenance::new("{\"x\":1}", vec![1]);
        assert_eq!(a, Provenance::new("{\"x\":1}", vec![1]));
        assert_eq!(a.config_hash.len(), 64);
        assert_ne!(a.config_hash, Provenance::new("{\"x\":2}", vec![1]).config_hash);
    }

    #[test]
    fn svg_has_one_polyline_per_series() {
        let pts: Vec<CurvePoint> = (1..=3)
            .flat_map(|n| {
                [RankingCriterion::ByJaccard, RankingCriterion::ByErrorRate].map(|c| CurvePoint {
                    criterion: c,
                    filter: ClickFilter::None,
                    partition: None,
                    n,
                    mean_jaccard: 0.5,
                })
            })
            .collect();
        let svg = curves_svg(&pts);
        assert_eq!(svg.matches("<polyline").count(), 2);
    }
}
