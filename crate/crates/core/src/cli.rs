//! The `crowdseg` command line.
//!
//! Exit status: 0 on success, 1 for usage or configuration errors, 2 for data
//! errors (unreadable images, malformed traces, inconsistent inputs).

use std::collections::{BTreeMap, BTreeSet};
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::aggregation::{aggregate_partitions, WeightedClicks};
use crate::backend::{AggregationBackend, BackendKind, SegmentationBackend};
use crate::candidates::CandidateBackend;
use crate::clicks::{read_clicks, write_clicks, ClickRecord};
use crate::config::{ConfigError, Input, RunConfig, OUTPUT_DIR_ENV};
use crate::dataset::{load_gold, load_images, prepare_all, LabeledImage, PreparedImage};
use crate::error::Error;
use crate::evaluation::{
    calibrate_threshold, clicks_by_image, combined_summary, curves_svg, table1_experiment, topn_sweep,
    weighted_experiment, write_curve, write_summary_rows_to, FilterPartition, FilterPartitions, Provenance,
};
use crate::filtering::ClickFilter;
use crate::imaging::{save_float_map, save_mask, save_raster};
use crate::quality::{
    compute_profiles, read_profiles, write_profiles, QualityConfig, RankingCriterion, WorkerProfile, NEUTRAL_QUALITY,
};
use crate::simulation::{simulate_dataset, write_roster, RNG_ALGORITHM};

#[derive(Debug, Parser)]
#[command(name = "crowdseg", version, about = "Object segmentation from crowdsourced clicks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute the multiscale superpixel partitions of every image.
    Oversegment(CommonArgs),
    /// Generate synthetic test and gold scenes plus a simulated worker cohort.
    Simulate(CommonArgs),
    /// Remove conflicting clicks using one superpixel partition per image.
    Filter(CommonArgs),
    /// Estimate worker quality on the gold set.
    ScoreUsers(CommonArgs),
    /// Quality-weighted multiscale voting; writes masks and foreground maps.
    Segment(CommonArgs),
    /// Top-N worker curves for both ranking criteria and every filter.
    Sweep(CommonArgs),
    /// Filter comparison and weighted-voting reports on the labeled test set.
    Evaluate(CommonArgs),
    /// Re-learn the binarization threshold on the gold set.
    CalibrateThreshold(CommonArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Oversegment(_) => "oversegment",
            Command::Simulate(_) => "simulate",
            Command::Filter(_) => "filter",
            Command::ScoreUsers(_) => "score-users",
            Command::Segment(_) => "segment",
            Command::Sweep(_) => "sweep",
            Command::Evaluate(_) => "evaluate",
            Command::CalibrateThreshold(_) => "calibrate-threshold",
        }
    }

    fn args(&self) -> &CommonArgs {
        match self {
            Command::Oversegment(a)
            | Command::Simulate(a)
            | Command::Filter(a)
            | Command::ScoreUsers(a)
            | Command::Segment(a)
            | Command::Sweep(a)
            | Command::Evaluate(a)
            | Command::CalibrateThreshold(a) => a,
        }
    }

    fn inputs(&self) -> &'static [Input] {
        match self {
            Command::Oversegment(_) => &[Input::Images],
            Command::Simulate(_) => &[],
            Command::Filter(_) => &[Input::Images, Input::Traces],
            Command::ScoreUsers(_) => &[Input::Gold, Input::Traces],
            Command::Segment(_) => &[Input::Images, Input::Traces],
            Command::Sweep(_) | Command::Evaluate(_) => {
                &[Input::Images, Input::Truth, Input::Traces, Input::GoldOrProfiles]
            }
            Command::CalibrateThreshold(_) => &[Input::Gold, Input::Traces],
        }
    }
}

/// Flags shared by all subcommands; each overrides the matching config key.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// JSON run configuration; unknown keys are rejected.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
    #[arg(long = "images")]
    pub images_dir: Option<PathBuf>,
    #[arg(long = "truth")]
    pub truth_dir: Option<PathBuf>,
    #[arg(long)]
    pub traces: Option<PathBuf>,
    #[arg(long = "gold")]
    pub gold_dir: Option<PathBuf>,
    #[arg(long)]
    pub profiles: Option<PathBuf>,
    #[arg(long = "candidates")]
    pub candidates_dir: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub threshold: Option<f64>,
    /// none, keep_majority or discard_all.
    #[arg(long)]
    pub filter: Option<ClickFilter>,
    /// slic or felzenszwalb.
    #[arg(long)]
    pub filter_partition: Option<FilterPartition>,
    /// by_jaccard or by_error_rate.
    #[arg(long)]
    pub ranking: Option<RankingCriterion>,
    /// aggregation or candidates.
    #[arg(long)]
    pub backend: Option<BackendKind>,
    #[arg(long)]
    pub max_candidates: Option<usize>,
    #[arg(long)]
    pub tolerance_radius: Option<f64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub parallelism: Option<usize>,
    /// Also write SVG plots.
    #[arg(long)]
    pub plot: bool,
}

enum Failure {
    Config(ConfigError),
    Data(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Data(e)
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e)
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

/// Resolves the configuration: file, then environment (output dir only), then flags.
pub fn resolve_config(args: &CommonArgs, env_output_dir: Option<PathBuf>) -> Result<RunConfig, ConfigError> {
    let mut c = match &args.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    if let Some(dir) = env_output_dir {
        c.output_dir = dir;
    }
    macro_rules! set {
        ($($field:ident),*) => {
            $(if let Some(v) = &args.$field { c.$field = v.clone().into(); })*
        };
    }
    set!(output_dir, seed, threshold, filter, filter_partition, ranking, backend, max_candidates, tolerance_radius);
    macro_rules! set_opt {
        ($($field:ident),*) => {
            $(if let Some(v) = &args.$field { c.$field = Some(v.clone()); })*
        };
    }
    set_opt!(images_dir, truth_dir, traces, gold_dir, profiles, candidates_dir, parallelism);
    if args.plot {
        c.plot = true;
    }
    Ok(c)
}

pub fn run<I, T>(argv: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).try_init();
    let env_dir = std::env::var_os(OUTPUT_DIR_ENV).filter(|v| !v.is_empty()).map(PathBuf::from);
    match execute(&cli.command, env_dir) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn execute(command: &Command, env_dir: Option<PathBuf>) -> Outcome<()> {
    let config = resolve_config(command.args(), env_dir)?;
    config.validate(command.inputs())?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.parallelism.unwrap_or(0))
        .build()
        .map_err(|e| ConfigError::new("parallelism", e.to_string()))?;
    let out = config.output_dir.clone();
    fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
    let outputs = pool.install(|| match command {
        Command::Oversegment(_) => oversegment(&config),
        Command::Simulate(_) => simulate(&config),
        Command::Filter(_) => filter(&config),
        Command::ScoreUsers(_) => score_users(&config),
        Command::Segment(_) => segment(&config),
        Command::Sweep(_) => sweep(&config),
        Command::Evaluate(_) => evaluate(&config),
        Command::CalibrateThreshold(_) => calibrate(&config),
    })?;
    write_manifest(command.name(), &config, &outputs)?;
    Ok(())
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    toolkit_version: &'a str,
    rng: &'a str,
    seeds: Vec<u64>,
    started_unix_seconds: u64,
    outputs: &'a [String],
    config: &'a RunConfig,
}

fn write_manifest(command: &str, config: &RunConfig, outputs: &[String]) -> Outcome<()> {
    let manifest = Manifest {
        command,
        toolkit_version: env!("CARGO_PKG_VERSION"),
        rng: RNG_ALGORITHM,
        seeds: vec![config.seed],
        started_unix_seconds: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        outputs,
        config,
    };
    let path = config.output_dir.join(format!("manifest_{command}.json"));
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    fs::write(&path, json).map_err(|e| Error::io(&path, e))?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Shared loading
// ---------------------------------------------------------------------------

fn path<'a>(p: &'a Option<PathBuf>) -> &'a Path {
    p.as_deref().expect("validated input")
}

fn rel(config: &RunConfig, p: &Path) -> String {
    p.strip_prefix(&config.output_dir).unwrap_or(p).display().to_string()
}

fn create_dir(p: &Path) -> Outcome<()> {
    fs::create_dir_all(p).map_err(|e| Error::io(p, e).into())
}

fn prepare(images: Vec<LabeledImage>, config: &RunConfig) -> Outcome<Vec<PreparedImage>> {
    let prepared = prepare_all(images, &config.partitions)?;
    for img in &prepared {
        for w in &img.warnings {
            log::warn!("{}: {w}", img.id());
        }
    }
    Ok(prepared)
}

fn test_images(config: &RunConfig, with_truth: bool) -> Outcome<Vec<PreparedImage>> {
    let truth = with_truth.then(|| path(&config.truth_dir));
    let images = load_images(path(&config.images_dir), truth)?;
    if images.is_empty() {
        return Err(Error::EmptyDataset(format!("no images in {}", path(&config.images_dir).display())).into());
    }
    prepare(images, config)
}

fn gold_images(config: &RunConfig) -> Outcome<Vec<PreparedImage>> {
    prepare(load_gold(path(&config.gold_dir))?, config)
}

fn traces(config: &RunConfig) -> Outcome<Vec<ClickRecord>> {
    Ok(read_clicks(path(&config.traces))?)
}

fn aggregation_backend(config: &RunConfig) -> AggregationBackend {
    AggregationBackend {
        threshold: config.threshold,
        normalization: config.normalization,
    }
}

fn experiment_backend(config: &RunConfig) -> Box<dyn SegmentationBackend> {
    match config.backend {
        BackendKind::Aggregation => Box::new(aggregation_backend(config)),
        BackendKind::Candidates => {
            let mut b = CandidateBackend::new(config.max_candidates);
            b.candidates_dir = config.candidates_dir.clone();
            Box::new(b)
        }
    }
}

fn worker_ids(clicks: &[ClickRecord]) -> Vec<String> {
    clicks
        .iter()
        .map(|c| c.worker_id.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}

/// Profiles from the configured file, or computed on the gold set.
fn profiles(config: &RunConfig, clicks: &[ClickRecord]) -> Outcome<Vec<WorkerProfile>> {
    if let Some(p) = &config.profiles {
        return Ok(read_profiles(p)?);
    }
    let gold = gold_images(config)?;
    let quality = QualityConfig {
        tolerance_radius: config.tolerance_radius,
    };
    Ok(compute_profiles(
        &worker_ids(clicks),
        clicks,
        &gold,
        &aggregation_backend(config),
        &quality,
    )?)
}

fn weighted_clicks(clicks: Vec<ClickRecord>, profiles: &[WorkerProfile]) -> Outcome<WeightedClicks> {
    let known: BTreeMap<&str, f64> = profiles.iter().map(|p| (p.worker_id.as_str(), p.q)).collect();
    let mut q = BTreeMap::new();
    for c in &clicks {
        if !q.contains_key(&c.worker_id) {
            let v = known.get(c.worker_id.as_str()).copied().unwrap_or_else(|| {
                log::warn!("worker `{}` has no profile; using q = {NEUTRAL_QUALITY}", c.worker_id);
                NEUTRAL_QUALITY
            });
            q.insert(c.worker_id.clone(), v);
        }
    }
    Ok(WeightedClicks::new(clicks, q)?)
}

/// The hash leaves out the thread count, which never changes results.
fn provenance(config: &RunConfig) -> Provenance {
    let hashed = RunConfig {
        parallelism: None,
        ..config.clone()
    };
    Provenance::new(&hashed.to_json(), vec![config.seed])
}

fn write_csv_file(p: &Path, f: impl FnOnce(fs::File) -> std::io::Result<()>) -> Outcome<()> {
    let file = fs::File::create(p).map_err(|e| Error::io(p, e))?;
    f(file).map_err(|e| Error::io(p, e).into())
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

fn oversegment(config: &RunConfig) -> Outcome<Vec<String>> {
    let images = test_images(config, false)?;
    let mut outputs = Vec::new();
    for img in &images {
        let dir = config.output_dir.join("partitions").join(img.id());
        create_dir(&dir)?;
        for (source, partition) in &img.partitions {
            let ext = if partition.count() <= 256 { "pgm" } else { "spxl" };
            let p = dir.join(format!("{source}.{ext}"));
            fs::write(&p, partition.to_bytes()).map_err(|e| Error::io(&p, e))?;
            outputs.push(rel(config, &p));
        }
        println!("{}: {} partitions", img.id(), img.partitions.len());
    }
    Ok(outputs)
}

fn simulate(config: &RunConfig) -> Outcome<Vec<String>> {
    let ds = simulate_dataset(&config.simulation, config.seed)?;
    let mut outputs = Vec::new();
    for (set, scenes) in [("test", &ds.test), ("gold", &ds.gold)] {
        let images = config.output_dir.join(set).join("images");
        let truth = config.output_dir.join(set).join("truth");
        create_dir(&images)?;
        create_dir(&truth)?;
        for (id, scene) in scenes {
            let p = images.join(format!("{id}.ppm"));
            save_raster(&scene.raster, &p)?;
            outputs.push(rel(config, &p));
            let p = truth.join(format!("{id}.pgm"));
            save_mask(&scene.truth, &p)?;
            outputs.push(rel(config, &p));
        }
    }
    let p = config.output_dir.join("traces.csv");
    write_clicks(&p, &ds.traces.clicks)?;
    outputs.push(rel(config, &p));
    let p = config.output_dir.join("roster.csv");
    write_roster(&p, &ds.traces.roster)?;
    outputs.push(rel(config, &p));
    println!(
        "{} test scenes, {} gold scenes, {} workers, {} clicks",
        ds.test.len(),
        ds.gold.len(),
        ds.traces.roster.len(),
        ds.traces.clicks.len()
    );
    Ok(outputs)
}

fn filter(config: &RunConfig) -> Outcome<Vec<String>> {
    let images = test_images(config, false)?;
    let clicks = traces(config)?;
    let ids: BTreeSet<&str> = images.iter().map(|i| i.id()).collect();
    let skipped = clicks.iter().filter(|c| !ids.contains(c.image_id.as_str())).count();
    if skipped > 0 {
        log::warn!("skipping {skipped} clicks on images outside {}", path(&config.images_dir).display());
    }
    let by_image = clicks_by_image(&clicks);
    let partitions = FilterPartitions::compute(&images, &config.filter_partitions)?;
    let mut kept = Vec::new();
    for (i, img) in images.iter().enumerate() {
        let own = by_image.get(img.id()).map(Vec::as_slice).unwrap_or(&[]);
        kept.extend(config.filter.apply(partitions.get(config.filter_partition, i), own)?);
    }
    let p = config.output_dir.join("filtered_traces.csv");
    write_clicks(&p, &kept)?;
    println!("kept {} of {} clicks ({} on {})", kept.len(), clicks.len(), config.filter, config.filter_partition);
    Ok(vec![rel(config, &p)])
}

fn score_users(config: &RunConfig) -> Outcome<Vec<String>> {
    let clicks = traces(config)?;
    let config = RunConfig {
        profiles: None,
        ..config.clone()
    };
    let profiles = profiles(&config, &clicks)?;
    let p = config.output_dir.join("profiles.csv");
    write_profiles(&p, &profiles)?;
    println!("scored {} workers", profiles.len());
    Ok(vec![rel(&config, &p)])
}

fn segment(config: &RunConfig) -> Outcome<Vec<String>> {
    let images = test_images(config, false)?;
    let clicks = traces(config)?;
    let profiles = if config.profiles.is_some() || config.gold_dir.is_some() {
        profiles(config, &clicks)?
    } else {
        log::warn!("no profiles or gold set configured; every worker gets q = 1");
        worker_ids(&clicks)
            .into_iter()
            .map(|w| WorkerProfile {
                worker_id: w,
                n_training_clicks: 0,
                error_rate: 0.0,
                personal_jaccard: 1.0,
                q: 1.0,
            })
            .collect()
    };
    let weighted = weighted_clicks(clicks, &profiles)?;
    let masks = config.output_dir.join("masks");
    let maps = config.output_dir.join("maps");
    create_dir(&masks)?;
    create_dir(&maps)?;
    let results = {
        use rayon::prelude::*;
        images
            .par_iter()
            .map(|img| aggregate_partitions(img.partitions(), &weighted.for_image(img.id()), config.threshold, config.normalization))
            .collect::<crate::Result<Vec<_>>>()?
    };
    let mut outputs = Vec::new();
    for (img, result) in images.iter().zip(results) {
        for w in &result.warnings {
            log::warn!("{}: {w}", img.id());
        }
        let p = masks.join(format!("{}.pgm", img.id()));
        save_mask(&result.mask, &p)?;
        outputs.push(rel(config, &p));
        let p = maps.join(format!("{}.pgm", img.id()));
        save_float_map(&result.map, &p)?;
        outputs.push(rel(config, &p));
    }
    println!("segmented {} images at threshold {}", images.len(), config.threshold);
    Ok(outputs)
}

const SWEEP_FILTERS: [(ClickFilter, FilterPartition); 5] = [
    (ClickFilter::None, FilterPartition::Slic),
    (ClickFilter::KeepMajority, FilterPartition::Slic),
    (ClickFilter::KeepMajority, FilterPartition::Felzenszwalb),
    (ClickFilter::DiscardAll, FilterPartition::Slic),
    (ClickFilter::DiscardAll, FilterPartition::Felzenszwalb),
];

fn sweep(config: &RunConfig) -> Outcome<Vec<String>> {
    let images = test_images(config, true)?;
    let clicks = traces(config)?;
    let profiles = profiles(config, &clicks)?;
    let backend = experiment_backend(config);
    let mut curve = Vec::new();
    let mut summary = Vec::new();
    for criterion in [RankingCriterion::ByJaccard, RankingCriterion::ByErrorRate] {
        for (filter, partition) in SWEEP_FILTERS {
            let s = topn_sweep(
                &images,
                &clicks,
                &profiles,
                criterion,
                filter,
                partition,
                &config.filter_partitions,
                backend.as_ref(),
                provenance(config),
            )?;
            curve.extend(s.curve);
            summary.extend(s.report.summary);
        }
    }
    let mut outputs = Vec::new();
    let p = config.output_dir.join("topn_curve.csv");
    write_curve(&p, &curve)?;
    outputs.push(rel(config, &p));
    let p = config.output_dir.join("topn_summary.csv");
    write_csv_file(&p, |f| write_summary_rows_to(f, &summary))?;
    outputs.push(rel(config, &p));
    if config.plot {
        for criterion in [RankingCriterion::ByJaccard, RankingCriterion::ByErrorRate] {
            let pts: Vec<_> = curve.iter().filter(|c| c.criterion == criterion).cloned().collect();
            let p = config.output_dir.join(format!("topn_{criterion}.svg"));
            fs::write(&p, curves_svg(&pts)).map_err(|e| Error::io(&p, e))?;
            outputs.push(rel(config, &p));
        }
    }
    println!("wrote {} curve points", curve.len());
    Ok(outputs)
}

fn evaluate(config: &RunConfig) -> Outcome<Vec<String>> {
    let images = test_images(config, true)?;
    let clicks = traces(config)?;
    let profiles = profiles(config, &clicks)?;
    let backend = experiment_backend(config);
    let table1 = table1_experiment(
        &images,
        &clicks,
        &config.filter_partitions,
        backend.as_ref(),
        provenance(config),
    )?;
    let topn = topn_sweep(
        &images,
        &clicks,
        &profiles,
        config.ranking,
        ClickFilter::None,
        config.filter_partition,
        &config.filter_partitions,
        backend.as_ref(),
        provenance(config),
    )?;
    let weighted = weighted_experiment(&images, &clicks, &profiles, &aggregation_backend(config), provenance(config))?;

    let dir = &config.output_dir;
    let mut outputs = Vec::new();
    for (stem, report) in [("table1", &table1), ("topn", &topn.report), ("weighted", &weighted)] {
        report.write(dir, stem)?;
        for suffix in ["records.csv", "summary.csv", "provenance.json"] {
            outputs.push(format!("{stem}_{suffix}"));
        }
    }
    let p = dir.join("summary.csv");
    let all = combined_summary(&[&table1, &topn.report, &weighted]);
    write_csv_file(&p, |f| write_summary_rows_to(f, &all))?;
    outputs.push(rel(config, &p));
    for row in &table1.summary {
        match row.gain_pct {
            Some(g) => println!("{:<28} {:.4} ({g:+.2}%)", row.method, row.mean_jaccard),
            None => println!("{:<28} {:.4}", row.method, row.mean_jaccard),
        }
    }
    for row in &weighted.summary {
        println!("{:<28} {:.4}", row.method, row.mean_jaccard);
    }
    Ok(outputs)
}

fn calibrate(config: &RunConfig) -> Outcome<Vec<String>> {
    let gold = gold_images(config)?;
    let clicks = traces(config)?;
    let profiles = profiles(config, &clicks)?;
    let gold_ids: BTreeSet<&str> = gold.iter().map(|g| g.id()).collect();
    let on_gold: Vec<ClickRecord> = clicks
        .into_iter()
        .filter(|c| gold_ids.contains(c.image_id.as_str()))
        .collect();
    let weighted = weighted_clicks(on_gold, &profiles)?;
    let cal = calibrate_threshold(&gold, &weighted, config.normalization)?;
    let p = config.output_dir.join("calibration.csv");
    write_csv_file(&p, |f| {
        let mut w = csv::Writer::from_writer(f);
        w.write_record(["threshold", "mean_jaccard"])?;
        for (t, j) in &cal.curve {
            w.write_record([format!("{t:.2}"), format!("{j:.6}")])?;
        }
        w.flush()
    })?;
    println!("best threshold {:.2} (mean Jaccard {:.4})", cal.threshold, cal.mean_jaccard);
    Ok(vec![rel(config, &p)])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file_and_env() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("c.json");
        fs::write(&cfg, r#"{"threshold": 0.4, "output_dir": "from_file", "seed": 3}"#).unwrap();
        let args = CommonArgs {
            config: Some(cfg.clone()),
            threshold: Some(0.7),
            ..Default::default()
        };
        let c = resolve_config(&args, Some("from_env".into())).unwrap();
        assert_eq!(c.threshold, 0.7);
        assert_eq!(c.seed, 3);
        assert_eq!(c.output_dir, PathBuf::from("from_env"));
        let args = CommonArgs {
            config: Some(cfg),
            output_dir: Some("from_flag".into()),
            ..Default::default()
        };
        assert_eq!(resolve_config(&args, Some("from_env".into())).unwrap().output_dir, PathBuf::from("from_flag"));
    }

    #[test]
    fn usage_errors_exit_1() {
        assert_eq!(run(["crowdseg", "no-such-command"]), ExitCode::from(1));
        assert_eq!(run(["crowdseg", "segment", "--threshold", "x"]), ExitCode::from(1));
    }
}
