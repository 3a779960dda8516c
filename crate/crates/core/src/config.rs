//! Run configuration shared by every subcommand.
//!
//! A JSON file supplies the base values; command-line flags override it and
//! `CROWDSEG_OUTPUT_DIR` overrides the output directory when no flag does.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::aggregation::{NormalizationScope, DEFAULT_THRESHOLD};
use crate::backend::BackendKind;
use crate::candidates::DEFAULT_MAX_CANDIDATES;
use crate::evaluation::{FilterPartition, FilterPartitionConfig};
use crate::filtering::ClickFilter;
use crate::quality::RankingCriterion;
use crate::simulation::SimulationConfig;
use crate::superpixels::MultiscaleConfig;

pub const OUTPUT_DIR_ENV: &str = "CROWDSEG_OUTPUT_DIR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Test images, `<id>.{ppm,png}`.
    pub images_dir: Option<PathBuf>,
    /// Ground truth for the test images, `<id>.{pgm,png}`.
    pub truth_dir: Option<PathBuf>,
    pub traces: Option<PathBuf>,
    /// Holds `images/` and `truth/`.
    pub gold_dir: Option<PathBuf>,
    /// Precomputed worker profiles; when absent they are computed from the gold set.
    pub profiles: Option<PathBuf>,
    pub candidates_dir: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub partitions: MultiscaleConfig,
    pub filter: ClickFilter,
    pub filter_partition: FilterPartition,
    pub filter_partitions: FilterPartitionConfig,
    pub ranking: RankingCriterion,
    pub threshold: f64,
    pub normalization: NormalizationScope,
    pub tolerance_radius: f64,
    /// Segmenter for the filtering and top-N experiments.
    pub backend: BackendKind,
    pub max_candidates: usize,
    pub seed: u64,
    pub simulation: SimulationConfig,
    /// Worker threads; all cores when absent.
    pub parallelism: Option<usize>,
    /// Also render top-N curves as SVG.
    pub plot: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            images_dir: None,
            truth_dir: None,
            traces: None,
            gold_dir: None,
            profiles: None,
            candidates_dir: None,
            output_dir: PathBuf::from("out"),
            partitions: MultiscaleConfig::default(),
            filter: ClickFilter::KeepMajority,
            filter_partition: FilterPartition::Slic,
            filter_partitions: FilterPartitionConfig::default(),
            ranking: RankingCriterion::ByJaccard,
            threshold: DEFAULT_THRESHOLD,
            normalization: NormalizationScope::AllSuperpixels,
            tolerance_radius: 0.0,
            backend: BackendKind::Candidates,
            max_candidates: DEFAULT_MAX_CANDIDATES,
            seed: 0,
            simulation: SimulationConfig::default(),
            parallelism: None,
            plot: false,
        }
    }
}

/// A configuration problem, always naming the offending key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(key: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError {
            key: key.into(),
            message: message.into(),
        }
    }
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config key `{}`: {}", self.key, self.message)
    }
}

impl std::error::Error for ConfigError {}

/// Inputs a subcommand reads, checked for existence before it runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Input {
    Images,
    Truth,
    Traces,
    Gold,
    /// Either a gold directory or a profiles file.
    GoldOrProfiles,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| {
            let msg = e.to_string();
            let key = msg
                .split('`')
                .nth(1)
                .filter(|_| msg.starts_with("unknown field") || msg.starts_with("missing field"))
                .unwrap_or("<file>")
                .to_string();
            ConfigError::new(key, msg)
        })
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::new("config", format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Value checks plus existence of the paths `inputs` names.
    pub fn validate(&self, inputs: &[Input]) -> Result<(), ConfigError> {
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(ConfigError::new("threshold", format!("must lie in (0, 1), got {}", self.threshold)));
        }
        if !(self.tolerance_radius >= 0.0 && self.tolerance_radius.is_finite()) {
            return Err(ConfigError::new("tolerance_radius", "must be a finite value >= 0"));
        }
        if self.max_candidates == 0 {
            return Err(ConfigError::new("max_candidates", "must be >= 1"));
        }
        if self.parallelism == Some(0) {
            return Err(ConfigError::new("parallelism", "must be >= 1"));
        }
        self.partitions
            .validate()
            .map_err(|e| ConfigError::new("partitions", e.to_string()))?;
        self.filter_partitions
            .slic
            .validate()
            .map_err(|e| ConfigError::new("filter_partitions.slic", e.to_string()))?;
        self.filter_partitions
            .felzenszwalb
            .validate()
            .map_err(|e| ConfigError::new("filter_partitions.felzenszwalb", e.to_string()))?;
        self.simulation
            .validate()
            .map_err(|e| ConfigError::new("simulation", e.to_string()))?;

        let need = |key: &str, path: &Option<PathBuf>| -> Result<(), ConfigError> {
            match path {
                None => Err(ConfigError::new(key, "required by this subcommand")),
                Some(p) if !p.exists() => Err(ConfigError::new(key, format!("path does not exist: {}", p.display()))),
                Some(_) => Ok(()),
            }
        };
        for input in inputs {
            match input {
                Input::Images => need("images_dir", &self.images_dir)?,
                Input::Truth => need("truth_dir", &self.truth_dir)?,
                Input::Traces => need("traces", &self.traces)?,
                Input::Gold => need("gold_dir", &self.gold_dir)?,
                Input::GoldOrProfiles => match (&self.profiles, &self.gold_dir) {
                    (Some(_), _) => need("profiles", &self.profiles)?,
                    (None, Some(_)) => need("gold_dir", &self.gold_dir)?,
                    (None, None) => {
                        return Err(ConfigError::new("gold_dir", "either gold_dir or profiles is required"))
                    }
                },
            }
        }
        if let Some(p) = &self.candidates_dir {
            if !p.is_dir() {
                return Err(ConfigError::new(
                    "candidates_dir",
                    format!("not a directory: {}", p.display()),
                ));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_mirror_published_parameters() {
        let c = RunConfig::default();
        assert_eq!(c.threshold, 0.56);
        assert_eq!(c.partitions.sources().len(), 14);
        assert_eq!(c.ranking, RankingCriterion::ByJaccard);
    }

    #[test]
    fn unknown_keys_are_named() {
        let err = RunConfig::from_json(r#"{"treshold": 0.5}"#).unwrap_err();
        assert_eq!(err.key, "treshold");
        let err = RunConfig::from_json(r#"{"partitions": {"slic_region_size": [5]}}"#).unwrap_err();
        assert_eq!(err.key, "slic_region_size");
    }

    #[test]
    fn round_trips_through_json() {
        let c = RunConfig {
            seed: 9,
            plot: true,
            ..Default::default()
        };
        assert_eq!(RunConfig::from_json(&c.to_json()).unwrap(), c);
    }

    #[test]
    fn validation_names_the_key() {
        let c = RunConfig {
            threshold: 1.0,
            ..Default::default()
        };
        assert_eq!(c.validate(&[]).unwrap_err().key, "threshold");
        let c = RunConfig::default();
        assert_eq!(c.validate(&[Input::Traces]).unwrap_err().key, "traces");
        let c = RunConfig {
            images_dir: Some("/definitely/not/here".into()),
            ..Default::default()
        };
        assert_eq!(c.validate(&[Input::Images]).unwrap_err().key, "images_dir");
    }
}
