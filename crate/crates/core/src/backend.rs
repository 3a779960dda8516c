//! Pluggable segmenters: clicks (plus qualities) on a prepared image in, mask out.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::aggregation::{aggregate_partitions, NormalizationScope, WeightedClicks, DEFAULT_THRESHOLD};
use crate::dataset::PreparedImage;
use crate::error::Result;
use crate::imaging::BinaryMask;

pub trait SegmentationBackend: Send + Sync {
    fn name(&self) -> &str;

    /// `weighted` holds only the clicks meant for this image.
    fn segment(&self, image: &PreparedImage, weighted: &WeightedClicks) -> Result<BinaryMask>;
}

/// Multiscale weighted voting, binarized at a fixed threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AggregationBackend {
    pub threshold: f64,
    pub normalization: NormalizationScope,
}

impl Default for AggregationBackend {
    fn default() -> Self {
        AggregationBackend {
            threshold: DEFAULT_THRESHOLD,
            normalization: NormalizationScope::AllSuperpixels,
        }
    }
}

impl SegmentationBackend for AggregationBackend {
    fn name(&self) -> &str {
        "aggregation"
    }

    fn segment(&self, image: &PreparedImage, weighted: &WeightedClicks) -> Result<BinaryMask> {
        Ok(aggregate_partitions(image.partitions(), weighted, self.threshold, self.normalization)?.mask)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    #[default]
    Aggregation,
    Candidates,
}

impl fmt::Display for BackendKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BackendKind::Aggregation => "aggregation",
            BackendKind::Candidates => "candidates",
        })
    }
}

impl FromStr for BackendKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "aggregation" => Ok(BackendKind::Aggregation),
            "candidates" => Ok(BackendKind::Candidates),
            _ => Err(format!("unknown backend `{s}`")),
        }
    }
}
