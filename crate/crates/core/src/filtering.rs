//! Superpixel-based click filtering.
//!
//! Clicks from all workers are pooled per superpixel. A superpixel holding both
//! labels is a conflict; conflicts are resolved either by keeping the majority
//! label or by dropping every click in the superpixel.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::clicks::{check_bounds, ClickRecord};
use crate::error::Result;
use crate::superpixels::Partition;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuperpixelBucket {
    pub superpixel: u32,
    pub fg_count: usize,
    pub bg_count: usize,
    /// Indices into the click slice that was bucketed, ascending.
    pub click_indices: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClickConfiguration {
    MoreFg,
    MoreBg,
    Tie,
    OnlyFg,
    OnlyBg,
    Empty,
}

impl ClickConfiguration {
    pub fn is_conflict(self) -> bool {
        matches!(
            self,
            ClickConfiguration::MoreFg | ClickConfiguration::MoreBg | ClickConfiguration::Tie
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClickFilter {
    None,
    KeepMajority,
    DiscardAll,
}

impl ClickFilter {
    pub fn apply(self, partition: &Partition, clicks: &[ClickRecord]) -> Result<Vec<ClickRecord>> {
        match self {
            ClickFilter::None => {
                check_bounds(clicks, partition.width(), partition.height())?;
                Ok(clicks.to_vec())
            }
            ClickFilter::KeepMajority => filter_keep_majority(partition, clicks),
            ClickFilter::DiscardAll => filter_discard_all(partition, clicks),
        }
    }
}

impl fmt::Display for ClickFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClickFilter::None => "none",
            ClickFilter::KeepMajority => "keep_majority",
            ClickFilter::DiscardAll => "discard_all",
        })
    }
}

impl FromStr for ClickFilter {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "none" => Ok(ClickFilter::None),
            "keep_majority" => Ok(ClickFilter::KeepMajority),
            "discard_all" => Ok(ClickFilter::DiscardAll),
            _ => Err(format!("unknown filter `{s}`")),
        }
    }
}

/// Groups clicks by the superpixel under them. Superpixels without clicks are omitted;
/// buckets come out in ascending superpixel id.
pub fn bucket_clicks(partition: &Partition, clicks: &[ClickRecord]) -> Result<Vec<SuperpixelBucket>> {
    check_bounds(clicks, partition.width(), partition.height())?;
    let mut buckets: BTreeMap<u32, SuperpixelBucket> = BTreeMap::new();
    for (i, c) in clicks.iter().enumerate() {
        let sp = partition.label_at(c.x as usize, c.y as usize);
        let b = buckets.entry(sp).or_insert_with(|| SuperpixelBucket {
            superpixel: sp,
            fg_count: 0,
            bg_count: 0,
            click_indices: Vec::new(),
        });
        if c.label.is_foreground() {
            b.fg_count += 1;
        } else {
            b.bg_count += 1;
        }
        b.click_indices.push(i);
    }
    Ok(buckets.into_values().collect())
}

pub fn classify(bucket: &SuperpixelBucket) -> ClickConfiguration {
    use ClickConfiguration::*;
    match (bucket.fg_count, bucket.bg_count) {
        (0, 0) => Empty,
        (_, 0) => OnlyFg,
        (0, _) => OnlyBg,
        (f, b) if f > b => MoreFg,
        (f, b) if b > f => MoreBg,
        _ => Tie,
    }
}

fn retain(clicks: &[ClickRecord], buckets: &[SuperpixelBucket], keep_click: impl Fn(&SuperpixelBucket, &ClickRecord) -> bool) -> Vec<ClickRecord> {
    let mut keep = vec![false; clicks.len()];
    for b in buckets {
        for &i in &b.click_indices {
            keep[i] = keep_click(b, &clicks[i]);
        }
    }
    clicks
        .iter()
        .zip(keep)
        .filter_map(|(c, k)| k.then(|| c.clone()))
        .collect()
}

/// Drops minority-label clicks in conflicted superpixels; ties drop every click.
pub fn filter_keep_majority(partition: &Partition, clicks: &[ClickRecord]) -> Result<Vec<ClickRecord>> {
    let buckets = bucket_clicks(partition, clicks)?;
    Ok(retain(clicks, &buckets, |b, c| match classify(b) {
        ClickConfiguration::MoreFg => c.label.is_foreground(),
        ClickConfiguration::MoreBg => !c.label.is_foreground(),
        ClickConfiguration::Tie => false,
        _ => true,
    }))
}

/// Drops every click in a conflicted superpixel.
pub fn filter_discard_all(partition: &Partition, clicks: &[ClickRecord]) -> Result<Vec<ClickRecord>> {
    let buckets = bucket_clicks(partition, clicks)?;
    Ok(retain(clicks, &buckets, |b, _| !classify(b).is_conflict()))
}
