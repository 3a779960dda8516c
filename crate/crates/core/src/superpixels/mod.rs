//! Image oversegmentation: SLIC, Felzenszwalb graph merging, and the multiscale sweep.

mod felzenszwalb;
mod partition;
mod slic;

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use felzenszwalb::{felzenszwalb, grid_edges, smooth, Edge, FelzParams};
pub use partition::Partition;
pub use slic::{rgb_to_lab, slic, SlicParams};

use crate::error::Result;
use crate::imaging::Raster;

/// Which algorithm (and parameters) produced a partition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PartitionSource {
    Felzenszwalb(FelzParams),
    Slic(SlicParams),
}

impl PartitionSource {
    pub fn run(&self, raster: &Raster) -> Result<Partition> {
        match self {
            PartitionSource::Felzenszwalb(p) => felzenszwalb(raster, p),
            PartitionSource::Slic(p) => slic(raster, p),
        }
    }
}

impl fmt::Display for PartitionSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PartitionSource::Felzenszwalb(p) => write!(f, "felzenszwalb_k{}", p.k),
            PartitionSource::Slic(p) => write!(f, "slic_s{}", p.region_size),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MultiscaleConfig {
    pub felzenszwalb_k: Vec<f64>,
    pub felzenszwalb_sigma: f64,
    pub felzenszwalb_min_size: usize,
    pub slic_region_sizes: Vec<usize>,
    pub slic_compactness: f64,
    pub slic_iterations: usize,
}

impl Default for MultiscaleConfig {
    fn default() -> Self {
        let felz = FelzParams::default();
        let slic = SlicParams::default();
        MultiscaleConfig {
            felzenszwalb_k: vec![10.0, 20.0, 50.0, 100.0, 200.0, 300.0, 400.0, 500.0],
            felzenszwalb_sigma: felz.sigma,
            felzenszwalb_min_size: felz.min_size,
            slic_region_sizes: vec![5, 10, 20, 30, 40, 50],
            slic_compactness: slic.compactness,
            slic_iterations: slic.iterations,
        }
    }
}

impl MultiscaleConfig {
    pub fn felzenszwalb(&self, k: f64) -> FelzParams {
        FelzParams {
            k,
            sigma: self.felzenszwalb_sigma,
            min_size: self.felzenszwalb_min_size,
        }
    }

    pub fn slic(&self, region_size: usize) -> SlicParams {
        SlicParams {
            region_size,
            compactness: self.slic_compactness,
            iterations: self.slic_iterations,
        }
    }

    /// Felzenszwalb runs first, then SLIC, each in configured order.
    pub fn sources(&self) -> Vec<PartitionSource> {
        let felz = self
            .felzenszwalb_k
            .iter()
            .map(|&k| PartitionSource::Felzenszwalb(self.felzenszwalb(k)));
        let slic = self
            .slic_region_sizes
            .iter()
            .map(|&s| PartitionSource::Slic(self.slic(s)));
        felz.chain(slic).collect()
    }

    pub fn validate(&self) -> Result<()> {
        for source in self.sources() {
            match source {
                PartitionSource::Felzenszwalb(p) => p.validate()?,
                PartitionSource::Slic(p) => p.validate()?,
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Multiscale {
    pub partitions: Vec<(PartitionSource, Partition)>,
    /// One entry per skipped scale.
    pub warnings: Vec<String>,
}

impl Multiscale {
    pub fn partitions(&self) -> impl Iterator<Item = &Partition> {
        self.partitions.iter().map(|(_, p)| p)
    }

    pub fn len(&self) -> usize {
        self.partitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.partitions.is_empty()
    }
}

/// Runs every configured scale. SLIC scales with a region size larger than the
/// image are skipped and reported in `warnings`.
pub fn multiscale_partitions(raster: &Raster, config: &MultiscaleConfig) -> Result<Multiscale> {
    config.validate()?;
    let (w, h) = raster.dimensions();
    let mut warnings = Vec::new();
    let sources: Vec<PartitionSource> = config
        .sources()
        .into_iter()
        .filter(|s| match s {
            PartitionSource::Slic(p) if p.region_size > w.min(h) => {
                warnings.push(format!(
                    "skipped slic region_size {} on {w}x{h} image",
                    p.region_size
                ));
                false
            }
            _ => true,
        })
        .collect();
    let partitions = sources
        .par_iter()
        .map(|s| s.run(raster).map(|p| (*s, p)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Multiscale {
        partitions,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn textured(w: usize, h: usize) -> Raster {
        let px = (0..w * h)
            .map(|i| {
                let (x, y) = (i % w, i / w);
                [(x * 7 % 256) as u8, (y * 11 % 256) as u8, ((x + y) * 3 % 256) as u8]
            })
            .collect();
        Raster::new(w, h, px).unwrap()
    }

    #[test]
    fn default_sweep_has_fourteen_scales() {
        let ms = multiscale_partitions(&textured(50, 50), &MultiscaleConfig::default()).unwrap();
        assert_eq!(ms.len(), 14);
        assert!(ms.warnings.is_empty());
        for p in ms.partitions() {
            p.check_invariants().unwrap();
        }
    }

    #[test]
    fn small_image_skips_large_slic_scales() {
        let ms = multiscale_partitions(&textured(30, 30), &MultiscaleConfig::default()).unwrap();
        assert_eq!(ms.len(), 12);
        assert_eq!(ms.warnings.len(), 2);
        assert!(ms.warnings[0].contains("40") && ms.warnings[1].contains("50"));
    }

    #[test]
    fn single_scale_config() {
        let config = MultiscaleConfig {
            felzenszwalb_k: vec![100.0],
            slic_region_sizes: vec![],
            ..Default::default()
        };
        let ms = multiscale_partitions(&textured(20, 20), &config).unwrap();
        assert_eq!(ms.len(), 1);
        assert_eq!(ms.partitions[0].0.to_string(), "felzenszwalb_k100");
    }
}
