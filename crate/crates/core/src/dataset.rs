//! Images with ground truth, their precomputed partitions, and directory loading.
//!
//! On disk a labeled image set is two sibling directories, `images/<id>.{ppm,png}`
//! and `truth/<id>.{pgm,png}`.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::imaging::{load_mask, load_raster, BinaryMask, Raster};
use crate::superpixels::{multiscale_partitions, MultiscaleConfig, Partition, PartitionSource};

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledImage {
    pub id: String,
    pub raster: Raster,
    pub truth: Option<BinaryMask>,
}

impl LabeledImage {
    pub fn new(id: impl Into<String>, raster: Raster, truth: Option<BinaryMask>) -> Result<Self> {
        if let Some(t) = &truth {
            if t.dimensions() != raster.dimensions() {
                return Err(Error::DimensionMismatch {
                    expected: raster.dimensions(),
                    found: t.dimensions(),
                });
            }
        }
        Ok(LabeledImage {
            id: id.into(),
            raster,
            truth,
        })
    }

    pub fn truth(&self) -> Result<&BinaryMask> {
        self.truth
            .as_ref()
            .ok_or_else(|| Error::InvalidParameter(format!("image `{}` has no ground truth", self.id)))
    }
}

/// An image together with its multiscale partitions.
#[derive(Debug, Clone)]
pub struct PreparedImage {
    pub image: LabeledImage,
    pub partitions: Vec<(PartitionSource, Partition)>,
    pub warnings: Vec<String>,
}

impl PreparedImage {
    pub fn prepare(image: LabeledImage, config: &MultiscaleConfig) -> Result<Self> {
        let ms = multiscale_partitions(&image.raster, config)?;
        Ok(PreparedImage {
            image,
            partitions: ms.partitions,
            warnings: ms.warnings,
        })
    }

    pub fn id(&self) -> &str {
        &self.image.id
    }

    pub fn partitions(&self) -> impl Iterator<Item = &Partition> {
        self.partitions.iter().map(|(_, p)| p)
    }
}

/// Prepares images in parallel; output order follows input order.
pub fn prepare_all(images: Vec<LabeledImage>, config: &MultiscaleConfig) -> Result<Vec<PreparedImage>> {
    images
        .into_par_iter()
        .map(|img| PreparedImage::prepare(img, config))
        .collect()
}

fn image_files(dir: &Path) -> Result<Vec<(String, PathBuf)>> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
        if matches!(ext.as_deref(), Some("ppm" | "pgm" | "png")) {
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                files.push((stem.to_string(), path));
            }
        }
    }
    files.sort();
    Ok(files)
}

fn find_with_stem(dir: &Path, id: &str) -> Option<PathBuf> {
    ["pgm", "png", "ppm"]
        .iter()
        .map(|ext| dir.join(format!("{id}.{ext}")))
        .find(|p| p.is_file())
}

/// Loads every image in `images_dir`, sorted by id, with its truth mask from
/// `truth_dir` when that directory is given.
pub fn load_images(images_dir: &Path, truth_dir: Option<&Path>) -> Result<Vec<LabeledImage>> {
    let files = image_files(images_dir)?;
    files
        .into_par_iter()
        .map(|(id, path)| {
            let raster = load_raster(&path)?;
            let truth = match truth_dir {
                Some(dir) => {
                    let p = find_with_stem(dir, &id).ok_or_else(|| {
                        Error::io(
                            dir.join(format!("{id}.pgm")),
                            std::io::Error::new(std::io::ErrorKind::NotFound, "missing ground truth"),
                        )
                    })?;
                    Some(load_mask(p)?)
                }
                None => None,
            };
            LabeledImage::new(id, raster, truth)
        })
        .collect()
}

/// A gold-standard set lives in `<dir>/images` and `<dir>/truth`.
pub fn load_gold(dir: &Path) -> Result<Vec<LabeledImage>> {
    let images = load_images(&dir.join("images"), Some(&dir.join("truth")))?;
    if images.is_empty() {
        return Err(Error::EmptyDataset(format!("no gold images in {}", dir.display())));
    }
    Ok(images)
}
