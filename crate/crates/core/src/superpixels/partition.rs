use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::error::{Error, Result};
use crate::imaging;

/// One oversegmentation of an image.
///
/// Every pixel carries an id in `0..count`, and the pixels sharing an id form a
/// single 4-connected region.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    width: usize,
    height: usize,
    labels: Vec<u32>,
    count: usize,
}

const SPXL_MAGIC: &[u8; 4] = b"SPXL";

impl Partition {
    /// Validates coverage, contiguous ids and 4-connectivity.
    pub fn new(width: usize, height: usize, labels: Vec<u32>) -> Result<Self> {
        if width == 0 || height == 0 || labels.len() != width * height {
            return Err(Error::InvalidParameter(format!(
                "partition {width}x{height} needs {} labels, got {}",
                width * height,
                labels.len()
            )));
        }
        let count = labels.iter().max().map_or(0, |&m| m as usize + 1);
        let partition = Partition {
            width,
            height,
            labels,
            count,
        };
        partition.check_invariants()?;
        Ok(partition)
    }

    /// Builds a partition whose superpixels are the 4-connected components of
    /// equal `regions` values. Ids are assigned in raster order of first pixel.
    pub fn from_regions(width: usize, height: usize, regions: &[u32]) -> Self {
        assert_eq!(regions.len(), width * height);
        let mut labels = vec![u32::MAX; regions.len()];
        let mut next = 0u32;
        let mut queue = VecDeque::new();
        for start in 0..regions.len() {
            if labels[start] != u32::MAX {
                continue;
            }
            let region = regions[start];
            labels[start] = next;
            queue.push_back(start);
            while let Some(p) = queue.pop_front() {
                for q in neighbors4(p, width, height) {
                    if labels[q] == u32::MAX && regions[q] == region {
                        labels[q] = next;
                        queue.push_back(q);
                    }
                }
            }
            next += 1;
        }
        Partition {
            width,
            height,
            labels,
            count: next as usize,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dimensions(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn label_at(&self, x: usize, y: usize) -> u32 {
        self.labels[y * self.width + x]
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.count];
        for &l in &self.labels {
            sizes[l as usize] += 1;
        }
        sizes
    }

    /// Sorted 4-adjacency lists, one per superpixel.
    pub fn adjacency(&self) -> Vec<Vec<u32>> {
        let mut adj: Vec<BTreeSet<u32>> = vec![BTreeSet::new(); self.count];
        for y in 0..self.height {
            for x in 0..self.width {
                let a = self.label_at(x, y);
                if x + 1 < self.width {
                    let b = self.label_at(x + 1, y);
                    if a != b {
                        adj[a as usize].insert(b);
                        adj[b as usize].insert(a);
                    }
                }
                if y + 1 < self.height {
                    let b = self.label_at(x, y + 1);
                    if a != b {
                        adj[a as usize].insert(b);
                        adj[b as usize].insert(a);
                    }
                }
            }
        }
        adj.into_iter().map(|s| s.into_iter().collect()).collect()
    }

    pub fn check_invariants(&self) -> Result<()> {
        if self.labels.len() != self.width * self.height {
            return Err(Error::InvalidParameter("partition does not cover the image".into()));
        }
        let mut seen = vec![false; self.count];
        for &l in &self.labels {
            match seen.get_mut(l as usize) {
                Some(s) => *s = true,
                None => {
                    return Err(Error::InvalidParameter(format!(
                        "superpixel id {l} outside 0..{}",
                        self.count
                    )))
                }
            }
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidParameter(format!(
                "superpixel ids not contiguous: {missing} unused"
            )));
        }
        let split = Partition::from_regions(self.width, self.height, &self.labels);
        if split.count != self.count {
            return Err(Error::InvalidParameter(
                "some superpixel is not 4-connected".into(),
            ));
        }
        Ok(())
    }

    /// PGM of ids when `count <= 256`, otherwise the `SPXL` little-endian format:
    /// magic, width, height, count as `u32`, then one `u32` id per pixel in row-major order.
    pub fn to_bytes(&self) -> Vec<u8> {
        if self.count <= 256 {
            let data: Vec<u8> = self.labels.iter().map(|&l| l as u8).collect();
            return imaging::encode_pgm(self.width, self.height, &data);
        }
        let mut out = Vec::with_capacity(16 + 4 * self.labels.len());
        out.extend_from_slice(SPXL_MAGIC);
        for v in [self.width, self.height, self.count] {
            out.extend_from_slice(&(v as u32).to_le_bytes());
        }
        for &l in &self.labels {
            out.extend_from_slice(&l.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8], origin: &str) -> Result<Self> {
        let decode_err = |offset: usize, reason: &str| Error::Decode {
            origin: origin.to_string(),
            offset: offset as u64,
            reason: reason.to_string(),
        };
        if bytes.starts_with(SPXL_MAGIC) {
            if bytes.len() < 16 {
                return Err(decode_err(bytes.len(), "truncated SPXL header"));
            }
            let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap()) as usize;
            let (width, height, count) = (word(4), word(8), word(12));
            let n = width * height;
            if bytes.len() < 16 + 4 * n {
                return Err(decode_err(bytes.len(), "truncated SPXL ids"));
            }
            let labels = (0..n).map(|i| word(16 + 4 * i) as u32).collect();
            let p = Partition::new(width, height, labels)?;
            if p.count != count {
                return Err(decode_err(12, "SPXL count does not match ids"));
            }
            return Ok(p);
        }
        let (width, height, samples) = imaging::decode_gray_samples(bytes, origin)?;
        Partition::new(width, height, samples.into_iter().map(u32::from).collect())
    }

    /// Superpixel id -> its pixel indices, for callers that need explicit membership.
    pub fn members(&self) -> BTreeMap<u32, Vec<usize>> {
        let mut m: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
        for (i, &l) in self.labels.iter().enumerate() {
            m.entry(l).or_default().push(i);
        }
        m
    }
}

pub(crate) fn neighbors4(p: usize, width: usize, height: usize) -> impl Iterator<Item = usize> {
    let (x, y) = (p % width, p / width);
    let left = (x > 0).then(|| p - 1);
    let right = (x + 1 < width).then(|| p + 1);
    let up = (y > 0).then(|| p - width);
    let down = (y + 1 < height).then(|| p + width);
    [left, right, up, down].into_iter().flatten()
}
