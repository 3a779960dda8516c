//! Graph-based segmentation over the 8-connected pixel grid.

use serde::{Deserialize, Serialize};

use super::Partition;
use crate::error::{Error, Result};
use crate::imaging::Raster;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FelzParams {
    /// Scale of observation; larger values favor larger components.
    pub k: f64,
    /// Standard deviation of the Gaussian pre-smoothing, in pixels. 0 disables smoothing.
    pub sigma: f64,
    pub min_size: usize,
}

impl FelzParams {
    pub fn with_k(k: f64) -> Self {
        FelzParams {
            k,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k > 0.0 && self.k.is_finite()) {
            return Err(Error::InvalidParameter(format!("felzenszwalb k must be > 0, got {}", self.k)));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "felzenszwalb sigma must be >= 0, got {}",
                self.sigma
            )));
        }
        if self.min_size == 0 {
            return Err(Error::InvalidParameter("felzenszwalb min_size must be >= 1".into()));
        }
        Ok(())
    }
}

impl Default for FelzParams {
    fn default() -> Self {
        FelzParams {
            k: 100.0,
            sigma: 0.8,
            min_size: 20,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub src: usize,
    pub dst: usize,
    pub weight: f64,
}

/// Channel-wise Gaussian smoothing with clamped borders, as `f64` triples.
pub fn smooth(raster: &Raster, sigma: f64) -> Vec<[f64; 3]> {
    let (w, h) = raster.dimensions();
    let src: Vec<[f64; 3]> = raster
        .pixels()
        .iter()
        .map(|p| [p[0] as f64, p[1] as f64, p[2] as f64])
        .collect();
    if sigma <= 0.0 {
        return src;
    }
    let radius = (sigma * 4.0).ceil() as usize;
    let mut kernel: Vec<f64> = (0..=radius)
        .map(|i| (-0.5 * (i as f64 / sigma).powi(2)).exp())
        .collect();
    let total = 2.0 * kernel.iter().sum::<f64>() - kernel[0];
    kernel.iter_mut().for_each(|v| *v /= total);

    let convolve = |input: &[[f64; 3]], horizontal: bool| -> Vec<[f64; 3]> {
        let mut out = vec![[0.0; 3]; input.len()];
        for y in 0..h {
            for x in 0..w {
                let mut acc = [0.0; 3];
                for (i, &kv) in kernel.iter().enumerate() {
                    let taps: &[isize] = if i == 0 { &[0] } else { &[-1, 1] };
                    for &sign in taps {
                        let off = sign * i as isize;
                        let (sx, sy) = if horizontal {
                            ((x as isize + off).clamp(0, w as isize - 1) as usize, y)
                        } else {
                            (x, (y as isize + off).clamp(0, h as isize - 1) as usize)
                        };
                        let p = input[sy * w + sx];
                        for c in 0..3 {
                            acc[c] += kv * p[c];
                        }
                    }
                }
                out[y * w + x] = acc;
            }
        }
        out
    };
    let tmp = convolve(&src, true);
    convolve(&tmp, false)
}

/// 8-connected grid edges weighted by Euclidean RGB distance, sorted by
/// `(weight, src, dst)`.
pub fn grid_edges(pixels: &[[f64; 3]], width: usize, height: usize) -> Vec<Edge> {
    let dist = |a: usize, b: usize| {
        let (p, q) = (pixels[a], pixels[b]);
        ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2)).sqrt()
    };
    let mut edges = Vec::with_capacity(width * height * 4);
    for y in 0..height {
        for x in 0..width {
            let p = y * width + x;
            let mut push = |q: usize| {
                edges.push(Edge {
                    src: p.min(q),
                    dst: p.max(q),
                    weight: dist(p, q),
                })
            };
            if x + 1 < width {
                push(p + 1);
            }
            if y + 1 < height {
                push(p + width);
            }
            if x + 1 < width && y + 1 < height {
                push(p + width + 1);
            }
            if x + 1 < width && y > 0 {
                push(p - width + 1);
            }
        }
    }
    edges.sort_by(|a, b| {
        a.weight
            .total_cmp(&b.weight)
            .then(a.src.cmp(&b.src))
            .then(a.dst.cmp(&b.dst))
    });
    edges
}

struct Forest {
    parent: Vec<usize>,
    rank: Vec<u8>,
    size: Vec<usize>,
    /// internal difference + k/|C|, valid at roots
    threshold: Vec<f64>,
}

impl Forest {
    fn new(n: usize, k: f64) -> Self {
        Forest {
            parent: (0..n).collect(),
            rank: vec![0; n],
            size: vec![1; n],
            threshold: vec![k; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        while self.parent[x] != root {
            let next = self.parent[x];
            self.parent[x] = root;
            x = next;
        }
        root
    }

    fn join(&mut self, a: usize, b: usize) -> usize {
        let (root, child) = if self.rank[a] >= self.rank[b] { (a, b) } else { (b, a) };
        if self.rank[a] == self.rank[b] {
            self.rank[root] += 1;
        }
        self.parent[child] = root;
        self.size[root] += self.size[child];
        root
    }
}

pub fn felzenszwalb(raster: &Raster, params: &FelzParams) -> Result<Partition> {
    params.validate()?;
    let (w, h) = raster.dimensions();
    let smoothed = smooth(raster, params.sigma);
    let edges = grid_edges(&smoothed, w, h);

    let mut forest = Forest::new(w * h, params.k);
    for e in &edges {
        let a = forest.find(e.src);
        let b = forest.find(e.dst);
        if a != b && e.weight <= forest.threshold[a] && e.weight <= forest.threshold[b] {
            let root = forest.join(a, b);
            // edges arrive in nondecreasing order, so e.weight is the new internal difference
            forest.threshold[root] = e.weight + params.k / forest.size[root] as f64;
        }
    }
    for e in &edges {
        let a = forest.find(e.src);
        let b = forest.find(e.dst);
        if a != b && (forest.size[a] < params.min_size || forest.size[b] < params.min_size) {
            forest.join(a, b);
        }
    }

    let roots: Vec<u32> = (0..w * h).map(|p| forest.find(p) as u32).collect();
    // components joined only through diagonal edges become separate pieces;
    // pieces below min_size are then merged across 4-neighbor edges
    let pieces = Partition::from_regions(w, h, &roots);
    let mut forest = Forest::new(w * h, params.k);
    for e in edges.iter().filter(|e| is_4_neighbor(e, w)) {
        let a = forest.find(e.src);
        let b = forest.find(e.dst);
        if a != b && pieces.labels()[e.src] == pieces.labels()[e.dst] {
            forest.join(a, b);
        }
    }
    for e in edges.iter().filter(|e| is_4_neighbor(e, w)) {
        let a = forest.find(e.src);
        let b = forest.find(e.dst);
        if a != b && (forest.size[a] < params.min_size || forest.size[b] < params.min_size) {
            forest.join(a, b);
        }
    }
    let roots: Vec<u32> = (0..w * h).map(|p| forest.find(p) as u32).collect();
    Ok(Partition::from_regions(w, h, &roots))
}

fn is_4_neighbor(e: &Edge, width: usize) -> bool {
    e.dst - e.src == width || (e.dst - e.src == 1 && e.dst % width != 0)
}
