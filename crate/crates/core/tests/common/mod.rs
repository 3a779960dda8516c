//! Independent reference implementations used by several test targets.
#![allow(dead_code)]

use std::collections::{BTreeSet, VecDeque};

use crowdseg::dataset::{prepare_all, LabeledImage, PreparedImage};
use crowdseg::imaging::Raster;
use crowdseg::simulation::SyntheticScene;
use crowdseg::superpixels::MultiscaleConfig;

/// Graph-based segmentation on an unsmoothed image, written directly from
/// the merge predicate: components are relabeled wholesale on every merge.
pub fn felzenszwalb_oracle(raster: &Raster, k: f64, min_size: usize) -> Vec<u32> {
    let (w, h) = raster.dimensions();
    let n = w * h;
    let px = |i: usize| raster.pixels()[i].map(f64::from);
    let dist = |a: usize, b: usize| {
        let (p, q) = (px(a), px(b));
        ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2)).sqrt()
    };
    let mut edges = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            for (dx, dy) in [(1i64, 0i64), (0, 1), (1, 1), (1, -1)] {
                let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                if nx >= 0 && ny >= 0 && (nx as usize) < w && (ny as usize) < h {
                    let j = ny as usize * w + nx as usize;
                    edges.push((dist(i, j), i.min(j), i.max(j)));
                }
            }
        }
    }
    edges.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let mut comp: Vec<usize> = (0..n).collect();
    let mut internal = vec![0.0f64; n];
    let size = |comp: &[usize], c: usize| comp.iter().filter(|&&x| x == c).count();
    let relabel = |comp: &mut Vec<usize>, from: usize, to: usize| {
        for x in comp.iter_mut() {
            if *x == from {
                *x = to;
            }
        }
    };
    for &(wt, a, b) in &edges {
        let (ca, cb) = (comp[a], comp[b]);
        if ca == cb {
            continue;
        }
        let ta = internal[ca] + k / size(&comp, ca) as f64;
        let tb = internal[cb] + k / size(&comp, cb) as f64;
        if wt <= ta && wt <= tb {
            relabel(&mut comp, cb, ca);
            internal[ca] = wt;
        }
    }
    for &(_, a, b) in &edges {
        let (ca, cb) = (comp[a], comp[b]);
        if ca != cb && (size(&comp, ca) < min_size || size(&comp, cb) < min_size) {
            relabel(&mut comp, cb, ca);
        }
    }
    // pieces cut apart by the 4-connectivity split get a second min_size pass over 4-neighbor edges only
    let pieces: Vec<usize> = split_4_connected(w, h, &comp).into_iter().map(|l| l as usize).collect();
    let mut comp = pieces;
    for &(_, a, b) in &edges {
        let four = b - a == w || (b - a == 1 && b % w != 0);
        let (ca, cb) = (comp[a], comp[b]);
        if four && ca != cb && (size(&comp, ca) < min_size || size(&comp, cb) < min_size) {
            relabel(&mut comp, cb, ca);
        }
    }
    split_4_connected(w, h, &comp)
}

/// 4-connected components of equal-valued pixels, numbered in raster order.
pub fn split_4_connected(w: usize, h: usize, regions: &[usize]) -> Vec<u32> {
    let mut out = vec![u32::MAX; w * h];
    let mut next = 0;
    for start in 0..w * h {
        if out[start] != u32::MAX {
            continue;
        }
        out[start] = next;
        let mut queue = VecDeque::from([start]);
        while let Some(i) = queue.pop_front() {
            let (x, y) = (i % w, i / w);
            let mut nbrs = Vec::new();
            if x > 0 {
                nbrs.push(i - 1);
            }
            if x + 1 < w {
                nbrs.push(i + 1);
            }
            if y > 0 {
                nbrs.push(i - w);
            }
            if y + 1 < h {
                nbrs.push(i + w);
            }
            for j in nbrs {
                if out[j] == u32::MAX && regions[j] == regions[start] {
                    out[j] = next;
                    queue.push_back(j);
                }
            }
        }
        next += 1;
    }
    out
}

/// Number of vertex subsets of size 1..=max_size whose induced subgraph is connected.
pub fn connected_subset_count(adjacency: &[Vec<usize>], max_size: usize) -> usize {
    let n = adjacency.len();
    let mut count = 0;
    for mask in 1u64..(1u64 << n) {
        let members: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
        if members.len() > max_size {
            continue;
        }
        let set: BTreeSet<usize> = members.iter().copied().collect();
        let mut seen = BTreeSet::from([members[0]]);
        let mut stack = vec![members[0]];
        while let Some(v) = stack.pop() {
            for &u in &adjacency[v] {
                if set.contains(&u) && seen.insert(u) {
                    stack.push(u);
                }
            }
        }
        if seen.len() == members.len() {
            count += 1;
        }
    }
    count
}

/// Lattice points (pixel centers) inside a closed disc.
pub fn disc_pixel_count(cx: f64, cy: f64, r: f64, w: usize, h: usize) -> usize {
    let mut n = 0;
    for y in 0..h {
        for x in 0..w {
            let (dx, dy) = (x as f64 + 0.5 - cx, y as f64 + 0.5 - cy);
            if dx * dx + dy * dy <= r * r {
                n += 1;
            }
        }
    }
    n
}

pub fn prepare_scenes(scenes: &[(String, SyntheticScene)], config: &MultiscaleConfig) -> Vec<PreparedImage> {
    let images = scenes
        .iter()
        .map(|(id, s)| LabeledImage::new(id.clone(), s.raster.clone(), Some(s.truth.clone())).unwrap())
        .collect();
    prepare_all(images, config).unwrap()
}
