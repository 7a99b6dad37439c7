//! SLIC-style superpixels: k-means in joint Lab + position space on a
//! regular seed grid, then absorption of small fragments so that every
//! label is one 4-connected region.

use std::collections::{BTreeMap, BTreeSet};

use image::RgbImage;

use super::color::rgb_to_lab;
use super::mask::SegmentationMask;
use crate::error::{Error, Result};
use crate::graph::VertexSet;

pub const MIN_SUPERPIXELS: usize = 16;
pub const MAX_SUPERPIXELS: usize = 4096;
pub const SLIC_ITERATIONS: usize = 10;
/// Weight of spatial distance against Lab distance.
pub const COMPACTNESS: f64 = 10.0;

const UNASSIGNED: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq)]
pub struct SuperpixelMap {
    width: u32,
    height: u32,
    labels: Vec<u32>,
    count: usize,
    adjacency: Vec<(usize, usize)>,
}

impl SuperpixelMap {
    /// Builds a map from raw labels, which must be dense in `[0, count)`.
    pub fn from_labels(width: u32, height: u32, labels: Vec<u32>) -> Result<Self> {
        if labels.len() != (width * height) as usize || labels.is_empty() {
            return Err(Error::InvalidArgument(
                "label grid does not match the image".into(),
            ));
        }
        let count = *labels.iter().max().unwrap() as usize + 1;
        let mut seen = vec![false; count];
        labels.iter().for_each(|&l| seen[l as usize] = true);
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidArgument(
                "superpixel ids are not dense".into(),
            ));
        }
        let mut pairs = BTreeSet::new();
        let w = width as usize;
        for (i, &l) in labels.iter().enumerate() {
            let right = (i % w + 1 < w).then(|| labels[i + 1]);
            let down = labels.get(i + w).copied();
            for m in [right, down].into_iter().flatten() {
                if m != l {
                    pairs.insert((l.min(m) as usize, l.max(m) as usize));
                }
            }
        }
        Ok(Self {
            width,
            height,
            labels,
            count,
            adjacency: pairs.into_iter().collect(),
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn label(&self, x: u32, y: u32) -> usize {
        self.labels[(y * self.width + x) as usize] as usize
    }

    /// Unordered neighbor pairs `(a, b)` with `a < b`, sorted.
    pub fn adjacency(&self) -> &[(usize, usize)] {
        &self.adjacency
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.count];
        self.labels.iter().for_each(|&l| sizes[l as usize] += 1);
        sizes
    }

    /// Pixel indices of every superpixel, row-major.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.count];
        for (i, &l) in self.labels.iter().enumerate() {
            out[l as usize].push(i);
        }
        out
    }

    /// Pixels with a 4-neighbor in a different superpixel.
    pub fn boundary_mask(&self) -> SegmentationMask {
        let (w, h) = (self.width, self.height);
        SegmentationMask::from_fn(w, h, |x, y| {
            let l = self.label(x, y);
            (x > 0 && self.label(x - 1, y) != l)
                || (x + 1 < w && self.label(x + 1, y) != l)
                || (y > 0 && self.label(x, y - 1) != l)
                || (y + 1 < h && self.label(x, y + 1) != l)
        })
    }

    /// Pixels belonging to any superpixel of `set`.
    pub fn mask_of(&self, set: &VertexSet) -> SegmentationMask {
        let bits = self
            .labels
            .iter()
            .map(|&l| set.contains(l as usize))
            .collect();
        SegmentationMask::from_bits(self.width, self.height, bits).expect("shape matches")
    }

    /// Whether every label forms one 4-connected region.
    pub fn is_connected(&self) -> bool {
        let components =
            connected_components(self.width as usize, self.height as usize, &self.labels);
        components.len() == self.count
    }
}

/// Raster-order flood fill; returns the pixel lists of each 4-connected
/// region of equal label.
fn connected_components(w: usize, h: usize, labels: &[u32]) -> Vec<Vec<usize>> {
    let mut visited = vec![false; labels.len()];
    let mut out = Vec::new();
    let mut stack = Vec::new();
    for seed in 0..labels.len() {
        if visited[seed] {
            continue;
        }
        visited[seed] = true;
        stack.push(seed);
        let mut region = Vec::new();
        while let Some(p) = stack.pop() {
            region.push(p);
            let (x, y) = (p % w, p / w);
            let mut visit = |q: usize| {
                if !visited[q] && labels[q] == labels[seed] {
                    visited[q] = true;
                    stack.push(q);
                }
            };
            if x > 0 {
                visit(p - 1);
            }
            if x + 1 < w {
                visit(p + 1);
            }
            if y > 0 {
                visit(p - w);
            }
            if y + 1 < h {
                visit(p + w);
            }
        }
        out.push(region);
    }
    out
}

#[derive(Clone, Copy)]
struct Center {
    lab: [f64; 3],
    x: f64,
    y: f64,
}

pub fn compute_superpixels(img: &RgbImage, target: usize) -> Result<SuperpixelMap> {
    if !(MIN_SUPERPIXELS..=MAX_SUPERPIXELS).contains(&target) {
        return Err(Error::InvalidArgument(format!(
            "superpixel target {target} outside [{MIN_SUPERPIXELS}, {MAX_SUPERPIXELS}]"
        )));
    }
    let (w, h) = (img.width() as usize, img.height() as usize);
    if w * h < target {
        return Err(Error::InvalidArgument(format!(
            "{w}x{h} image is too small for {target} superpixels"
        )));
    }
    let lab: Vec<[f64; 3]> = img.pixels().map(|p| rgb_to_lab(p.0)).collect();
    let step = ((w * h) as f64 / target as f64).sqrt();
    let nx = ((target as f64 * w as f64 / h as f64).sqrt().round() as usize).clamp(1, w);
    let ny = ((target as f64 / nx as f64).round() as usize).clamp(1, h);

    let mut centers = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let fx = (i as f64 + 0.5) * w as f64 / nx as f64;
            let fy = (j as f64 + 0.5) * h as f64 / ny as f64;
            let (px, py) = ((fx as usize).min(w - 1), (fy as usize).min(h - 1));
            let (x, y) = lowest_gradient(&lab, w, h, px, py);
            let (cx, cy) = if (x, y) == (px, py) {
                (fx, fy)
            } else {
                (x as f64 + 0.5, y as f64 + 0.5)
            };
            centers.push(Center {
                lab: lab[y * w + x],
                x: cx,
                y: cy,
            });
        }
    }

    let spatial = (COMPACTNESS / step).powi(2);
    let radius = (step.max(w as f64 / nx as f64).max(h as f64 / ny as f64)).ceil() as i64 + 1;
    let mut labels = vec![UNASSIGNED; w * h];
    let mut dist = vec![f64::INFINITY; w * h];
    for _ in 0..SLIC_ITERATIONS {
        dist.iter_mut().for_each(|d| *d = f64::INFINITY);
        for (k, c) in centers.iter().enumerate() {
            let (cx, cy) = (c.x as i64, c.y as i64);
            let ys = (cy - radius).max(0) as usize..((cy + radius + 1).min(h as i64)) as usize;
            for y in ys {
                let xs = (cx - radius).max(0) as usize..((cx + radius + 1).min(w as i64)) as usize;
                for x in xs {
                    let p = y * w + x;
                    let l = lab[p];
                    let dc = (l[0] - c.lab[0]).powi(2)
                        + (l[1] - c.lab[1]).powi(2)
                        + (l[2] - c.lab[2]).powi(2);
                    let dx = x as f64 + 0.5 - c.x;
                    let dy = y as f64 + 0.5 - c.y;
                    let d = dc + (dx * dx + dy * dy) * spatial;
                    if d < dist[p] {
                        dist[p] = d;
                        labels[p] = k as u32;
                    }
                }
            }
        }
        let mut sums = vec![[0.0f64; 6]; centers.len()];
        for (p, &l) in labels.iter().enumerate() {
            if l == UNASSIGNED {
                continue;
            }
            let s = &mut sums[l as usize];
            s[0] += lab[p][0];
            s[1] += lab[p][1];
            s[2] += lab[p][2];
            s[3] += (p % w) as f64 + 0.5;
            s[4] += (p / w) as f64 + 0.5;
            s[5] += 1.0;
        }
        for (c, s) in centers.iter_mut().zip(&sums) {
            if s[5] > 0.0 {
                *c = Center {
                    lab: [s[0] / s[5], s[1] / s[5], s[2] / s[5]],
                    x: s[3] / s[5],
                    y: s[4] / s[5],
                };
            }
        }
    }

    let labels = absorb_fragments(w, h, &labels);
    SuperpixelMap::from_labels(w as u32, h as u32, labels)
}

fn lowest_gradient(lab: &[[f64; 3]], w: usize, h: usize, x: usize, y: usize) -> (usize, usize) {
    let grad = |x: usize, y: usize| {
        if x == 0 || y == 0 || x + 1 >= w || y + 1 >= h {
            return f64::INFINITY;
        }
        let d = |a: [f64; 3], b: [f64; 3]| (0..3).map(|c| (a[c] - b[c]).powi(2)).sum::<f64>();
        d(lab[y * w + x + 1], lab[y * w + x - 1]) + d(lab[(y + 1) * w + x], lab[(y - 1) * w + x])
    };
    let mut best = (x, y);
    let mut best_g = grad(x, y);
    for ny in y.saturating_sub(1)..=(y + 1).min(h - 1) {
        for nx in x.saturating_sub(1)..=(x + 1).min(w - 1) {
            let g = grad(nx, ny);
            if g < best_g {
                best_g = g;
                best = (nx, ny);
            }
        }
    }
    best
}

/// Keeps the largest 4-connected piece of every raw cluster and merges each
/// remaining fragment into the adjacent region it shares the longest border
/// with. Labels come out dense, in raster order of the kept pieces.
fn absorb_fragments(w: usize, h: usize, raw: &[u32]) -> Vec<u32> {
    let regions = connected_components(w, h, raw);
    let mut largest: BTreeMap<u32, usize> = BTreeMap::new();
    for (r, pixels) in regions.iter().enumerate() {
        let entry = largest.entry(raw[pixels[0]]).or_insert(r);
        if pixels.len() > regions[*entry].len() {
            *entry = r;
        }
    }
    let mut region_of = vec![0usize; raw.len()];
    for (r, pixels) in regions.iter().enumerate() {
        pixels.iter().for_each(|&p| region_of[p] = r);
    }
    let mut kept: Vec<usize> = largest.into_values().collect();
    kept.sort_unstable();
    let mut final_label: Vec<Option<u32>> = vec![None; regions.len()];
    for (l, &r) in kept.iter().enumerate() {
        final_label[r] = Some(l as u32);
    }

    let mut pending: Vec<usize> = (0..regions.len())
        .filter(|&r| final_label[r].is_none())
        .collect();
    while !pending.is_empty() {
        let mut still = Vec::new();
        let mut progress = false;
        for &r in &pending {
            let mut border: BTreeMap<u32, usize> = BTreeMap::new();
            for &p in &regions[r] {
                let (x, y) = (p % w, p / w);
                let neighbors = [
                    (x > 0).then(|| p - 1),
                    (x + 1 < w).then(|| p + 1),
                    (y > 0).then(|| p - w),
                    (y + 1 < h).then(|| p + w),
                ];
                for q in neighbors.into_iter().flatten() {
                    if let Some(l) = final_label[region_of[q]].filter(|_| region_of[q] != r) {
                        *border.entry(l).or_default() += 1;
                    }
                }
            }
            // longest shared border, lowest label on ties
            match border.iter().max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0))) {
                Some((&l, _)) => {
                    final_label[r] = Some(l);
                    progress = true;
                }
                None => still.push(r),
            }
        }
        assert!(progress, "fragments without labeled neighbors");
        pending = still;
    }
    (0..raw.len())
        .map(|p| final_label[region_of[p]].unwrap())
        .collect()
}
