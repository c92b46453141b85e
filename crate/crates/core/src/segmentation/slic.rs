//! Grid-seeded local k-means superpixels in (CIELAB, position) space.

use std::collections::VecDeque;

use super::color::rgb_to_lab;
use super::raster::Raster;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlicParams {
    /// Colour units per pixel of spatial distance at unit cell size.
    pub compactness: f64,
    pub iterations: usize,
    /// Components smaller than this fraction of the mean cell area are merged
    /// into their most similar neighbour.
    pub min_region_fraction: f64,
}

impl Default for SlicParams {
    fn default() -> Self {
        SlicParams {
            compactness: 10.0,
            iterations: 10,
            min_region_fraction: 0.25,
        }
    }
}

/// A total labelling of the raster into `count` 4-connected regions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelPlane {
    pub width: usize,
    pub height: usize,
    pub labels: Vec<u32>,
    pub count: usize,
}

impl LabelPlane {
    pub fn label(&self, x: usize, y: usize) -> u32 {
        self.labels[y * self.width + x]
    }

    /// Writes the labels as a 16-bit grayscale PNG.
    pub fn save_png(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        let path = path.as_ref();
        let data: Vec<u16> = self.labels.iter().map(|&l| l.min(u32::from(u16::MAX)) as u16).collect();
        let img: image::ImageBuffer<image::Luma<u16>, Vec<u16>> =
            image::ImageBuffer::from_raw(self.width as u32, self.height as u32, data)
                .ok_or_else(|| Error::InvalidInput("label plane size mismatch".into()))?;
        img.save(path)
            .map_err(|e| Error::input(path, format!("cannot write label png: {e}")))
    }
}

/// Oversegments `raster` into roughly `k` compact superpixels with default parameters.
pub fn oversegment(raster: &Raster, k: usize) -> Result<LabelPlane> {
    oversegment_with(raster, k, &SlicParams::default())
}

struct Center {
    lab: [f64; 3],
    x: f64,
    y: f64,
}

fn grid_shape(width: usize, height: usize, k: usize) -> (usize, usize) {
    let nx = ((k as f64 * width as f64 / height as f64).sqrt().round() as usize).clamp(1, width);
    let ny = ((k as f64 / nx as f64).round() as usize).clamp(1, height);
    (nx, ny)
}

pub fn oversegment_with(raster: &Raster, k: usize, params: &SlicParams) -> Result<LabelPlane> {
    let (w, h) = (raster.width, raster.height);
    let n = w * h;
    if k < 2 || k > n {
        return Err(Error::Parameter(format!(
            "superpixel count {k} outside [2, {n}]"
        )));
    }
    let lab: Vec<[f64; 3]> = raster.rgb.iter().map(|&p| rgb_to_lab(p)).collect();

    let (nx, ny) = grid_shape(w, h, k);
    let cell_w = w as f64 / nx as f64;
    let cell_h = h as f64 / ny as f64;
    let step = (cell_w * cell_h).sqrt();

    let mut centers = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let cx = (((i as f64 + 0.5) * cell_w) as usize).min(w - 1);
            let cy = (((j as f64 + 0.5) * cell_h) as usize).min(h - 1);
            // move to the lowest-gradient pixel of the 3x3 neighbourhood
            let (mut bx, mut by) = (cx, cy);
            let mut best = raster.edge_strength[cy * w + cx];
            for dy in -1isize..=1 {
                for dx in -1isize..=1 {
                    let x = cx as isize + dx;
                    let y = cy as isize + dy;
                    if x < 0 || y < 0 || x >= w as isize || y >= h as isize {
                        continue;
                    }
                    let s = raster.edge_strength[y as usize * w + x as usize];
                    if s < best {
                        best = s;
                        bx = x as usize;
                        by = y as usize;
                    }
                }
            }
            centers.push(Center {
                lab: lab[by * w + bx],
                x: bx as f64,
                y: by as f64,
            });
        }
    }

    let spatial_weight = (params.compactness / step).powi(2);
    let radius_x = cell_w.ceil() as isize + 1;
    let radius_y = cell_h.ceil() as isize + 1;
    let mut labels = vec![0u32; n];
    let mut dist = vec![f64::INFINITY; n];

    for _ in 0..params.iterations.max(1) {
        dist.iter_mut().for_each(|d| *d = f64::INFINITY);
        for (ci, c) in centers.iter().enumerate() {
            let x0 = (c.x.round() as isize - radius_x).max(0) as usize;
            let x1 = (c.x.round() as isize + radius_x).min(w as isize - 1) as usize;
            let y0 = (c.y.round() as isize - radius_y).max(0) as usize;
            let y1 = (c.y.round() as isize + radius_y).min(h as isize - 1) as usize;
            for y in y0..=y1 {
                for x in x0..=x1 {
                    let idx = y * w + x;
                    let p = lab[idx];
                    let dc = (p[0] - c.lab[0]).powi(2)
                        + (p[1] - c.lab[1]).powi(2)
                        + (p[2] - c.lab[2]).powi(2);
                    let ds = (x as f64 - c.x).powi(2) + (y as f64 - c.y).powi(2);
                    let d = dc + ds * spatial_weight;
                    if d < dist[idx] {
                        dist[idx] = d;
                        labels[idx] = ci as u32;
                    }
                }
            }
        }
        let mut sums = vec![[0.0f64; 6]; centers.len()];
        for y in 0..h {
            for x in 0..w {
                let idx = y * w + x;
                let s = &mut sums[labels[idx] as usize];
                s[0] += lab[idx][0];
                s[1] += lab[idx][1];
                s[2] += lab[idx][2];
                s[3] += x as f64;
                s[4] += y as f64;
                s[5] += 1.0;
            }
        }
        for (c, s) in centers.iter_mut().zip(&sums) {
            if s[5] > 0.0 {
                c.lab = [s[0] / s[5], s[1] / s[5], s[2] / s[5]];
                c.x = s[3] / s[5];
                c.y = s[4] / s[5];
            }
        }
    }

    let min_area = params.min_region_fraction * n as f64 / centers.len() as f64;
    Ok(enforce_connectivity(&labels, &lab, w, h, min_area))
}

/// Splits labels into 4-connected components, merges components below
/// `min_area` into their most similar neighbour and renumbers in raster order.
fn enforce_connectivity(
    labels: &[u32],
    lab: &[[f64; 3]],
    w: usize,
    h: usize,
    min_area: f64,
) -> LabelPlane {
    let n = w * h;
    let mut comp = vec![u32::MAX; n];
    let mut members: Vec<Vec<usize>> = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..n {
        if comp[start] != u32::MAX {
            continue;
        }
        let id = members.len() as u32;
        let mut pix = Vec::new();
        comp[start] = id;
        queue.push_back(start);
        while let Some(p) = queue.pop_front() {
            pix.push(p);
            let (x, y) = (p % w, p / w);
            let mut visit = |q: usize| {
                if comp[q] == u32::MAX && labels[q] == labels[p] {
                    comp[q] = id;
                    queue.push_back(q);
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
        members.push(pix);
    }

    let m = members.len();
    let mut parent: Vec<usize> = (0..m).collect();
    fn find(parent: &mut [usize], mut a: usize) -> usize {
        while parent[a] != a {
            parent[a] = parent[parent[a]];
            a = parent[a];
        }
        a
    }
    let mut size: Vec<usize> = members.iter().map(Vec::len).collect();
    let mut color_sum: Vec<[f64; 3]> = members
        .iter()
        .map(|pix| {
            pix.iter().fold([0.0; 3], |mut acc, &p| {
                acc[0] += lab[p][0];
                acc[1] += lab[p][1];
                acc[2] += lab[p][2];
                acc
            })
        })
        .collect();

    let mut order: Vec<usize> = (0..m).filter(|&c| (size[c] as f64) < min_area).collect();
    order.sort_by_key(|&c| (size[c], c));
    for c in order {
        let root = find(&mut parent, c);
        if (size[root] as f64) >= min_area {
            continue;
        }
        // gather neighbour roots of every pixel currently merged into `root`
        let mut best: Option<(f64, usize)> = None;
        let mean = |s: [f64; 3], k: usize| s.map(|v| v / k as f64);
        let here = mean(color_sum[root], size[root]);
        for (other, pix) in members.iter().enumerate() {
            if find(&mut parent, other) != root {
                continue;
            }
            for &p in pix {
                let (x, y) = (p % w, p / w);
                let mut nbrs = [usize::MAX; 4];
                if x > 0 {
                    nbrs[0] = p - 1;
                }
                if x + 1 < w {
                    nbrs[1] = p + 1;
                }
                if y > 0 {
                    nbrs[2] = p - w;
                }
                if y + 1 < h {
                    nbrs[3] = p + w;
                }
                for q in nbrs.into_iter().filter(|&q| q != usize::MAX) {
                    let r = find(&mut parent, comp[q] as usize);
                    if r == root {
                        continue;
                    }
                    let there = mean(color_sum[r], size[r]);
                    let d = (0..3).map(|i| (here[i] - there[i]).powi(2)).sum::<f64>();
                    if best.is_none_or(|(bd, br)| d < bd || (d == bd && r < br)) {
                        best = Some((d, r));
                    }
                }
            }
        }
        if let Some((_, target)) = best {
            parent[root] = target;
            size[target] += size[root];
            let cs = color_sum[root];
            for i in 0..3 {
                color_sum[target][i] += cs[i];
            }
        }
    }

    let mut relabel = vec![u32::MAX; m];
    let mut next = 0u32;
    let mut out = vec![0u32; n];
    for p in 0..n {
        let r = find(&mut parent, comp[p] as usize);
        if relabel[r] == u32::MAX {
            relabel[r] = next;
            next += 1;
        }
        out[p] = relabel[r];
    }
    LabelPlane {
        width: w,
        height: h,
        labels: out,
        count: next as usize,
    }
}
