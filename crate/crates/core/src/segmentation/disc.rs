use serde::{Deserialize, Serialize};

use super::color::rgb_to_hsv;
use super::raster::Raster;
use super::slic::{oversegment_with, LabelPlane, SlicParams};
use crate::{Error, Result};

pub const HUE_BINS: usize = 8;
pub const SAT_BINS: usize = 4;
pub const VAL_BINS: usize = 4;
pub const HSV_HISTOGRAM_LEN: usize = HUE_BINS * SAT_BINS * VAL_BINS;

/// A boundary pixel carrying its edge strength.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edgel {
    pub x: f64,
    pub y: f64,
    pub strength: f64,
}

/// A superpixel region used as a deformable disc candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct Disc {
    pub id: usize,
    pub scale_level: usize,
    /// `(x, y)` pixel coordinates sorted in raster order.
    pub pixels: Vec<(u32, u32)>,
    pub centroid: (f64, f64),
    /// Inclusive bounding box `(x0, y0, x1, y1)`.
    pub bbox: (u32, u32, u32, u32),
    pub boundary_edgels: Vec<Edgel>,
    pub mean_rgb: [f64; 3],
    pub mean_hsv: [f64; 3],
    pub var_rgb: [f64; 3],
    pub var_hsv: [f64; 3],
    /// Joint 8x4x4 (H, S, V) histogram, index `h * 16 + s * 4 + v`, unit mass.
    pub hsv_histogram: Vec<f64>,
}

impl Disc {
    pub fn area(&self) -> usize {
        self.pixels.len()
    }

    /// Per-channel marginals of the joint HSV histogram.
    pub fn hsv_marginals(&self) -> [Vec<f64>; 3] {
        let mut h = vec![0.0; HUE_BINS];
        let mut s = vec![0.0; SAT_BINS];
        let mut v = vec![0.0; VAL_BINS];
        for hb in 0..HUE_BINS {
            for sb in 0..SAT_BINS {
                for vb in 0..VAL_BINS {
                    let m = self.hsv_histogram[hsv_bin_index(hb, sb, vb)];
                    h[hb] += m;
                    s[sb] += m;
                    v[vb] += m;
                }
            }
        }
        [h, s, v]
    }
}

pub fn hsv_bin_index(h: usize, s: usize, v: usize) -> usize {
    h * SAT_BINS * VAL_BINS + s * VAL_BINS + v
}

fn bin(value: f64, bins: usize) -> usize {
    ((value * bins as f64).floor().max(0.0) as usize).min(bins - 1)
}

fn mean_var(values: impl Iterator<Item = [f64; 3]> + Clone, n: f64) -> ([f64; 3], [f64; 3]) {
    let mut mean = [0.0; 3];
    for v in values.clone() {
        for c in 0..3 {
            mean[c] += v[c];
        }
    }
    mean = mean.map(|m| m / n);
    let mut var = [0.0; 3];
    for v in values {
        for c in 0..3 {
            var[c] += (v[c] - mean[c]).powi(2);
        }
    }
    (mean, var.map(|s| s / n))
}

/// Builds a disc with all statistics from its pixel set. `pixels` must be
/// non-empty; it is sorted into raster order.
pub fn disc_from_pixels(
    raster: &Raster,
    id: usize,
    scale_level: usize,
    mut pixels: Vec<(u32, u32)>,
) -> Result<Disc> {
    if pixels.is_empty() {
        return Err(Error::InvalidInput(format!("disc {id} has no pixels")));
    }
    pixels.sort_unstable_by_key(|&(x, y)| (y, x));
    pixels.dedup();
    let n = pixels.len() as f64;
    let w = raster.width;
    let (mut cx, mut cy) = (0.0, 0.0);
    let (mut x0, mut y0, mut x1, mut y1) = (u32::MAX, u32::MAX, 0, 0);
    for &(x, y) in &pixels {
        cx += f64::from(x);
        cy += f64::from(y);
        x0 = x0.min(x);
        y0 = y0.min(y);
        x1 = x1.max(x);
        y1 = y1.max(y);
    }
    let rgb = pixels.iter().map(|&(x, y)| raster.rgb[y as usize * w + x as usize]);
    let hsv = rgb.clone().map(rgb_to_hsv);
    let (mean_rgb, var_rgb) = mean_var(rgb, n);
    let (mean_hsv, var_hsv) = mean_var(hsv.clone(), n);
    let mut hist = vec![0.0; HSV_HISTOGRAM_LEN];
    for [h, s, v] in hsv {
        hist[hsv_bin_index(bin(h, HUE_BINS), bin(s, SAT_BINS), bin(v, VAL_BINS))] += 1.0;
    }
    hist.iter_mut().for_each(|m| *m /= n);

    let boundary_edgels = region_boundary(&pixels, (x0, y0, x1, y1))
        .into_iter()
        .map(|(x, y)| Edgel {
            x: f64::from(x),
            y: f64::from(y),
            strength: raster.edge_strength[y as usize * w + x as usize],
        })
        .collect();

    Ok(Disc {
        id,
        scale_level,
        centroid: (cx / n, cy / n),
        bbox: (x0, y0, x1, y1),
        pixels,
        boundary_edgels,
        mean_rgb,
        mean_hsv,
        var_rgb,
        var_hsv,
        hsv_histogram: hist,
    })
}

/// Pixels of the region with at least one 4-neighbour outside it (the image
/// exterior counts as outside). Output is in raster order.
pub fn region_boundary(pixels: &[(u32, u32)], bbox: (u32, u32, u32, u32)) -> Vec<(u32, u32)> {
    let (x0, y0, x1, y1) = bbox;
    // one-pixel margin so neighbour lookups never leave the mask
    let bw = (x1 - x0 + 3) as usize;
    let bh = (y1 - y0 + 3) as usize;
    let mut mask = vec![false; bw * bh];
    let at = |x: u32, y: u32| (y - y0 + 1) as usize * bw + (x - x0 + 1) as usize;
    for &(x, y) in pixels {
        mask[at(x, y)] = true;
    }
    let mut out: Vec<(u32, u32)> = pixels
        .iter()
        .copied()
        .filter(|&(x, y)| {
            let i = at(x, y);
            !(mask[i - 1] && mask[i + 1] && mask[i - bw] && mask[i + bw])
        })
        .collect();
    out.sort_unstable_by_key(|&(x, y)| (y, x));
    out.dedup();
    out
}

/// Discs for one label plane, ids starting at `first_id`.
pub fn discs_from_labels(
    raster: &Raster,
    plane: &LabelPlane,
    scale_level: usize,
    first_id: usize,
) -> Result<Vec<Disc>> {
    let mut groups: Vec<Vec<(u32, u32)>> = vec![Vec::new(); plane.count];
    for y in 0..plane.height {
        for x in 0..plane.width {
            groups[plane.label(x, y) as usize].push((x as u32, y as u32));
        }
    }
    groups
        .into_iter()
        .enumerate()
        .map(|(i, pix)| disc_from_pixels(raster, first_id + i, scale_level, pix))
        .collect()
}

/// Superpixels at every scale in `ladder`, pooled into one candidate set with
/// ids unique across scales. Also returns the per-scale label planes.
pub fn multiscale_discs_with(
    raster: &Raster,
    ladder: &[usize],
    params: &SlicParams,
) -> Result<(Vec<Disc>, Vec<LabelPlane>)> {
    if ladder.is_empty() {
        return Err(Error::Parameter("superpixel ladder is empty".into()));
    }
    let mut discs = Vec::new();
    let mut planes = Vec::with_capacity(ladder.len());
    for (level, &k) in ladder.iter().enumerate() {
        let plane = oversegment_with(raster, k, params)?;
        let first = discs.len();
        discs.extend(discs_from_labels(raster, &plane, level, first)?);
        planes.push(plane);
    }
    Ok((discs, planes))
}

pub fn multiscale_discs(raster: &Raster, ladder: &[usize]) -> Result<Vec<Disc>> {
    multiscale_discs_with(raster, ladder, &SlicParams::default()).map(|(d, _)| d)
}
