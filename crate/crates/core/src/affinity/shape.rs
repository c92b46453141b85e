//! Warped boundary-histogram features on the union region of several discs.

use super::model::{AffinityModel, WarpMode};
use crate::segmentation::{Disc, Edgel};
use crate::warp::{
    fit_deformable_with, fit_ellipse_moments, shape_histogram, DeformableParams, FitOptions,
    ShapeHistogram,
};

/// Pixels and boundary edgels of a union of discs.
#[derive(Debug, Clone, PartialEq)]
pub struct UnionRegion {
    pub pixels: Vec<(u32, u32)>,
    pub edgels: Vec<Edgel>,
}

/// Union of the discs' pixels and the union's boundary. A pixel on the
/// union boundary is on its own disc's boundary, so strengths are taken from
/// the discs' edgels.
pub fn union_region(discs: &[&Disc]) -> UnionRegion {
    let (mut x0, mut y0, mut x1, mut y1) = (u32::MAX, u32::MAX, 0, 0);
    for d in discs {
        x0 = x0.min(d.bbox.0);
        y0 = y0.min(d.bbox.1);
        x1 = x1.max(d.bbox.2);
        y1 = y1.max(d.bbox.3);
    }
    if discs.is_empty() {
        return UnionRegion {
            pixels: Vec::new(),
            edgels: Vec::new(),
        };
    }
    let bw = (x1 - x0 + 3) as usize;
    let bh = (y1 - y0 + 3) as usize;
    let at = |x: u32, y: u32| (y - y0 + 1) as usize * bw + (x - x0 + 1) as usize;
    let mut mask = vec![false; bw * bh];
    let mut pixels = Vec::new();
    for d in discs {
        for &(x, y) in &d.pixels {
            let i = at(x, y);
            if !mask[i] {
                mask[i] = true;
                pixels.push((x, y));
            }
        }
    }
    pixels.sort_unstable_by_key(|&(x, y)| (y, x));

    let mut strength = vec![-1.0f64; bw * bh];
    for d in discs {
        for e in &d.boundary_edgels {
            strength[at(e.x as u32, e.y as u32)] = e.strength;
        }
    }
    let mut edgels = Vec::new();
    for &(x, y) in &pixels {
        let i = at(x, y);
        if strength[i] >= 0.0 && !(mask[i - 1] && mask[i + 1] && mask[i - bw] && mask[i + bw]) {
            edgels.push(Edgel {
                x: f64::from(x),
                y: f64::from(y),
                strength: strength[i],
            });
        }
    }
    UnionRegion { pixels, edgels }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeOptions {
    pub mode: WarpMode,
    pub fit: FitOptions,
}

impl ShapeOptions {
    pub fn new(mode: WarpMode) -> Self {
        ShapeOptions {
            mode,
            fit: FitOptions {
                max_iterations: 20,
                relative_tolerance: 1e-4,
                max_edgels: 64,
                ..FitOptions::default()
            },
        }
    }
}

/// Warp parameters for a region: moment ellipse, refined by the deformable
/// fit in deformable mode. A failed deformable fit falls back to the
/// ellipse; `None` when even the moment fit is degenerate.
pub fn region_warp(region: &UnionRegion, opts: &ShapeOptions) -> Option<DeformableParams> {
    let pts: Vec<(f64, f64)> = region
        .pixels
        .iter()
        .map(|&(x, y)| (f64::from(x), f64::from(y)))
        .collect();
    let ellipse = fit_ellipse_moments(&pts).ok()?;
    let rigid = DeformableParams::rigid(ellipse).project();
    Some(match opts.mode {
        WarpMode::Standard => rigid,
        WarpMode::Deformable => fit_deformable_with(&region.edgels, &ellipse, &opts.fit)
            .map(|r| r.params)
            .unwrap_or(rigid),
    })
}

/// Shape histogram of the union of `discs`, or `None` when the region cannot
/// be fitted or no boundary strength lands on the grid.
pub fn shape_feature(discs: &[&Disc], opts: &ShapeOptions) -> Option<ShapeHistogram> {
    let region = union_region(discs);
    let w = region_warp(&region, opts)?;
    let h = shape_histogram(&region.edgels, &w);
    (h.total_mass > 0.0).then_some(h)
}

/// Calibrated shape affinity of a disc group; zero when no feature exists.
pub fn shape_affinity(discs: &[&Disc], model: &AffinityModel, opts: &ShapeOptions) -> f64 {
    match shape_feature(discs, opts) {
        Some(h) => model.shape_probability(model.shape_margin(&h.bins)),
        None => 0.0,
    }
}
