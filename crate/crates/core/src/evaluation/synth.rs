//! Synthetic scenes of bent, tapered ribbons with exact part masks.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::segmentation::Raster;
use crate::warp::{unwarp_point, warp_point, DeformableParams, EllipseParams, MAX_BEND, MAX_TAPER};
use crate::{Error, Result};

const PLACEMENT_RETRIES: usize = 100;
/// Minimum gap between parts, and between parts and the image border.
const GAP: i64 = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthSpec {
    pub width: usize,
    pub height: usize,
    pub n_parts: usize,
    /// Range of the ribbon half length.
    pub half_length: (f64, f64),
    /// Range of the ribbon half width at its middle.
    pub half_width: (f64, f64),
    /// Range of `|kappa| * half_length`; the sign is random.
    pub bend: (f64, f64),
    pub taper: (f64, f64),
    /// 0 for a plain textured background, 1 for heavy clutter.
    pub clutter: f64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            width: 144,
            height: 144,
            n_parts: 3,
            half_length: (20.0, 30.0),
            half_width: (5.0, 7.5),
            bend: (0.0, 0.8),
            taper: (-0.4, 0.4),
            clutter: 0.3,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        let range_ok = |r: (f64, f64)| r.0.is_finite() && r.1.is_finite() && r.0 <= r.1;
        let bad = |m: String| Err(Error::Parameter(m));
        if self.width < 16 || self.height < 16 {
            return bad(format!("scene {}x{} is too small", self.width, self.height));
        }
        if ![self.half_length, self.half_width, self.bend, self.taper].into_iter().all(range_ok) {
            return bad("ranges must be finite with lo <= hi".into());
        }
        if self.half_width.0 <= 0.5 || self.half_width.1 > self.half_length.0 {
            return bad("half widths must be positive and at most the half length".into());
        }
        if self.bend.0 < 0.0 || self.bend.1 > MAX_BEND {
            return bad(format!("bend range must lie in [0, {MAX_BEND}]"));
        }
        if self.taper.0 < -MAX_TAPER || self.taper.1 > MAX_TAPER {
            return bad(format!("taper range must lie in [-{MAX_TAPER}, {MAX_TAPER}]"));
        }
        if !(0.0..=1.0).contains(&self.clutter) {
            return bad("clutter must lie in [0, 1]".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthPart {
    /// Ribbon `|u| <= a_x, |v| <= a_y` in the unwarped frame of `params`.
    pub params: DeformableParams,
    pub mask: Vec<bool>,
    pub color: [f64; 3],
}

impl SynthPart {
    /// Closed-form area: bending and linear tapering both preserve the
    /// straight ribbon's `4 * a_x * a_y`.
    pub fn analytic_area(&self) -> f64 {
        4.0 * self.params.ellipse.axes.0 * self.params.ellipse.axes.1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthScene {
    pub raster: Raster,
    pub parts: Vec<SynthPart>,
    /// Union of the part masks.
    pub figure: Vec<bool>,
}

fn hsv_to_rgb([h, s, v]: [f64; 3]) -> [f64; 3] {
    let h6 = h.rem_euclid(1.0) * 6.0;
    let sector = h6.floor() as usize % 6;
    let f = h6 - h6.floor();
    let (p, q, t) = (v * (1.0 - s), v * (1.0 - s * f), v * (1.0 - s * (1.0 - f)));
    match sector {
        0 => [v, t, p],
        1 => [q, v, p],
        2 => [p, v, t],
        3 => [p, q, v],
        4 => [t, p, v],
        _ => [v, p, q],
    }
}

fn uniform(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        rng.random_range(lo..=hi)
    } else {
        lo
    }
}

fn ribbon_mask(w: &DeformableParams, width: usize, height: usize) -> Option<Vec<bool>> {
    let (ax, ay) = w.ellipse.axes;
    // extent from the warped outline
    let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
    for i in 0..=64 {
        let u = -ax + 2.0 * ax * i as f64 / 64.0;
        for v in [-ay, ay] {
            let (x, y) = warp_point((u, v), w);
            x0 = x0.min(x);
            y0 = y0.min(y);
            x1 = x1.max(x);
            y1 = y1.max(y);
        }
    }
    let lo_x = (x0.floor() as i64 - 1).max(0);
    let lo_y = (y0.floor() as i64 - 1).max(0);
    let hi_x = (x1.ceil() as i64 + 1).min(width as i64 - 1);
    let hi_y = (y1.ceil() as i64 + 1).min(height as i64 - 1);
    let mut mask = vec![false; width * height];
    for y in lo_y..=hi_y {
        for x in lo_x..=hi_x {
            let (u, v) = unwarp_point((x as f64, y as f64), w);
            if u.abs() <= ax && v.abs() <= ay {
                if x < GAP || y < GAP || x >= width as i64 - GAP || y >= height as i64 - GAP {
                    return None;
                }
                mask[y as usize * width + x as usize] = true;
            }
        }
    }
    Some(mask)
}

fn dilate(mask: &[bool], width: usize, height: usize, r: i64) -> Vec<bool> {
    let mut out = vec![false; mask.len()];
    for y in 0..height as i64 {
        for x in 0..width as i64 {
            if !mask[y as usize * width + x as usize] {
                continue;
            }
            for yy in (y - r).max(0)..=(y + r).min(height as i64 - 1) {
                for xx in (x - r).max(0)..=(x + r).min(width as i64 - 1) {
                    out[yy as usize * width + xx as usize] = true;
                }
            }
        }
    }
    out
}

/// Renders a scene. The same seed and spec always give the same scene.
pub fn synth_scene(seed: u64, spec: &SynthSpec) -> Result<SynthScene> {
    spec.validate()?;
    let (width, height) = (spec.width, spec.height);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // textured background
    let bg = [rng.random::<f64>(), uniform(&mut rng, (0.05, 0.2)), uniform(&mut rng, (0.35, 0.6))];
    // three plane waves 60 degrees apart give a cellular texture rather
    // than stripes, which would read as elongated parts
    let freq = uniform(&mut rng, (0.1, 0.35));
    let dir0 = uniform(&mut rng, (0.0, PI));
    let phases: Vec<f64> = (0..3).map(|_| uniform(&mut rng, (0.0, 2.0 * PI))).collect();
    let texture = (0.04 + 0.04 * spec.clutter) / 3.0_f64.sqrt();
    let base = hsv_to_rgb(bg);
    let mut rgb: Vec<[f64; 3]> = (0..width * height)
        .map(|i| {
            let (x, y) = ((i % width) as f64, (i / width) as f64);
            let wave: f64 = phases
                .iter()
                .enumerate()
                .map(|(k, &phase)| {
                    let (s, c) = (dir0 + k as f64 * PI / 3.0).sin_cos();
                    (freq * (c * x + s * y) + phase).sin()
                })
                .sum();
            base.map(|v| v + texture * wave)
        })
        .collect();

    // clutter blobs, painted before the parts so they never cover them
    let blobs = (12.0 * spec.clutter).round() as usize;
    for _ in 0..blobs {
        let cx = uniform(&mut rng, (0.0, width as f64));
        let cy = uniform(&mut rng, (0.0, height as f64));
        // irregular star-shaped outline: harmonics 3..=5 with random phases
        // keep blobs compact without giving them a symmetry axis
        let r0 = uniform(&mut rng, (4.0, 9.0));
        let harmonics: Vec<(f64, f64)> = (0..3)
            .map(|_| (uniform(&mut rng, (0.0, 0.15)), uniform(&mut rng, (0.0, 2.0 * PI))))
            .collect();
        let color = hsv_to_rgb([rng.random(), uniform(&mut rng, (0.1, 0.6)), uniform(&mut rng, (0.3, 0.8))]);
        let radius = |phi: f64| {
            let wobble: f64 = harmonics
                .iter()
                .enumerate()
                .map(|(k, &(amp, phase))| amp * ((k + 3) as f64 * phi + phase).cos())
                .sum();
            r0 * (1.0 + wobble)
        };
        for (i, px) in rgb.iter_mut().enumerate() {
            let (dx, dy) = ((i % width) as f64 - cx, (i / width) as f64 - cy);
            if dx.hypot(dy) <= radius(dy.atan2(dx)) {
                *px = color;
            }
        }
    }

    let hue0: f64 = rng.random();
    let mut occupied = vec![false; width * height];
    let mut parts = Vec::with_capacity(spec.n_parts);
    for k in 0..spec.n_parts {
        let mut placed = None;
        for _ in 0..PLACEMENT_RETRIES {
            let ax = uniform(&mut rng, spec.half_length);
            let ay = uniform(&mut rng, spec.half_width).min(ax);
            let bend = uniform(&mut rng, spec.bend);
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            let taper = uniform(&mut rng, spec.taper);
            let theta = PI / 2.0 - rng.random::<f64>() * PI;
            let center = (
                uniform(&mut rng, (0.0, width as f64 - 1.0)),
                uniform(&mut rng, (0.0, height as f64 - 1.0)),
            );
            let params = DeformableParams {
                ellipse: EllipseParams {
                    center,
                    theta,
                    axes: (ax, ay),
                },
                kappa: sign * bend / ax,
                taper,
            };
            let Some(mask) = ribbon_mask(&params, width, height) else {
                continue;
            };
            if !mask.iter().any(|&m| m) || mask.iter().zip(&occupied).any(|(&m, &o)| m && o) {
                continue;
            }
            placed = Some((params, mask));
            break;
        }
        let Some((params, mask)) = placed else {
            return Err(Error::Generation(format!(
                "could not place part {} of {} after {PLACEMENT_RETRIES} attempts",
                k + 1,
                spec.n_parts
            )));
        };
        for (o, d) in occupied.iter_mut().zip(dilate(&mask, width, height, GAP)) {
            *o |= d;
        }
        let hue = hue0 + k as f64 / spec.n_parts.max(1) as f64 + uniform(&mut rng, (-0.04, 0.04));
        let color = hsv_to_rgb([hue, uniform(&mut rng, (0.6, 0.9)), uniform(&mut rng, (0.6, 0.9))]);
        parts.push(SynthPart { params, mask, color });
    }

    for part in &parts {
        for (px, &m) in rgb.iter_mut().zip(&part.mask) {
            if m {
                *px = part.color;
            }
        }
    }
    let noise = 0.02 + 0.03 * spec.clutter;
    for px in rgb.iter_mut() {
        for c in px.iter_mut() {
            *c += uniform(&mut rng, (-noise, noise));
        }
    }

    // quantise so a scene reloaded from disk is identical
    let rgb: Vec<[f64; 3]> = rgb
        .into_iter()
        .map(|p| p.map(|c| (c.clamp(0.0, 1.0) * 255.0).round() / 255.0))
        .collect();
    let raster = Raster::from_rgb(width, height, rgb)?;
    let mut figure = vec![false; width * height];
    for part in &parts {
        for (f, &m) in figure.iter_mut().zip(&part.mask) {
            *f |= m;
        }
    }
    Ok(SynthScene { raster, parts, figure })
}
