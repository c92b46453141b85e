use std::path::Path;

use image::RgbImage;

use super::color::luminance;
use crate::{Error, Result};

/// Largest gradient magnitude the Prewitt-style stencil in [`edge_strength_map`]
/// can produce on a `[0, 1]` plane: `sqrt(3^2 + 1^2) / 6`.
pub const MAX_STENCIL_MAGNITUDE: f64 = 0.527_046_276_694_729_9;

/// An RGB image with derived luminance and edge-strength planes, all row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    pub width: usize,
    pub height: usize,
    pub rgb: Vec<[f64; 3]>,
    pub gray: Vec<f64>,
    pub edge_strength: Vec<f64>,
}

impl Raster {
    /// Builds a raster from `[0, 1]` RGB values. Values are clamped.
    pub fn from_rgb(width: usize, height: usize, rgb: Vec<[f64; 3]>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidInput("raster must be non-empty".into()));
        }
        if rgb.len() != width * height {
            return Err(Error::InvalidInput(format!(
                "expected {} pixels, got {}",
                width * height,
                rgb.len()
            )));
        }
        let rgb: Vec<[f64; 3]> = rgb
            .into_iter()
            .map(|p| p.map(|c| c.clamp(0.0, 1.0)))
            .collect();
        let gray: Vec<f64> = rgb.iter().map(|&p| luminance(p)).collect();
        let edge_strength = edge_strength_map(&gray, width, height);
        Ok(Raster {
            width,
            height,
            rgb,
            gray,
            edge_strength,
        })
    }

    pub fn from_rgb8(img: &RgbImage) -> Result<Self> {
        let (w, h) = img.dimensions();
        let rgb = img
            .pixels()
            .map(|p| p.0.map(|c| f64::from(c) / 255.0))
            .collect();
        Self::from_rgb(w as usize, h as usize, rgb)
    }

    pub fn to_rgb8(&self) -> RgbImage {
        RgbImage::from_fn(self.width as u32, self.height as u32, |x, y| {
            let p = self.rgb[y as usize * self.width + x as usize];
            image::Rgb(p.map(|c| (c * 255.0).round() as u8))
        })
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize) -> usize {
        y * self.width + x
    }

    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Reads a PNG or JPEG file into a [`Raster`].
pub fn load_raster(path: impl AsRef<Path>) -> Result<Raster> {
    let path = path.as_ref();
    let reader = image::ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?;
    match reader.format() {
        Some(image::ImageFormat::Png) | Some(image::ImageFormat::Jpeg) => {}
        Some(other) => {
            return Err(Error::input(path, format!("unsupported image format {other:?}")));
        }
        None => return Err(Error::input(path, "unrecognised image format")),
    }
    let img = reader
        .decode()
        .map_err(|e| Error::input(path, format!("cannot decode image: {e}")))?;
    Raster::from_rgb8(&img.to_rgb8())
}

/// Gradient magnitude from 3x3 central differences averaged over the three
/// rows (resp. columns) of the window, scaled by [`MAX_STENCIL_MAGNITUDE`] so
/// the result lies in `[0, 1]`. Borders replicate the nearest pixel.
pub fn edge_strength_map(gray: &[f64], width: usize, height: usize) -> Vec<f64> {
    assert_eq!(gray.len(), width * height);
    let at = |x: isize, y: isize| {
        let xc = x.clamp(0, width as isize - 1) as usize;
        let yc = y.clamp(0, height as isize - 1) as usize;
        gray[yc * width + xc]
    };
    let mut out = vec![0.0; width * height];
    for y in 0..height as isize {
        for x in 0..width as isize {
            let mut gx = 0.0;
            let mut gy = 0.0;
            for d in -1..=1 {
                gx += at(x + 1, y + d) - at(x - 1, y + d);
                gy += at(x + d, y + 1) - at(x + d, y - 1);
            }
            let mag = (gx * gx + gy * gy).sqrt() / 6.0;
            out[y as usize * width + x as usize] = (mag / MAX_STENCIL_MAGNITUDE).min(1.0);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plane(width: usize, height: usize, f: impl Fn(usize, usize) -> f64) -> Vec<f64> {
        (0..height)
            .flat_map(|y| (0..width).map(move |x| (x, y)))
            .map(|(x, y)| f(x, y))
            .collect()
    }

    #[test]
    fn stencil_maximum_by_enumeration() {
        // The magnitude is convex in the 8 ring pixels, so its maximum over
        // [0,1]^8 sits on a vertex.
        let mut best: f64 = 0.0;
        for mask in 0u32..256 {
            let v = |bit: u32| f64::from((mask >> bit) & 1);
            // ring: TL T TR L R BL B BR
            let (tl, t, tr, l, r, bl, b, br) = (v(0), v(1), v(2), v(3), v(4), v(5), v(6), v(7));
            let gx = (tr + r + br) - (tl + l + bl);
            let gy = (bl + b + br) - (tl + t + tr);
            best = best.max((gx * gx + gy * gy).sqrt() / 6.0);
        }
        assert!((best - MAX_STENCIL_MAGNITUDE).abs() < 1e-15);
        assert!((best - 10f64.sqrt() / 6.0).abs() < 1e-15);
    }

    #[test]
    fn constant_plane_has_no_edges() {
        let g = vec![0.4; 12 * 7];
        assert!(edge_strength_map(&g, 12, 7).iter().all(|&s| s == 0.0));
    }

    #[test]
    fn step_edge_peaks_on_step_columns() {
        let (w, h) = (20, 10);
        let g = plane(w, h, |x, _| if x >= 10 { 1.0 } else { 0.0 });
        let e = edge_strength_map(&g, w, h);
        let expected = 0.5 / MAX_STENCIL_MAGNITUDE;
        let max = e.iter().cloned().fold(0.0, f64::max);
        for y in 0..h {
            assert!((e[y * w + 9] - expected).abs() < 1e-12);
            assert!((e[y * w + 10] - expected).abs() < 1e-12);
            assert_eq!(e[y * w + 5], 0.0);
            assert_eq!(e[y * w + 15], 0.0);
        }
        assert!((max - expected).abs() < 1e-12);
    }

    #[test]
    fn ramp_is_uniform_in_interior() {
        let (w, h) = (16, 8);
        let g = plane(w, h, |x, _| x as f64 / w as f64);
        let e = edge_strength_map(&g, w, h);
        // gx = 3 * (2 / w) / 6 = 1 / w
        let expected = (1.0 / w as f64) / MAX_STENCIL_MAGNITUDE;
        for y in 0..h {
            for x in 1..w - 1 {
                assert!((e[y * w + x] - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn bright_pixel_lights_its_ring() {
        let (w, h) = (9, 9);
        let g = plane(w, h, |x, y| if (x, y) == (4, 4) { 1.0 } else { 0.0 });
        let e = edge_strength_map(&g, w, h);
        let side = (1.0 / 6.0) / MAX_STENCIL_MAGNITUDE;
        let diag = (2f64.sqrt() / 6.0) / MAX_STENCIL_MAGNITUDE;
        for y in 0..h {
            for x in 0..w {
                let (dx, dy) = (x as i32 - 4, y as i32 - 4);
                let s = e[y * w + x];
                match (dx.abs(), dy.abs()) {
                    (0, 0) => assert_eq!(s, 0.0),
                    (1, 1) => assert!((s - diag).abs() < 1e-12),
                    (1, 0) | (0, 1) => assert!((s - side).abs() < 1e-12),
                    _ => assert_eq!(s, 0.0),
                }
            }
        }
    }

    #[test]
    fn from_rgb_rejects_bad_lengths() {
        assert!(Raster::from_rgb(2, 2, vec![[0.0; 3]; 3]).is_err());
        assert!(Raster::from_rgb(0, 2, vec![]).is_err());
    }
}
