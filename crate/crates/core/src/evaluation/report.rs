//! Evaluation artifacts: PR table, PR plot and summary.

use std::fmt::Write as _;
use std::path::Path;

use image::{Rgb, RgbImage};

use super::metrics::PrCurve;
use crate::{Error, Result};

pub fn pr_csv(curve: &PrCurve) -> String {
    let mut s = String::from("threshold,precision,recall\n");
    for p in &curve.points {
        writeln!(s, "{},{},{}", p.threshold, p.precision, p.recall).unwrap();
    }
    s
}

pub fn write_pr_csv(path: &Path, curve: &PrCurve) -> Result<()> {
    std::fs::write(path, pr_csv(curve)).map_err(|e| Error::io(path, e))
}

fn line(img: &mut RgbImage, (x0, y0): (i64, i64), (x1, y1): (i64, i64), c: Rgb<u8>) {
    let steps = (x1 - x0).abs().max((y1 - y0).abs()).max(1);
    for k in 0..=steps {
        let x = x0 + (x1 - x0) * k / steps;
        let y = y0 + (y1 - y0) * k / steps;
        if x >= 0 && y >= 0 && (x as u32) < img.width() && (y as u32) < img.height() {
            img.put_pixel(x as u32, y as u32, c);
        }
    }
}

/// Precision (vertical) against recall (horizontal) on a unit square.
pub fn render_pr_plot(curves: &[&PrCurve], size: u32) -> RgbImage {
    const PALETTE: [[u8; 3]; 4] = [[200, 30, 30], [30, 90, 200], [20, 150, 60], [150, 60, 170]];
    let margin = 20i64;
    let span = size as i64 - 2 * margin;
    let mut img = RgbImage::from_pixel(size, size, Rgb([255, 255, 255]));
    let at = |r: f64, p: f64| (margin + (r * span as f64).round() as i64, margin + ((1.0 - p) * span as f64).round() as i64);
    let axis = Rgb([0, 0, 0]);
    line(&mut img, at(0.0, 0.0), at(1.0, 0.0), axis);
    line(&mut img, at(0.0, 0.0), at(0.0, 1.0), axis);
    for tick in 1..=4 {
        let v = tick as f64 / 4.0;
        let grid = Rgb([225, 225, 225]);
        line(&mut img, at(v, 0.0), at(v, 1.0), grid);
        line(&mut img, at(0.0, v), at(1.0, v), grid);
    }
    for (k, curve) in curves.iter().enumerate() {
        let color = Rgb(PALETTE[k % PALETTE.len()]);
        let mut prev = at(0.0, 1.0);
        for p in &curve.points {
            let cur = at(p.recall, p.precision);
            line(&mut img, prev, cur, color);
            prev = cur;
        }
    }
    img
}

pub fn write_pr_plot(path: &Path, curves: &[&PrCurve]) -> Result<()> {
    render_pr_plot(curves, 320)
        .save(path)
        .map_err(|e| Error::input(path, e.to_string()))
}
