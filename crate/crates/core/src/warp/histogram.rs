use super::deform::{unwarp_point, DeformableParams};
use crate::segmentation::Edgel;

pub const GRID: usize = 10;
pub const HISTOGRAM_LEN: usize = GRID * GRID;
/// The grid spans `[-EXTENT * a, EXTENT * a]` along each axis.
pub const EXTENT: f64 = 1.5;

/// Edge-strength weighted 10x10 histogram of unwarped boundary positions,
/// flattened row-major (`row` indexes the minor axis `v`, `col` the major
/// axis `u`). Bins carry unit L1 mass whenever any edgel landed on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeHistogram {
    pub bins: Vec<f64>,
    /// Strength deposited on the grid before normalisation.
    pub total_mass: f64,
}

fn cell(coord: f64, half_extent: f64) -> Option<usize> {
    if !(coord >= -half_extent && coord <= half_extent) {
        return None;
    }
    let t = (coord + half_extent) / (2.0 * half_extent) * GRID as f64;
    // half-open cells, the last one closed
    Some((t.floor() as usize).min(GRID - 1))
}

pub fn shape_histogram(edgels: &[Edgel], w: &DeformableParams) -> ShapeHistogram {
    let hx = EXTENT * w.ellipse.axes.0;
    let hy = EXTENT * w.ellipse.axes.1;
    let mut bins = vec![0.0; HISTOGRAM_LEN];
    let mut total = 0.0;
    for e in edgels {
        if e.strength <= 0.0 {
            continue;
        }
        let (u, v) = unwarp_point((e.x, e.y), w);
        if let (Some(col), Some(row)) = (cell(u, hx), cell(v, hy)) {
            bins[row * GRID + col] += e.strength;
            total += e.strength;
        }
    }
    if total > 0.0 {
        bins.iter_mut().for_each(|b| *b /= total);
    }
    ShapeHistogram {
        bins,
        total_mass: total,
    }
}

/// Symmetric chi-squared distance `0.5 * sum (a - b)^2 / (a + b)`; empty bin
/// pairs contribute nothing. Lies in `[0, 1]` for unit-mass histograms.
pub fn chi_squared(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    0.5 * a
        .iter()
        .zip(b)
        .filter(|(x, y)| *x + *y > 0.0)
        .map(|(x, y)| (x - y).powi(2) / (x + y))
        .sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::warp::EllipseParams;

    fn params() -> DeformableParams {
        DeformableParams::rigid(EllipseParams {
            center: (10.0, 10.0),
            theta: 0.0,
            axes: (10.0, 5.0),
        })
    }

    #[test]
    fn no_edgels_no_mass() {
        let h = shape_histogram(&[], &params());
        assert_eq!(h.bins, vec![0.0; 100]);
        assert_eq!(h.total_mass, 0.0);
    }

    #[test]
    fn origin_lands_in_centre_cell() {
        let e = Edgel {
            x: 10.0,
            y: 10.0,
            strength: 1.0,
        };
        let h = shape_histogram(&[e], &params());
        assert_eq!(h.bins[5 * GRID + 5], 1.0);
        assert_eq!(h.bins.iter().sum::<f64>(), 1.0);
    }

    #[test]
    fn grid_edges_and_out_of_range() {
        let w = params();
        let at = |x: f64, y: f64, s: f64| Edgel { x, y, strength: s };
        // u = +15 (closed last column), v = -7.5 (first row), one dropped
        let h = shape_histogram(
            &[at(25.0, 2.5, 0.25), at(25.01, 10.0, 0.5), at(-5.0, 10.0, 0.75)],
            &w,
        );
        assert!((h.total_mass - 1.0).abs() < 1e-12);
        assert!((h.bins[9] - 0.25).abs() < 1e-12);
        assert!((h.bins[5 * GRID] - 0.75).abs() < 1e-12);
    }

    #[test]
    fn chi_squared_basics() {
        let a = [0.5, 0.5, 0.0];
        let b = [0.0, 0.5, 0.5];
        assert_eq!(chi_squared(&a, &a), 0.0);
        assert!((chi_squared(&a, &b) - 0.5).abs() < 1e-12);
        assert!((chi_squared(&[1.0, 0.0], &[0.0, 1.0]) - 1.0).abs() < 1e-12);
    }
}
