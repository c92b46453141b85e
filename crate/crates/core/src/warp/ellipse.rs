use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A standard ellipse: centre, orientation of the major axis and semi-axes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EllipseParams {
    pub center: (f64, f64),
    /// Radians in `(-pi/2, pi/2]`.
    pub theta: f64,
    /// `(a_x, a_y)` with `a_x >= a_y > 0`.
    pub axes: (f64, f64),
}

/// Wraps an angle into `(-pi/2, pi/2]`. Returns the wrapped angle and whether
/// a half turn was applied.
pub fn canonical_angle(theta: f64) -> (f64, bool) {
    use std::f64::consts::PI;
    let mut t = theta.rem_euclid(2.0 * PI);
    let mut flipped = false;
    if t > PI {
        t -= 2.0 * PI;
    }
    // t in (-pi, pi]
    if t > PI / 2.0 {
        t -= PI;
        flipped = true;
    } else if t <= -PI / 2.0 {
        t += PI;
        flipped = true;
    }
    (t, flipped)
}

/// Moment-matched ellipse: centroid, principal direction of the coordinate
/// covariance and semi-axes `2 * sqrt(eigenvalue)`, so a uniform disk of
/// radius `r` maps to `a_x = a_y = r`.
pub fn fit_ellipse_moments(points: &[(f64, f64)]) -> Result<EllipseParams> {
    if points.len() < 3 {
        return Err(Error::Fit(format!(
            "need at least 3 points for a moment fit, got {}",
            points.len()
        )));
    }
    let n = points.len() as f64;
    let (mut mx, mut my) = (0.0, 0.0);
    for &(x, y) in points {
        mx += x;
        my += y;
    }
    mx /= n;
    my /= n;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for &(x, y) in points {
        let (dx, dy) = (x - mx, y - my);
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    sxx /= n;
    syy /= n;
    sxy /= n;
    let half_trace = 0.5 * (sxx + syy);
    let disc = (0.25 * (sxx - syy).powi(2) + sxy * sxy).sqrt();
    let l1 = half_trace + disc;
    let l2 = half_trace - disc;
    if !(l2 > 1e-9 * l1.max(1e-300)) || l2 <= 1e-12 {
        return Err(Error::Fit("degenerate (rank-deficient) point covariance".into()));
    }
    let (theta, _) = canonical_angle(0.5 * (2.0 * sxy).atan2(sxx - syy));
    Ok(EllipseParams {
        center: (mx, my),
        theta,
        axes: (2.0 * l1.sqrt(), 2.0 * l2.sqrt()),
    })
}
