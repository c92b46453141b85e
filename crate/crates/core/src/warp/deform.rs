use serde::{Deserialize, Serialize};

use super::ellipse::{canonical_angle, EllipseParams};

/// Largest admissible `|kappa| * a_x`.
pub const MAX_BEND: f64 = 0.9;
/// Largest admissible `|t|`.
pub const MAX_TAPER: f64 = 0.6;
/// Curvatures below this are treated as straight.
pub const STRAIGHT_KAPPA: f64 = 1e-9;
const MIN_TAPER_SCALE: f64 = 0.1;
const MIN_AXIS: f64 = 0.5;

/// Ellipse bent along its major axis with curvature `kappa` (`1 / radius`)
/// and tapered with slope `taper` along the major axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeformableParams {
    pub ellipse: EllipseParams,
    pub kappa: f64,
    pub taper: f64,
}

impl DeformableParams {
    pub fn rigid(ellipse: EllipseParams) -> Self {
        DeformableParams {
            ellipse,
            kappa: 0.0,
            taper: 0.0,
        }
    }

    pub fn is_valid(&self) -> bool {
        let (ax, ay) = self.ellipse.axes;
        ax >= ay
            && ay > 0.0
            && (self.kappa * ax).abs() <= MAX_BEND + 1e-12
            && self.taper.abs() <= MAX_TAPER + 1e-12
            && self.ellipse.theta > -std::f64::consts::FRAC_PI_2
            && self.ellipse.theta <= std::f64::consts::FRAC_PI_2
    }

    /// Restores the invariants: axes ordered (quarter turn when swapped),
    /// orientation wrapped with the sign of `kappa` and `taper` following the
    /// half turn, and deformations clamped to their admissible ranges.
    pub fn project(mut self) -> Self {
        let (mut ax, mut ay) = self.ellipse.axes;
        ax = ax.abs().max(MIN_AXIS);
        ay = ay.abs().max(MIN_AXIS);
        if ay > ax {
            std::mem::swap(&mut ax, &mut ay);
            self.ellipse.theta += std::f64::consts::FRAC_PI_2;
        }
        let (theta, flipped) = canonical_angle(self.ellipse.theta);
        if flipped {
            self.kappa = -self.kappa;
            self.taper = -self.taper;
        }
        self.ellipse.theta = theta;
        self.ellipse.axes = (ax, ay);
        let kmax = MAX_BEND / ax;
        self.kappa = self.kappa.clamp(-kmax, kmax);
        self.taper = self.taper.clamp(-MAX_TAPER, MAX_TAPER);
        self
    }
}

/// Maps an image point into the straightened, untapered frame of `w`:
/// rigid alignment, then unbending, then untapering.
pub fn unwarp_point(q: (f64, f64), w: &DeformableParams) -> (f64, f64) {
    let (s, c) = w.ellipse.theta.sin_cos();
    let dx = q.0 - w.ellipse.center.0;
    let dy = q.1 - w.ellipse.center.1;
    let x = c * dx + s * dy;
    let y = -s * dx + c * dy;
    let k = w.kappa;
    let (u0, v0) = if k.abs() > STRAIGHT_KAPPA {
        let kx = k * x;
        let ky = 1.0 - k * y;
        (kx.atan2(ky) / k, (1.0 - kx.hypot(ky)) / k)
    } else {
        (x, y)
    };
    let scale = (1.0 + w.taper * u0 / w.ellipse.axes.0).max(MIN_TAPER_SCALE);
    (u0, v0 / scale)
}

/// Inverse of [`unwarp_point`]: taper in the straight frame, bend, then
/// rotate and translate into the image.
pub fn warp_point(p: (f64, f64), w: &DeformableParams) -> (f64, f64) {
    let (u, v) = p;
    let v0 = v * (1.0 + w.taper * u / w.ellipse.axes.0).max(MIN_TAPER_SCALE);
    let k = w.kappa;
    let (x, y) = if k.abs() > STRAIGHT_KAPPA {
        let r = 1.0 / k;
        ((r - v0) * (k * u).sin(), r - (r - v0) * (k * u).cos())
    } else {
        (u, v0)
    };
    let (s, c) = w.ellipse.theta.sin_cos();
    (
        w.ellipse.center.0 + c * x - s * y,
        w.ellipse.center.1 + s * x + c * y,
    )
}
