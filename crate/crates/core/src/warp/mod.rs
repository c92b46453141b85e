//! Local shape models for disc regions and the warped boundary histogram.
//!
//! A region is first fitted with a moment-matched ellipse. The deformable
//! model adds a circular bend of the major axis and a linear taper of the
//! width along it; its inverse warp straightens and untapers the region so
//! that the boundary histogram sees a canonical ellipse.

mod deform;
mod ellipse;
mod fit;
mod histogram;

pub use deform::{
    unwarp_point, warp_point, DeformableParams, MAX_BEND, MAX_TAPER, STRAIGHT_KAPPA,
};
pub use ellipse::{canonical_angle, fit_ellipse_moments, EllipseParams};
pub use fit::{
    edgel_residual, fit_deformable, fit_deformable_with, fit_objective, FitOptions, FitReport,
};
pub use histogram::{chi_squared, shape_histogram, ShapeHistogram, EXTENT, GRID, HISTOGRAM_LEN};
