//! Fitting the bent, tapered ellipse to a boundary and the warped shape
//! histogram that makes the shape cue bend-invariant.
//!
//! `cargo run --example warp_fit`

use std::f64::consts::PI;

use symparts::segmentation::Edgel;
use symparts::warp::{
    chi_squared, fit_deformable_with, fit_ellipse_moments, shape_histogram, warp_point, DeformableParams,
    EllipseParams, FitOptions,
};

fn outline(w: &DeformableParams) -> Vec<Edgel> {
    let (ax, ay) = w.ellipse.axes;
    (0..180)
        .map(|k| {
            let phi = 2.0 * PI * k as f64 / 180.0;
            let (x, y) = warp_point((ax * phi.cos(), ay * phi.sin()), w);
            Edgel { x, y, strength: 1.0 }
        })
        .collect()
}

fn main() -> symparts::Result<()> {
    let ellipse = EllipseParams { center: (80.0, 70.0), theta: 0.4, axes: (32.0, 9.0) };
    let straight = DeformableParams::rigid(ellipse);
    let truth = DeformableParams { kappa: 0.6 / 32.0, taper: 0.3, ..straight };
    let edgels = outline(&truth);

    let points: Vec<(f64, f64)> = edgels.iter().map(|e| (e.x, e.y)).collect();
    let init = fit_ellipse_moments(&points)?;
    let fit = fit_deformable_with(&edgels, &init, &FitOptions::default())?;
    println!(
        "moment ellipse: centre ({:.1}, {:.1}) theta {:.3} axes ({:.1}, {:.1})",
        init.center.0, init.center.1, init.theta, init.axes.0, init.axes.1
    );
    println!(
        "deformable fit: bend {:.3} (true {:.3}), taper {:.3} (true {:.3}), objective {:.4} -> {:.4} in {} iterations",
        fit.params.kappa * fit.params.ellipse.axes.0,
        truth.kappa * truth.ellipse.axes.0,
        fit.params.taper,
        truth.taper,
        fit.initial_objective,
        fit.objective,
        fit.iterations
    );

    let reference = shape_histogram(&outline(&straight), &straight);
    let rigid = shape_histogram(&edgels, &DeformableParams::rigid(init));
    let deformable = shape_histogram(&edgels, &fit.params);
    println!("chi-squared to the straight shape: ellipse warp {:.3}, deformable warp {:.3}",
        chi_squared(&reference.bins, &rigid.bins),
        chi_squared(&reference.bins, &deformable.bins));
    Ok(())
}
