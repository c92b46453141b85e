//! Weighted least-squares fit of the bent/tapered ellipse to boundary edgels.

use nalgebra::{SMatrix, SVector};

use super::deform::{unwarp_point, DeformableParams};
use super::ellipse::EllipseParams;
use crate::segmentation::Edgel;
use crate::{Error, Result};

const N_PARAMS: usize = 7;
type Vec7 = SVector<f64, N_PARAMS>;
type Mat7 = SMatrix<f64, N_PARAMS, N_PARAMS>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub max_iterations: usize,
    pub initial_damping: f64,
    pub damping_increase: f64,
    pub damping_decrease: f64,
    /// Stop once an accepted step improves the objective by less than this
    /// fraction.
    pub relative_tolerance: f64,
    /// Edgels beyond this count are subsampled with a uniform stride.
    pub max_edgels: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            max_iterations: 50,
            initial_damping: 1e-3,
            damping_increase: 10.0,
            damping_decrease: 0.5,
            relative_tolerance: 1e-6,
            max_edgels: usize::MAX,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitReport {
    pub params: DeformableParams,
    pub initial_objective: f64,
    pub objective: f64,
    pub iterations: usize,
}

fn to_vec(w: &DeformableParams) -> Vec7 {
    let e = &w.ellipse;
    Vec7::from([
        e.center.0, e.center.1, e.theta, e.axes.0, e.axes.1, w.kappa, w.taper,
    ])
}

fn from_vec(p: &Vec7) -> DeformableParams {
    DeformableParams {
        ellipse: EllipseParams {
            center: (p[0], p[1]),
            theta: p[2],
            axes: (p[3], p[4]),
        },
        kappa: p[5],
        taper: p[6],
    }
}

/// Residual of one edgel against the model, before strength weighting.
#[inline]
pub fn edgel_residual(e: &Edgel, w: &DeformableParams) -> f64 {
    let (u, v) = unwarp_point((e.x, e.y), w);
    (u / w.ellipse.axes.0).hypot(v / w.ellipse.axes.1) - 1.0
}

/// Strength-weighted sum of squared residuals.
pub fn fit_objective(edgels: &[Edgel], w: &DeformableParams) -> f64 {
    edgels
        .iter()
        .map(|e| e.strength * edgel_residual(e, w).powi(2))
        .sum()
}

fn residuals(edgels: &[Edgel], sqrt_w: &[f64], w: &DeformableParams, out: &mut [f64]) {
    for ((e, &s), r) in edgels.iter().zip(sqrt_w).zip(out.iter_mut()) {
        *r = s * edgel_residual(e, w);
    }
}

/// Keeps at most `max` edgels with positive strength, evenly spaced by angle
/// around `center` so both sides of an elongated contour stay represented.
fn subsample(edgels: &[Edgel], max: usize, center: (f64, f64)) -> Vec<Edgel> {
    let mut active: Vec<Edgel> = edgels.iter().copied().filter(|e| e.strength > 0.0).collect();
    if active.len() <= max {
        return active;
    }
    let angle = |e: &Edgel| (e.y - center.1).atan2(e.x - center.0);
    active.sort_by(|a, b| angle(a).total_cmp(&angle(b)));
    let stride = active.len() as f64 / max as f64;
    (0..max)
        .map(|i| active[((i as f64 + 0.5) * stride) as usize])
        .collect()
}

/// Fits a [`DeformableParams`] to the edgels starting from `init` with zero
/// deformation.
pub fn fit_deformable(edgels: &[Edgel], init: &EllipseParams) -> Result<DeformableParams> {
    fit_deformable_with(edgels, init, &FitOptions::default()).map(|r| r.params)
}

/// Damped Gauss-Newton (Levenberg-Marquardt) on the strength-weighted radial
/// residuals with a forward-difference Jacobian. Every candidate step is
/// projected onto the admissible parameter set and only accepted if it lowers
/// the objective, so the result is never worse than the initialisation.
pub fn fit_deformable_with(
    edgels: &[Edgel],
    init: &EllipseParams,
    opts: &FitOptions,
) -> Result<FitReport> {
    if edgels.len() < 8 {
        return Err(Error::Fit(format!(
            "need at least 8 edgels, got {}",
            edgels.len()
        )));
    }
    let pts = subsample(edgels, opts.max_edgels.max(8), init.center);
    if pts.len() < 8 {
        return Err(Error::Fit("fewer than 8 edgels carry edge strength".into()));
    }
    let sqrt_w: Vec<f64> = pts.iter().map(|e| e.strength.sqrt()).collect();
    let m = pts.len();

    let start = DeformableParams::rigid(*init).project();
    let mut p = to_vec(&start);
    let mut r = vec![0.0; m];
    residuals(&pts, &sqrt_w, &from_vec(&p), &mut r);
    let mut f: f64 = r.iter().map(|v| v * v).sum();
    if !f.is_finite() {
        return Err(Error::Fit("objective is not finite at the initialisation".into()));
    }
    let initial_objective = f;

    let mut damping = opts.initial_damping;
    let mut jac = vec![Vec7::zeros(); m];
    let mut r_step = vec![0.0; m];
    let mut iterations = 0;

    'outer: while iterations < opts.max_iterations && f > 0.0 {
        iterations += 1;
        let ax = p[3];
        let steps = [
            1e-6 * ax,
            1e-6 * ax,
            1e-6,
            1e-6 * ax,
            1e-6 * ax,
            1e-6 / ax,
            1e-6,
        ];
        for (j, &h) in steps.iter().enumerate() {
            let mut q = p;
            q[j] += h;
            residuals(&pts, &sqrt_w, &from_vec(&q), &mut r_step);
            for i in 0..m {
                jac[i][j] = (r_step[i] - r[i]) / h;
            }
        }
        let mut jtj = Mat7::zeros();
        let mut jtr = Vec7::zeros();
        for i in 0..m {
            jtj += jac[i] * jac[i].transpose();
            jtr += jac[i] * r[i];
        }
        let diag_floor = jtj.diagonal().max() * 1e-12 + 1e-300;

        loop {
            let mut a = jtj;
            for j in 0..N_PARAMS {
                a[(j, j)] += damping * jtj[(j, j)].max(diag_floor);
            }
            let delta = match a.cholesky() {
                Some(ch) => ch.solve(&(-jtr)),
                None => {
                    damping *= opts.damping_increase;
                    if damping > 1e12 {
                        break 'outer;
                    }
                    continue;
                }
            };
            let cand = to_vec(&from_vec(&(p + delta)).project());
            residuals(&pts, &sqrt_w, &from_vec(&cand), &mut r_step);
            let f_new: f64 = r_step.iter().map(|v| v * v).sum();
            if !f_new.is_finite() {
                return Err(Error::Fit("objective diverged".into()));
            }
            if f_new < f {
                let improvement = (f - f_new) / f;
                p = cand;
                std::mem::swap(&mut r, &mut r_step);
                f = f_new;
                damping = (damping * opts.damping_decrease).max(1e-15);
                if improvement < opts.relative_tolerance {
                    break 'outer;
                }
                break;
            }
            damping *= opts.damping_increase;
            if damping > 1e12 {
                break 'outer;
            }
        }
    }

    Ok(FitReport {
        params: from_vec(&p),
        initial_objective,
        objective: f,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::warp::deform::warp_point;

    fn ellipse_boundary(w: &DeformableParams, n: usize) -> Vec<Edgel> {
        let (ax, ay) = w.ellipse.axes;
        (0..n)
            .map(|i| {
                let phi = 2.0 * std::f64::consts::PI * (i as f64 + 0.37) / n as f64;
                let (x, y) = warp_point((ax * phi.cos(), ay * phi.sin()), w);
                Edgel { x, y, strength: 1.0 }
            })
            .collect()
    }

    fn base() -> EllipseParams {
        EllipseParams {
            center: (80.0, 60.0),
            theta: 0.3,
            axes: (30.0, 10.0),
        }
    }

    #[test]
    fn exact_ellipse_stays_undeformed() {
        let truth = DeformableParams::rigid(base());
        let edgels = ellipse_boundary(&truth, 120);
        let fit = fit_deformable(&edgels, &base()).unwrap();
        assert!((fit.kappa * 30.0).abs() < 0.02);
        assert!(fit.taper.abs() < 0.02);
    }

    #[test]
    fn recovers_bend_and_taper_from_moment_init() {
        for (kappa_ax, taper) in [(0.5, 0.0), (-0.5, 0.0), (0.0, 0.4), (0.4, -0.3)] {
            let truth = DeformableParams {
                ellipse: base(),
                kappa: kappa_ax / 30.0,
                taper,
            };
            let edgels = ellipse_boundary(&truth, 160);
            let pts: Vec<(f64, f64)> = edgels.iter().map(|e| (e.x, e.y)).collect();
            let init = crate::warp::fit_ellipse_moments(&pts).unwrap();
            let rep = fit_deformable_with(&edgels, &init, &FitOptions::default()).unwrap();
            let got = rep.params;
            if kappa_ax != 0.0 {
                assert!(
                    (got.kappa - truth.kappa).abs() <= 0.1 * truth.kappa.abs(),
                    "kappa {} vs {} ({rep:?})",
                    got.kappa,
                    truth.kappa
                );
            } else {
                assert!((got.kappa * 30.0).abs() < 0.02);
            }
            assert!((got.taper - taper).abs() < 0.05, "taper {} vs {taper}", got.taper);
        }
    }

    #[test]
    fn never_worse_than_init() {
        let truth = DeformableParams {
            ellipse: base(),
            kappa: 0.02,
            taper: 0.2,
        };
        let mut edgels = ellipse_boundary(&truth, 90);
        // perturb deterministically
        for (i, e) in edgels.iter_mut().enumerate() {
            e.x += ((i * 7919) % 13) as f64 * 0.15 - 0.9;
            e.strength = 0.2 + ((i * 104729) % 7) as f64 / 7.0;
        }
        let init = EllipseParams {
            center: (75.0, 63.0),
            theta: 0.1,
            axes: (25.0, 12.0),
        };
        let rep = fit_deformable_with(&edgels, &init, &FitOptions::default()).unwrap();
        let init_obj = fit_objective(&edgels, &DeformableParams::rigid(init));
        assert!(rep.objective <= init_obj + 1e-12);
        assert!((rep.initial_objective - init_obj).abs() < 1e-9);
        assert!(rep.params.is_valid());
    }

    #[test]
    fn too_few_edgels() {
        let e = Edgel {
            x: 0.0,
            y: 0.0,
            strength: 1.0,
        };
        assert!(matches!(fit_deformable(&[e; 7], &base()), Err(Error::Fit(_))));
    }

    #[test]
    fn finite_difference_jacobian_is_consistent() {
        // Forward differences against central differences at a fixed instance.
        let w = DeformableParams {
            ellipse: base(),
            kappa: 0.01,
            taper: 0.1,
        };
        let e = Edgel {
            x: 95.0,
            y: 70.0,
            strength: 1.0,
        };
        let p = to_vec(&w);
        for j in 0..N_PARAMS {
            let scale = [30.0, 30.0, 1.0, 30.0, 30.0, 1.0 / 30.0, 1.0][j];
            let h = 1e-5 * scale;
            let mut a = p;
            let mut b = p;
            a[j] += h;
            b[j] -= h;
            let central =
                (edgel_residual(&e, &from_vec(&a)) - edgel_residual(&e, &from_vec(&b))) / (2.0 * h);
            let hf = 1e-6 * scale;
            let mut c = p;
            c[j] += hf;
            let forward = (edgel_residual(&e, &from_vec(&c)) - edgel_residual(&e, &w)) / hf;
            let denom = central.abs().max(1e-8);
            assert!(
                (central - forward).abs() / denom < 1e-4,
                "param {j}: {central} vs {forward}"
            );
        }
    }
}
