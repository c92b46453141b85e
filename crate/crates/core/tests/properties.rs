//! Property tests for evaluation and warp invariants.

use proptest::prelude::*;

use symparts::evaluation::{iou, match_detections, pr_curve};
use symparts::warp::{unwarp_point, warp_point, DeformableParams, EllipseParams};

fn masks(n: usize, count: usize) -> impl Strategy<Value = Vec<Vec<bool>>> {
    prop::collection::vec(prop::collection::vec(any::<bool>(), n), count)
}

proptest! {
    #[test]
    fn iou_is_symmetric_and_bounded(m in masks(64, 2)) {
        let (a, b) = (iou(&m[0], &m[1]).unwrap(), iou(&m[1], &m[0]).unwrap());
        prop_assert_eq!(a, b);
        prop_assert!((0.0..=1.0).contains(&a));
    }

    #[test]
    fn hits_never_exceed_either_side(dets in masks(48, 5), gts in masks(48, 3), t in 0.0f64..0.9) {
        let d: Vec<&[bool]> = dets.iter().map(Vec::as_slice).collect();
        let g: Vec<&[bool]> = gts.iter().map(Vec::as_slice).collect();
        let hits = match_detections(&d, &g, t).unwrap().iter().filter(|&&h| h).count();
        prop_assert!(hits <= d.len().min(g.len()));
    }

    #[test]
    fn pr_curve_depends_only_on_cost_order(
        scored in prop::collection::vec((-5.0f64..5.0, any::<bool>()), 0..30),
        extra_gt in 0usize..5,
    ) {
        let n_gt = scored.iter().filter(|s| s.1).count() + extra_gt.max(1);
        let a = pr_curve(&scored, n_gt).unwrap();
        let moved: Vec<(f64, bool)> = scored.iter().map(|&(c, h)| (2.0 * c + 7.0, h)).collect();
        let b = pr_curve(&moved, n_gt).unwrap();
        prop_assert!((0.0..=1.0).contains(&a.average_precision));
        prop_assert_eq!(a.average_precision, b.average_precision);
        prop_assert_eq!(a.points.len(), b.points.len());
        for (p, q) in a.points.iter().zip(&b.points) {
            prop_assert_eq!((p.precision, p.recall), (q.precision, q.recall));
        }
    }

    #[test]
    fn unwarp_inverts_warp(
        theta in -1.5f64..1.5,
        ax in 10.0f64..40.0,
        ratio in 0.2f64..0.5,
        bend in -0.9f64..0.9,
        taper in -0.6f64..0.6,
        su in -1.0f64..1.0,
        sv in -1.0f64..1.0,
    ) {
        let w = DeformableParams {
            ellipse: EllipseParams { center: (50.0, 40.0), theta, axes: (ax, ax * ratio) },
            kappa: bend / ax,
            taper,
        };
        let p = (su * ax, sv * ax * ratio);
        let q = unwarp_point(warp_point(p, &w), &w);
        prop_assert!((q.0 - p.0).abs() < 1e-6 && (q.1 - p.1).abs() < 1e-6);
    }
}
