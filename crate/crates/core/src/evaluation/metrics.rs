//! Mask overlap, detection matching and precision-recall.

use serde::Serialize;

use crate::{Error, Result};

/// Overlap above this (strictly) counts as a hit.
pub const HIT_IOU: f64 = 0.4;

/// `|a ∩ b| / |a ∪ b|`; 1 when both masks are empty.
pub fn iou(a: &[bool], b: &[bool]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::InvalidInput(format!(
            "mask sizes differ: {} vs {} pixels",
            a.len(),
            b.len()
        )));
    }
    let (mut inter, mut union) = (0usize, 0usize);
    for (&x, &y) in a.iter().zip(b) {
        inter += usize::from(x && y);
        union += usize::from(x || y);
    }
    Ok(if union == 0 { 1.0 } else { inter as f64 / union as f64 })
}

/// Greedy one-to-one matching in rank order. Each detection claims the
/// unclaimed ground truth it overlaps most (lowest index on ties) if that
/// overlap exceeds `thresh`. Returns the per-detection hit flags.
pub fn match_detections(dets: &[&[bool]], gts: &[&[bool]], thresh: f64) -> Result<Vec<bool>> {
    let mut claimed = vec![false; gts.len()];
    let mut hits = Vec::with_capacity(dets.len());
    for det in dets {
        let mut best: Option<(usize, f64)> = None;
        for (g, gt) in gts.iter().enumerate() {
            if claimed[g] {
                continue;
            }
            let o = iou(det, gt)?;
            if o > thresh && best.is_none_or(|(_, b)| o > b) {
                best = Some((g, o));
            }
        }
        if let Some((g, _)) = best {
            claimed[g] = true;
        }
        hits.push(best.is_some());
    }
    Ok(hits)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrPoint {
    pub threshold: f64,
    pub precision: f64,
    pub recall: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrCurve {
    /// One point per distinct detection cost, loosening.
    pub points: Vec<PrPoint>,
    pub average_precision: f64,
    pub n_detections: usize,
    pub n_ground_truth: usize,
}

impl PrCurve {
    /// Recall with every detection kept.
    pub fn final_recall(&self) -> f64 {
        self.points.last().map_or(0.0, |p| p.recall)
    }
}

/// Detections of one image, in any order, scored against its ground truth.
pub struct ImageDetections<'a> {
    pub costs: Vec<f64>,
    pub masks: Vec<&'a [bool]>,
    pub ground_truth: Vec<&'a [bool]>,
}

/// Matches each image's detections in ascending cost order (stable on ties).
/// Returns `(cost, hit)` for every detection of every image.
pub fn score_images(images: &[ImageDetections]) -> Result<Vec<(f64, bool)>> {
    let mut out = Vec::new();
    for im in images {
        if im.costs.len() != im.masks.len() {
            return Err(Error::InvalidInput("cost/mask count mismatch".into()));
        }
        if let Some(c) = im.costs.iter().find(|c| !c.is_finite()) {
            return Err(Error::InvalidInput(format!("detection cost {c} is not finite")));
        }
        let mut order: Vec<usize> = (0..im.costs.len()).collect();
        order.sort_by(|&a, &b| im.costs[a].total_cmp(&im.costs[b]));
        let ranked: Vec<&[bool]> = order.iter().map(|&k| im.masks[k]).collect();
        let hits = match_detections(&ranked, &im.ground_truth, HIT_IOU)?;
        out.extend(order.iter().zip(hits).map(|(&k, h)| (im.costs[k], h)));
    }
    Ok(out)
}

/// Sweeps the cost threshold over the distinct detection costs. A detection
/// is kept when its cost is at most the threshold. AP is the trapezoid area
/// under precision over recall, anchored at recall 0 with precision 1 (the
/// empty kept set).
pub fn pr_curve(scored: &[(f64, bool)], n_ground_truth: usize) -> Result<PrCurve> {
    if n_ground_truth == 0 {
        return Err(Error::InvalidInput("no ground-truth parts to evaluate against".into()));
    }
    let mut sorted = scored.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut points = Vec::new();
    let (mut kept, mut hits) = (0usize, 0usize);
    let mut k = 0;
    while k < sorted.len() {
        let t = sorted[k].0;
        while k < sorted.len() && sorted[k].0 == t {
            kept += 1;
            hits += usize::from(sorted[k].1);
            k += 1;
        }
        points.push(PrPoint {
            threshold: t,
            precision: hits as f64 / kept as f64,
            recall: hits as f64 / n_ground_truth as f64,
        });
    }
    let mut ap = 0.0;
    let (mut r0, mut p0) = (0.0, 1.0);
    for p in &points {
        ap += (p.recall - r0) * (p.precision + p0) / 2.0;
        r0 = p.recall;
        p0 = p.precision;
    }
    Ok(PrCurve {
        points,
        average_precision: ap.clamp(0.0, 1.0),
        n_detections: scored.len(),
        n_ground_truth,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mask(n: usize, on: std::ops::Range<usize>) -> Vec<bool> {
        (0..n).map(|i| on.contains(&i)).collect()
    }

    #[test]
    fn iou_cases() {
        let a = mask(300, 0..100);
        let b = mask(300, 50..150);
        assert_eq!(iou(&a, &a).unwrap(), 1.0);
        assert_eq!(iou(&a, &mask(300, 200..300)).unwrap(), 0.0);
        assert_eq!(iou(&a, &b).unwrap(), 50.0 / 150.0);
        assert_eq!(iou(&a, &b).unwrap(), iou(&b, &a).unwrap());
        assert_eq!(iou(&mask(5, 0..0), &mask(5, 0..0)).unwrap(), 1.0);
        assert!(iou(&a, &mask(10, 0..1)).is_err());
    }

    #[test]
    fn strict_hit_threshold() {
        let gt = mask(100, 0..40);
        let exact = mask(100, 0..16); // 16 / 40 = 0.4
        let above = mask(100, 0..17);
        assert_eq!(match_detections(&[&exact], &[&gt], HIT_IOU).unwrap(), vec![false]);
        assert_eq!(match_detections(&[&above], &[&gt], HIT_IOU).unwrap(), vec![true]);
    }

    #[test]
    fn ground_truth_is_claimed_once() {
        let gt = mask(100, 0..50);
        let d = mask(100, 0..45);
        assert_eq!(match_detections(&[&d, &d], &[&gt], HIT_IOU).unwrap(), vec![true, false]);
    }

    #[test]
    fn hand_enumerated_sweep() {
        let c = pr_curve(&[(-0.3, false), (-0.5, true), (-0.1, true)], 2).unwrap();
        let pr: Vec<(f64, f64)> = c.points.iter().map(|p| (p.precision, p.recall)).collect();
        assert_eq!(pr, vec![(1.0, 0.5), (0.5, 0.5), (2.0 / 3.0, 1.0)]);
        let ap = 0.5 * (1.0 + 1.0) / 2.0 + 0.5 * (0.5 + 2.0 / 3.0) / 2.0;
        assert!((c.average_precision - ap).abs() < 1e-15);
    }

    #[test]
    fn monotone_cost_transform_keeps_curve() {
        let s = [(0.2, true), (-0.4, false), (0.9, true), (0.2, false), (-1.0, true)];
        let t: Vec<(f64, bool)> = s.iter().map(|&(c, h)| (2.0 * c + 7.0, h)).collect();
        let a = pr_curve(&s, 4).unwrap();
        let b = pr_curve(&t, 4).unwrap();
        assert_eq!(a.average_precision, b.average_precision);
        for (p, q) in a.points.iter().zip(&b.points) {
            assert_eq!((p.precision, p.recall), (q.precision, q.recall));
        }
    }

    #[test]
    fn zero_ground_truth_is_an_error() {
        assert!(pr_curve(&[(0.0, false)], 0).is_err());
    }

    #[test]
    fn all_hits_give_unit_precision() {
        let c = pr_curve(&[(1.0, true), (2.0, true), (3.0, true)], 3).unwrap();
        assert!(c.points.iter().all(|p| p.precision == 1.0));
        assert_eq!(c.average_precision, 1.0);
        let empty = pr_curve(&[], 3).unwrap();
        assert_eq!(empty.average_precision, 0.0);
    }
}
