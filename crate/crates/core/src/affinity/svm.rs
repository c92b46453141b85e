//! Linear SVM trained by dual coordinate descent on the hinge loss.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSvm {
    pub w: Vec<f64>,
    pub b: f64,
}

impl LinearSvm {
    pub fn margin(&self, x: &[f64]) -> f64 {
        dot(&self.w, x) + self.b
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvmParams {
    pub c: f64,
    pub max_epochs: usize,
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams {
            c: 1.0,
            max_epochs: 1000,
            tolerance: 1e-4,
            seed: 0,
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn check_classes(labels: &[bool], what: &str) -> Result<()> {
    let pos = labels.iter().filter(|&&l| l).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::Training(format!(
            "{what} needs both classes, got {pos} positive and {neg} negative examples"
        )));
    }
    Ok(())
}

/// Minimises `0.5 * |(w, b)|^2 + C * sum hinge(y_i (w.x_i + b))` with the
/// bias folded in as a constant feature. Samples are visited in an order
/// shuffled per epoch from `seed`.
pub fn train_linear_svm(features: &[Vec<f64>], labels: &[bool], params: &SvmParams) -> Result<LinearSvm> {
    if features.len() != labels.len() {
        return Err(Error::InvalidInput("feature/label count mismatch".into()));
    }
    check_classes(labels, "SVM training")?;
    let dim = features[0].len();
    if features.iter().any(|f| f.len() != dim) {
        return Err(Error::InvalidInput("ragged feature matrix".into()));
    }
    let n = features.len();
    let y: Vec<f64> = labels.iter().map(|&l| if l { 1.0 } else { -1.0 }).collect();
    let qii: Vec<f64> = features.iter().map(|f| dot(f, f) + 1.0).collect();
    let mut alpha = vec![0.0; n];
    let mut w = vec![0.0; dim];
    let mut b = 0.0;
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

    for _ in 0..params.max_epochs {
        order.shuffle(&mut rng);
        let mut pg_max = f64::NEG_INFINITY;
        let mut pg_min = f64::INFINITY;
        for &i in &order {
            let g = y[i] * (dot(&w, &features[i]) + b) - 1.0;
            let pg = if alpha[i] <= 0.0 {
                g.min(0.0)
            } else if alpha[i] >= params.c {
                g.max(0.0)
            } else {
                g
            };
            pg_max = pg_max.max(pg);
            pg_min = pg_min.min(pg);
            if pg.abs() > 1e-12 {
                let old = alpha[i];
                alpha[i] = (old - g / qii[i]).clamp(0.0, params.c);
                let d = (alpha[i] - old) * y[i];
                for (wj, xj) in w.iter_mut().zip(&features[i]) {
                    *wj += d * xj;
                }
                b += d;
            }
        }
        if pg_max - pg_min < params.tolerance {
            break;
        }
    }
    Ok(LinearSvm { w, b })
}
