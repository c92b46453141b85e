//! L1-regularised logistic regression and Platt calibration.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::svm::check_classes;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub w: Vec<f64>,
    pub b: f64,
}

impl LogisticModel {
    pub fn decision(&self, x: &[f64]) -> f64 {
        super::svm::dot(&self.w, x) + self.b
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        sigmoid(self.decision(x))
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + exp(-m))` without overflow.
fn log_loss(margin: f64) -> f64 {
    if margin > 0.0 {
        (-margin).exp().ln_1p()
    } else {
        -margin + margin.exp().ln_1p()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct L1LogisticParams {
    /// Weight of `|w|_1` against the mean log-loss.
    pub reg: f64,
    pub max_epochs: usize,
    /// Stop once no coordinate moves by more than this in an epoch.
    pub tolerance: f64,
}

impl L1LogisticParams {
    pub fn new(reg: f64) -> Self {
        L1LogisticParams {
            reg,
            max_epochs: 500,
            tolerance: 1e-7,
        }
    }
}

/// Mean logistic loss plus `reg * |w|_1` with an unpenalised bias, minimised
/// by cyclic proximal coordinate descent. Features are standardised
/// internally (the penalty applies to standardised coefficients, constant
/// columns get zero weight) and the returned model is on the original scale.
pub fn train_l1_logistic(features: &[Vec<f64>], labels: &[bool], reg: f64) -> Result<LogisticModel> {
    train_l1_logistic_with(features, labels, &L1LogisticParams::new(reg))
}

pub fn train_l1_logistic_with(
    features: &[Vec<f64>],
    labels: &[bool],
    params: &L1LogisticParams,
) -> Result<LogisticModel> {
    if features.len() != labels.len() || features.is_empty() {
        return Err(Error::InvalidInput("feature/label count mismatch".into()));
    }
    if !(params.reg >= 0.0) {
        return Err(Error::Parameter(format!("L1 strength {} must be >= 0", params.reg)));
    }
    check_classes(labels, "logistic training")?;
    let n = features.len();
    let dim = features[0].len();
    if features.iter().any(|f| f.len() != dim) {
        return Err(Error::InvalidInput("ragged feature matrix".into()));
    }
    let nf = n as f64;

    // column-major standardised copy
    let mut mean = vec![0.0; dim];
    let mut scale = vec![0.0; dim];
    for f in features {
        for j in 0..dim {
            mean[j] += f[j];
        }
    }
    mean.iter_mut().for_each(|m| *m /= nf);
    for f in features {
        for j in 0..dim {
            scale[j] += (f[j] - mean[j]).powi(2);
        }
    }
    let scale: Vec<f64> = scale.iter().map(|s| (s / nf).sqrt()).collect();
    // Identical standardised columns (up to sign) make the L1 optimum
    // non-unique; only the first of each group is optimised.
    let mut active: Vec<usize> = Vec::new();
    let mut cols: Vec<Vec<f64>> = Vec::new();
    let mut canon: Vec<Vec<f64>> = Vec::new();
    let mut seen: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    for j in (0..dim).filter(|&j| scale[j] > 1e-12) {
        let col: Vec<f64> = features.iter().map(|f| (f[j] - mean[j]) / scale[j]).collect();
        let sign = col.iter().find(|v| v.abs() > 1e-6).map_or(1.0, |v| v.signum());
        let unit: Vec<f64> = col.iter().map(|v| sign * v).collect();
        let key: Vec<i64> = unit.iter().map(|v| (v * 1e6).round() as i64).collect();
        let bucket = seen.entry(key).or_default();
        let dup = bucket
            .iter()
            .any(|&k| unit.iter().zip(&canon[k]).all(|(a, b)| (a - b).abs() < 1e-9));
        if !dup {
            bucket.push(cols.len());
            active.push(j);
            cols.push(col);
            canon.push(unit);
        }
    }

    let y: Vec<f64> = labels.iter().map(|&l| if l { 1.0 } else { 0.0 }).collect();
    let s: Vec<f64> = labels.iter().map(|&l| if l { 1.0 } else { -1.0 }).collect();
    let mut w = vec![0.0; cols.len()];
    let pos = y.iter().sum::<f64>() / nf;
    let mut b = (pos / (1.0 - pos)).ln();
    let mut eta = vec![b; n];

    let loss_of = |eta: &[f64]| -> f64 {
        eta.iter().zip(&s).map(|(&e, &si)| log_loss(si * e)).sum::<f64>() / nf
    };
    let mut loss = loss_of(&eta);
    let mut trial = vec![0.0; n];

    // One prox-Newton step on a single coordinate: curvature from the current
    // iterate, doubled until the 1-D objective decreases. The majoriser (a
    // quarter of the column second moment) caps the doubling.
    let mut coord_step = |col: Option<&[f64]>,
                          wj: f64,
                          penalty: f64,
                          eta: &mut Vec<f64>,
                          loss: &mut f64|
     -> f64 {
        let z = |i: usize| col.map_or(1.0, |c| c[i]);
        let mut g = 0.0;
        let mut h = 0.0;
        let mut m2 = 0.0;
        for i in 0..n {
            let p = sigmoid(eta[i]);
            let zi = z(i);
            g += (p - y[i]) * zi;
            h += p * (1.0 - p) * zi * zi;
            m2 += zi * zi;
        }
        g /= nf;
        h /= nf;
        let bound = 0.25 * m2 / nf;
        let mut curv = h.max(1e-6 * bound);
        let obj0 = *loss + penalty * wj.abs();
        loop {
            let raw = wj - g / curv;
            let thr = penalty / curv;
            let cand = raw.signum() * (raw.abs() - thr).max(0.0);
            let d = cand - wj;
            if d == 0.0 {
                return wj;
            }
            for i in 0..n {
                trial[i] = eta[i] + d * z(i);
            }
            let new_loss = loss_of(&trial);
            if new_loss + penalty * cand.abs() <= obj0 {
                std::mem::swap(eta, &mut trial);
                *loss = new_loss;
                return cand;
            }
            if curv >= bound {
                return wj;
            }
            curv = (curv * 2.0).min(bound);
        }
    };

    for _ in 0..params.max_epochs {
        let mut max_change: f64 = 0.0;
        let nb = coord_step(None, b, 0.0, &mut eta, &mut loss);
        max_change = max_change.max((nb - b).abs());
        b = nb;
        for j in 0..cols.len() {
            let nw = coord_step(Some(&cols[j]), w[j], params.reg, &mut eta, &mut loss);
            max_change = max_change.max((nw - w[j]).abs());
            w[j] = nw;
        }
        if max_change < params.tolerance {
            break;
        }
    }

    let mut full = vec![0.0; dim];
    let mut bias = b;
    for (k, &j) in active.iter().enumerate() {
        full[j] = w[k] / scale[j];
        bias -= w[k] * mean[j] / scale[j];
    }
    Ok(LogisticModel { w: full, b: bias })
}

/// Platt calibration `P(y=1 | m) = sigmoid(alpha * m + beta)` fitted by
/// Newton's method on smoothed targets. Returns `[alpha, beta]`.
pub fn fit_platt(margins: &[f64], labels: &[bool]) -> Result<[f64; 2]> {
    if margins.len() != labels.len() {
        return Err(Error::InvalidInput("margin/label count mismatch".into()));
    }
    check_classes(labels, "Platt calibration")?;
    let np = labels.iter().filter(|&&l| l).count() as f64;
    let nn = labels.len() as f64 - np;
    let hi = (np + 1.0) / (np + 2.0);
    let lo = 1.0 / (nn + 2.0);
    let t: Vec<f64> = labels.iter().map(|&l| if l { hi } else { lo }).collect();

    let objective = |a: f64, b: f64| -> f64 {
        margins
            .iter()
            .zip(&t)
            .map(|(&m, &ti)| {
                let z = a * m + b;
                ti * log_loss(z) + (1.0 - ti) * log_loss(-z)
            })
            .sum()
    };
    let (mut a, mut b) = (0.0, ((np + 1.0) / (nn + 1.0)).ln());
    let mut f = objective(a, b);
    for _ in 0..100 {
        let (mut g1, mut g2, mut h11, mut h22, mut h21) = (0.0, 0.0, 1e-12, 1e-12, 0.0);
        for (&m, &ti) in margins.iter().zip(&t) {
            let p = sigmoid(a * m + b);
            let d1 = p - ti;
            let d2 = p * (1.0 - p);
            g1 += m * d1;
            g2 += d1;
            h11 += m * m * d2;
            h22 += d2;
            h21 += m * d2;
        }
        if g1.abs() < 1e-10 && g2.abs() < 1e-10 {
            break;
        }
        let det = h11 * h22 - h21 * h21;
        let da = -(h22 * g1 - h21 * g2) / det;
        let db = -(-h21 * g1 + h11 * g2) / det;
        let mut step = 1.0;
        let mut improved = false;
        while step > 1e-10 {
            let fn_ = objective(a + step * da, b + step * db);
            if fn_ < f {
                a += step * da;
                b += step * db;
                f = fn_;
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }
    Ok([a, b])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn separable() -> (Vec<Vec<f64>>, Vec<bool>) {
        let x = (0..40).map(|i| vec![if i % 2 == 0 { 1.0 } else { -1.0 }]).collect();
        let y = (0..40).map(|i| i % 2 == 0).collect();
        (x, y)
    }

    fn mean_loss(m: &LogisticModel, x: &[Vec<f64>], y: &[bool]) -> f64 {
        x.iter()
            .zip(y)
            .map(|(xi, &yi)| {
                let p = m.predict(xi);
                -(if yi { p.ln() } else { (1.0 - p).ln() })
            })
            .sum::<f64>()
            / x.len() as f64
    }

    #[test]
    fn huge_penalty_zeroes_weights() {
        let x: Vec<Vec<f64>> = (0..50)
            .map(|i| vec![(i as f64).sin(), (i as f64 * 0.3).cos(), i as f64 / 50.0])
            .collect();
        let y: Vec<bool> = (0..50).map(|i| (i as f64).sin() > 0.1).collect();
        let m = train_l1_logistic(&x, &y, 1e6).unwrap();
        assert!(m.w.iter().all(|&w| w == 0.0));
        let pos = y.iter().filter(|&&v| v).count() as f64 / 50.0;
        assert!((sigmoid(m.b) - pos).abs() < 1e-6);
    }

    #[test]
    fn unregularised_separable_loss_is_small() {
        let (x, y) = separable();
        let m = train_l1_logistic(&x, &y, 0.0).unwrap();
        assert!(mean_loss(&m, &x, &y) < 0.1);
    }

    #[test]
    fn duplicated_columns_stay_sparse() {
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..200 {
            let a = ((i * 37) % 101) as f64 / 50.0 - 1.0;
            let noise = ((i * 53) % 17) as f64 / 17.0 - 0.5;
            x.push(vec![a, a, noise]);
            y.push(a + 0.8 * noise > 0.0);
        }
        let m = train_l1_logistic(&x, &y, 0.05).unwrap();
        assert!(m.w[0] != 0.0 || m.w[1] != 0.0);
        let nonzero = m.w[..2].iter().filter(|w| w.abs() > 1e-6).count();
        assert!(nonzero <= 1, "{:?}", m.w);
        let m = train_l1_logistic(&x, &y, 0.5).unwrap();
        let nonzero = m.w[..2].iter().filter(|w| w.abs() > 1e-6).count();
        assert!(nonzero <= 1, "{:?}", m.w);
    }

    #[test]
    fn single_class_is_rejected() {
        let x = vec![vec![1.0], vec![0.0]];
        assert!(matches!(train_l1_logistic(&x, &[false, false], 0.1), Err(Error::Training(_))));
        assert!(matches!(fit_platt(&[1.0, 2.0], &[true, true]), Err(Error::Training(_))));
    }

    #[test]
    fn platt_orders_margins() {
        let m: Vec<f64> = (0..100).map(|i| (i as f64 - 50.0) / 10.0).collect();
        let y: Vec<bool> = (0..100).map(|i| (i * 7919) % 100 < i).collect();
        let [a, _] = fit_platt(&m, &y).unwrap();
        assert!(a > 0.0);
    }

    #[test]
    fn training_is_deterministic() {
        let x: Vec<Vec<f64>> = (0..80)
            .map(|i| vec![(i as f64 * 0.7).sin(), (i as f64 * 0.2).cos()])
            .collect();
        let y: Vec<bool> = (0..80).map(|i| (i as f64 * 0.7).sin() > 0.0).collect();
        assert_eq!(
            train_l1_logistic(&x, &y, 0.01).unwrap(),
            train_l1_logistic(&x, &y, 0.01).unwrap()
        );
    }
}
