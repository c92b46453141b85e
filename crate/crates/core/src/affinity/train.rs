//! Training of the full affinity stack from labelled disc pairs.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::appearance::appearance_feature;
use super::logistic::{fit_platt, train_l1_logistic};
use super::model::{
    AffinityModel, LogitBlock, ModelMetadata, SvmBlock, WarpMode, FEATURE_VERSION, MODEL_VERSION,
};
use super::pairs::{LabeledPair, TrainingPairs};
use super::shape::{shape_feature, ShapeOptions};
use super::svm::{train_linear_svm, SvmParams};
use crate::segmentation::DiscGraph;
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct TrainingImage {
    pub graph: DiscGraph,
    pub pairs: TrainingPairs,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainingConfig {
    pub mode: WarpMode,
    pub seed: u64,
    /// L1 strength on the summed log-loss of every logistic stage.
    pub l1_strength: f64,
    pub svm_c: f64,
    /// Negatives are subsampled to at most this multiple of the positives.
    pub max_negative_ratio: f64,
    /// Share of shape pairs held out for Platt scaling and the combiner.
    pub calibration_fraction: f64,
}

impl TrainingConfig {
    pub fn new(mode: WarpMode, seed: u64) -> Self {
        TrainingConfig {
            mode,
            seed,
            l1_strength: 0.5,
            svm_c: 1.0,
            max_negative_ratio: 3.0,
            calibration_fraction: 0.2,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct TrainingReport {
    pub shape_positives: usize,
    pub shape_negatives: usize,
    pub appearance_positives: usize,
    pub appearance_negatives: usize,
    pub svm_train_accuracy: f64,
    pub appearance_log_loss: f64,
    pub combiner_log_loss: f64,
}

fn balance(pairs: Vec<LabeledPair>, ratio: f64, rng: &mut ChaCha8Rng) -> Vec<LabeledPair> {
    let (pos, mut neg): (Vec<_>, Vec<_>) = pairs.into_iter().partition(|p| p.same);
    let cap = (ratio * pos.len() as f64).floor() as usize;
    if neg.len() > cap {
        neg.shuffle(rng);
        neg.truncate(cap);
    }
    let mut all = pos;
    all.extend(neg);
    all.sort_by_key(|p| (p.image, p.i, p.j));
    all
}

fn class_counts(labels: &[bool]) -> (usize, usize) {
    let pos = labels.iter().filter(|&&l| l).count();
    (pos, labels.len() - pos)
}

fn require_both(labels: &[bool], min: usize, what: &str) -> Result<()> {
    let (pos, neg) = class_counts(labels);
    if pos < min || neg < min {
        return Err(Error::Training(format!(
            "{what}: need at least {min} positive and {min} negative pairs, have {pos} positive and {neg} negative"
        )));
    }
    Ok(())
}

fn mean_log_loss(p: &[f64], y: &[bool]) -> f64 {
    p.iter()
        .zip(y)
        .map(|(&p, &y)| -(if y { p } else { 1.0 - p }).clamp(1e-15, 1.0).ln())
        .sum::<f64>()
        / p.len().max(1) as f64
}

/// Trains the shape SVM, its Platt calibration, the appearance regressor and
/// the combiner. Deterministic for a given input and seed.
pub fn train_affinity(
    images: &[TrainingImage],
    cfg: &TrainingConfig,
) -> Result<(AffinityModel, TrainingReport)> {
    if images.is_empty() {
        return Err(Error::Training("no training images".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let shape_pairs = balance(
        images.iter().flat_map(|im| im.pairs.shape.iter().copied()).collect(),
        cfg.max_negative_ratio,
        &mut rng,
    );
    let app_pairs = balance(
        images.iter().flat_map(|im| im.pairs.appearance.iter().copied()).collect(),
        cfg.max_negative_ratio,
        &mut rng,
    );

    let opts = ShapeOptions::new(cfg.mode);
    let shape_rows: Vec<(Vec<f64>, bool, usize)> = shape_pairs
        .par_iter()
        .enumerate()
        .filter_map(|(k, p)| {
            let g = &images[p.image].graph;
            shape_feature(&[&g.discs[p.i], &g.discs[p.j]], &opts).map(|h| (h.bins, p.same, k))
        })
        .collect();
    let shape_labels: Vec<bool> = shape_rows.iter().map(|r| r.1).collect();
    require_both(&shape_labels, 2, "shape pairs")?;

    // stratified hold-out for calibration
    let mut calib = vec![false; shape_rows.len()];
    for class in [true, false] {
        let mut idx: Vec<usize> = (0..shape_rows.len()).filter(|&k| shape_rows[k].1 == class).collect();
        idx.shuffle(&mut rng);
        let take = ((cfg.calibration_fraction * idx.len() as f64).ceil() as usize).clamp(1, idx.len() - 1);
        for &k in &idx[..take] {
            calib[k] = true;
        }
    }
    let (train_x, train_y): (Vec<Vec<f64>>, Vec<bool>) = shape_rows
        .iter()
        .zip(&calib)
        .filter(|(_, &c)| !c)
        .map(|(r, _)| (r.0.clone(), r.1))
        .unzip();
    let svm = train_linear_svm(
        &train_x,
        &train_y,
        &SvmParams {
            c: cfg.svm_c,
            seed: cfg.seed,
            ..SvmParams::default()
        },
    )?;
    let svm_train_accuracy = train_x
        .iter()
        .zip(&train_y)
        .filter(|(x, &y)| (super::svm::dot(&svm.w, x) + svm.b > 0.0) == y)
        .count() as f64
        / train_x.len() as f64;

    let calib_rows: Vec<&(Vec<f64>, bool, usize)> =
        shape_rows.iter().zip(&calib).filter(|(_, &c)| c).map(|(r, _)| r).collect();
    let margins: Vec<f64> = calib_rows
        .iter()
        .map(|r| super::svm::dot(&svm.w, &r.0) + svm.b)
        .collect();
    let calib_labels: Vec<bool> = calib_rows.iter().map(|r| r.1).collect();
    let platt = fit_platt(&margins, &calib_labels)?;

    let app_rows: Vec<Vec<f64>> = app_pairs
        .par_iter()
        .map(|p| {
            let g = &images[p.image].graph;
            appearance_feature(&g.discs[p.i], &g.discs[p.j]).expanded
        })
        .collect();
    let app_labels: Vec<bool> = app_pairs.iter().map(|p| p.same).collect();
    require_both(&app_labels, 1, "appearance pairs")?;
    let app = train_l1_logistic(&app_rows, &app_labels, cfg.l1_strength / app_rows.len() as f64)?;
    let mut app_w = app.w.clone();
    app_w[0] += app.b;
    let app_block = LogitBlock { w: app_w };

    let mut partial = AffinityModel {
        version: MODEL_VERSION.into(),
        shape_svm: SvmBlock { w: svm.w, b: svm.b },
        shape_platt: platt,
        app_logit: app_block,
        combiner: [0.0; 3],
        metadata: ModelMetadata {
            feature_version: FEATURE_VERSION.into(),
            warp_mode: cfg.mode,
            training_seed: cfg.seed,
            l1_strength: cfg.l1_strength,
            svm_c: cfg.svm_c,
            n_shape_pairs: shape_rows.len(),
            n_appearance_pairs: app_rows.len(),
        },
    };
    let app_probs: Vec<f64> = app_rows
        .iter()
        .map(|x| partial.appearance_probability(x))
        .collect();

    let comb_x: Vec<Vec<f64>> = calib_rows
        .par_iter()
        .zip(&margins)
        .map(|(r, &m)| {
            let p = &shape_pairs[r.2];
            let g = &images[p.image].graph;
            let a_app = partial.appearance_probability(&appearance_feature(&g.discs[p.i], &g.discs[p.j]).expanded);
            vec![partial.shape_probability(m), a_app]
        })
        .collect();
    let comb = train_l1_logistic(&comb_x, &calib_labels, cfg.l1_strength / comb_x.len() as f64)?;
    partial.combiner = [comb.w[0], comb.w[1], comb.b];
    let comb_probs: Vec<f64> = comb_x.iter().map(|x| partial.combine(x[0], x[1])).collect();

    let (sp, sn) = class_counts(&shape_labels);
    let (ap, an) = class_counts(&app_labels);
    let report = TrainingReport {
        shape_positives: sp,
        shape_negatives: sn,
        appearance_positives: ap,
        appearance_negatives: an,
        svm_train_accuracy,
        appearance_log_loss: mean_log_loss(&app_probs, &app_labels),
        combiner_log_loss: mean_log_loss(&comb_probs, &calib_labels),
    };
    partial.validate()?;
    Ok((partial, report))
}
