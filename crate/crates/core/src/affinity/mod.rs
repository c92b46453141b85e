//! Pairwise disc affinities.
//!
//! The shape cue is a linear SVM over the warped boundary histogram of the
//! two discs' union, calibrated to a probability with Platt scaling. The
//! appearance cue is an L1-regularised logistic regressor over a quadratic
//! expansion of colour statistics. A second logistic regressor combines
//! both into the final affinity.

mod appearance;
mod logistic;
mod model;
mod pairs;
mod shape;
mod svm;
mod train;

pub use appearance::{
    appearance_feature, histogram_distances, quadratic_expand, quadratic_index, raw_appearance,
    AppearanceFeature, EXPANDED_LEN, RAW_LEN,
};
pub use logistic::{
    fit_platt, sigmoid, train_l1_logistic, train_l1_logistic_with, L1LogisticParams, LogisticModel,
};
pub use model::{
    combined_affinity, AffinityModel, LogitBlock, ModelMetadata, SvmBlock, WarpMode,
    FEATURE_VERSION, MODEL_VERSION,
};
pub use pairs::{assemble_training_pairs, LabeledPair, TrainingPairs, CONTAINMENT};
pub use shape::{region_warp, shape_affinity, shape_feature, union_region, ShapeOptions, UnionRegion};
pub use svm::{train_linear_svm, LinearSvm, SvmParams};
pub use train::{train_affinity, TrainingConfig, TrainingImage, TrainingReport};

use crate::segmentation::{Disc, DiscGraph};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairAffinity {
    pub shape: f64,
    pub appearance: f64,
    pub combined: f64,
}

/// Shape, appearance and combined affinity of two discs. The appearance
/// feature is taken with the lower id first.
pub fn pair_affinity(a: &Disc, b: &Disc, model: &AffinityModel, opts: &ShapeOptions) -> PairAffinity {
    let (first, second) = if a.id <= b.id { (a, b) } else { (b, a) };
    let shape = shape_affinity(&[first, second], model, opts);
    let appearance = model.appearance_probability(&appearance_feature(first, second).expanded);
    PairAffinity {
        shape,
        appearance,
        combined: model.combine(shape, appearance),
    }
}

/// Computes every edge affinity of `graph` and stores the combined value.
pub fn weight_graph(graph: &mut DiscGraph, model: &AffinityModel, opts: &ShapeOptions) -> Vec<PairAffinity> {
    let per_edge: Vec<PairAffinity> = graph
        .edges
        .iter()
        .map(|e| pair_affinity(&graph.discs[e.a], &graph.discs[e.b], model, opts))
        .collect();
    let combined: Vec<f64> = per_edge.iter().map(|p| p.combined).collect();
    graph.set_affinities(&combined);
    per_edge
}
