//! In-memory pipeline stages shared by the commands and the examples.

use rayon::prelude::*;
use serde::Serialize;

use super::config::{GroupingMode, PipelineConfig};
use crate::affinity::{
    assemble_training_pairs, shape_affinity, train_affinity, weight_graph, AffinityModel,
    ShapeOptions, TrainingConfig, TrainingImage, TrainingReport,
};
use crate::evaluation::{pr_curve, score_images, DatasetEntry, ImageDetections, PrCurve};
use crate::grouping::{
    cluster_parts, extract_parts_with, validate_detection, MemoTriples, PartDetection, TripleAffinity,
};
use crate::segmentation::{build_graph_sized, multiscale_discs_with, DiscGraph, LabelPlane, Raster, SlicParams};
use crate::{Error, Result};

/// Runs `f` on a pool of `workers` threads (0 for one per CPU). Parallel
/// iterators inside keep their input order, so results do not depend on the
/// pool size.
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Parameter(format!("worker pool: {e}")))?;
    Ok(pool.install(f))
}

pub struct ImageGraph {
    pub graph: DiscGraph,
    pub planes: Vec<LabelPlane>,
}

/// Superpixels at every scale of the ladder and their adjacency graph.
pub fn build_image_graph(raster: &Raster, ladder: &[usize]) -> Result<ImageGraph> {
    let (discs, planes) = multiscale_discs_with(raster, ladder, &SlicParams::default())?;
    Ok(ImageGraph {
        graph: build_graph_sized(raster.width, raster.height, discs),
        planes,
    })
}

/// Shape affinity of three consecutive discs, skipped (zero) when either of
/// the two pair affinities is below `floor`.
pub struct ShapeTriples<'a> {
    pub model: &'a AffinityModel,
    pub opts: ShapeOptions,
    pub floor: f64,
}

impl TripleAffinity for ShapeTriples<'_> {
    fn triple(&mut self, graph: &DiscGraph, a: usize, b: usize, c: usize) -> f64 {
        let weak = graph
            .affinity(a, b)
            .unwrap_or(0.0)
            .min(graph.affinity(b, c).unwrap_or(0.0));
        if weak < self.floor {
            return 0.0;
        }
        let d = &graph.discs;
        shape_affinity(&[&d[a], &d[b], &d[c]], self.model, &self.opts)
    }
}

fn check_model(model: &AffinityModel, cfg: &PipelineConfig) -> Result<()> {
    if model.metadata.warp_mode != cfg.warp_mode {
        return Err(Error::Parameter(format!(
            "model was trained with {} warping but the config asks for {}",
            model.metadata.warp_mode, cfg.warp_mode
        )));
    }
    Ok(())
}

pub struct ImageResult {
    pub graph: DiscGraph,
    pub planes: Vec<LabelPlane>,
    pub detections: Vec<PartDetection>,
}

/// Segments, weights and groups one image. Detections are ranked by cost
/// and truncated to `top_n`.
pub fn detect_image(raster: &Raster, model: &AffinityModel, cfg: &PipelineConfig) -> Result<ImageResult> {
    check_model(model, cfg)?;
    let ImageGraph { mut graph, planes } = build_image_graph(raster, &cfg.ladder)?;
    let opts = ShapeOptions::new(cfg.warp_mode);
    weight_graph(&mut graph, model, &opts);
    let limit = cfg.top_n.unwrap_or(usize::MAX);
    let mut detections = match cfg.grouping {
        GroupingMode::Clustering => cluster_parts(&graph, cfg.k_param, cfg.lambda, cfg.cost_max)?,
        GroupingMode::Sequences => {
            let params = cfg.sequence_params();
            let mut triples = MemoTriples::new(ShapeTriples {
                model,
                opts,
                floor: cfg.triple_floor,
            });
            let dets = extract_parts_with(&graph, &params, cfg.cost_max, limit, &mut triples)?;
            for d in &dets {
                validate_detection(&graph, d, &params, &mut triples)?;
            }
            dets
        }
    };
    detections.truncate(limit);
    check_disjoint(&graph, &detections)?;
    Ok(ImageResult {
        graph,
        planes,
        detections,
    })
}

fn check_disjoint(graph: &DiscGraph, dets: &[PartDetection]) -> Result<()> {
    let mut used = vec![false; graph.discs.len()];
    for d in dets {
        for &v in &d.disc_ids {
            if std::mem::replace(&mut used[v], true) {
                return Err(Error::Contract(format!("disc {v} appears in two detections")));
            }
        }
    }
    if dets.windows(2).any(|w| w[0].cost > w[1].cost) {
        return Err(Error::Contract("detections are not ranked by cost".into()));
    }
    Ok(())
}

/// Builds labelled pairs for every corpus image and trains the affinity
/// stack with the config's warp mode, seed and regularisation.
pub fn train_model(entries: &[DatasetEntry], cfg: &PipelineConfig) -> Result<(AffinityModel, TrainingReport)> {
    if entries.is_empty() {
        return Err(Error::InvalidInput("training corpus is empty".into()));
    }
    let images: Vec<TrainingImage> = entries
        .par_iter()
        .enumerate()
        .map(|(k, e)| {
            let graph = build_image_graph(&e.raster, &cfg.ladder)?.graph;
            let parts: Vec<Vec<bool>> = e.parts.iter().map(|p| p.mask.clone()).collect();
            let pairs = assemble_training_pairs(&graph, &parts, &e.figure, k)?;
            Ok(TrainingImage { graph, pairs })
        })
        .collect::<Result<_>>()?;
    let tc = TrainingConfig {
        l1_strength: cfg.l1_strength,
        svm_c: cfg.svm_c,
        ..TrainingConfig::new(cfg.warp_mode, cfg.seed)
    };
    train_affinity(&images, &tc)
}

#[derive(Debug, Clone, Serialize)]
pub struct ImageDetectionsOut {
    pub image: String,
    pub detections: Vec<DetectionOut>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectionOut {
    pub rank: usize,
    pub cost: f64,
    pub disc_ids: Vec<usize>,
    pub axis: Vec<[f64; 2]>,
}

pub fn detection_records(graph: &DiscGraph, dets: &[PartDetection]) -> Vec<DetectionOut> {
    dets.iter()
        .enumerate()
        .map(|(k, d)| DetectionOut {
            rank: k + 1,
            cost: d.cost,
            disc_ids: d.disc_ids.iter().map(|&p| graph.discs[p].id).collect(),
            axis: d.axis.iter().map(|&(x, y)| [x, y]).collect(),
        })
        .collect()
}

pub struct Evaluation {
    pub curve: PrCurve,
    pub per_image: Vec<(ImageDetectionsOut, Vec<PartDetection>)>,
}

/// Scores detection lists (one per entry) against the entries' parts.
pub fn score_detections(entries: &[DatasetEntry], dets: &[Vec<PartDetection>]) -> Result<PrCurve> {
    let images: Vec<ImageDetections> = entries
        .iter()
        .zip(dets)
        .map(|(e, d)| ImageDetections {
            costs: d.iter().map(|x| x.cost).collect(),
            masks: d.iter().map(|x| x.mask.as_slice()).collect(),
            ground_truth: e.parts.iter().map(|p| p.mask.as_slice()).collect(),
        })
        .collect();
    let n_gt = entries.iter().map(|e| e.parts.len()).sum();
    pr_curve(&score_images(&images)?, n_gt)
}

/// Detects parts on every entry and pools them into one PR curve.
pub fn evaluate(entries: &[DatasetEntry], model: &AffinityModel, cfg: &PipelineConfig) -> Result<Evaluation> {
    check_model(model, cfg)?;
    let results: Vec<(ImageDetectionsOut, Vec<PartDetection>)> = entries
        .par_iter()
        .map(|e| {
            let r = detect_image(&e.raster, model, cfg)?;
            let out = ImageDetectionsOut {
                image: e.name.clone(),
                detections: detection_records(&r.graph, &r.detections),
            };
            Ok((out, r.detections))
        })
        .collect::<Result<_>>()?;
    let dets: Vec<Vec<PartDetection>> = results.iter().map(|r| r.1.clone()).collect();
    let curve = score_detections(entries, &dets)?;
    Ok(Evaluation {
        curve,
        per_image: results,
    })
}
