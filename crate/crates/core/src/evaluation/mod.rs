//! Scoring detections against ground-truth part masks, dataset I/O and
//! synthetic scenes with exact ground truth.

mod dataset;
mod metrics;
mod report;
mod synth;

pub use dataset::{load_dataset, load_mask, save_mask, write_scene, DatasetEntry, GroundTruthPart};
pub use metrics::{
    iou, match_detections, pr_curve, score_images, ImageDetections, PrCurve, PrPoint, HIT_IOU,
};
pub use report::{pr_csv, render_pr_plot, write_pr_csv, write_pr_plot};
pub use synth::{synth_scene, SynthPart, SynthScene, SynthSpec};
