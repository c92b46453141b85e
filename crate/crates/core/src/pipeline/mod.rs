//! End-to-end orchestration: configuration, the shared image pipeline and
//! the `train`, `detect`, `eval` and `synth` commands.

mod commands;
mod config;
mod run;

pub use commands::{
    cmd_detect, cmd_eval, cmd_synth, cmd_train, render_disc_boundaries, render_overlay, scene_seed,
};
pub use config::{GroupingMode, PipelineConfig, Preset};
pub use run::{
    build_image_graph, detect_image, detection_records, evaluate, score_detections, train_model,
    with_workers, DetectionOut, Evaluation, ImageDetectionsOut, ImageGraph, ImageResult, ShapeTriples,
};
