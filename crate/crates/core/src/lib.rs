//! Symmetric part detection in cluttered scenes.
//!
//! Compact superpixels computed at several scales are treated as deformable
//! discs. Adjacent discs are scored with a learned affinity that combines a
//! warped boundary-histogram shape cue with an appearance cue, and discs are
//! grouped into parts either by agglomerative clustering or by a best-first
//! search for low-cost linear disc sequences.
//!
//! The crate is organised by pipeline stage:
//!
//! - [`segmentation`]: rasters, edge strength, superpixels, discs and the disc graph.
//! - [`warp`]: ellipse and bent/tapered ellipse models and the warped shape histogram.
//! - [`affinity`]: appearance features, classifiers and the trained affinity model.
//! - [`grouping`]: agglomerative clustering and sequence optimisation.
//! - [`evaluation`]: IoU matching, precision-recall, synthetic scenes and dataset loading.
//! - [`pipeline`]: configuration presets and the train/detect/eval/synth commands.

pub mod affinity;
pub mod error;
pub mod evaluation;
pub mod grouping;
pub mod pipeline;
pub mod segmentation;
pub mod warp;

pub use error::{Error, Result};
