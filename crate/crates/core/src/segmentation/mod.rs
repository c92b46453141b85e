//! Images, superpixels, discs and the disc adjacency graph.

pub mod color;
mod disc;
mod graph;
mod raster;
mod slic;

pub use disc::{
    disc_from_pixels, discs_from_labels, hsv_bin_index, multiscale_discs, multiscale_discs_with,
    region_boundary, Disc, Edgel, HSV_HISTOGRAM_LEN, HUE_BINS, SAT_BINS, VAL_BINS,
};
pub use graph::{build_graph, build_graph_sized, DiscGraph, GraphEdge, DUPLICATE_CONTAINMENT};
pub use raster::{edge_strength_map, load_raster, Raster, MAX_STENCIL_MAGNITUDE};
pub use slic::{oversegment, oversegment_with, LabelPlane, SlicParams};

/// Default superpixel-count ladder.
pub const DEFAULT_LADDER: [usize; 4] = [25, 50, 100, 200];
