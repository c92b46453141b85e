//! Same-part / different-part labels for adjacent disc pairs, derived from
//! ground-truth part masks and a figure-ground mask.

use serde::{Deserialize, Serialize};

use crate::segmentation::DiscGraph;
use crate::{Error, Result};

/// Fraction of a disc's pixels that must fall in a region for the disc to
/// count as belonging to it.
pub const CONTAINMENT: f64 = 0.75;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledPair {
    /// Disc positions in the graph, `i < j`; always an edge of the graph.
    pub i: usize,
    pub j: usize,
    pub same: bool,
    pub image: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainingPairs {
    pub shape: Vec<LabeledPair>,
    pub appearance: Vec<LabeledPair>,
}

struct Membership {
    /// Parts holding at least [`CONTAINMENT`] of the disc.
    parts: Vec<usize>,
    inside: bool,
    outside: bool,
}

pub fn assemble_training_pairs(
    graph: &DiscGraph,
    parts: &[Vec<bool>],
    figure: &[bool],
    image: usize,
) -> Result<TrainingPairs> {
    let n_px = graph.width * graph.height;
    if figure.len() != n_px || parts.iter().any(|p| p.len() != n_px) {
        return Err(Error::InvalidInput(format!(
            "masks do not match the {}x{} raster",
            graph.width, graph.height
        )));
    }
    let members: Vec<Membership> = graph
        .discs
        .iter()
        .map(|d| {
            let area = d.area() as f64;
            let idx = |&(x, y): &(u32, u32)| y as usize * graph.width + x as usize;
            let fig = d.pixels.iter().filter(|p| figure[idx(p)]).count() as f64;
            let parts = parts
                .iter()
                .enumerate()
                .filter(|(_, m)| d.pixels.iter().filter(|p| m[idx(p)]).count() as f64 >= CONTAINMENT * area)
                .map(|(k, _)| k)
                .collect();
            Membership {
                parts,
                inside: fig >= CONTAINMENT * area,
                outside: area - fig >= CONTAINMENT * area,
            }
        })
        .collect();

    let mut out = TrainingPairs::default();
    for e in &graph.edges {
        let (a, b) = (&members[e.a], &members[e.b]);
        let shared = a.parts.iter().any(|k| b.parts.contains(k));
        let resolved = |m: &Membership| !m.parts.is_empty() || m.outside;
        let pair = |same| LabeledPair {
            i: e.a,
            j: e.b,
            same,
            image,
        };
        if shared {
            out.shape.push(pair(true));
        } else if resolved(a) && resolved(b) {
            out.shape.push(pair(false));
        }
        if a.inside && b.inside {
            out.appearance.push(pair(true));
        } else if (a.inside && b.outside) || (a.outside && b.inside) {
            out.appearance.push(pair(false));
        }
    }
    Ok(out)
}
