//! Grouping discs of the weighted graph into symmetric parts, either by
//! agglomerative clustering or by searching for low-cost disc sequences.

mod cluster;
mod sequence;

pub use cluster::{agglomerative_cluster, Clustering};
pub use sequence::{
    extract_parts, extract_parts_with, find_best_sequence, sequence_cost, validate_detection,
    MemoTriples, PartDetection, SequenceParams, TripleAffinity, EXACT_SEARCH_NODES,
};

use crate::segmentation::DiscGraph;
use crate::Result;

/// Turns every multi-disc cluster into a detection. A cluster costs
/// `sum(1 - A - lambda)` over the edges that merged it; its axis follows the
/// member centroids ordered along their principal direction.
pub fn cluster_parts(graph: &DiscGraph, k_param: f64, lambda: f64, cost_max: f64) -> Result<Vec<PartDetection>> {
    let c = agglomerative_cluster(graph, k_param)?;
    let mut out = Vec::new();
    for (members, merges) in c.clusters.into_iter().zip(c.merge_edges) {
        if members.len() < 2 {
            continue;
        }
        let cost: f64 = merges
            .iter()
            .map(|&e| 1.0 - graph.edges[e].affinity - lambda)
            .sum();
        if cost > cost_max {
            continue;
        }
        let mut det = PartDetection::from_discs(graph, members, cost);
        det.axis = principal_order(&det.axis);
        out.push(det);
    }
    out.sort_by(|a, b| a.cost.total_cmp(&b.cost).then(a.disc_ids[0].cmp(&b.disc_ids[0])));
    Ok(out)
}

fn principal_order(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let n = points.len() as f64;
    let (mx, my) = points.iter().fold((0.0, 0.0), |s, p| (s.0 + p.0 / n, s.1 + p.1 / n));
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for &(x, y) in points {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    let angle = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    let (c, s) = (angle.cos(), angle.sin());
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| ((a.0 - mx) * c + (a.1 - my) * s).total_cmp(&((b.0 - mx) * c + (b.1 - my) * s)));
    sorted
}

/// Graph of `n` one-pixel discs in a row with the given weighted edges.
#[cfg(test)]
pub(crate) fn test_graph(n: usize, edges: &[(usize, usize, f64)]) -> DiscGraph {
    use crate::segmentation::{disc_from_pixels, Raster};
    let raster = Raster::from_rgb(n, 1, vec![[0.5, 0.5, 0.5]; n]).unwrap();
    let discs = (0..n)
        .map(|i| disc_from_pixels(&raster, i, 0, vec![(i as u32, 0)]).unwrap())
        .collect();
    DiscGraph::from_edges(n, 1, discs, edges.iter().copied()).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clusters_become_detections() {
        let edges = [(0, 1, 0.9), (1, 2, 0.9), (2, 3, 0.1), (3, 4, 0.95)];
        let g = test_graph(5, &edges);
        let parts = cluster_parts(&g, 0.2, 0.3, 0.0).unwrap();
        assert_eq!(parts.len(), 2);
        assert_eq!(parts[0].disc_ids, vec![0, 1, 2]);
        assert!((parts[0].cost - 2.0 * (0.1 - 0.3)).abs() < 1e-12);
        assert_eq!(parts[1].disc_ids, vec![3, 4]);
    }
}
