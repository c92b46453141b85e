//! Graph-based agglomerative grouping on disc dissimilarities.

use crate::segmentation::DiscGraph;
use crate::{Error, Result};

struct Components {
    parent: Vec<usize>,
    size: Vec<usize>,
    internal: Vec<f64>,
}

impl Components {
    fn new(n: usize) -> Self {
        Components {
            parent: (0..n).collect(),
            size: vec![1; n],
            internal: vec![0.0; n],
        }
    }

    fn find(&mut self, mut v: usize) -> usize {
        while self.parent[v] != v {
            self.parent[v] = self.parent[self.parent[v]];
            v = self.parent[v];
        }
        v
    }

    fn union(&mut self, a: usize, b: usize, d: f64) {
        let (big, small) = if self.size[a] >= self.size[b] { (a, b) } else { (b, a) };
        self.parent[small] = big;
        self.size[big] += self.size[small];
        self.internal[big] = self.internal[big].max(self.internal[small]).max(d);
    }
}

/// Edge positions in merge order: ascending dissimilarity `1 - A`, ties
/// broken by the lower then higher disc id.
fn merge_order(graph: &DiscGraph) -> Vec<usize> {
    let mut order: Vec<usize> = (0..graph.edges.len()).collect();
    let key = |e: usize| {
        let edge = &graph.edges[e];
        let (ia, ib) = (graph.discs[edge.a].id, graph.discs[edge.b].id);
        (1.0 - edge.affinity, ia.min(ib), ia.max(ib))
    };
    order.sort_by(|&x, &y| {
        let (kx, ky) = (key(x), key(y));
        kx.0.total_cmp(&ky.0).then(kx.1.cmp(&ky.1)).then(kx.2.cmp(&ky.2))
    });
    order
}

/// Clusters of disc positions with the edges that merged them.
#[derive(Debug, Clone, PartialEq)]
pub struct Clustering {
    /// Every disc appears in exactly one cluster. Clusters are sorted by their
    /// smallest member, members ascending.
    pub clusters: Vec<Vec<usize>>,
    /// Merge edges (positions into the graph's edge list) for each cluster.
    pub merge_edges: Vec<Vec<usize>>,
}

/// Merges components along edges of increasing dissimilarity `d = 1 - A`
/// while `d` stays within both components' internal variation plus
/// `k_param / size`.
pub fn agglomerative_cluster(graph: &DiscGraph, k_param: f64) -> Result<Clustering> {
    if !(k_param > 0.0) {
        return Err(Error::Parameter(format!("granularity {k_param} must be > 0")));
    }
    let n = graph.discs.len();
    let mut comps = Components::new(n);
    let mut merged = Vec::new();
    for e in merge_order(graph) {
        let edge = &graph.edges[e];
        let d = 1.0 - edge.affinity;
        let (ra, rb) = (comps.find(edge.a), comps.find(edge.b));
        if ra == rb {
            continue;
        }
        let ta = comps.internal[ra] + k_param / comps.size[ra] as f64;
        let tb = comps.internal[rb] + k_param / comps.size[rb] as f64;
        if d <= ta.min(tb) {
            comps.union(ra, rb, d);
            merged.push(e);
        }
    }

    let mut slot = vec![usize::MAX; n];
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for v in 0..n {
        let r = comps.find(v);
        if slot[r] == usize::MAX {
            slot[r] = clusters.len();
            clusters.push(Vec::new());
        }
        clusters[slot[r]].push(v);
    }
    let mut merge_edges = vec![Vec::new(); clusters.len()];
    for e in merged {
        let r = comps.find(graph.edges[e].a);
        merge_edges[slot[r]].push(e);
    }
    Ok(Clustering {
        clusters,
        merge_edges,
    })
}
