use std::collections::BTreeMap;

use super::disc::Disc;
use crate::{Error, Result};

/// Cross-scale pairs where the overlap covers at least this fraction of the
/// smaller disc are treated as duplicates and not linked.
pub const DUPLICATE_CONTAINMENT: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphEdge {
    /// Positions into [`DiscGraph::discs`], `a < b`.
    pub a: usize,
    pub b: usize,
    pub affinity: f64,
}

impl GraphEdge {
    pub fn other(&self, v: usize) -> usize {
        if v == self.a {
            self.b
        } else {
            self.a
        }
    }
}

/// Undirected adjacency graph over discs, weighted by pairwise affinities.
#[derive(Debug, Clone)]
pub struct DiscGraph {
    pub width: usize,
    pub height: usize,
    pub discs: Vec<Disc>,
    pub edges: Vec<GraphEdge>,
    /// Incident edge positions for every disc.
    pub adjacency: Vec<Vec<usize>>,
}

impl DiscGraph {
    /// Builds a graph from explicit edges. Duplicate pairs and self loops are
    /// rejected.
    pub fn from_edges(
        width: usize,
        height: usize,
        discs: Vec<Disc>,
        edges: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        let n = discs.len();
        let mut seen = BTreeMap::new();
        for (a, b, w) in edges {
            if a == b || a >= n || b >= n {
                return Err(Error::InvalidInput(format!("invalid edge ({a}, {b})")));
            }
            if !(0.0..=1.0).contains(&w) {
                return Err(Error::InvalidInput(format!("affinity {w} outside [0, 1]")));
            }
            let key = (a.min(b), a.max(b));
            if seen.insert(key, w).is_some() {
                return Err(Error::InvalidInput(format!("duplicate edge {key:?}")));
            }
        }
        let edges: Vec<GraphEdge> = seen
            .into_iter()
            .map(|((a, b), affinity)| GraphEdge { a, b, affinity })
            .collect();
        let mut adjacency = vec![Vec::new(); n];
        for (e, edge) in edges.iter().enumerate() {
            adjacency[edge.a].push(e);
            adjacency[edge.b].push(e);
        }
        Ok(DiscGraph {
            width,
            height,
            discs,
            edges,
            adjacency,
        })
    }

    pub fn edge_between(&self, a: usize, b: usize) -> Option<usize> {
        self.adjacency[a]
            .iter()
            .copied()
            .find(|&e| self.edges[e].other(a) == b)
    }

    pub fn affinity(&self, a: usize, b: usize) -> Option<f64> {
        self.edge_between(a, b).map(|e| self.edges[e].affinity)
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.adjacency[v].iter().map(move |&e| self.edges[e].other(v))
    }

    pub fn set_affinities(&mut self, affinities: &[f64]) {
        assert_eq!(affinities.len(), self.edges.len());
        for (e, &a) in self.edges.iter_mut().zip(affinities) {
            e.affinity = a.clamp(0.0, 1.0);
        }
    }

    /// Mask (row-major, `width * height`) covering the union of the given discs.
    pub fn union_mask(&self, discs: &[usize]) -> Vec<bool> {
        let mut m = vec![false; self.width * self.height];
        for &d in discs {
            for &(x, y) in &self.discs[d].pixels {
                m[y as usize * self.width + x as usize] = true;
            }
        }
        m
    }
}

/// Links discs that touch at the same scale, or overlap across scales without
/// one being a near-duplicate of the other. Affinities start at zero.
pub fn build_graph(discs: Vec<Disc>) -> DiscGraph {
    let width = discs
        .iter()
        .flat_map(|d| d.pixels.iter().map(|p| p.0 as usize + 1))
        .max()
        .unwrap_or(0);
    let height = discs
        .iter()
        .flat_map(|d| d.pixels.iter().map(|p| p.1 as usize + 1))
        .max()
        .unwrap_or(0);
    build_graph_sized(width, height, discs)
}

pub fn build_graph_sized(width: usize, height: usize, discs: Vec<Disc>) -> DiscGraph {
    let mut levels: Vec<usize> = discs.iter().map(|d| d.scale_level).collect();
    levels.sort_unstable();
    levels.dedup();
    let level_pos = |l: usize| levels.binary_search(&l).unwrap();

    // per-scale owner planes
    let mut owner = vec![vec![usize::MAX; width * height]; levels.len()];
    for (i, d) in discs.iter().enumerate() {
        let plane = &mut owner[level_pos(d.scale_level)];
        for &(x, y) in &d.pixels {
            plane[y as usize * width + x as usize] = i;
        }
    }

    let mut pairs = std::collections::BTreeSet::new();
    for plane in &owner {
        for y in 0..height {
            for x in 0..width {
                let a = plane[y * width + x];
                if a == usize::MAX {
                    continue;
                }
                let mut link = |b: usize| {
                    if b != usize::MAX && b != a {
                        pairs.insert((a.min(b), a.max(b)));
                    }
                };
                if x + 1 < width {
                    link(plane[y * width + x + 1]);
                }
                if y + 1 < height {
                    link(plane[(y + 1) * width + x]);
                }
            }
        }
    }

    for s in 0..owner.len() {
        for t in s + 1..owner.len() {
            let mut overlap: BTreeMap<(usize, usize), usize> = BTreeMap::new();
            for p in 0..width * height {
                let (a, b) = (owner[s][p], owner[t][p]);
                if a != usize::MAX && b != usize::MAX {
                    *overlap.entry((a.min(b), a.max(b))).or_default() += 1;
                }
            }
            for ((a, b), count) in overlap {
                let smaller = discs[a].area().min(discs[b].area()) as f64;
                if (count as f64) < DUPLICATE_CONTAINMENT * smaller {
                    pairs.insert((a, b));
                }
            }
        }
    }

    DiscGraph::from_edges(width, height, discs, pairs.into_iter().map(|(a, b)| (a, b, 0.0)))
        .expect("generated edges are valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::segmentation::disc::disc_from_pixels;
    use crate::segmentation::raster::Raster;

    fn rect(x0: u32, y0: u32, x1: u32, y1: u32) -> Vec<(u32, u32)> {
        (y0..y1).flat_map(|y| (x0..x1).map(move |x| (x, y))).collect()
    }

    fn raster(w: usize, h: usize) -> Raster {
        Raster::from_rgb(w, h, vec![[0.5; 3]; w * h]).unwrap()
    }

    #[test]
    fn abutting_rectangles_share_one_edge() {
        let r = raster(20, 10);
        let a = disc_from_pixels(&r, 0, 0, rect(0, 0, 10, 10)).unwrap();
        let b = disc_from_pixels(&r, 1, 0, rect(10, 0, 20, 10)).unwrap();
        let g = build_graph(vec![a, b]);
        assert_eq!(g.edges.len(), 1);
        assert_eq!((g.edges[0].a, g.edges[0].b), (0, 1));
        assert_eq!(g.edges[0].affinity, 0.0);
    }

    #[test]
    fn contained_duplicate_is_not_linked() {
        let r = raster(20, 20);
        let coarse = disc_from_pixels(&r, 0, 0, rect(0, 0, 20, 20)).unwrap();
        let fine = disc_from_pixels(&r, 1, 1, rect(5, 5, 10, 10)).unwrap();
        let g = build_graph(vec![coarse, fine]);
        assert!(g.edges.is_empty());
    }

    #[test]
    fn coarse_disc_overlapping_two_fine_discs() {
        // coarse covers x in [0, 13); fine discs are [10, 20) and [20, 30)
        // shifted so each is overlapped by 30%.
        let r = raster(40, 10);
        let coarse = disc_from_pixels(&r, 0, 0, rect(7, 0, 23, 10)).unwrap();
        let rest = disc_from_pixels(&r, 1, 0, {
            let mut p = rect(0, 0, 7, 10);
            p.extend(rect(23, 0, 40, 10));
            p
        });
        // `rest` is disconnected, which is fine for this construction
        let f1 = disc_from_pixels(&r, 2, 1, rect(0, 0, 10, 10)).unwrap();
        let f2 = disc_from_pixels(&r, 3, 1, rect(10, 0, 20, 10)).unwrap();
        let f3 = disc_from_pixels(&r, 4, 1, rect(20, 0, 30, 10)).unwrap();
        let f4 = disc_from_pixels(&r, 5, 1, rect(30, 0, 40, 10)).unwrap();
        let g = build_graph(vec![coarse, rest.unwrap(), f1, f2, f3, f4]);
        // brute force cross-scale overlaps of disc 0
        let cross: Vec<usize> = g
            .neighbors(0)
            .filter(|&n| g.discs[n].scale_level == 1)
            .collect();
        // f1 overlaps 3/10, f2 is fully contained, f3 overlaps 3/10
        assert_eq!(cross, vec![2, 4]);
    }

    #[test]
    fn from_edges_validates() {
        let r = raster(4, 4);
        let d = |i| disc_from_pixels(&r, i, 0, vec![(i as u32, 0)]).unwrap();
        assert!(DiscGraph::from_edges(4, 4, vec![d(0), d(1)], [(0, 0, 0.5)]).is_err());
        assert!(DiscGraph::from_edges(4, 4, vec![d(0), d(1)], [(0, 1, 1.5)]).is_err());
        assert!(DiscGraph::from_edges(4, 4, vec![d(0), d(1)], [(0, 1, 0.5), (1, 0, 0.5)]).is_err());
        let g = DiscGraph::from_edges(4, 4, vec![d(0), d(1)], [(1, 0, 0.5)]).unwrap();
        assert_eq!(g.affinity(0, 1), Some(0.5));
        assert_eq!(g.affinity(1, 0), Some(0.5));
    }
}
