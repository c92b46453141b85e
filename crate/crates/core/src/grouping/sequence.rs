//! Disc sequences: cost, best-first search and iterative extraction.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use serde::Serialize;

use crate::segmentation::DiscGraph;
use crate::{Error, Result};

/// Graphs up to this many discs are searched without label caps.
pub const EXACT_SEARCH_NODES: usize = 16;

/// Affinity of three consecutive discs `(a, b, c)` of a sequence.
pub trait TripleAffinity {
    fn triple(&mut self, graph: &DiscGraph, a: usize, b: usize, c: usize) -> f64;
}

impl<F: FnMut(usize, usize, usize) -> f64> TripleAffinity for F {
    fn triple(&mut self, _graph: &DiscGraph, a: usize, b: usize, c: usize) -> f64 {
        self(a, b, c)
    }
}

/// Caches another provider; `(a, b, c)` and `(c, b, a)` share an entry.
pub struct MemoTriples<T> {
    inner: T,
    cache: HashMap<(usize, usize, usize), f64>,
}

impl<T: TripleAffinity> MemoTriples<T> {
    pub fn new(inner: T) -> Self {
        MemoTriples {
            inner,
            cache: HashMap::new(),
        }
    }

    pub fn evaluations(&self) -> usize {
        self.cache.len()
    }
}

impl<T: TripleAffinity> TripleAffinity for MemoTriples<T> {
    fn triple(&mut self, graph: &DiscGraph, a: usize, b: usize, c: usize) -> f64 {
        let key = (a.min(c), b, a.max(c));
        if let Some(&v) = self.cache.get(&key) {
            return v;
        }
        let v = self.inner.triple(graph, key.0, key.1, key.2);
        self.cache.insert(key, v);
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SequenceParams {
    /// Reward per edge.
    pub lambda: f64,
    /// Weight of the triple terms; 0 disables smoothing.
    pub mu: f64,
    /// Labels kept per directed edge on graphs above [`EXACT_SEARCH_NODES`].
    pub max_labels_per_state: usize,
    /// Queue pops before the search returns its incumbent.
    pub max_expansions: usize,
}

impl Default for SequenceParams {
    fn default() -> Self {
        SequenceParams {
            lambda: 0.3,
            mu: 0.5,
            max_labels_per_state: 4,
            max_expansions: 400_000,
        }
    }
}

impl SequenceParams {
    pub fn validate(&self) -> Result<()> {
        if !self.lambda.is_finite() || !self.mu.is_finite() || self.mu < 0.0 {
            return Err(Error::Parameter(format!(
                "invalid sequence weights lambda={} mu={}",
                self.lambda, self.mu
            )));
        }
        if self.max_labels_per_state == 0 {
            return Err(Error::Parameter("max_labels_per_state must be >= 1".into()));
        }
        Ok(())
    }
}

/// A detected part: a simple path of adjacent discs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartDetection {
    /// Positions into the graph's disc list.
    pub disc_ids: Vec<usize>,
    pub cost: f64,
    #[serde(skip)]
    pub mask: Vec<bool>,
    /// Disc centroids in sequence order.
    pub axis: Vec<(f64, f64)>,
}

impl PartDetection {
    pub fn from_discs(graph: &DiscGraph, disc_ids: Vec<usize>, cost: f64) -> Self {
        let mask = graph.union_mask(&disc_ids);
        let axis = disc_ids.iter().map(|&d| graph.discs[d].centroid).collect();
        PartDetection {
            disc_ids,
            cost,
            mask,
            axis,
        }
    }

    pub fn area(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }
}

fn check_sequence(graph: &DiscGraph, seq: &[usize]) -> Result<()> {
    if seq.len() < 2 {
        return Err(Error::Contract(format!("sequence of {} discs has no edge", seq.len())));
    }
    let mut seen = vec![false; graph.discs.len()];
    for &d in seq {
        if d >= seen.len() {
            return Err(Error::Contract(format!("disc {d} not in graph")));
        }
        if std::mem::replace(&mut seen[d], true) {
            return Err(Error::Contract(format!("disc {d} repeats in sequence")));
        }
    }
    for w in seq.windows(2) {
        if graph.edge_between(w[0], w[1]).is_none() {
            return Err(Error::Contract(format!("discs {} and {} are not adjacent", w[0], w[1])));
        }
    }
    Ok(())
}

/// `sum(1 - A) + mu * sum(1 - A3) - lambda * n` over the `n` edges and
/// `n - 1` consecutive triples of `seq`.
pub fn sequence_cost(
    graph: &DiscGraph,
    seq: &[usize],
    params: &SequenceParams,
    triples: &mut impl TripleAffinity,
) -> Result<f64> {
    check_sequence(graph, seq)?;
    let pair: f64 = seq
        .windows(2)
        .map(|w| 1.0 - graph.affinity(w[0], w[1]).unwrap())
        .sum();
    let triple: f64 = if params.mu == 0.0 {
        0.0
    } else {
        seq.windows(3)
            .map(|w| 1.0 - triples.triple(graph, w[0], w[1], w[2]))
            .sum()
    };
    let n = (seq.len() - 1) as f64;
    Ok(pair + params.mu * triple - params.lambda * n)
}

/// Independent re-check of a detection against the graph.
pub fn validate_detection(
    graph: &DiscGraph,
    det: &PartDetection,
    params: &SequenceParams,
    triples: &mut impl TripleAffinity,
) -> Result<()> {
    let cost = sequence_cost(graph, &det.disc_ids, params, triples)?;
    if cost.to_bits() != det.cost.to_bits() {
        return Err(Error::Contract(format!("stored cost {} differs from {}", det.cost, cost)));
    }
    if det.mask != graph.union_mask(&det.disc_ids) {
        return Err(Error::Contract("mask is not the union of the sequence discs".into()));
    }
    let axis: Vec<(f64, f64)> = det.disc_ids.iter().map(|&d| graph.discs[d].centroid).collect();
    if det.axis != axis {
        return Err(Error::Contract("axis does not follow the disc centroids".into()));
    }
    Ok(())
}

struct Label {
    cost: f64,
    prev: usize,
    last: usize,
    visited: Vec<u64>,
    parent: Option<usize>,
    dead: bool,
}

fn subset(a: &[u64], b: &[u64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x & !y == 0)
}

#[derive(PartialEq)]
struct Entry {
    cost: f64,
    state: usize,
    len: usize,
    label: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    // reversed so the max-heap pops the cheapest entry first
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .total_cmp(&self.cost)
            .then(other.state.cmp(&self.state))
            .then(other.len.cmp(&self.len))
            .then(other.label.cmp(&self.label))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

struct Search<'g> {
    graph: &'g DiscGraph,
    labels: Vec<Label>,
    per_state: Vec<Vec<usize>>,
    heap: BinaryHeap<Entry>,
    cap: usize,
    best: Option<(f64, usize, usize, usize)>,
}

impl Search<'_> {
    fn state(&self, e: usize, from: usize) -> usize {
        2 * e + usize::from(self.graph.edges[e].a != from)
    }

    fn offer(&mut self, label: Label, state: usize, len: usize) {
        let slot = &self.per_state[state];
        if slot.iter().any(|&k| {
            let o = &self.labels[k];
            o.cost <= label.cost && subset(&o.visited, &label.visited)
        }) {
            return;
        }
        let id = self.labels.len();
        let mut keep = Vec::with_capacity(slot.len() + 1);
        for &k in slot {
            let o = &self.labels[k];
            if label.cost <= o.cost && subset(&label.visited, &o.visited) {
                self.labels[k].dead = true;
            } else {
                keep.push(k);
            }
        }
        keep.push(id);
        let cost = label.cost;
        self.labels.push(label);
        if keep.len() > self.cap {
            let (pos, &worst) = keep
                .iter()
                .enumerate()
                .max_by(|a, b| self.labels[*a.1].cost.total_cmp(&self.labels[*b.1].cost).then(a.1.cmp(b.1)))
                .unwrap();
            self.labels[worst].dead = true;
            keep.swap_remove(pos);
            keep.sort_unstable();
        }
        self.per_state[state] = keep;
        if self.labels[id].dead {
            return;
        }
        let cand = (cost, state, len, id);
        let better = match self.best {
            None => true,
            Some(b) => cost.total_cmp(&b.0).then(state.cmp(&b.1)).then(len.cmp(&b.2)) == Ordering::Less,
        };
        if better {
            self.best = Some(cand);
        }
        self.heap.push(Entry {
            cost,
            state,
            len,
            label: id,
        });
    }

    fn path(&self, mut id: usize) -> Vec<usize> {
        let mut rev = Vec::new();
        loop {
            let l = &self.labels[id];
            rev.push(l.last);
            match l.parent {
                Some(p) => id = p,
                None => {
                    rev.push(l.prev);
                    break;
                }
            }
        }
        rev.reverse();
        rev
    }
}

fn best_sequence_among(
    graph: &DiscGraph,
    alive: &[bool],
    params: &SequenceParams,
    triples: &mut impl TripleAffinity,
) -> Option<Vec<usize>> {
    let n = graph.discs.len();
    let words = n.div_ceil(64);
    let live_nodes = alive.iter().filter(|&&a| a).count();
    let cap = if live_nodes <= EXACT_SEARCH_NODES {
        usize::MAX
    } else {
        params.max_labels_per_state
    };
    let mut s = Search {
        graph,
        labels: Vec::new(),
        per_state: vec![Vec::new(); 2 * graph.edges.len()],
        heap: BinaryHeap::new(),
        cap,
        best: None,
    };
    for (e, edge) in graph.edges.iter().enumerate() {
        if !alive[edge.a] || !alive[edge.b] {
            continue;
        }
        let cost = 1.0 - edge.affinity - params.lambda;
        for (from, to) in [(edge.a, edge.b), (edge.b, edge.a)] {
            let mut visited = vec![0u64; words];
            visited[from / 64] |= 1 << (from % 64);
            visited[to / 64] |= 1 << (to % 64);
            let state = s.state(e, from);
            s.offer(
                Label {
                    cost,
                    prev: from,
                    last: to,
                    visited,
                    parent: None,
                    dead: false,
                },
                state,
                1,
            );
        }
    }

    let mut pops = 0usize;
    while let Some(entry) = s.heap.pop() {
        if s.labels[entry.label].dead {
            continue;
        }
        pops += 1;
        if pops > params.max_expansions {
            break;
        }
        let (cost, prev, last) = {
            let l = &s.labels[entry.label];
            (l.cost, l.prev, l.last)
        };
        for &e in &graph.adjacency[last] {
            let c = graph.edges[e].other(last);
            let l = &s.labels[entry.label];
            if !alive[c] || l.visited[c / 64] & (1 << (c % 64)) != 0 {
                continue;
            }
            let mut step = 1.0 - graph.edges[e].affinity - params.lambda;
            if params.mu != 0.0 {
                step += params.mu * (1.0 - triples.triple(graph, prev, last, c));
            }
            let mut visited = s.labels[entry.label].visited.clone();
            visited[c / 64] |= 1 << (c % 64);
            let state = s.state(e, last);
            s.offer(
                Label {
                    cost: cost + step,
                    prev: last,
                    last: c,
                    visited,
                    parent: Some(entry.label),
                    dead: false,
                },
                state,
                entry.len + 1,
            );
        }
    }
    s.best.map(|(_, _, _, id)| {
        let mut p = s.path(id);
        if p[0] > p[p.len() - 1] {
            p.reverse();
        }
        p
    })
}

/// Lowest-cost simple disc sequence, or `None` for a graph without edges.
pub fn find_best_sequence(
    graph: &DiscGraph,
    params: &SequenceParams,
    triples: &mut impl TripleAffinity,
) -> Result<Option<PartDetection>> {
    params.validate()?;
    let alive = vec![true; graph.discs.len()];
    best_sequence_among(graph, &alive, params, triples)
        .map(|seq| {
            let cost = sequence_cost(graph, &seq, params, triples)?;
            Ok(PartDetection::from_discs(graph, seq, cost))
        })
        .transpose()
}

/// Repeatedly takes the best sequence and removes its discs until the cost
/// exceeds `cost_max` or `limit` detections were found.
pub fn extract_parts_with(
    graph: &DiscGraph,
    params: &SequenceParams,
    cost_max: f64,
    limit: usize,
    triples: &mut impl TripleAffinity,
) -> Result<Vec<PartDetection>> {
    params.validate()?;
    if cost_max.is_nan() {
        return Err(Error::Parameter("cost_max is NaN".into()));
    }
    let mut alive = vec![true; graph.discs.len()];
    let mut out: Vec<PartDetection> = Vec::new();
    while out.len() < limit {
        let Some(seq) = best_sequence_among(graph, &alive, params, triples) else {
            break;
        };
        let cost = sequence_cost(graph, &seq, params, triples)?;
        if cost > cost_max {
            break;
        }
        for &d in &seq {
            alive[d] = false;
        }
        out.push(PartDetection::from_discs(graph, seq, cost));
    }
    // capped searches on large graphs may find a cheaper part late
    out.sort_by(|a, b| a.cost.total_cmp(&b.cost));
    Ok(out)
}

pub fn extract_parts(
    graph: &DiscGraph,
    params: &SequenceParams,
    cost_max: f64,
    triples: &mut impl TripleAffinity,
) -> Result<Vec<PartDetection>> {
    extract_parts_with(graph, params, cost_max, usize::MAX, triples)
}
