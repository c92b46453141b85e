//! Agglomerative clustering against sequence optimisation on small graphs.
//!
//! `cargo run --example grouping`

use symparts::grouping::{agglomerative_cluster, extract_parts, find_best_sequence, MemoTriples, SequenceParams};
use symparts::segmentation::{disc_from_pixels, DiscGraph, Raster};

/// One single-pixel disc per node so the graph can be built from explicit edges.
fn graph(n: usize, edges: &[(usize, usize, f64)]) -> symparts::Result<DiscGraph> {
    let raster = Raster::from_rgb(n, 1, vec![[0.5; 3]; n])?;
    let discs = (0..n)
        .map(|i| disc_from_pixels(&raster, i, 0, vec![(i as u32, 0)]))
        .collect::<symparts::Result<_>>()?;
    DiscGraph::from_edges(n, 1, discs, edges.iter().copied())
}

fn main() -> symparts::Result<()> {
    // a Y junction: clustering swallows the branch, a sequence cannot
    let y = graph(4, &[(0, 1, 0.9), (0, 2, 0.9), (0, 3, 0.9)])?;
    let clusters = agglomerative_cluster(&y, 0.3)?;
    println!("Y graph, clustering: {:?}", clusters.clusters);
    let params = SequenceParams::default();
    let flat = &mut |_: usize, _: usize, _: usize| 0.9;
    let best = find_best_sequence(&y, &params, flat)?.expect("graph has edges");
    println!("Y graph, best sequence: {:?} cost {:.3}", best.disc_ids, best.cost);

    // two chains joined by a weak link; triples favour the straight continuation
    let chains = graph(
        7,
        &[(0, 1, 0.95), (1, 2, 0.9), (2, 3, 0.92), (3, 4, 0.4), (4, 5, 0.9), (5, 6, 0.85)],
    )?;
    let mut triples = MemoTriples::new(|a: usize, _b: usize, c: usize| if a.abs_diff(c) == 2 { 0.9 } else { 0.2 });
    let parts = extract_parts(&chains, &params, 0.0, &mut triples)?;
    for (rank, p) in parts.iter().enumerate() {
        println!("part {rank}: discs {:?} cost {:.3}", p.disc_ids, p.cost);
    }
    println!("{} triple affinities evaluated", triples.evaluations());
    Ok(())
}
