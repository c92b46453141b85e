//! Training the shape, appearance and combined affinity on synthetic scenes
//! and scoring adjacent disc pairs with the result.
//!
//! `cargo run --example affinity_training [OUT_DIR]`

use std::path::PathBuf;

use symparts::affinity::{pair_affinity, ShapeOptions};
use symparts::evaluation::{synth_scene, DatasetEntry, SynthSpec};
use symparts::pipeline::{build_image_graph, scene_seed, train_model, PipelineConfig, Preset};

fn main() -> symparts::Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "out/affinity".into()));
    std::fs::create_dir_all(&out).map_err(|e| symparts::Error::io(&out, e))?;

    let spec = SynthSpec::default();
    let corpus: Vec<DatasetEntry> = (0..6)
        .map(|k| synth_scene(scene_seed(1, k), &spec).map(|s| DatasetEntry::from((format!("scene{k}").as_str(), &s))))
        .collect::<symparts::Result<_>>()?;

    let cfg = PipelineConfig::from_preset(Preset::DeformSequences);
    let (model, report) = train_model(&corpus, &cfg)?;
    println!(
        "shape pairs {}+/{}-, appearance pairs {}+/{}-",
        report.shape_positives, report.shape_negatives, report.appearance_positives, report.appearance_negatives
    );
    println!(
        "svm accuracy {:.3}, appearance log loss {:.4}, combiner log loss {:.4}",
        report.svm_train_accuracy, report.appearance_log_loss, report.combiner_log_loss
    );
    let path = out.join("model.json");
    model.save(&path)?;
    println!("model written to {}", path.display());

    // score a held-out scene: pairs inside a part vs pairs elsewhere
    let scene = synth_scene(scene_seed(99, 0), &spec)?;
    let graph = build_image_graph(&scene.raster, &cfg.ladder)?.graph;
    let opts = ShapeOptions::new(cfg.warp_mode);
    let inside = |i: usize| {
        let d = &graph.discs[i];
        let w = graph.width;
        scene.parts.iter().position(|p| {
            d.pixels.iter().filter(|&&(x, y)| p.mask[y as usize * w + x as usize]).count() * 4 >= d.area() * 3
        })
    };
    let (mut same, mut other) = (Vec::new(), Vec::new());
    for e in &graph.edges {
        let a = pair_affinity(&graph.discs[e.a], &graph.discs[e.b], &model, &opts).combined;
        match (inside(e.a), inside(e.b)) {
            (Some(p), Some(q)) if p == q => same.push(a),
            _ => other.push(a),
        }
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len().max(1) as f64;
    println!(
        "held-out scene: mean affinity {:.3} over {} same-part pairs, {:.3} over {} other pairs",
        mean(&same),
        same.len(),
        mean(&other),
        other.len()
    );
    Ok(())
}
