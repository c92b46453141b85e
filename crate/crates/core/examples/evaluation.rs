//! IoU matching, the precision-recall sweep and the PR plot.
//!
//! `cargo run --example evaluation [OUT_DIR]`

use std::path::PathBuf;

use symparts::evaluation::{
    iou, pr_curve, pr_csv, score_images, synth_scene, write_pr_plot, ImageDetections, SynthSpec, HIT_IOU,
};

fn main() -> symparts::Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "out/evaluation".into()));
    std::fs::create_dir_all(&out).map_err(|e| symparts::Error::io(&out, e))?;

    let scene = synth_scene(5, &SynthSpec::default())?;
    let gts: Vec<&[bool]> = scene.parts.iter().map(|p| p.mask.as_slice()).collect();

    // fake detector: an exact part, a half part, an eroded part and a background box
    let w = scene.raster.width;
    let half: Vec<bool> = {
        let n = scene.parts[1].mask.iter().filter(|&&m| m).count();
        let mut seen = 0;
        scene.parts[1].mask.iter().map(|&m| m && { seen += 1; seen <= n / 2 }).collect()
    };
    let eroded: Vec<bool> = (0..scene.parts[2].mask.len())
        .map(|i| {
            let m = &scene.parts[2].mask;
            m[i] && i % w > 0 && m[i - 1] && m.get(i + 1) == Some(&true)
        })
        .collect();
    let background: Vec<bool> = (0..w * scene.raster.height).map(|i| i % w < 10 && i / w < 10).collect();
    let dets: Vec<&[bool]> = vec![&scene.parts[0].mask, &half, &eroded, &background];
    for (k, d) in dets.iter().enumerate() {
        let best = gts.iter().map(|g| iou(d, g)).collect::<symparts::Result<Vec<_>>>()?;
        println!("detection {k}: best IoU {:.3}", best.iter().cloned().fold(0.0, f64::max));
    }

    let images = [ImageDetections { costs: vec![-1.2, -0.9, -0.5, -0.7], masks: dets, ground_truth: gts }];
    let curve = pr_curve(&score_images(&images)?, scene.parts.len())?;
    println!("hit threshold IoU > {HIT_IOU}");
    print!("{}", pr_csv(&curve));
    println!("AP {:.4}, final recall {:.3}", curve.average_precision, curve.final_recall());
    let plot = out.join("pr.png");
    write_pr_plot(&plot, &[&curve])?;
    println!("plot written to {}", plot.display());
    Ok(())
}
