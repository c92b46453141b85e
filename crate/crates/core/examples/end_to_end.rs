//! The whole pipeline on a small synthetic corpus: write scenes, train,
//! detect on one image and evaluate a preset.
//!
//! `cargo run --release --example end_to_end [OUT_DIR]`

use std::path::PathBuf;

use symparts::pipeline::{cmd_detect, cmd_eval, cmd_synth, cmd_train, PipelineConfig, Preset};

fn main() -> symparts::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "out/end_to_end".into()));

    let mut cfg = PipelineConfig::from_preset(Preset::DeformSequences);
    cfg.seed = 1;
    cfg.count = 6;
    cmd_synth(&cfg, &out.join("train"))?;
    cfg.seed = 2;
    cfg.count = 4;
    cmd_synth(&cfg, &out.join("test"))?;

    let model = cmd_train(&cfg, &out.join("train"), &out.join("model"))?;
    cfg.model = Some(model);
    cfg.top_n = Some(5);

    let image = out.join("test").join("images").join("scene0000.png");
    let written = cmd_detect(&cfg, &image, &out.join("detect"), false)?;
    println!("{} detection masks written", written.len());

    let curve = cmd_eval(&cfg, &out.join("test"), &out.join("eval"))?;
    println!(
        "{}: AP {:.3}, recall {:.3} over {} ground-truth parts",
        Preset::DeformSequences.name(),
        curve.average_precision,
        curve.final_recall(),
        curve.n_ground_truth
    );
    Ok(())
}
