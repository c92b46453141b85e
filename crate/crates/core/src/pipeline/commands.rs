//! The four commands: each reads its inputs, runs the pipeline and writes
//! its artifacts under an output directory, starting with `run.json`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use image::{Rgb, RgbImage};
use serde::Serialize;

use super::config::PipelineConfig;
use super::run::{detect_image, detection_records, evaluate, train_model, with_workers, ImageResult};
use crate::affinity::{region_warp, union_region, AffinityModel, ShapeOptions, TrainingReport};
use crate::evaluation::{load_dataset, save_mask, synth_scene, write_pr_csv, write_pr_plot, write_scene, PrCurve};
use crate::segmentation::{load_raster, Raster};
use crate::warp::unwarp_point;
use crate::{Error, Result};

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Contract(e.to_string()))?;
    text.push('\n');
    write_text(path, &text)
}

fn start_run(cfg: &PipelineConfig, out: &Path) -> Result<()> {
    cfg.validate()?;
    create_dir(out)?;
    write_text(&out.join("run.json"), &(cfg.to_json() + "\n"))
}

fn load_model(cfg: &PipelineConfig) -> Result<AffinityModel> {
    let path = cfg
        .model
        .as_deref()
        .ok_or_else(|| Error::Parameter("no model given (use --model)".into()))?;
    AffinityModel::load(path)
}

#[derive(Serialize)]
struct TrainingSummary<'a> {
    images: usize,
    report: &'a TrainingReport,
}

/// Trains on the corpus at `corpus` and writes `model.json` and
/// `training.json` to `out`. Returns the model path.
pub fn cmd_train(cfg: &PipelineConfig, corpus: &Path, out: &Path) -> Result<PathBuf> {
    start_run(cfg, out)?;
    let entries = load_dataset(corpus)?;
    if entries.is_empty() {
        return Err(Error::input(corpus, "training corpus has no images"));
    }
    let (model, report) = with_workers(cfg.workers, || train_model(&entries, cfg))??;
    log::info!(
        "shape pairs {}+/{}-, appearance pairs {}+/{}-, svm accuracy {:.3}, appearance loss {:.4}, combiner loss {:.4}",
        report.shape_positives,
        report.shape_negatives,
        report.appearance_positives,
        report.appearance_negatives,
        report.svm_train_accuracy,
        report.appearance_log_loss,
        report.combiner_log_loss
    );
    let path = out.join("model.json");
    model.save(&path)?;
    write_json(
        &out.join("training.json"),
        &TrainingSummary {
            images: entries.len(),
            report: &report,
        },
    )?;
    Ok(path)
}

const PALETTE: [[u8; 3]; 8] = [
    [230, 25, 75],
    [60, 180, 75],
    [255, 225, 25],
    [0, 130, 200],
    [245, 130, 48],
    [145, 30, 180],
    [70, 240, 240],
    [240, 50, 230],
];

fn draw_line(img: &mut RgbImage, a: (f64, f64), b: (f64, f64), c: Rgb<u8>) {
    let steps = ((b.0 - a.0).abs().max((b.1 - a.1).abs()).ceil() as usize).max(1);
    for k in 0..=steps {
        let t = k as f64 / steps as f64;
        let (x, y) = (a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1));
        let (x, y) = (x.round(), y.round());
        if x >= 0.0 && y >= 0.0 && (x as u32) < img.width() && (y as u32) < img.height() {
            img.put_pixel(x as u32, y as u32, c);
        }
    }
}

/// Detection masks tinted over the image with their medial axes drawn on top.
pub fn render_overlay(raster: &Raster, result: &ImageResult) -> RgbImage {
    let mut img = raster.to_rgb8();
    for (k, d) in result.detections.iter().enumerate().rev() {
        let c = PALETTE[k % PALETTE.len()];
        for (i, &m) in d.mask.iter().enumerate() {
            if m {
                let (x, y) = ((i % raster.width) as u32, (i / raster.width) as u32);
                let p = img.get_pixel_mut(x, y);
                for ch in 0..3 {
                    p.0[ch] = ((u16::from(p.0[ch]) + u16::from(c[ch])) / 2) as u8;
                }
            }
        }
    }
    for (k, d) in result.detections.iter().enumerate() {
        let c = Rgb(PALETTE[k % PALETTE.len()].map(|v| v / 2));
        for w in d.axis.windows(2) {
            draw_line(&mut img, w[0], w[1], c);
        }
    }
    img
}

/// Superpixel boundaries of every scale, finer scales drawn darker.
pub fn render_disc_boundaries(raster: &Raster, result: &ImageResult) -> RgbImage {
    let mut img = raster.to_rgb8();
    let n = result.planes.len().max(1);
    for (level, plane) in result.planes.iter().enumerate() {
        let shade = (255 * level / n) as u8;
        for y in 0..plane.height {
            for x in 0..plane.width {
                let l = plane.labels[y * plane.width + x];
                let right = x + 1 < plane.width && plane.labels[y * plane.width + x + 1] != l;
                let down = y + 1 < plane.height && plane.labels[(y + 1) * plane.width + x] != l;
                if right || down {
                    img.put_pixel(x as u32, y as u32, Rgb([shade, shade, 255 - shade]));
                }
            }
        }
    }
    img
}

fn save_image(img: &RgbImage, path: &Path) -> Result<()> {
    img.save(path).map_err(|e| Error::input(path, e.to_string()))
}

/// Detects parts in one image. Writes `detections.json`, one mask per
/// detection, `overlay.png` and, with `debug`, label planes, disc boundaries
/// and the warped edgels of every detection.
pub fn cmd_detect(cfg: &PipelineConfig, image: &Path, out: &Path, debug: bool) -> Result<Vec<PathBuf>> {
    start_run(cfg, out)?;
    let model = load_model(cfg)?;
    let raster = load_raster(image)?;
    let result = with_workers(cfg.workers, || detect_image(&raster, &model, cfg))??;
    write_json(&out.join("detections.json"), &detection_records(&result.graph, &result.detections))?;
    let mut masks = Vec::new();
    for (k, d) in result.detections.iter().enumerate() {
        let p = out.join(format!("mask_{:02}.png", k + 1));
        save_mask(&p, &d.mask, raster.width, raster.height)?;
        masks.push(p);
    }
    save_image(&render_overlay(&raster, &result), &out.join("overlay.png"))?;
    if debug {
        for (level, plane) in result.planes.iter().enumerate() {
            plane.save_png(&out.join(format!("labels_{level}.png")))?;
        }
        save_image(&render_disc_boundaries(&raster, &result), &out.join("discs.png"))?;
        let opts = ShapeOptions::new(cfg.warp_mode);
        for (k, d) in result.detections.iter().enumerate() {
            let discs: Vec<_> = d.disc_ids.iter().map(|&v| &result.graph.discs[v]).collect();
            let region = union_region(&discs);
            let mut csv = String::from("x,y,u,v,strength\n");
            if let Some(w) = region_warp(&region, &opts) {
                for e in &region.edgels {
                    let (u, v) = unwarp_point((e.x, e.y), &w);
                    writeln!(csv, "{},{},{},{},{}", e.x, e.y, u, v, e.strength).unwrap();
                }
            }
            write_text(&out.join(format!("warp_{:02}.csv", k + 1)), &csv)?;
        }
    }
    Ok(masks)
}

#[derive(Serialize)]
struct EvalSummary<'a> {
    ap: f64,
    recall: f64,
    n_dets: usize,
    n_gts: usize,
    n_images: usize,
    settings: &'a PipelineConfig,
}

/// Evaluates on the dataset at `root`. Writes `detections.json`, `pr.csv`,
/// `pr.png` and `summary.json`.
pub fn cmd_eval(cfg: &PipelineConfig, root: &Path, out: &Path) -> Result<PrCurve> {
    start_run(cfg, out)?;
    let model = load_model(cfg)?;
    let entries = load_dataset(root)?;
    let ev = with_workers(cfg.workers, || evaluate(&entries, &model, cfg))??;
    let records: Vec<_> = ev.per_image.iter().map(|r| &r.0).collect();
    write_json(&out.join("detections.json"), &records)?;
    write_pr_csv(&out.join("pr.csv"), &ev.curve)?;
    write_pr_plot(&out.join("pr.png"), &[&ev.curve])?;
    write_json(
        &out.join("summary.json"),
        &EvalSummary {
            ap: ev.curve.average_precision,
            recall: ev.curve.final_recall(),
            n_dets: ev.curve.n_detections,
            n_gts: ev.curve.n_ground_truth,
            n_images: entries.len(),
            settings: cfg,
        },
    )?;
    Ok(ev.curve)
}

/// Seed of the `index`-th scene of a corpus.
pub fn scene_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (index as u64).wrapping_mul(0xD1B5_4A32_D192_ED03)
}

/// Writes `cfg.count` synthetic scenes in the corpus layout.
pub fn cmd_synth(cfg: &PipelineConfig, out: &Path) -> Result<()> {
    start_run(cfg, out)?;
    for k in 0..cfg.count {
        let scene = synth_scene(scene_seed(cfg.seed, k), &cfg.synth)?;
        write_scene(out, &format!("scene{k:04}"), &scene)?;
    }
    Ok(())
}
