//! Corpus layout on disk: `images/NAME.png`, `parts/NAME/P.png` (one 8-bit
//! mask per part, nonzero marks the part) and `figure/NAME.png`.

use std::fs;
use std::path::{Path, PathBuf};

use image::GrayImage;

use super::synth::SynthScene;
use crate::segmentation::{load_raster, Raster};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthPart {
    pub image: String,
    pub part: String,
    /// Row-major, aligned with the image.
    pub mask: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetEntry {
    pub name: String,
    pub raster: Raster,
    pub parts: Vec<GroundTruthPart>,
    pub figure: Vec<bool>,
}

fn sorted_entries(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .map(|e| e.map(|e| e.path()).map_err(|err| Error::io(dir, err)))
        .collect::<Result<_>>()?;
    out.sort();
    Ok(out)
}

fn is_image(p: &Path) -> bool {
    p.is_file()
        && p.extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| matches!(e.to_ascii_lowercase().as_str(), "png" | "jpg" | "jpeg"))
}

pub fn load_mask(path: &Path, width: usize, height: usize) -> Result<Vec<bool>> {
    let img = image::open(path).map_err(|e| Error::input(path, e.to_string()))?.to_luma8();
    let (w, h) = img.dimensions();
    if (w as usize, h as usize) != (width, height) {
        return Err(Error::input(
            path,
            format!("mask is {w}x{h}, image is {width}x{height}"),
        ));
    }
    Ok(img.pixels().map(|p| p.0[0] != 0).collect())
}

pub fn save_mask(path: &Path, mask: &[bool], width: usize, height: usize) -> Result<()> {
    let img = GrayImage::from_fn(width as u32, height as u32, |x, y| {
        image::Luma([if mask[y as usize * width + x as usize] { 255 } else { 0 }])
    });
    img.save(path).map_err(|e| Error::input(path, e.to_string()))
}

/// Loads and validates a corpus in file-name order. A root without images
/// gives an empty dataset.
pub fn load_dataset(root: &Path) -> Result<Vec<DatasetEntry>> {
    if !root.is_dir() {
        return Err(Error::input(root, "dataset root is not a directory"));
    }
    let images_dir = root.join("images");
    if !images_dir.is_dir() {
        log::warn!("{}: no images directory, dataset is empty", root.display());
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for path in sorted_entries(&images_dir)?.into_iter().filter(|p| is_image(p)) {
        let name = path.file_stem().unwrap().to_string_lossy().into_owned();
        let raster = load_raster(&path)?;
        let (w, h) = (raster.width, raster.height);

        let figure_path = root.join("figure").join(format!("{name}.png"));
        if !figure_path.is_file() {
            return Err(Error::input(&figure_path, "missing figure-ground mask"));
        }
        let figure = load_mask(&figure_path, w, h)?;

        let parts_dir = root.join("parts").join(&name);
        if !parts_dir.is_dir() {
            return Err(Error::input(&parts_dir, "missing part mask directory"));
        }
        let mut parts = Vec::new();
        for p in sorted_entries(&parts_dir)?.into_iter().filter(|p| is_image(p)) {
            let mask = load_mask(&p, w, h)?;
            if !mask.iter().any(|&m| m) {
                return Err(Error::input(&p, "part mask is empty"));
            }
            parts.push(GroundTruthPart {
                image: name.clone(),
                part: p.file_stem().unwrap().to_string_lossy().into_owned(),
                mask,
            });
        }
        out.push(DatasetEntry {
            name,
            raster,
            parts,
            figure,
        });
    }
    if out.is_empty() {
        log::warn!("{}: no images found", images_dir.display());
    }
    Ok(out)
}

/// Writes one scene into the corpus layout under `root`.
pub fn write_scene(root: &Path, name: &str, scene: &SynthScene) -> Result<()> {
    let parts_dir = root.join("parts").join(name);
    for dir in [root.join("images"), root.join("figure"), parts_dir.clone()] {
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    }
    let (w, h) = (scene.raster.width, scene.raster.height);
    let img_path = root.join("images").join(format!("{name}.png"));
    scene
        .raster
        .to_rgb8()
        .save(&img_path)
        .map_err(|e| Error::input(&img_path, e.to_string()))?;
    save_mask(&root.join("figure").join(format!("{name}.png")), &scene.figure, w, h)?;
    for (k, part) in scene.parts.iter().enumerate() {
        save_mask(&parts_dir.join(format!("{k:02}.png")), &part.mask, w, h)?;
    }
    Ok(())
}

impl From<(&str, &SynthScene)> for DatasetEntry {
    fn from((name, scene): (&str, &SynthScene)) -> Self {
        DatasetEntry {
            name: name.to_string(),
            raster: scene.raster.clone(),
            parts: scene
                .parts
                .iter()
                .enumerate()
                .map(|(k, p)| GroundTruthPart {
                    image: name.to_string(),
                    part: format!("{k:02}"),
                    mask: p.mask.clone(),
                })
                .collect(),
            figure: scene.figure.clone(),
        }
    }
}
