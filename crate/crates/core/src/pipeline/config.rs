//! Pipeline configuration, presets and JSON config files.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::affinity::WarpMode;
use crate::evaluation::SynthSpec;
use crate::grouping::SequenceParams;
use crate::segmentation::DEFAULT_LADDER;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupingMode {
    Clustering,
    Sequences,
}

/// The four named ablation settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    EllipseClustering,
    EllipseSequences,
    DeformSequences,
    DeformUnsmooth,
}

impl Preset {
    pub const ALL: [Preset; 4] = [
        Preset::EllipseClustering,
        Preset::EllipseSequences,
        Preset::DeformSequences,
        Preset::DeformUnsmooth,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::EllipseClustering => "ellipse+clustering",
            Preset::EllipseSequences => "ellipse+sequences",
            Preset::DeformSequences => "deform+sequences",
            Preset::DeformUnsmooth => "deform+unsmooth",
        }
    }

    /// Applies the preset's warp mode, grouping mode and triple weight.
    pub fn apply(self, cfg: &mut PipelineConfig) {
        let (warp, grouping, mu) = match self {
            Preset::EllipseClustering => (WarpMode::Standard, GroupingMode::Clustering, cfg.mu),
            Preset::EllipseSequences => (WarpMode::Standard, GroupingMode::Sequences, 0.5),
            Preset::DeformSequences => (WarpMode::Deformable, GroupingMode::Sequences, 0.5),
            Preset::DeformUnsmooth => (WarpMode::Deformable, GroupingMode::Sequences, 0.0),
        };
        cfg.warp_mode = warp;
        cfg.grouping = grouping;
        cfg.mu = mu;
        cfg.preset = Some(self.name().to_string());
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Preset::ALL.iter().map(|p| p.name()).collect();
                Error::Parameter(format!("unknown preset {s:?}, expected one of {}", names.join(", ")))
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Name of the preset the config was resolved from, if any.
    pub preset: Option<String>,
    pub ladder: Vec<usize>,
    pub warp_mode: WarpMode,
    pub grouping: GroupingMode,
    /// Weight of the triple terms in the sequence cost.
    pub mu: f64,
    /// Per-edge length reward.
    pub lambda: f64,
    /// Parts costing more than this are not reported.
    pub cost_max: f64,
    /// Granularity of agglomerative clustering.
    pub k_param: f64,
    /// Triples whose weaker pair affinity is below this get zero triple
    /// affinity without running the shape fit.
    pub triple_floor: f64,
    pub seed: u64,
    pub model: Option<PathBuf>,
    /// Keep at most this many detections per image.
    pub top_n: Option<usize>,
    /// Worker threads; 0 uses every CPU.
    pub workers: usize,
    pub l1_strength: f64,
    pub svm_c: f64,
    /// Scene parameters for `synth`.
    pub synth: SynthSpec,
    /// Number of scenes written by `synth`.
    pub count: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            preset: None,
            ladder: DEFAULT_LADDER.to_vec(),
            warp_mode: WarpMode::Deformable,
            grouping: GroupingMode::Sequences,
            mu: 0.5,
            lambda: 0.3,
            cost_max: 0.0,
            k_param: 0.3,
            triple_floor: 0.5,
            seed: 0,
            model: None,
            top_n: None,
            workers: 0,
            l1_strength: 0.5,
            svm_c: 1.0,
            synth: SynthSpec::default(),
            count: 20,
        }
    }
}

impl PipelineConfig {
    pub fn from_preset(preset: Preset) -> Self {
        let mut cfg = PipelineConfig::default();
        preset.apply(&mut cfg);
        cfg
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: PipelineConfig =
            serde_json::from_str(&text).map_err(|e| Error::input(path, e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn sequence_params(&self) -> SequenceParams {
        SequenceParams {
            lambda: self.lambda,
            mu: self.mu,
            ..SequenceParams::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Parameter(m));
        if self.ladder.is_empty() || self.ladder.windows(2).any(|w| w[0] >= w[1]) || self.ladder[0] < 2 {
            return bad(format!("ladder {:?} must be nonempty, strictly ascending and >= 2", self.ladder));
        }
        if !(self.mu >= 0.0 && self.mu.is_finite()) {
            return bad(format!("mu {} must be finite and >= 0", self.mu));
        }
        if !self.lambda.is_finite() {
            return bad(format!("lambda {} must be finite", self.lambda));
        }
        if self.cost_max.is_nan() {
            return bad("cost_max is NaN".into());
        }
        if !(self.k_param > 0.0) {
            return bad(format!("k_param {} must be > 0", self.k_param));
        }
        if !(0.0..=1.0).contains(&self.triple_floor) {
            return bad(format!("triple_floor {} must lie in [0, 1]", self.triple_floor));
        }
        if !(self.l1_strength >= 0.0 && self.l1_strength.is_finite()) || !(self.svm_c > 0.0) {
            return bad("l1_strength must be >= 0 and svm_c > 0".into());
        }
        if let Some(p) = &self.preset {
            let preset: Preset = p.parse()?;
            let mut expect = self.clone();
            preset.apply(&mut expect);
            if preset != Preset::EllipseClustering && expect.mu != self.mu
                || expect.warp_mode != self.warp_mode
                || expect.grouping != self.grouping
            {
                return bad(format!("config contradicts preset {preset}"));
            }
        }
        self.synth.validate()
    }
}
