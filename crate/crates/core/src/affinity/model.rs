use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::appearance::EXPANDED_LEN;
use super::logistic::sigmoid;
use super::svm::dot;
use crate::warp::HISTOGRAM_LEN;
use crate::{Error, Result};

pub const MODEL_VERSION: &str = "symparts-affinity/1";
pub const FEATURE_VERSION: &str = "shape10x10-app27q/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WarpMode {
    Standard,
    Deformable,
}

impl std::fmt::Display for WarpMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            WarpMode::Standard => "standard",
            WarpMode::Deformable => "deformable",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmBlock {
    pub w: Vec<f64>,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogitBlock {
    /// Coefficients over the expanded appearance feature; slot 0 multiplies
    /// the constant term and acts as the bias.
    pub w: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMetadata {
    pub feature_version: String,
    pub warp_mode: WarpMode,
    pub training_seed: u64,
    pub l1_strength: f64,
    pub svm_c: f64,
    pub n_shape_pairs: usize,
    pub n_appearance_pairs: usize,
}

/// Trained coefficients of the shape SVM, its Platt calibration, the
/// appearance logistic regressor and the combiner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffinityModel {
    pub version: String,
    pub shape_svm: SvmBlock,
    /// `[alpha, beta]` of `sigmoid(alpha * margin + beta)`.
    pub shape_platt: [f64; 2],
    pub app_logit: LogitBlock,
    /// `[w_shape, w_app, bias]`.
    pub combiner: [f64; 3],
    pub metadata: ModelMetadata,
}

impl AffinityModel {
    pub fn shape_margin(&self, histogram: &[f64]) -> f64 {
        dot(&self.shape_svm.w, histogram) + self.shape_svm.b
    }

    pub fn shape_probability(&self, margin: f64) -> f64 {
        sigmoid(self.shape_platt[0] * margin + self.shape_platt[1])
    }

    pub fn appearance_probability(&self, expanded: &[f64]) -> f64 {
        sigmoid(dot(&self.app_logit.w, expanded))
    }

    pub fn combine(&self, a_shape: f64, a_app: f64) -> f64 {
        combined_affinity(a_shape, a_app, &self.combiner)
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != MODEL_VERSION {
            return Err(Error::ModelVersion {
                found: self.version.clone(),
                expected: MODEL_VERSION.into(),
            });
        }
        if self.metadata.feature_version != FEATURE_VERSION {
            return Err(Error::ModelVersion {
                found: self.metadata.feature_version.clone(),
                expected: FEATURE_VERSION.into(),
            });
        }
        if self.shape_svm.w.len() != HISTOGRAM_LEN || self.app_logit.w.len() != EXPANDED_LEN {
            return Err(Error::InvalidInput(format!(
                "model blocks have lengths {} and {}, expected {HISTOGRAM_LEN} and {EXPANDED_LEN}",
                self.shape_svm.w.len(),
                self.app_logit.w.len()
            )));
        }
        let finite = self
            .shape_svm
            .w
            .iter()
            .chain(&self.app_logit.w)
            .chain(&self.shape_platt)
            .chain(&self.combiner)
            .chain(std::iter::once(&self.shape_svm.b))
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidInput("model has non-finite coefficients".into()));
        }
        Ok(())
    }

    /// Pretty JSON with every number written with 17 significant digits.
    pub fn to_json(&self) -> String {
        let mut buf = Vec::new();
        let mut ser = serde_json::Serializer::with_formatter(&mut buf, PreciseFormatter::default());
        self.serialize(&mut ser).expect("model serialises");
        buf.push(b'\n');
        String::from_utf8(buf).expect("utf-8 json")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: AffinityModel = serde_json::from_str(text)
            .map_err(|e| Error::InvalidInput(format!("malformed model JSON: {e}")))?;
        model.validate()?;
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(self.to_json().as_bytes())
            .map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::InvalidInput(msg) => Error::input(path, msg),
            other => other,
        })
    }
}

/// `sigmoid(c0 * a_shape + c1 * a_app + c2)`.
pub fn combined_affinity(a_shape: f64, a_app: f64, combiner: &[f64; 3]) -> f64 {
    sigmoid(combiner[0] * a_shape + combiner[1] * a_app + combiner[2])
}

#[derive(Default)]
struct PreciseFormatter {
    inner: serde_json::ser::PrettyFormatter<'static>,
}

impl serde_json::ser::Formatter for PreciseFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        write!(writer, "{value:.16e}")
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.inner.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.inner.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> std::io::Result<()> {
        self.inner.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.inner.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.inner.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.inner.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> std::io::Result<()> {
        self.inner.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.inner.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.inner.end_object_value(w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn toy_model() -> AffinityModel {
        AffinityModel {
            version: MODEL_VERSION.into(),
            shape_svm: SvmBlock {
                w: (0..HISTOGRAM_LEN).map(|i| (i as f64 * 0.1).sin() / 3.0).collect(),
                b: -0.123456789012345678,
            },
            shape_platt: [1.7, -0.2],
            app_logit: LogitBlock {
                w: (0..EXPANDED_LEN).map(|i| (i as f64 * 0.01).cos() * 1e-3).collect(),
            },
            combiner: [4.0, 2.5, -3.0],
            metadata: ModelMetadata {
                feature_version: FEATURE_VERSION.into(),
                warp_mode: WarpMode::Deformable,
                training_seed: 7,
                l1_strength: 0.5,
                svm_c: 1.0,
                n_shape_pairs: 10,
                n_appearance_pairs: 12,
            },
        }
    }

    #[test]
    fn json_round_trip_is_exact() {
        let m = toy_model();
        let text = m.to_json();
        assert!(text.contains("-1.2345678901234568e-1"));
        let back = AffinityModel::from_json(&text).unwrap();
        assert_eq!(back, m);
        let probe: Vec<f64> = (0..HISTOGRAM_LEN).map(|i| (i % 7) as f64 / 7.0).collect();
        assert_eq!(m.shape_margin(&probe), back.shape_margin(&probe));
    }

    #[test]
    fn version_mismatch_is_reported() {
        let mut m = toy_model();
        m.version = "symparts-affinity/0".into();
        let err = AffinityModel::from_json(&m.to_json()).unwrap_err();
        assert!(matches!(err, Error::ModelVersion { .. }));
    }

    #[test]
    fn combiner_cases() {
        for (s, a) in [(0.0, 0.0), (0.3, 0.9), (1.0, 1.0)] {
            assert_eq!(combined_affinity(s, a, &[0.0, 0.0, 0.0]), 0.5);
        }
        assert_eq!(combined_affinity(0.5, 0.8, &[4.0, 0.0, -2.0]), 0.5);
    }

    #[test]
    fn platt_midpoint() {
        let mut m = toy_model();
        m.shape_platt = [2.0, 0.0];
        assert_eq!(m.shape_probability(0.0), 0.5);
    }
}
