//! Colour and texture dissimilarity features between two discs.

use crate::segmentation::Disc;

pub const RAW_LEN: usize = 27;
/// Bias, linear terms and every product `x_a * x_b` with `a <= b`.
pub const EXPANDED_LEN: usize = 1 + RAW_LEN + RAW_LEN * (RAW_LEN + 1) / 2;

const CHI2_EPS: f64 = 1e-9;

/// Raw 27-vector layout:
///
/// | slots  | content                                              |
/// |--------|------------------------------------------------------|
/// | 0..3   | `|mean_rgb_i - mean_rgb_j|`                          |
/// | 3..6   | `|mean_hsv_i - mean_hsv_j|`                          |
/// | 6..9   | `var_rgb` of the first disc                          |
/// | 9..12  | `var_rgb` of the second disc                         |
/// | 12..15 | `var_hsv` of the first disc                          |
/// | 15..18 | `var_hsv` of the second disc                         |
/// | 18..27 | per HSV channel marginal: L1, chi-squared, Bhattacharyya |
#[derive(Debug, Clone, PartialEq)]
pub struct AppearanceFeature {
    pub raw: [f64; RAW_LEN],
    pub expanded: Vec<f64>,
}

pub fn appearance_feature(a: &Disc, b: &Disc) -> AppearanceFeature {
    let raw = raw_appearance(a, b);
    AppearanceFeature {
        expanded: quadratic_expand(&raw),
        raw,
    }
}

pub fn raw_appearance(a: &Disc, b: &Disc) -> [f64; RAW_LEN] {
    let mut f = [0.0; RAW_LEN];
    for c in 0..3 {
        f[c] = (a.mean_rgb[c] - b.mean_rgb[c]).abs();
        f[3 + c] = (a.mean_hsv[c] - b.mean_hsv[c]).abs();
        f[6 + c] = a.var_rgb[c];
        f[9 + c] = b.var_rgb[c];
        f[12 + c] = a.var_hsv[c];
        f[15 + c] = b.var_hsv[c];
    }
    let ma = a.hsv_marginals();
    let mb = b.hsv_marginals();
    for ch in 0..3 {
        let d = histogram_distances(&ma[ch], &mb[ch]);
        f[18 + 3 * ch..21 + 3 * ch].copy_from_slice(&d);
    }
    f
}

/// `[L1, chi-squared, Bhattacharyya]` between two unit-mass histograms. The
/// Bhattacharyya term is `sqrt(1 - sum sqrt(p q))`, evaluated in the
/// equivalent Hellinger form so identical inputs give exactly zero.
pub fn histogram_distances(p: &[f64], q: &[f64]) -> [f64; 3] {
    let mut l1 = 0.0;
    let mut chi = 0.0;
    let mut hellinger = 0.0;
    for (&x, &y) in p.iter().zip(q) {
        l1 += (x - y).abs();
        chi += (x - y).powi(2) / (x + y + CHI2_EPS);
        hellinger += (x.sqrt() - y.sqrt()).powi(2);
    }
    [l1, 0.5 * chi, (0.5 * hellinger).sqrt()]
}

/// Position of `x_a * x_b` (`a <= b`, zero-based) in the expanded vector.
pub fn quadratic_index(a: usize, b: usize) -> usize {
    debug_assert!(a <= b && b < RAW_LEN);
    1 + RAW_LEN + a * RAW_LEN - (a * a - a) / 2 + (b - a)
}

pub fn quadratic_expand(raw: &[f64; RAW_LEN]) -> Vec<f64> {
    let mut out = Vec::with_capacity(EXPANDED_LEN);
    out.push(1.0);
    out.extend_from_slice(raw);
    for a in 0..RAW_LEN {
        for b in a..RAW_LEN {
            out.push(raw[a] * raw[b]);
        }
    }
    out
}
