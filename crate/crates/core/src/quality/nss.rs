//! Natural-scene statistics: MSCN coefficients, generalized Gaussian fits
//! and the BRISQUE feature vector with a pluggable regressor.

use std::fs;
use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::filter::{filter_separable, gaussian_kernel};
use crate::image::ImageGrid;

/// Stabilising constant in the MSCN denominator.
pub const MSCN_C: f64 = 1.0;
/// Features per scale: GGD (shape, variance) plus four AGGD fits of four
/// values each.
pub const FEATURES_PER_SCALE: usize = 18;

const SHAPE_MIN: f64 = 0.2;
const SHAPE_STEP: f64 = 0.001;
const SHAPE_COUNT: usize = 9801;

/// Pairwise-product neighbour offsets `(drow, dcol)`: horizontal,
/// vertical, main diagonal, anti-diagonal.
const PAIR_OFFSETS: [(usize, isize); 4] = [(0, 1), (1, 0), (1, 1), (1, -1)];

/// Mean-subtracted contrast-normalised coefficients and the local
/// standard deviation map they were divided by.
#[derive(Debug, Clone)]
pub struct Mscn {
    pub width: usize,
    pub height: usize,
    pub coefficients: Vec<f64>,
    pub local_std: Vec<f64>,
}

const ROUNDING_FLOOR: f64 = 1e-10;

pub fn mscn(data: &[f64], width: usize, height: usize) -> Mscn {
    // centring keeps the moment cancellation small for large offsets
    let offset = data.iter().sum::<f64>() / data.len() as f64;
    let centred: Vec<f64> = data.iter().map(|v| v - offset).collect();
    let scale = centred.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let k = gaussian_kernel(7.0 / 6.0, 3);
    let mu = filter_separable(&centred, width, height, &k);
    let sq: Vec<f64> = centred.iter().map(|v| v * v).collect();
    let mu_sq = filter_separable(&sq, width, height, &k);
    let local_std: Vec<f64> = mu
        .iter()
        .zip(&mu_sq)
        .map(|(m, s)| (s - m * m).abs().sqrt())
        .collect();
    // flat regions leave rounding residue of arbitrary sign; treat as zero
    let floor = ROUNDING_FLOOR * scale;
    let coefficients = centred
        .iter()
        .zip(&mu)
        .zip(&local_std)
        .map(|((v, m), s)| {
            let d = v - m;
            if d.abs() <= floor {
                0.0
            } else {
                d / (s + MSCN_C)
            }
        })
        .collect();
    Mscn {
        width,
        height,
        coefficients,
        local_std,
    }
}

/// `Gamma(1/a) Gamma(3/a) / Gamma(2/a)^2` on the shape grid.
fn shape_table() -> &'static [(f64, f64)] {
    static TABLE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    TABLE.get_or_init(|| {
        (0..SHAPE_COUNT)
            .map(|i| {
                let a = SHAPE_MIN + i as f64 * SHAPE_STEP;
                let r = (ln_gamma(1.0 / a) + ln_gamma(3.0 / a) - 2.0 * ln_gamma(2.0 / a)).exp();
                (a, r)
            })
            .collect()
    })
}

fn closest_shape(target: impl Fn(f64) -> f64) -> f64 {
    let mut best = (f64::INFINITY, SHAPE_MIN);
    for &(a, r) in shape_table() {
        let err = target(r).abs();
        if err < best.0 {
            best = (err, a);
        }
    }
    best.1
}

/// Symmetric generalized Gaussian fit: `(shape, variance)`.
pub fn fit_ggd(values: &[f64]) -> Result<(f64, f64)> {
    let n = values.len() as f64;
    let var = values.iter().map(|v| v * v).sum::<f64>() / n;
    let mean_abs = values.iter().map(|v| v.abs()).sum::<f64>() / n;
    if values.is_empty() || mean_abs == 0.0 {
        return Err(Error::degenerate("cannot fit a generalized Gaussian to all-zero data"));
    }
    let rho = var / (mean_abs * mean_abs);
    Ok((closest_shape(|r| r - rho), var))
}

/// Asymmetric generalized Gaussian fit: `[shape, mean, left variance,
/// right variance]`.
pub fn fit_aggd(values: &[f64]) -> Result<[f64; 4]> {
    let (mut ls, mut ln, mut rs, mut rn) = (0.0, 0usize, 0.0, 0usize);
    for &v in values {
        if v < 0.0 {
            ls += v * v;
            ln += 1;
        } else if v > 0.0 {
            rs += v * v;
            rn += 1;
        }
    }
    let left_var = if ln > 0 { ls / ln as f64 } else { 0.0 };
    let right_var = if rn > 0 { rs / rn as f64 } else { 0.0 };
    if right_var == 0.0 {
        return Err(Error::degenerate(
            "cannot fit an asymmetric generalized Gaussian without positive samples",
        ));
    }
    let (left_std, right_std) = (left_var.sqrt(), right_var.sqrt());
    let gamma_hat = left_std / right_std;
    let n = values.len() as f64;
    let mean_abs = values.iter().map(|v| v.abs()).sum::<f64>() / n;
    let mean_sq = values.iter().map(|v| v * v).sum::<f64>() / n;
    let r_hat = mean_abs * mean_abs / mean_sq;
    let r_norm = r_hat * (gamma_hat.powi(3) + 1.0) * (gamma_hat + 1.0) / (gamma_hat.powi(2) + 1.0).powi(2);
    let shape = closest_shape(|r| 1.0 / r - r_norm);
    let g1 = ln_gamma(1.0 / shape);
    let g2 = ln_gamma(2.0 / shape);
    let g3 = ln_gamma(3.0 / shape);
    let mean = (right_std - left_std) * (g2 - g1).exp() * ((g1 - g3).exp()).sqrt();
    Ok([shape, mean, left_var, right_var])
}

/// 18 features of one scale from its MSCN coefficients.
pub(crate) fn scale_features(m: &Mscn) -> Result<Vec<f64>> {
    let (w, h) = (m.width, m.height);
    let (shape, var) = fit_ggd(&m.coefficients)?;
    let mut out = Vec::with_capacity(FEATURES_PER_SCALE);
    out.push(shape);
    out.push(var);
    for (dr, dc) in PAIR_OFFSETS {
        let mut products = Vec::with_capacity(w * h);
        for r in 0..h.saturating_sub(dr) {
            for c in 0..w {
                let nc = c as isize + dc;
                if nc < 0 || nc >= w as isize {
                    continue;
                }
                products.push(m.coefficients[r * w + c] * m.coefficients[(r + dr) * w + nc as usize]);
            }
        }
        out.extend(fit_aggd(&products)?);
    }
    Ok(out)
}

/// Feature vector extracted from one or more scales.
#[derive(Debug, Clone, PartialEq)]
pub struct NssFeatures(pub Vec<f64>);

impl NssFeatures {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Comma-separated values using the shortest round-tripping format.
    pub fn csv_row(&self) -> String {
        self.0.iter().map(|v| format!("{v:?}")).collect::<Vec<_>>().join(",")
    }
}

/// Halves both sides by 2x2 mean pooling; odd trailing lines are dropped.
pub(crate) fn halve(data: &[f64], width: usize, height: usize) -> (Vec<f64>, usize, usize) {
    let (nw, nh) = (width / 2, height / 2);
    let mut out = Vec::with_capacity(nw * nh);
    for r in 0..nh {
        for c in 0..nw {
            let i = 2 * r * width + 2 * c;
            out.push(0.25 * (data[i] + data[i + 1] + data[i + width] + data[i + width + 1]));
        }
    }
    (out, nw, nh)
}

pub(crate) fn features_of(data: &[f64], width: usize, height: usize, scales: usize) -> Result<NssFeatures> {
    let mut values = Vec::with_capacity(scales * FEATURES_PER_SCALE);
    let (mut buf, mut w, mut h) = (data.to_vec(), width, height);
    for scale in 0..scales {
        if w < 2 || h < 2 {
            return Err(Error::TooSmall {
                required: 2 << scale,
                actual: (width, height),
            });
        }
        values.extend(scale_features(&mscn(&buf, w, h))?);
        if scale + 1 < scales {
            (buf, w, h) = halve(&buf, w, h);
        }
    }
    Ok(NssFeatures(values))
}

/// The 18 single-scale BRISQUE features.
pub fn brisque_features(image: &ImageGrid) -> Result<NssFeatures> {
    features_of(image.data(), image.width(), image.height(), 1)
}

/// Features from `scales` dyadic scales (18 per scale).
pub fn brisque_features_multiscale(image: &ImageGrid, scales: usize) -> Result<NssFeatures> {
    features_of(image.data(), image.width(), image.height(), scales)
}

/// Support-vector regressor applied to BRISQUE features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvrModel {
    /// Optional per-feature rescaling applied before the kernel.
    #[serde(default)]
    pub scaling: Option<FeatureScaling>,
    pub kernel: SvrKernel,
    pub bias: f64,
}

/// Maps feature `i` from `[min[i], max[i]]` onto `[lower, upper]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureScaling {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum SvrKernel {
    Linear {
        weights: Vec<f64>,
    },
    Rbf {
        gamma: f64,
        support_vectors: Vec<Vec<f64>>,
        dual_coefficients: Vec<f64>,
    },
}

impl SvrModel {
    pub fn load(path: &Path) -> Result<Self> {
        let model: SvrModel = serde_json::from_str(&fs::read_to_string(path)?)?;
        model.validate()?;
        Ok(model)
    }

    /// Number of features the model expects.
    pub fn dims(&self) -> usize {
        match &self.kernel {
            SvrKernel::Linear { weights } => weights.len(),
            SvrKernel::Rbf { support_vectors, .. } => support_vectors.first().map_or(0, Vec::len),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dims();
        if d == 0 || d % FEATURES_PER_SCALE != 0 {
            return Err(Error::InvalidParameter(format!(
                "regressor expects {d} features, need a positive multiple of {FEATURES_PER_SCALE}"
            )));
        }
        if let SvrKernel::Rbf {
            support_vectors,
            dual_coefficients,
            ..
        } = &self.kernel
        {
            if support_vectors.len() != dual_coefficients.len() || support_vectors.iter().any(|v| v.len() != d) {
                return Err(Error::InvalidParameter("ragged support vectors".into()));
            }
        }
        if let Some(s) = &self.scaling {
            if s.min.len() != d || s.max.len() != d {
                return Err(Error::InvalidParameter("scaling length differs from feature count".into()));
            }
        }
        Ok(())
    }

    pub fn predict(&self, features: &[f64]) -> Result<f64> {
        if features.len() != self.dims() {
            return Err(Error::InvalidParameter(format!(
                "regressor expects {} features, got {}",
                self.dims(),
                features.len()
            )));
        }
        let x: Vec<f64> = match &self.scaling {
            None => features.to_vec(),
            Some(s) => features
                .iter()
                .enumerate()
                .map(|(i, &v)| {
                    let span = s.max[i] - s.min[i];
                    if span == 0.0 {
                        s.lower
                    } else {
                        s.lower + (s.upper - s.lower) * (v - s.min[i]) / span
                    }
                })
                .collect(),
        };
        let value = match &self.kernel {
            SvrKernel::Linear { weights } => weights.iter().zip(&x).map(|(w, v)| w * v).sum::<f64>(),
            SvrKernel::Rbf {
                gamma,
                support_vectors,
                dual_coefficients,
            } => support_vectors
                .iter()
                .zip(dual_coefficients)
                .map(|(sv, a)| {
                    let d2: f64 = sv.iter().zip(&x).map(|(s, v)| (s - v).powi(2)).sum();
                    a * (-gamma * d2).exp()
                })
                .sum(),
        };
        Ok(value + self.bias)
    }
}

/// BRISQUE quality score from a trained regressor; the number of scales
/// follows the regressor's feature count.
pub fn brisque_score(image: &ImageGrid, model: &SvrModel) -> Result<f64> {
    model.validate()?;
    let scales = model.dims() / FEATURES_PER_SCALE;
    let features = brisque_features_multiscale(image, scales)?;
    model.predict(features.as_slice())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn gaussian_noise_has_shape_two() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let normal = Normal::new(0.0, 1.0).unwrap();
        let samples: Vec<f64> = (0..200_000).map(|_| normal.sample(&mut rng)).collect();
        let (shape, var) = fit_ggd(&samples).unwrap();
        assert!((shape - 2.0).abs() < 0.05, "{shape}");
        assert!((var - 1.0).abs() < 0.02);

        // noise well below the stabilising constant keeps MSCN a linear,
        // hence Gaussian, function of the input
        let img = ImageGrid::from_fn(128, 128, |_, _| 0.5 + 0.1 * normal.sample(&mut rng)).unwrap();
        let f = brisque_features(&img).unwrap();
        assert_eq!(f.len(), FEATURES_PER_SCALE);
        assert!((f.as_slice()[0] - 2.0).abs() < 0.2, "{}", f.as_slice()[0]);
    }

    #[test]
    fn strong_white_noise_is_platykurtic() {
        // each pixel enters its own local deviation, which bounds MSCN
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let normal = Normal::new(0.0, 20.0).unwrap();
        let img = ImageGrid::from_fn(128, 128, |_, _| normal.sample(&mut rng)).unwrap();
        assert!(brisque_features(&img).unwrap().as_slice()[0] > 2.5);
    }

    #[test]
    fn laplace_samples_have_shape_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let exp = rand_distr::Exp::new(1.0).unwrap();
        let samples: Vec<f64> = (0..200_000)
            .map(|i| if i % 2 == 0 { exp.sample(&mut rng) } else { -exp.sample(&mut rng) })
            .collect();
        let [shape, mean, lv, rv] = fit_aggd(&samples).unwrap();
        assert!((shape - 1.0).abs() < 0.05, "{shape}");
        assert!(mean.abs() < 0.02);
        assert!((lv - 2.0).abs() < 0.05 && (rv - 2.0).abs() < 0.05);
    }

    #[test]
    fn shift_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let normal = Normal::new(0.0, 30.0).unwrap();
        let img = ImageGrid::from_fn(64, 64, |r, c| (r * c) as f64 * 0.1 + normal.sample(&mut rng)).unwrap();
        let a = brisque_features(&img).unwrap();
        let b = brisque_features(&img.map(|v| v + 500.0).unwrap()).unwrap();
        for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
            assert!((x - y).abs() < 1e-6, "{x} vs {y}");
        }
    }

    #[test]
    fn constant_image_is_degenerate() {
        let img = ImageGrid::filled(32, 32, 4.0).unwrap();
        assert!(brisque_features(&img).unwrap_err().is_numeric());
    }

    #[test]
    fn linear_regressor_round_trip() {
        let model = SvrModel {
            scaling: None,
            kernel: SvrKernel::Linear {
                weights: vec![1.0; FEATURES_PER_SCALE],
            },
            bias: 0.5,
        };
        let json = serde_json::to_string(&model).unwrap();
        assert!(json.contains("\"type\":\"linear\""));
        let back: SvrModel = serde_json::from_str(&json).unwrap();
        assert_eq!(back, model);
        let x = vec![2.0; FEATURES_PER_SCALE];
        assert_eq!(back.predict(&x).unwrap(), 36.5);
        assert!(back.predict(&x[..3]).is_err());
    }

    #[test]
    fn rbf_regressor_at_support_vector() {
        let sv = vec![0.5; FEATURES_PER_SCALE];
        let model = SvrModel {
            scaling: None,
            kernel: SvrKernel::Rbf {
                gamma: 0.1,
                support_vectors: vec![sv.clone()],
                dual_coefficients: vec![2.0],
            },
            bias: -1.0,
        };
        assert!((model.predict(&sv).unwrap() - 1.0).abs() < 1e-15);
    }
}
