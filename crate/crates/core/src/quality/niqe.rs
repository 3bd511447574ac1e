//! NIQE: distance between a multivariate Gaussian fitted to pristine
//! patch features and one fitted to the patches of a test image.

use std::fs;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::nss::{halve, mscn, scale_features, Mscn, FEATURES_PER_SCALE};
use crate::error::{Error, Result};
use crate::image::{percentile_of_sorted, ImageGrid};

pub const NIQE_PATCH: usize = 96;
pub const NIQE_FEATURES: usize = 2 * FEATURES_PER_SCALE;
pub const NIQE_MIN_CORPUS: usize = 20;
pub const NIQE_SHARPNESS_PERCENTILE: f64 = 75.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NiqeFitOptions {
    pub patch_size: usize,
    /// Per image, only patches whose sharpness reaches this percentile of
    /// the image's patch sharpness are used.
    pub sharpness_percentile: f64,
}

impl Default for NiqeFitOptions {
    fn default() -> Self {
        Self {
            patch_size: NIQE_PATCH,
            sharpness_percentile: NIQE_SHARPNESS_PERCENTILE,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NiqeModel {
    pub mean: Vec<f64>,
    /// Row-major `NIQE_FEATURES x NIQE_FEATURES`.
    pub covariance: Vec<f64>,
    pub patch_size: usize,
    pub sharpness_percentile: f64,
    pub corpus_size: usize,
    pub patch_count: usize,
    /// Unix seconds at fit time.
    pub fitted_at: u64,
}

#[derive(Serialize, Deserialize)]
struct NiqeFile {
    format: String,
    dims: usize,
    patch_size: usize,
    sharpness_percentile: f64,
    corpus_size: usize,
    patch_count: usize,
    fitted_at: u64,
    /// Little-endian f64, base64.
    mean: String,
    covariance: String,
}

const FILE_FORMAT: &str = "niqe-mvg-v1";

fn encode(values: &[f64]) -> String {
    let bytes: Vec<u8> = values.iter().flat_map(|v| v.to_le_bytes()).collect();
    BASE64.encode(bytes)
}

fn decode(text: &str, expected: usize) -> Result<Vec<f64>> {
    let bytes = BASE64
        .decode(text)
        .map_err(|e| Error::Format(format!("bad base64 payload: {e}")))?;
    if bytes.len() != expected * 8 {
        return Err(Error::Format(format!(
            "expected {expected} values, found {} bytes",
            bytes.len()
        )));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect())
}

impl NiqeModel {
    pub fn to_json(&self) -> Result<String> {
        let file = NiqeFile {
            format: FILE_FORMAT.into(),
            dims: self.mean.len(),
            patch_size: self.patch_size,
            sharpness_percentile: self.sharpness_percentile,
            corpus_size: self.corpus_size,
            patch_count: self.patch_count,
            fitted_at: self.fitted_at,
            mean: encode(&self.mean),
            covariance: encode(&self.covariance),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: NiqeFile = serde_json::from_str(text)?;
        if file.format != FILE_FORMAT {
            return Err(Error::Format(format!("unknown model format '{}'", file.format)));
        }
        if file.dims != NIQE_FEATURES {
            return Err(Error::Format(format!(
                "model has {} features, expected {NIQE_FEATURES}",
                file.dims
            )));
        }
        Ok(Self {
            mean: decode(&file.mean, file.dims)?,
            covariance: decode(&file.covariance, file.dims * file.dims)?,
            patch_size: file.patch_size,
            sharpness_percentile: file.sharpness_percentile,
            corpus_size: file.corpus_size,
            patch_count: file.patch_count,
            fitted_at: file.fitted_at,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}

struct Patch {
    features: Vec<f64>,
    sharpness: f64,
}

fn crop(m: &Mscn, r0: usize, c0: usize, size: usize) -> Mscn {
    let take = |v: &[f64]| -> Vec<f64> {
        (r0..r0 + size)
            .flat_map(|r| v[r * m.width + c0..r * m.width + c0 + size].iter().copied())
            .collect()
    };
    Mscn {
        width: size,
        height: size,
        coefficients: take(&m.coefficients),
        local_std: take(&m.local_std),
    }
}

/// Features of every non-overlapping patch; patches whose statistics
/// cannot be fitted are skipped.
fn image_patches(image: &ImageGrid, patch: usize) -> Result<Vec<Patch>> {
    let (w, h) = image.dims();
    if patch < 4 || patch % 2 != 0 {
        return Err(Error::InvalidParameter(format!(
            "patch size must be even and at least 4, got {patch}"
        )));
    }
    if w < patch || h < patch {
        return Err(Error::TooSmall {
            required: patch,
            actual: (w, h),
        });
    }
    let fine = mscn(image.data(), w, h);
    let (half, hw, hh) = halve(image.data(), w, h);
    let coarse = mscn(&half, hw, hh);
    let mut out = Vec::new();
    for pr in 0..h / patch {
        for pc in 0..w / patch {
            let a = crop(&fine, pr * patch, pc * patch, patch);
            let b = crop(&coarse, pr * patch / 2, pc * patch / 2, patch / 2);
            let (Ok(fa), Ok(fb)) = (scale_features(&a), scale_features(&b)) else {
                continue;
            };
            let sharpness = a.local_std.iter().sum::<f64>() / a.local_std.len() as f64;
            let features: Vec<f64> = fa.into_iter().chain(fb).collect();
            if features.iter().all(|v| v.is_finite()) {
                out.push(Patch { features, sharpness });
            }
        }
    }
    Ok(out)
}

/// Mean vector and sample covariance (row-major). Fewer than two samples
/// give a zero covariance.
fn moments(samples: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let d = NIQE_FEATURES;
    let n = samples.len() as f64;
    let mut mean = vec![0.0; d];
    for s in samples {
        for (m, v) in mean.iter_mut().zip(s) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut cov = vec![0.0; d * d];
    if samples.len() >= 2 {
        for s in samples {
            for i in 0..d {
                let di = s[i] - mean[i];
                for j in i..d {
                    cov[i * d + j] += di * (s[j] - mean[j]);
                }
            }
        }
        for i in 0..d {
            for j in i..d {
                let v = cov[i * d + j] / (n - 1.0);
                cov[i * d + j] = v;
                cov[j * d + i] = v;
            }
        }
    }
    (mean, cov)
}

pub fn niqe_fit(corpus: &[ImageGrid]) -> Result<NiqeModel> {
    niqe_fit_with(corpus, &NiqeFitOptions::default())
}

pub fn niqe_fit_with(corpus: &[ImageGrid], options: &NiqeFitOptions) -> Result<NiqeModel> {
    if corpus.len() < NIQE_MIN_CORPUS {
        return Err(Error::InvalidParameter(format!(
            "fitting needs at least {NIQE_MIN_CORPUS} images, got {}",
            corpus.len()
        )));
    }
    let per_image: Vec<Vec<Vec<f64>>> = corpus
        .par_iter()
        .map(|img| {
            let patches = image_patches(img, options.patch_size)?;
            if patches.is_empty() {
                return Ok(Vec::new());
            }
            let mut sharpness: Vec<f64> = patches.iter().map(|p| p.sharpness).collect();
            sharpness.sort_by(f64::total_cmp);
            let cut = percentile_of_sorted(&sharpness, options.sharpness_percentile);
            Ok(patches
                .into_iter()
                .filter(|p| p.sharpness >= cut)
                .map(|p| p.features)
                .collect())
        })
        .collect::<Result<_>>()?;
    let samples: Vec<Vec<f64>> = per_image.into_iter().flatten().collect();
    if samples.len() < 2 {
        return Err(Error::degenerate("corpus yields fewer than two usable patches"));
    }
    let (mean, covariance) = moments(&samples);
    let fitted_at = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    Ok(NiqeModel {
        mean,
        covariance,
        patch_size: options.patch_size,
        sharpness_percentile: options.sharpness_percentile,
        corpus_size: corpus.len(),
        patch_count: samples.len(),
        fitted_at,
    })
}

/// NIQE score with a pseudo-inverse of the pooled covariance.
pub fn niqe_score(image: &ImageGrid, model: &NiqeModel) -> Result<f64> {
    niqe_score_with(image, model, true)
}

/// With `pseudo_inverse` off, a pooled covariance that is not positive
/// definite is an error.
pub fn niqe_score_with(image: &ImageGrid, model: &NiqeModel, pseudo_inverse: bool) -> Result<f64> {
    let patches = image_patches(image, model.patch_size)?;
    if patches.is_empty() {
        return Err(Error::degenerate("no patch of the image has fittable statistics"));
    }
    let samples: Vec<Vec<f64>> = patches.into_iter().map(|p| p.features).collect();
    let (mean, cov) = moments(&samples);
    let d = NIQE_FEATURES;
    let delta = DVector::from_iterator(d, model.mean.iter().zip(&mean).map(|(a, b)| a - b));
    let pooled = DMatrix::from_iterator(
        d,
        d,
        model.covariance.iter().zip(&cov).map(|(a, b)| 0.5 * (a + b)),
    );
    let inverse = if pseudo_inverse {
        let svd = pooled.svd(true, true);
        let largest = svd.singular_values.max();
        svd.pseudo_inverse(largest * 1e-10)
            .map_err(|e| Error::Singular(e.to_string()))?
    } else {
        pooled
            .cholesky()
            .ok_or_else(|| Error::Singular("pooled covariance is not positive definite".into()))?
            .inverse()
    };
    let quad = delta.dot(&(inverse * &delta));
    Ok(quad.max(0.0).sqrt())
}
