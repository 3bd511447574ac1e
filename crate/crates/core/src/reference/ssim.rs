//! SSIM and multi-scale SSIM with a Gaussian window and reflect padding.

use crate::error::{Error, Result};
use crate::filter::{filter_separable, gaussian_kernel};
use crate::image::ImageGrid;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SsimParams {
    /// Odd window size.
    pub window: usize,
    pub sigma: f64,
    pub k1: f64,
    pub k2: f64,
}

impl Default for SsimParams {
    fn default() -> Self {
        Self {
            window: 11,
            sigma: 1.5,
            k1: 0.01,
            k2: 0.03,
        }
    }
}

impl SsimParams {
    fn validate(&self) -> Result<()> {
        if self.window % 2 == 0 || self.window == 0 || !(self.sigma > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "SSIM window must be odd with sigma > 0, got {} / {}",
                self.window, self.sigma
            )));
        }
        Ok(())
    }

    fn kernel(&self) -> Vec<f64> {
        gaussian_kernel(self.sigma, self.window / 2)
    }
}

pub const MS_SSIM_WEIGHTS: [f64; 5] = [0.0448, 0.2856, 0.3001, 0.2363, 0.1333];

/// Smallest side for which all five MS-SSIM scales keep a full window.
pub const MS_SSIM_MIN_SIZE: usize = 11 << 4;

/// Per-pixel luminance term and contrast-structure term.
struct SsimMaps {
    luminance: Vec<f64>,
    contrast_structure: Vec<f64>,
}

fn ssim_maps(
    x: &[f64],
    y: &[f64],
    width: usize,
    height: usize,
    data_range: f64,
    params: &SsimParams,
) -> SsimMaps {
    let k = params.kernel();
    let blur = |v: &[f64]| filter_separable(v, width, height, &k);
    let mu_x = blur(x);
    let mu_y = blur(y);
    let xx: Vec<f64> = x.iter().map(|v| v * v).collect();
    let yy: Vec<f64> = y.iter().map(|v| v * v).collect();
    let xy: Vec<f64> = x.iter().zip(y).map(|(a, b)| a * b).collect();
    let e_xx = blur(&xx);
    let e_yy = blur(&yy);
    let e_xy = blur(&xy);

    let c1 = (params.k1 * data_range).powi(2);
    let c2 = (params.k2 * data_range).powi(2);
    let n = x.len();
    let mut luminance = Vec::with_capacity(n);
    let mut contrast_structure = Vec::with_capacity(n);
    for i in 0..n {
        let (mx, my) = (mu_x[i], mu_y[i]);
        let var_x = e_xx[i] - mx * mx;
        let var_y = e_yy[i] - my * my;
        let cov = e_xy[i] - mx * my;
        luminance.push((2.0 * mx * my + c1) / (mx * mx + my * my + c1));
        contrast_structure.push((2.0 * cov + c2) / (var_x + var_y + c2));
    }
    SsimMaps {
        luminance,
        contrast_structure,
    }
}

fn check_pair(image: &ImageGrid, reference: &ImageGrid, data_range: f64) -> Result<()> {
    image.ensure_same_dims(reference)?;
    if !(data_range > 0.0) || !data_range.is_finite() {
        return Err(Error::DegenerateRange);
    }
    Ok(())
}

/// Mean SSIM with the default window and constants.
pub fn ssim(image: &ImageGrid, reference: &ImageGrid, data_range: f64) -> Result<f64> {
    ssim_with(image, reference, data_range, &SsimParams::default())
}

pub fn ssim_with(
    image: &ImageGrid,
    reference: &ImageGrid,
    data_range: f64,
    params: &SsimParams,
) -> Result<f64> {
    Ok(mean(&ssim_map(image, reference, data_range, params)?))
}

/// Per-pixel SSIM values.
pub fn ssim_map(
    image: &ImageGrid,
    reference: &ImageGrid,
    data_range: f64,
    params: &SsimParams,
) -> Result<Vec<f64>> {
    check_pair(image, reference, data_range)?;
    params.validate()?;
    let (w, h) = image.dims();
    let maps = ssim_maps(image.data(), reference.data(), w, h, data_range, params);
    Ok(maps
        .luminance
        .iter()
        .zip(&maps.contrast_structure)
        .map(|(l, cs)| l * cs)
        .collect())
}

/// Five-scale SSIM. Both sides must be at least [`MS_SSIM_MIN_SIZE`].
pub fn ms_ssim(image: &ImageGrid, reference: &ImageGrid, data_range: f64) -> Result<f64> {
    check_pair(image, reference, data_range)?;
    let (mut w, mut h) = image.dims();
    if w < MS_SSIM_MIN_SIZE || h < MS_SSIM_MIN_SIZE {
        return Err(Error::TooSmall {
            required: MS_SSIM_MIN_SIZE,
            actual: (w, h),
        });
    }
    let params = SsimParams::default();
    let kernel = params.kernel();
    let mut x = image.data().to_vec();
    let mut y = reference.data().to_vec();
    let mut score = 1.0;
    for (scale, &weight) in MS_SSIM_WEIGHTS.iter().enumerate() {
        let maps = ssim_maps(&x, &y, w, h, data_range, &params);
        let term = if scale + 1 == MS_SSIM_WEIGHTS.len() {
            mean_product(&maps.luminance, &maps.contrast_structure)
        } else {
            mean(&maps.contrast_structure)
        };
        score *= term.max(0.0).powf(weight);
        if scale + 1 < MS_SSIM_WEIGHTS.len() {
            let (nx, nw, nh) = downscale(&x, w, h, &kernel);
            y = downscale(&y, w, h, &kernel).0;
            x = nx;
            (w, h) = (nw, nh);
        }
    }
    Ok(score)
}

/// Gaussian low-pass followed by 2x2 mean pooling. An odd trailing row or
/// column is dropped.
fn downscale(data: &[f64], width: usize, height: usize, kernel: &[f64]) -> (Vec<f64>, usize, usize) {
    let smooth = filter_separable(data, width, height, kernel);
    let (nw, nh) = (width / 2, height / 2);
    let mut out = Vec::with_capacity(nw * nh);
    for r in 0..nh {
        for c in 0..nw {
            let i = 2 * r * width + 2 * c;
            out.push(0.25 * (smooth[i] + smooth[i + 1] + smooth[i + width] + smooth[i + width + 1]));
        }
    }
    (out, nw, nh)
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn mean_product(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / a.len() as f64
}
