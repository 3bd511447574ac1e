use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rustfft::num_complex::Complex64;

use super::params::{interpolate_param, DistortionParams};
use super::DistortionSpec;
use crate::error::{Error, Result};
use crate::fft::{fft2, fftshift, ifft2, ifftshift};
use crate::filter::{filter_separable, gaussian_kernel_truncated};
use crate::image::ImageGrid;

/// Row of the centred spectrum that receives the stripe spike, as a
/// fraction of the height. The column is the first one.
const STRIPE_ROW_FRACTION: f64 = 0.3;

pub fn apply(image: &ImageGrid, spec: &DistortionSpec) -> Result<ImageGrid> {
    let params = interpolate_param(spec.kind, spec.strength)?;
    match params {
        DistortionParams::BiasField { c } => bias_field(image, c),
        DistortionParams::Ghosting { intensity } => ghosting(image, intensity),
        DistortionParams::StripeArtifact { intensity } => stripe(image, intensity),
        DistortionParams::GaussianBlur { sigma } => {
            let (w, h) = image.dims();
            image.with_data(filter_separable(image.data(), w, h, &gaussian_kernel_truncated(sigma)))
        }
        DistortionParams::GaussianNoise { sigma_fraction } => {
            gaussian_noise(image, sigma_fraction * image.range(), spec.seed)
        }
        DistortionParams::ReplaceArtifact { fraction } => replace(image, fraction),
        DistortionParams::Gamma { gamma } => gamma_curve(image, gamma),
        DistortionParams::ShiftIntensity { fraction } => {
            let offset = fraction * image.range();
            image.map(|v| v + offset)
        }
        DistortionParams::Translation { fraction } => translate(image, fraction),
        DistortionParams::ElasticDeform { grid, displacement } => {
            elastic(image, grid.round() as usize, displacement, spec.seed)
        }
    }
}

/// `I * exp(c * P3)` with the cubic bias polynomial on coordinates scaled
/// to `[0, 1]`.
fn bias_field(image: &ImageGrid, c: f64) -> Result<ImageGrid> {
    let (w, h) = image.dims();
    let scale = |i: usize, n: usize| if n > 1 { i as f64 / (n - 1) as f64 } else { 0.0 };
    ImageGrid::from_fn(w, h, |r, col| {
        let x1 = scale(r, h);
        let x2 = scale(col, w);
        let p3 = 10.0 * x1 * x1 * (x1 - 1.0) * (x2 - 0.5) * x2 * (x2 - 1.0);
        image.get(r, col) * (c * p3).exp()
    })
}

fn centred_spectrum(image: &ImageGrid) -> Vec<Complex64> {
    let (w, h) = image.dims();
    fftshift(&fft2(image.data(), w, h), w, h)
}

fn real_image(image: &ImageGrid, centred: &[Complex64]) -> Result<ImageGrid> {
    let (w, h) = image.dims();
    let mut spec = ifftshift(centred, w, h);
    ifft2(&mut spec, w, h);
    image.with_data(spec.iter().map(|v| v.re).collect())
}

/// Attenuates every second row of the centred spectrum by `1 - intensity`
/// and restores the centre row, producing ghost copies along the rows.
fn ghosting(image: &ImageGrid, intensity: f64) -> Result<ImageGrid> {
    real_image(image, &ghosting_spectrum(image, intensity))
}

fn ghosting_spectrum(image: &ImageGrid, intensity: f64) -> Vec<Complex64> {
    let (w, h) = image.dims();
    let mut spec = centred_spectrum(image);
    let centre = h / 2;
    for r in (0..h).step_by(2).filter(|&r| r != centre) {
        for v in &mut spec[r * w..(r + 1) * w] {
            *v *= 1.0 - intensity;
        }
    }
    spec
}

/// Overwrites one spectrum bin and its conjugate partner with
/// `intensity * max |spectrum|`, adding a single oblique stripe pattern.
fn stripe(image: &ImageGrid, intensity: f64) -> Result<ImageGrid> {
    real_image(image, &stripe_spectrum(image, intensity))
}

fn stripe_spectrum(image: &ImageGrid, intensity: f64) -> Vec<Complex64> {
    let (w, h) = image.dims();
    let mut spec = centred_spectrum(image);
    let peak = spec.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let row = (STRIPE_ROW_FRACTION * h as f64).floor() as usize;
    let col = 0usize;
    // in centred coordinates the partner of (r, c) is (2*ctr - r, 2*ctr - c)
    let partner_row = (2 * (h / 2) + h - row) % h;
    let partner_col = (2 * (w / 2) + w - col) % w;
    let value = Complex64::new(0.0, intensity * peak);
    if (partner_row, partner_col) == (row, col) {
        spec[row * w + col] = Complex64::new(value.norm(), 0.0);
    } else {
        spec[row * w + col] = value;
        spec[partner_row * w + partner_col] = value.conj();
    }
    spec
}

fn gaussian_noise(image: &ImageGrid, sigma: f64, seed: u64) -> Result<ImageGrid> {
    let normal = Normal::new(0.0, sigma)
        .map_err(|e| Error::InvalidParameter(format!("noise sigma {sigma}: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    image.with_data(image.data().iter().map(|v| v + normal.sample(&mut rng)).collect())
}

/// Mirrors the left half into the columns `(w/2, w(1+f)/2]`.
fn replace(image: &ImageGrid, fraction: f64) -> Result<ImageGrid> {
    let (w, h) = image.dims();
    let half = w as f64 / 2.0;
    let limit = w as f64 * (1.0 + fraction) / 2.0;
    ImageGrid::from_fn(w, h, |r, c| {
        let x = c as f64;
        if x > half && x <= limit {
            image.get(r, w - c)
        } else {
            image.get(r, c)
        }
    })
}

/// Power curve on the min-max normalised image, mapped back to the
/// original range so both endpoints stay put.
fn gamma_curve(image: &ImageGrid, gamma: f64) -> Result<ImageGrid> {
    let (lo, span) = (image.min(), image.range());
    if span == 0.0 {
        return Ok(image.clone());
    }
    image.map(|v| ((v - lo) / span).powf(gamma) * span + lo)
}

/// Integer shift by `round(f * size)` along both axes, zero fill.
fn translate(image: &ImageGrid, fraction: f64) -> Result<ImageGrid> {
    let (w, h) = image.dims();
    let dr = (fraction * h as f64).round() as isize;
    let dc = (fraction * w as f64).round() as isize;
    ImageGrid::from_fn(w, h, |r, c| {
        let (sr, sc) = (r as isize + dr, c as isize + dc);
        if sr >= 0 && sc >= 0 && (sr as usize) < h && (sc as usize) < w {
            image.get(sr as usize, sc as usize)
        } else {
            0.0
        }
    })
}

/// Random smooth warp from an `n x n` control grid with fixed borders.
fn elastic(image: &ImageGrid, n: usize, displacement: f64, seed: u64) -> Result<ImageGrid> {
    let n = n.max(2);
    let (w, h) = image.dims();
    let sigma_r = displacement * h as f64 / n as f64;
    let sigma_c = displacement * w as f64 / n as f64;
    let std = Normal::new(0.0, 1.0).expect("unit normal");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut grid_r = vec![0.0; n * n];
    let mut grid_c = vec![0.0; n * n];
    for i in 1..n - 1 {
        for j in 1..n - 1 {
            grid_r[i * n + j] = sigma_r * std.sample(&mut rng);
            grid_c[i * n + j] = sigma_c * std.sample(&mut rng);
        }
    }

    // position of a pixel in control-grid units
    let to_grid = |i: usize, size: usize| {
        if size > 1 {
            i as f64 * (n - 1) as f64 / (size - 1) as f64
        } else {
            0.0
        }
    };
    ImageGrid::from_fn(w, h, |r, c| {
        let (gy, gx) = (to_grid(r, h), to_grid(c, w));
        let dy = bilinear(&grid_r, n, n, gy, gx);
        let dx = bilinear(&grid_c, n, n, gy, gx);
        bilinear(image.data(), w, h, r as f64 + dy, c as f64 + dx)
    })
}

/// Bilinear sample at fractional `(y, x)`, clamped to the grid.
fn bilinear(data: &[f64], width: usize, height: usize, y: f64, x: f64) -> f64 {
    let y = y.clamp(0.0, (height - 1) as f64);
    let x = x.clamp(0.0, (width - 1) as f64);
    let (y0, x0) = (y.floor() as usize, x.floor() as usize);
    let (y1, x1) = ((y0 + 1).min(height - 1), (x0 + 1).min(width - 1));
    let (fy, fx) = (y - y0 as f64, x - x0 as f64);
    let top = data[y0 * width + x0] * (1.0 - fx) + data[y0 * width + x1] * fx;
    let bottom = data[y1 * width + x0] * (1.0 - fx) + data[y1 * width + x1] * fx;
    top * (1.0 - fy) + bottom * fy
}
