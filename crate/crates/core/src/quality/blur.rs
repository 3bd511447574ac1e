//! Gradient-based blur measures: blur effect, blur ratio / mean blur, and
//! variance of the Laplacian.

use crate::error::{Error, Result};
use crate::filter::{filter_cols, filter_rows, reflect};
use crate::image::ImageGrid;

/// Box-filter length used to re-blur in [`blur_effect`].
pub const BLUR_EFFECT_KERNEL: usize = 11;
/// Inverse-blurriness threshold below which an edge pixel counts as blurred.
pub const INVERSE_BLUR_THRESHOLD: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Axis {
    Rows,
    Cols,
}

const AXES: [Axis; 2] = [Axis::Rows, Axis::Cols];

/// Absolute differences between each pixel and its predecessor along
/// `axis`; the first line has no predecessor and is skipped.
fn neighbour_differences(data: &[f64], width: usize, height: usize, axis: Axis) -> Vec<f64> {
    match axis {
        Axis::Cols => (0..height)
            .flat_map(|r| (1..width).map(move |c| (r, c)))
            .map(|(r, c)| (data[r * width + c] - data[r * width + c - 1]).abs())
            .collect(),
        Axis::Rows => (1..height)
            .flat_map(|r| (0..width).map(move |c| (r, c)))
            .map(|(r, c)| (data[r * width + c] - data[(r - 1) * width + c]).abs())
            .collect(),
    }
}

/// Blur annoyance in `[0, 1]`: how little of the gradient mass survives a
/// further box blur along each axis, maximised over axes. Sharp images
/// score near 0.
pub fn blur_effect(image: &ImageGrid) -> Result<f64> {
    blur_effect_with(image, BLUR_EFFECT_KERNEL)
}

pub fn blur_effect_with(image: &ImageGrid, kernel: usize) -> Result<f64> {
    if kernel == 0 || kernel % 2 == 0 {
        return Err(Error::InvalidParameter(format!(
            "re-blur kernel must be odd, got {kernel}"
        )));
    }
    let (w, h) = image.dims();
    let taps = vec![1.0 / kernel as f64; kernel];
    let mut worst = f64::NEG_INFINITY;
    for axis in AXES {
        let blurred = match axis {
            Axis::Rows => filter_cols(image.data(), w, h, &taps),
            Axis::Cols => filter_rows(image.data(), w, h, &taps),
        };
        let sharp = neighbour_differences(image.data(), w, h, axis);
        let soft = neighbour_differences(&blurred, w, h, axis);
        let total: f64 = sharp.iter().sum();
        if total == 0.0 {
            return Err(Error::degenerate(
                "blur effect is undefined for an image without gradients",
            ));
        }
        let lost: f64 = sharp.iter().zip(&soft).map(|(d, b)| (d - b).max(0.0)).sum();
        worst = worst.max((total - lost) / total);
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlurRatio {
    /// Blurred edge pixels over all edge pixels.
    pub ratio: f64,
    /// Mean inverse blurriness of the blurred pixels; 0 when there are none.
    pub mean_blur: f64,
    pub edge_pixels: usize,
    pub blurred_pixels: usize,
}

/// Blur ratio and mean blur. Intensities are scaled by `255 / data_range`
/// first.
pub fn blur_ratio(image: &ImageGrid, data_range: f64) -> Result<BlurRatio> {
    if !(data_range > 0.0) || !data_range.is_finite() {
        return Err(Error::DegenerateRange);
    }
    let (w, h) = image.dims();
    let scale = 255.0 / data_range;
    let data: Vec<f64> = image.data().iter().map(|v| v * scale).collect();
    let at = |r: isize, c: isize| data[reflect(r, h) * w + reflect(c, w)];

    // central-difference magnitudes per axis
    let mut grad = [vec![0.0; w * h], vec![0.0; w * h]];
    for r in 0..h as isize {
        for c in 0..w as isize {
            let i = r as usize * w + c as usize;
            grad[0][i] = (at(r + 1, c) - at(r - 1, c)).abs();
            grad[1][i] = (at(r, c + 1) - at(r, c - 1)).abs();
        }
    }
    let means = [
        grad[0].iter().sum::<f64>() / (w * h) as f64,
        grad[1].iter().sum::<f64>() / (w * h) as f64,
    ];

    let (mut edges, mut blurred, mut blur_sum) = (0usize, 0usize, 0.0);
    for r in 0..h as isize {
        for c in 0..w as isize {
            let i = r as usize * w + c as usize;
            let g = |a: usize, rr: isize, cc: isize| grad[a][reflect(rr, h) * w + reflect(cc, w)];
            let row_edge = grad[0][i] > means[0] && grad[0][i] >= g(0, r - 1, c) && grad[0][i] >= g(0, r + 1, c);
            let col_edge = grad[1][i] > means[1] && grad[1][i] >= g(1, r, c - 1) && grad[1][i] >= g(1, r, c + 1);
            if !(row_edge || col_edge) {
                continue;
            }
            edges += 1;
            let v = data[i];
            let ib_row = inverse_blurriness(v, 0.5 * (at(r - 1, c) + at(r + 1, c)));
            let ib_col = inverse_blurriness(v, 0.5 * (at(r, c - 1) + at(r, c + 1)));
            let ib = ib_row.max(ib_col);
            if ib < INVERSE_BLUR_THRESHOLD {
                blurred += 1;
                blur_sum += ib;
            }
        }
    }
    if edges == 0 {
        return Err(Error::degenerate("blur ratio is undefined without edge pixels"));
    }
    Ok(BlurRatio {
        ratio: blurred as f64 / edges as f64,
        mean_blur: if blurred == 0 { 0.0 } else { blur_sum / blurred as f64 },
        edge_pixels: edges,
        blurred_pixels: blurred,
    })
}

/// `|v - a| / |a|`: relative deviation from the neighbour average.
fn inverse_blurriness(v: f64, average: f64) -> f64 {
    let num = (v - average).abs();
    if num == 0.0 {
        0.0
    } else if average == 0.0 {
        f64::INFINITY
    } else {
        num / average.abs()
    }
}

/// Population variance of the 5-point Laplacian with reflect padding.
pub fn variance_of_laplacian(image: &ImageGrid) -> f64 {
    let response = laplacian(image);
    let n = response.len() as f64;
    let mean = response.iter().sum::<f64>() / n;
    response.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n
}

pub(crate) fn laplacian(image: &ImageGrid) -> Vec<f64> {
    let (w, h) = image.dims();
    let d = image.data();
    let at = |r: isize, c: isize| d[reflect(r, h) * w + reflect(c, w)];
    let mut out = Vec::with_capacity(w * h);
    for r in 0..h as isize {
        for c in 0..w as isize {
            out.push(at(r - 1, c) + at(r + 1, c) + at(r, c - 1) + at(r, c + 1) - 4.0 * at(r, c));
        }
    }
    out
}

/// Mean over pixels of the L2 norm of the forward-difference gradient;
/// the last row and column use a zero difference.
pub fn mean_total_variation(image: &ImageGrid) -> f64 {
    let (w, h) = image.dims();
    let mut total = 0.0;
    for r in 0..h {
        for c in 0..w {
            let v = image.get(r, c);
            let dr = if r + 1 < h { image.get(r + 1, c) - v } else { 0.0 };
            let dc = if c + 1 < w { image.get(r, c + 1) - v } else { 0.0 };
            total += dr.hypot(dc);
        }
    }
    total / (w * h) as f64
}
