//! Shared test fixtures: random pairs and direct, loop-per-pixel
//! reimplementations of the library metrics.
#![allow(dead_code)]

use mrqa::image::ImageGrid;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const SIDE: usize = 16;
pub const PAIRS: usize = 100;

pub fn random_pairs() -> Vec<(ImageGrid, ImageGrid)> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    (0..PAIRS)
        .map(|k| {
            let scale = 10f64.powi(rng.random_range(-2..4));
            let a: Vec<f64> = (0..SIDE * SIDE).map(|_| rng.random::<f64>() * scale).collect();
            // half the pairs are related, half independent
            let b: Vec<f64> = if k % 2 == 0 {
                a.iter().map(|v| v + rng.random_range(-0.2..0.2) * scale).collect()
            } else {
                (0..SIDE * SIDE).map(|_| rng.random::<f64>() * scale).collect()
            };
            (
                ImageGrid::new(SIDE, SIDE, a).unwrap(),
                ImageGrid::new(SIDE, SIDE, b).unwrap(),
            )
        })
        .collect()
}

/// Mirror index with the edge sample repeated: `d c b a | a b c d`.
pub fn mirror(mut i: isize, n: usize) -> usize {
    let n = n as isize;
    loop {
        if i < 0 {
            i = -i - 1;
        } else if i >= n {
            i = 2 * n - i - 1;
        } else {
            return i as usize;
        }
    }
}

pub fn naive_ssim(x: &ImageGrid, y: &ImageGrid, l: f64) -> f64 {
    let (w, h) = x.dims();
    let radius = 5isize;
    let sigma = 1.5;
    let mut weights = Vec::new();
    for dr in -radius..=radius {
        for dc in -radius..=radius {
            weights.push((dr, dc, (-((dr * dr + dc * dc) as f64) / (2.0 * sigma * sigma)).exp()));
        }
    }
    let total: f64 = weights.iter().map(|t| t.2).sum();
    let c1 = (0.01 * l).powi(2);
    let c2 = (0.03 * l).powi(2);
    let mut sum = 0.0;
    for r in 0..h as isize {
        for c in 0..w as isize {
            let (mut mx, mut my, mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for &(dr, dc, g) in &weights {
                let g = g / total;
                let (rr, cc) = (mirror(r + dr, h), mirror(c + dc, w));
                let (a, b) = (x.get(rr, cc), y.get(rr, cc));
                mx += g * a;
                my += g * b;
                sxx += g * a * a;
                syy += g * b * b;
                sxy += g * a * b;
            }
            let vx = sxx - mx * mx;
            let vy = syy - my * my;
            let cov = sxy - mx * my;
            sum += (2.0 * mx * my + c1) * (2.0 * cov + c2)
                / ((mx * mx + my * my + c1) * (vx + vy + c2));
        }
    }
    sum / (w * h) as f64
}

pub fn naive_nmi(x: &ImageGrid, y: &ImageGrid) -> f64 {
    let bins = 256usize;
    let bin = |img: &ImageGrid, v: f64| {
        let (lo, hi) = (img.min(), img.max());
        (((v - lo) / (hi - lo) * bins as f64).floor() as usize).min(bins - 1)
    };
    let n = x.len() as f64;
    let mut joint = std::collections::HashMap::new();
    let mut px = vec![0.0; bins];
    let mut py = vec![0.0; bins];
    for (a, b) in x.data().iter().zip(y.data()) {
        let (i, j) = (bin(x, *a), bin(y, *b));
        *joint.entry((i, j)).or_insert(0.0) += 1.0;
        px[i] += 1.0;
        py[j] += 1.0;
    }
    let h = |counts: &mut dyn Iterator<Item = f64>| -> f64 {
        counts.filter(|&c| c > 0.0).map(|c| -(c / n) * (c / n).ln()).sum()
    };
    let hx = h(&mut px.into_iter());
    let hy = h(&mut py.into_iter());
    let hxy = h(&mut joint.into_values());
    (hx + hy) / hxy
}

pub fn naive_pcc(x: &ImageGrid, y: &ImageGrid) -> f64 {
    let n = x.len() as f64;
    let mx = x.data().iter().sum::<f64>() / n;
    let my = y.data().iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.data().iter().zip(y.data()) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    sxy / (sxx * syy).sqrt()
}

pub fn naive_mtv(x: &ImageGrid) -> f64 {
    let (w, h) = x.dims();
    let mut total = 0.0;
    for r in 0..h {
        for c in 0..w {
            let down = if r + 1 < h { x.get(r + 1, c) - x.get(r, c) } else { 0.0 };
            let right = if c + 1 < w { x.get(r, c + 1) - x.get(r, c) } else { 0.0 };
            total += (down * down + right * right).sqrt();
        }
    }
    total / (w * h) as f64
}

pub fn naive_vl(x: &ImageGrid) -> f64 {
    let (w, h) = x.dims();
    let at = |r: isize, c: isize| x.get(mirror(r, h), mirror(c, w));
    let mut responses = Vec::new();
    for r in 0..h as isize {
        for c in 0..w as isize {
            responses.push(at(r - 1, c) + at(r + 1, c) + at(r, c - 1) + at(r, c + 1) - 4.0 * at(r, c));
        }
    }
    let n = responses.len() as f64;
    let mean = responses.iter().sum::<f64>() / n;
    responses.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n
}


/// `(mae, mse, rmse, nmse)` with NMSE normalised by `N` times the sample
/// standard deviation of the reference `y`.
pub fn naive_errors(x: &ImageGrid, y: &ImageGrid) -> (f64, f64, f64, f64) {
    let n = x.len() as f64;
    let diffs: Vec<f64> = x.data().iter().zip(y.data()).map(|(a, b)| b - a).collect();
    let mae = diffs.iter().map(|d| d.abs()).sum::<f64>() / n;
    let sse: f64 = diffs.iter().map(|d| d * d).sum();
    let mse = sse / n;
    let mean = y.data().iter().sum::<f64>() / n;
    let sample_std = (y.data().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    (mae, mse, mse.sqrt(), sse / (n * sample_std))
}

pub fn naive_psnr(x: &ImageGrid, y: &ImageGrid, l: f64) -> f64 {
    10.0 * (l * l / naive_errors(x, y).1).log10()
}

/// `|actual - expected| <= tol * max(|expected|, 1)`
pub fn close_enough(actual: f64, expected: f64, tol: f64) -> bool {
    (actual - expected).abs() <= tol * expected.abs().max(1.0)
}
