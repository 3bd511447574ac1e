//! Histogram-based mutual information and linear correlation.

use crate::error::{Error, Result};
use crate::image::ImageGrid;
use crate::normalize::binning;

/// Entropies in nats computed from the joint histogram of the two images
/// after each is binned to `bins` levels on its own.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Entropies {
    pub image: f64,
    pub reference: f64,
    pub joint: f64,
}

pub fn entropies(image: &ImageGrid, reference: &ImageGrid, bins: usize) -> Result<Entropies> {
    image.ensure_same_dims(reference)?;
    let a = binning(image, bins)?;
    let b = binning(reference, bins)?;
    let mut joint = vec![0usize; bins * bins];
    for (x, y) in a.data().iter().zip(b.data()) {
        joint[*x as usize * bins + *y as usize] += 1;
    }
    let n = image.len() as f64;
    let mut marg_a = vec![0usize; bins];
    let mut marg_b = vec![0usize; bins];
    for i in 0..bins {
        for j in 0..bins {
            let c = joint[i * bins + j];
            marg_a[i] += c;
            marg_b[j] += c;
        }
    }
    Ok(Entropies {
        image: entropy(&marg_a, n),
        reference: entropy(&marg_b, n),
        joint: entropy(&joint, n),
    })
}

/// Summed in ascending count order so the result does not depend on how
/// the histogram is laid out.
fn entropy(counts: &[usize], n: f64) -> f64 {
    let mut nonzero: Vec<usize> = counts.iter().copied().filter(|&c| c > 0).collect();
    nonzero.sort_unstable();
    nonzero
        .into_iter()
        .map(|c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

pub fn mutual_information(image: &ImageGrid, reference: &ImageGrid, bins: usize) -> Result<f64> {
    let h = entropies(image, reference, bins)?;
    Ok((h.image + h.reference - h.joint).max(0.0))
}

/// `(H(I) + H(R)) / H(I, R)` in `[1, 2]`. Two constant images carry no
/// information to disagree on and score 2.
pub fn nmi(image: &ImageGrid, reference: &ImageGrid, bins: usize) -> Result<f64> {
    let h = entropies(image, reference, bins)?;
    if h.joint == 0.0 {
        return Ok(2.0);
    }
    Ok((h.image + h.reference) / h.joint)
}

/// Pearson correlation over all pixels.
pub fn pcc(image: &ImageGrid, reference: &ImageGrid) -> Result<f64> {
    image.ensure_same_dims(reference)?;
    pearson(image.data(), reference.data())
        .ok_or_else(|| Error::degenerate("correlation is undefined for a constant image"))
}

/// Pearson correlation of two equally long slices; `None` if either has
/// zero variance.
pub(crate) fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return None;
    }
    Some((sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0))
}
