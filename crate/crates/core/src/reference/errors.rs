//! Pixel-wise error measures and PSNR.

use crate::error::{Error, Result};
use crate::image::ImageGrid;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorMetrics {
    pub mae: f64,
    pub mse: f64,
    pub rmse: f64,
    /// Summed squared error over `N * std(reference)`; `None` when the
    /// reference is constant.
    pub nmse: Option<f64>,
}

/// All four error measures from one pass. `image` is the distorted image,
/// `reference` the ground truth.
pub fn error_metrics(image: &ImageGrid, reference: &ImageGrid) -> Result<ErrorMetrics> {
    image.ensure_same_dims(reference)?;
    let n = image.len() as f64;
    let (mut abs_sum, mut sq_sum) = (0.0, 0.0);
    for (i, r) in image.data().iter().zip(reference.data()) {
        let d = r - i;
        abs_sum += d.abs();
        sq_sum += d * d;
    }
    let mse = sq_sum / n;
    let std = reference.stats().std;
    Ok(ErrorMetrics {
        mae: abs_sum / n,
        mse,
        rmse: mse.sqrt(),
        nmse: (std > 0.0).then(|| sq_sum / (n * std)),
    })
}

pub fn mse(image: &ImageGrid, reference: &ImageGrid) -> Result<f64> {
    Ok(error_metrics(image, reference)?.mse)
}

pub fn nmse(image: &ImageGrid, reference: &ImageGrid) -> Result<f64> {
    error_metrics(image, reference)?
        .nmse
        .ok_or_else(|| Error::degenerate("NMSE is undefined for a constant reference"))
}

/// `10 log10(L^2 / MSE)`; identical images give `+inf`.
pub fn psnr(image: &ImageGrid, reference: &ImageGrid, data_range: f64) -> Result<f64> {
    if !(data_range > 0.0) || !data_range.is_finite() {
        return Err(Error::DegenerateRange);
    }
    let mse = mse(image, reference)?;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (data_range * data_range / mse).log10())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn img(v: &[f64]) -> ImageGrid {
        ImageGrid::new(v.len(), 1, v.to_vec()).unwrap()
    }

    #[test]
    fn identity_and_offset() {
        let r = img(&[1.0, 4.0, -2.0, 8.0]);
        let e = error_metrics(&r, &r).unwrap();
        assert_eq!((e.mae, e.mse, e.rmse, e.nmse), (0.0, 0.0, 0.0, Some(0.0)));
        let shifted = r.map(|v| v - 2.5).unwrap();
        let e = error_metrics(&shifted, &r).unwrap();
        assert_eq!((e.mae, e.mse, e.rmse), (2.5, 6.25, 2.5));
    }

    #[test]
    fn nmse_needs_spread() {
        let c = img(&[3.0; 4]);
        assert!(nmse(&img(&[1.0, 2.0, 3.0, 4.0]), &c).unwrap_err().is_numeric());
        assert_eq!(error_metrics(&c, &c).unwrap().nmse, None);
    }

    #[test]
    fn psnr_values() {
        let a = img(&[0.0, 0.0]);
        assert_eq!(psnr(&a, &a, 1.0).unwrap(), f64::INFINITY);
        let b = img(&[255.0, -255.0]);
        assert!(psnr(&a, &b, 255.0).unwrap().abs() < 1e-12);
        assert!(psnr(&a, &b, 0.0).is_err());
    }
}
