//! Image container and the primitives every other module builds on.
//!
//! [`ImageGrid`] is a 2D row-major raster of `f64` intensities. Pixel
//! `(row, col)` lives at `data[row * width + col]`. Intensities are checked
//! for finiteness once, at construction, so downstream code never has to
//! deal with NaN.

mod io;
mod phantom;
mod range;
mod stats;

pub use io::{load_raster, save_raster, RasterFormat};
pub use phantom::{make_phantom, make_phantom_with_info, PhantomInfo};
pub use range::{resolve_data_range, DataRangeMode};
pub use stats::{percentile_of_sorted, IntensityStats};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ImageGrid {
    width: usize,
    height: usize,
    data: Vec<f64>,
    spacing: Option<(f64, f64)>,
}

impl ImageGrid {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Empty);
        }
        if data.len() != width * height {
            return Err(Error::Shape(format!(
                "{} values for a {}x{} grid",
                data.len(),
                width,
                height
            )));
        }
        if let Some(index) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self {
            width,
            height,
            data,
            spacing: None,
        })
    }

    /// Builds a grid by evaluating `f(row, col)` at every pixel.
    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for r in 0..height {
            for c in 0..width {
                data.push(f(r, c));
            }
        }
        Self::new(width, height, data)
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn with_spacing(mut self, dx: f64, dy: f64) -> Self {
        self.spacing = Some((dx, dy));
        self
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    /// `(width, height)`
    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn spacing(&self) -> Option<(f64, f64)> {
        self.spacing
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.width + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.width..(row + 1) * self.width]
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `max - min`
    pub fn range(&self) -> f64 {
        self.max() - self.min()
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    /// Applies `f` to every intensity, keeping dimensions and spacing.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        let data = self.data.iter().map(|&v| f(v)).collect();
        Ok(Self::new(self.width, self.height, data)?.spacing_from(self))
    }

    /// Same dimensions and spacing as `self`, new intensities.
    pub fn with_data(&self, data: Vec<f64>) -> Result<Self> {
        Ok(Self::new(self.width, self.height, data)?.spacing_from(self))
    }

    fn spacing_from(mut self, other: &ImageGrid) -> Self {
        self.spacing = other.spacing;
        self
    }

    pub fn ensure_same_dims(&self, other: &ImageGrid) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::DimensionMismatch {
                left: self.dims(),
                right: other.dims(),
            });
        }
        Ok(())
    }

    pub fn stats(&self) -> IntensityStats {
        IntensityStats::from_image(self)
    }
}

/// Integer class label per pixel, `0` meaning background.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMask {
    width: usize,
    height: usize,
    labels: Vec<u32>,
}

impl LabelMask {
    pub fn new(width: usize, height: usize, labels: Vec<u32>) -> Result<Self> {
        if labels.len() != width * height {
            return Err(Error::Shape(format!(
                "{} labels for a {}x{} mask",
                labels.len(),
                width,
                height
            )));
        }
        Ok(Self {
            width,
            height,
            labels,
        })
    }

    /// Rounds raster intensities to class ids. Negative or fractional values
    /// are rejected.
    pub fn from_image(image: &ImageGrid) -> Result<Self> {
        let labels = image
            .data()
            .iter()
            .map(|&v| {
                if v < 0.0 || v.fract() != 0.0 || v > u32::MAX as f64 {
                    Err(Error::Format(format!("{v} is not a class id")))
                } else {
                    Ok(v as u32)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(image.width(), image.height(), labels)
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite() {
        let err = ImageGrid::new(2, 1, vec![0.0, f64::NAN]).unwrap_err();
        assert!(matches!(err, Error::NonFinite { index: 1 }));
        assert!(ImageGrid::new(1, 1, vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn rejects_wrong_length() {
        assert!(matches!(
            ImageGrid::new(2, 2, vec![0.0; 3]),
            Err(Error::Shape(_))
        ));
        assert!(matches!(ImageGrid::new(0, 2, vec![]), Err(Error::Empty)));
    }

    #[test]
    fn row_major_indexing() {
        let img = ImageGrid::from_fn(3, 2, |r, c| (r * 10 + c) as f64).unwrap();
        assert_eq!(img.get(1, 2), 12.0);
        assert_eq!(img.row(1), &[10.0, 11.0, 12.0]);
    }
}
