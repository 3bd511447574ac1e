//! Line-correlation measures of structured noise and ghosting.

use crate::error::{Error, Result};
use crate::image::ImageGrid;
use crate::reference::pearson;

/// Mean correlation between adjacent rows and between adjacent columns.
pub fn mean_line_correlation(image: &ImageGrid) -> Result<f64> {
    line_correlation(image, 1, 1)
}

/// Mean correlation between rows `h/2` apart and columns `w/2` apart.
pub fn mean_shifted_line_correlation(image: &ImageGrid) -> Result<f64> {
    let (w, h) = image.dims();
    line_correlation(image, h / 2, w / 2)
}

/// Pairs involving a constant line are skipped; a direction without any
/// valid pair drops out of the final average.
fn line_correlation(image: &ImageGrid, row_gap: usize, col_gap: usize) -> Result<f64> {
    let (w, h) = image.dims();
    if w < 2 || h < 2 {
        return Err(Error::TooSmall {
            required: 2,
            actual: (w, h),
        });
    }
    let rows: Vec<Vec<f64>> = (0..h).map(|r| image.row(r).to_vec()).collect();
    let cols: Vec<Vec<f64>> = (0..w)
        .map(|c| (0..h).map(|r| image.get(r, c)).collect())
        .collect();

    let directions = [mean_pair_correlation(&rows, row_gap), mean_pair_correlation(&cols, col_gap)];
    let valid: Vec<f64> = directions.into_iter().flatten().collect();
    if valid.is_empty() {
        return Err(Error::degenerate("every line pair contains a constant line"));
    }
    Ok(valid.iter().sum::<f64>() / valid.len() as f64)
}

fn mean_pair_correlation(lines: &[Vec<f64>], gap: usize) -> Option<f64> {
    let values: Vec<f64> = (0..lines.len().saturating_sub(gap))
        .filter_map(|i| pearson(&lines[i], &lines[i + gap]))
        .collect();
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vertical_gradient_skips_constant_rows() {
        // every row is constant, every column is the same ramp
        let img = ImageGrid::from_fn(8, 6, |r, _| r as f64).unwrap();
        assert!((mean_line_correlation(&img).unwrap() - 1.0).abs() < 1e-12);
        assert!((mean_shifted_line_correlation(&img).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn alternating_columns_anticorrelate() {
        let img = ImageGrid::from_fn(8, 8, |r, c| if c % 2 == 0 { r as f64 } else { -(r as f64) }).unwrap();
        // adjacent columns correlate at -1, adjacent rows at +1 (row 0 is
        // constant and skipped)
        let mlc = mean_line_correlation(&img).unwrap();
        assert!(mlc.abs() < 1e-12);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(mean_line_correlation(&ImageGrid::filled(1, 5, 1.0).unwrap()).is_err());
        assert!(mean_line_correlation(&ImageGrid::filled(4, 4, 1.0).unwrap())
            .unwrap_err()
            .is_numeric());
    }
}
