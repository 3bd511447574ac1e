use super::ImageGrid;

/// Summary statistics of an image's intensity distribution.
///
/// Percentiles use the nearest-rank rule: `percentile(k)` is the smallest
/// intensity `v` such that at least `k` percent of all pixels are `<= v`.
#[derive(Debug, Clone)]
pub struct IntensityStats {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    /// Corrected sample standard deviation (divisor `n - 1`); zero for a
    /// single pixel.
    pub std: f64,
    pub median: f64,
    sorted: Vec<f64>,
}

impl IntensityStats {
    pub fn from_image(image: &ImageGrid) -> Self {
        Self::from_values(image.data())
    }

    /// Panics on an empty slice; [`ImageGrid`] can never be empty.
    pub fn from_values(values: &[f64]) -> Self {
        assert!(!values.is_empty(), "statistics of an empty sample");
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len() as f64;
        let mean = sorted.iter().sum::<f64>() / n;
        let std = if sorted.len() > 1 {
            (sorted.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        let median = percentile_of_sorted(&sorted, 50.0);
        Self {
            min: sorted[0],
            max: sorted[sorted.len() - 1],
            mean,
            std,
            median,
            sorted,
        }
    }

    /// `k` is clamped to `[0, 100]`.
    pub fn percentile(&self, k: f64) -> f64 {
        percentile_of_sorted(&self.sorted, k)
    }

    pub fn iqr(&self) -> f64 {
        self.percentile(75.0) - self.percentile(25.0)
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }
}

/// Nearest-rank percentile of an ascending slice.
pub fn percentile_of_sorted(sorted: &[f64], k: f64) -> f64 {
    let n = sorted.len();
    let k = k.clamp(0.0, 100.0);
    // k * n / 100 rather than k / 100 * n: 5 * 100 / 100 is exactly 5,
    // 0.05 * 100 is not.
    let rank = (k * n as f64 / 100.0 - 1e-9).ceil();
    let idx = (rank as isize - 1).clamp(0, n as isize - 1) as usize;
    sorted[idx]
}
