use std::cmp::Ordering;
use std::collections::BTreeMap;

use super::ResultRow;
use crate::distort::DistortionKind;
use crate::error::{Error, Result};
use crate::metric::{Metric, Orientation};

/// Median with `+inf` ordered above every finite value. For an even count
/// whose two middle values are one finite and one infinite, the finite one
/// is returned; two infinite middles give `+inf`.
pub fn median_with_infinity(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    if n % 2 == 1 {
        return Some(sorted[n / 2]);
    }
    let (lo, hi) = (sorted[n / 2 - 1], sorted[n / 2]);
    Some(match (lo.is_finite(), hi.is_finite()) {
        (true, true) => 0.5 * (lo + hi),
        (true, false) => lo,
        _ => hi,
    })
}

/// Aggregated value for one `(distortion, metric, normalization)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityCell {
    /// `None` marks the undistorted reference images.
    pub distortion: Option<DistortionKind>,
    pub metric: Metric,
    pub normalization: String,
    /// Number of successful scores pooled over images and strengths.
    pub count: usize,
    pub median: Option<f64>,
    /// Median over this distortion divided by the median pooled over all
    /// distortions; `None` when undefined.
    pub relative: Option<f64>,
    /// 0 = least affected distortion for this metric, 1 = most affected.
    pub shading: Option<f64>,
}

/// Every aggregated cell in report order: normalization as listed in the
/// run, then distortion order, then metric order. Reference cells (no
/// distortion) come first within each normalization.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SensitivityTable {
    pub normalizations: Vec<String>,
    pub cells: Vec<SensitivityCell>,
}

impl SensitivityTable {
    pub fn cell(
        &self,
        distortion: Option<DistortionKind>,
        metric: Metric,
        normalization: &str,
    ) -> Option<&SensitivityCell> {
        self.cells.iter().find(|c| {
            c.distortion == distortion && c.metric == metric && c.normalization == normalization
        })
    }

    pub fn distortions(&self) -> Vec<DistortionKind> {
        let mut kinds: Vec<_> = self.cells.iter().filter_map(|c| c.distortion).collect();
        kinds.sort();
        kinds.dedup();
        kinds
    }

    pub fn metrics(&self) -> Vec<Metric> {
        let mut metrics: Vec<_> = self.cells.iter().map(|c| c.metric).collect();
        metrics.sort();
        metrics.dedup();
        metrics
    }
}

type Key = (usize, Option<DistortionKind>, Metric);

/// Pools scores over images and strengths and takes medians, then fills
/// relative scores and shading. Error rows are left out of the pool.
pub fn aggregate_median(rows: &[ResultRow]) -> Result<SensitivityTable> {
    if rows.is_empty() {
        return Err(Error::Empty);
    }
    let mut normalizations: Vec<String> = Vec::new();
    for row in rows {
        if !normalizations.contains(&row.normalization) {
            normalizations.push(row.normalization.clone());
        }
    }
    let norm_index = |label: &str| normalizations.iter().position(|n| n == label).unwrap();

    let mut pools: BTreeMap<Key, Vec<f64>> = BTreeMap::new();
    for row in rows {
        let pool = pools
            .entry((norm_index(&row.normalization), row.distortion, row.metric))
            .or_default();
        if let Ok(score) = row.score {
            pool.push(score);
        }
    }

    let mut cells: Vec<SensitivityCell> = pools
        .iter()
        .map(|(&(ni, distortion, metric), pool)| SensitivityCell {
            distortion,
            metric,
            normalization: normalizations[ni].clone(),
            count: pool.len(),
            median: median_with_infinity(pool),
            relative: None,
            shading: None,
        })
        .collect();

    // relative scores against the pool of every distorted score
    let mut pooled_all: BTreeMap<(usize, Metric), Vec<f64>> = BTreeMap::new();
    for (&(ni, distortion, metric), pool) in &pools {
        if distortion.is_some() {
            pooled_all.entry((ni, metric)).or_default().extend(pool);
        }
    }
    let pooled_median: BTreeMap<(usize, Metric), Option<f64>> = pooled_all
        .into_iter()
        .map(|(k, v)| (k, median_with_infinity(&v)))
        .collect();
    for cell in cells.iter_mut().filter(|c| c.distortion.is_some()) {
        let pooled = pooled_median[&(norm_index(&cell.normalization), cell.metric)];
        cell.relative = match (cell.median, pooled) {
            (Some(m), Some(p)) => relative(m, p),
            _ => None,
        };
    }

    fill_shading(&mut cells);
    Ok(SensitivityTable {
        normalizations,
        cells,
    })
}

fn relative(median: f64, pooled: f64) -> Option<f64> {
    if pooled == 0.0 {
        return None;
    }
    let r = median / pooled;
    (!r.is_nan()).then_some(r)
}

/// Rank-based shading within each `(normalization, metric)` column. Ranks
/// tolerate infinite medians; ties share their mean rank.
fn fill_shading(cells: &mut [SensitivityCell]) {
    let mut groups: BTreeMap<(String, Metric), Vec<usize>> = BTreeMap::new();
    for (i, c) in cells.iter().enumerate() {
        if c.distortion.is_some() && c.median.is_some() {
            groups
                .entry((c.normalization.clone(), c.metric))
                .or_default()
                .push(i);
        }
    }
    for ((_, metric), members) in groups {
        // oriented so that larger means more degraded
        let badness: Vec<f64> = members
            .iter()
            .map(|&i| {
                let m = cells[i].median.unwrap();
                match metric.orientation() {
                    Orientation::HigherIsBetter => -m,
                    Orientation::LowerIsBetter => m,
                }
            })
            .collect();
        let n = members.len();
        for (k, &i) in members.iter().enumerate() {
            let b = badness[k];
            let below = badness.iter().filter(|x| x.total_cmp(&b) == Ordering::Less).count();
            let equal = badness.iter().filter(|x| x.total_cmp(&b) == Ordering::Equal).count();
            let rank = below as f64 + (equal as f64 - 1.0) / 2.0;
            cells[i].shading = Some(if n > 1 { rank / (n - 1) as f64 } else { 0.0 });
        }
    }
}
