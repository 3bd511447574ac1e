//! Benchmark harness: distort every image at every strength, normalize the
//! reference and the distorted image independently, score all metrics, and
//! aggregate the scores into median and relative-sensitivity tables.
//!
//! Work items are `(image, distortion, strength)` tuples processed in
//! parallel; results are collected back in item order so the output is
//! identical for a given configuration whatever the thread count.

mod aggregate;
mod config;
mod emit;

pub use aggregate::{aggregate_median, median_with_infinity, SensitivityCell, SensitivityTable};
pub use config::{BenchmarkConfig, DEFAULT_PHANTOM_SIZE};
pub use emit::{
    medians_csv, relative_csv, rows_csv, table_markdown, write_outputs, MEDIANS_HEADER,
    REFERENCE_LABEL, RELATIVE_HEADER, ROWS_HEADER,
};

use std::fs;
use std::path::Path;

use log::{info, warn};
use rayon::prelude::*;

use crate::distort::{apply, derive_seed, splitmix64, DistortionKind, DistortionSpec};
use crate::error::{Error, Result};
use crate::image::{load_raster, make_phantom, ImageGrid, RasterFormat};
use crate::metric::{evaluate, Metric, MetricContext};
use crate::normalize::Normalization;
use crate::quality::{NiqeModel, SvrModel};
use crate::DataRangeMode;

/// One evaluated `(image, distortion, strength, normalization, metric)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub image_id: String,
    /// `None` for the undistorted reference (strength 0).
    pub distortion: Option<DistortionKind>,
    pub strength: f64,
    pub normalization: String,
    pub metric: Metric,
    /// Error message when the metric was undefined for this input.
    pub score: std::result::Result<f64, String>,
}

/// Images to benchmark plus those that could not be read.
#[derive(Debug, Clone, Default)]
pub struct ImageSet {
    pub ids: Vec<String>,
    pub images: Vec<ImageGrid>,
    /// `(file name, error)` for every unreadable input.
    pub failures: Vec<(String, String)>,
}

impl ImageSet {
    /// Phantoms seeded `seed, seed + 1, ...`.
    pub fn phantoms(count: usize, size: usize, seed: u64) -> Result<Self> {
        let mut set = Self::default();
        for i in 0..count {
            set.ids.push(format!("phantom-{i:03}"));
            set.images.push(make_phantom(seed.wrapping_add(i as u64), size, size)?);
        }
        Ok(set)
    }

    /// Every `.npy`, `.pgm` and `.csv` raster in `dir`, sorted by file name.
    /// Unreadable files are recorded and skipped.
    pub fn from_dir(dir: &Path) -> Result<Self> {
        let mut paths: Vec<_> = fs::read_dir(dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file() && RasterFormat::from_path(p).is_ok())
            .collect();
        paths.sort();
        let mut set = Self::default();
        for path in paths {
            let id = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            match RasterFormat::from_path(&path).and_then(|f| load_raster(&path, f)) {
                Ok(img) => {
                    set.ids.push(id);
                    set.images.push(img);
                }
                Err(e) => {
                    warn!("skipping {}: {e}", path.display());
                    set.failures.push((id, e.to_string()));
                }
            }
        }
        if set.images.is_empty() {
            return Err(Error::Format(format!("no readable rasters in {}", dir.display())));
        }
        Ok(set)
    }

    pub fn load(config: &BenchmarkConfig) -> Result<Self> {
        match (&config.input_dir, config.phantoms) {
            (Some(dir), _) => Self::from_dir(dir),
            (None, Some(n)) => Self::phantoms(n, config.phantom_size, config.seed),
            (None, None) => Err(Error::InvalidParameter("no image source".into())),
        }
    }
}

/// Seed for all distortions of image `index`.
pub fn image_seed(master: u64, index: usize) -> u64 {
    splitmix64(master.wrapping_add(index as u64))
}

/// Models and settings shared by every work item.
#[derive(Debug, Clone, Default)]
pub struct Models {
    pub niqe: Option<NiqeModel>,
    pub brisque: Option<SvrModel>,
}

impl Models {
    pub fn load(config: &BenchmarkConfig) -> Result<Self> {
        Ok(Self {
            niqe: config.niqe_model.as_deref().map(NiqeModel::load).transpose()?,
            brisque: config.brisque_model.as_deref().map(SvrModel::load).transpose()?,
        })
    }
}

#[derive(Debug, Clone, Copy)]
struct WorkItem {
    image: usize,
    /// `(kind, strength index)`; `None` for the reference item.
    distortion: Option<(DistortionKind, usize)>,
}

struct Sweep<'a> {
    config: &'a BenchmarkConfig,
    set: &'a ImageSet,
    normalizations: &'a [Normalization],
    labels: Vec<String>,
    reference_metrics: Vec<Metric>,
    nr_metrics: Vec<Metric>,
}

impl Sweep<'_> {
    fn items(&self) -> Vec<WorkItem> {
        let mut items = Vec::new();
        for image in 0..self.set.images.len() {
            if !self.nr_metrics.is_empty() {
                items.push(WorkItem { image, distortion: None });
            }
            for &kind in &self.config.distortions {
                for si in 0..self.config.strengths.len() {
                    items.push(WorkItem {
                        image,
                        distortion: Some((kind, si)),
                    });
                }
            }
        }
        items
    }

    fn distorted(&self, item: WorkItem) -> Result<Option<ImageGrid>> {
        let Some((kind, si)) = item.distortion else {
            return Ok(None);
        };
        let seed = derive_seed(image_seed(self.config.seed, item.image), kind, si);
        let spec = DistortionSpec::new(kind, self.config.strengths[si], seed)?;
        apply(&self.set.images[item.image], &spec).map(Some)
    }

    /// Normalized `(reference, distorted)` per normalization.
    fn normalized(
        &self,
        item: WorkItem,
        distorted: &Result<Option<ImageGrid>>,
    ) -> Vec<Result<(ImageGrid, Option<ImageGrid>)>> {
        let reference = &self.set.images[item.image];
        self.normalizations
            .iter()
            .map(|norm| {
                let r = norm.apply(reference)?;
                let d = match distorted {
                    Ok(Some(d)) => Some(norm.apply(d)?),
                    Ok(None) => None,
                    Err(e) => return Err(Error::InvalidParameter(e.to_string())),
                };
                Ok((r, d))
            })
            .collect()
    }

    fn evaluate(&self, item: WorkItem, contexts: &[MetricContext]) -> Vec<ResultRow> {
        let distorted = self.distorted(item);
        let normalized = self.normalized(item, &distorted);
        let (kind, strength, metrics) = match item.distortion {
            Some((kind, si)) => (
                Some(kind),
                self.config.strengths[si],
                self.config.metrics.as_slice(),
            ),
            None => (None, 0.0, self.nr_metrics.as_slice()),
        };
        let mut rows = Vec::with_capacity(metrics.len() * contexts.len());
        for ((pair, ctx), label) in normalized.iter().zip(contexts).zip(&self.labels) {
            for &metric in metrics {
                let score = match pair {
                    Ok((reference, Some(img))) => evaluate(metric, img, Some(reference), ctx),
                    Ok((reference, None)) => evaluate(metric, reference, None, ctx),
                    Err(e) => Err(Error::InvalidParameter(e.to_string())),
                };
                rows.push(ResultRow {
                    image_id: self.set.ids[item.image].clone(),
                    distortion: kind,
                    strength,
                    normalization: label.clone(),
                    metric,
                    score: score.map_err(|e| e.to_string()),
                });
            }
        }
        rows
    }

    /// Joint range of every normalized image in the sweep, per normalization.
    fn dataset_ranges(&self, items: &[WorkItem]) -> Vec<Option<f64>> {
        let per_item: Vec<Vec<(f64, f64)>> = items
            .par_iter()
            .map(|&item| {
                let distorted = self.distorted(item);
                self.normalized(item, &distorted)
                    .into_iter()
                    .map(|pair| match pair {
                        Ok((r, d)) => {
                            let mut lo = r.min();
                            let mut hi = r.max();
                            if let Some(d) = d {
                                lo = lo.min(d.min());
                                hi = hi.max(d.max());
                            }
                            (lo, hi)
                        }
                        Err(_) => (f64::INFINITY, f64::NEG_INFINITY),
                    })
                    .collect()
            })
            .collect();
        (0..self.normalizations.len())
            .map(|n| {
                let (lo, hi) = per_item.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |acc, v| {
                    (acc.0.min(v[n].0), acc.1.max(v[n].1))
                });
                (hi > lo).then_some(hi - lo)
            })
            .collect()
    }
}

/// Runs the sweep over an already loaded image set.
pub fn run_on(
    config: &BenchmarkConfig,
    set: &ImageSet,
    normalizations: &[Normalization],
    models: &Models,
) -> Result<Vec<ResultRow>> {
    config.validate()?;
    if normalizations.is_empty() {
        return Err(Error::InvalidParameter("normalization list is empty".into()));
    }
    if config.metrics.contains(&Metric::Dsc) {
        warn!("dsc reads images as integer label maps; intensity images give error rows");
    }
    let (reference_metrics, nr_metrics): (Vec<Metric>, Vec<Metric>) =
        config.metrics.iter().partition(|m| m.is_reference());
    let sweep = Sweep {
        config,
        set,
        normalizations,
        labels: normalizations.iter().map(Normalization::label).collect(),
        reference_metrics,
        nr_metrics,
    };
    let items = sweep.items();
    info!(
        "{} images, {} work items, {} metrics ({} reference)",
        set.images.len(),
        items.len(),
        config.metrics.len(),
        sweep.reference_metrics.len()
    );

    let body = || {
        let dataset_ranges = if config.data_range == DataRangeMode::Dataset {
            sweep.dataset_ranges(&items)
        } else {
            vec![None; normalizations.len()]
        };
        let contexts: Vec<MetricContext> = dataset_ranges
            .into_iter()
            .map(|dataset_range| MetricContext {
                data_range: config.data_range,
                dataset_range,
                niqe_model: models.niqe.clone(),
                brisque_model: models.brisque.clone(),
                dsc_class: None,
            })
            .collect();
        items
            .par_iter()
            .map(|&item| sweep.evaluate(item, &contexts))
            .collect::<Vec<_>>()
    };
    let nested = if config.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(config.threads)
            .build()
            .map_err(|e| Error::InvalidParameter(e.to_string()))?
            .install(body)
    } else {
        body()
    };
    Ok(nested.into_iter().flatten().collect())
}

/// Result of a full configured run.
#[derive(Debug, Clone)]
pub struct BenchmarkRun {
    pub rows: Vec<ResultRow>,
    pub table: SensitivityTable,
    /// Inputs that could not be read, `(file name, error)`.
    pub failures: Vec<(String, String)>,
}

/// Loads inputs and models, runs the sweep and aggregates the results.
pub fn run(config: &BenchmarkConfig) -> Result<BenchmarkRun> {
    config.validate()?;
    let normalizations = config.parsed_normalizations()?;
    let models = Models::load(config)?;
    let set = ImageSet::load(config)?;
    let rows = run_on(config, &set, &normalizations, &models)?;
    let table = aggregate_median(&rows)?;
    Ok(BenchmarkRun {
        rows,
        table,
        failures: set.failures,
    })
}

/// [`run`] followed by writing every output file into `config.output_dir`.
pub fn run_and_write(config: &BenchmarkConfig) -> Result<BenchmarkRun> {
    let result = run(config)?;
    write_outputs(&config.output_dir, &result.rows, &result.table)?;
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config(metrics: Vec<Metric>) -> BenchmarkConfig {
        let mut c = BenchmarkConfig::phantoms(2, metrics);
        c.phantom_size = 64;
        c
    }

    #[test]
    fn row_count_for_one_reference_metric() {
        let c = small_config(vec![Metric::Mse]);
        let set = ImageSet::phantoms(2, 64, 0).unwrap();
        let rows = run_on(&c, &set, &[Normalization::None], &Models::default()).unwrap();
        assert_eq!(rows.len(), 2 * 11 * 5);
        assert!(rows.iter().all(|r| r.distortion.is_some()));
    }

    #[test]
    fn nr_metrics_also_score_the_reference() {
        let mut c = small_config(vec![Metric::Mtv, Metric::Pcc]);
        c.distortions = vec![DistortionKind::GaussianBlur];
        c.strengths = vec![1.0, 5.0];
        let set = ImageSet::phantoms(2, 64, 0).unwrap();
        let rows = run_on(&c, &set, &[Normalization::None], &Models::default()).unwrap();
        // per image: one reference row (mtv) + 2 strengths x 2 metrics
        assert_eq!(rows.len(), 2 * (1 + 4));
        let reference: Vec<_> = rows.iter().filter(|r| r.distortion.is_none()).collect();
        assert_eq!(reference.len(), 2);
        assert!(reference.iter().all(|r| r.metric == Metric::Mtv && r.strength == 0.0));
    }

    #[test]
    fn shift_is_removed_by_normalization() {
        let mut c = small_config(vec![Metric::Nmse, Metric::Nmi, Metric::Pcc]);
        c.distortions = vec![DistortionKind::ShiftIntensity];
        let set = ImageSet::phantoms(2, 64, 3).unwrap();
        let rows = run_on(&c, &set, &[Normalization::minmax()], &Models::default()).unwrap();
        for r in rows {
            let v = r.score.unwrap();
            let ideal = r.metric.identity_value().unwrap();
            assert!((v - ideal).abs() < 1e-9, "{:?} {v}", r.metric);
        }
    }

    #[test]
    fn thread_count_does_not_change_rows() {
        let mut c = small_config(vec![Metric::Ssim, Metric::Be]);
        c.distortions = vec![DistortionKind::GaussianNoise, DistortionKind::ElasticDeform];
        let set = ImageSet::phantoms(2, 64, 1).unwrap();
        let norms = [Normalization::None, Normalization::Zscore];
        c.threads = 1;
        let a = run_on(&c, &set, &norms, &Models::default()).unwrap();
        c.threads = 3;
        let b = run_on(&c, &set, &norms, &Models::default()).unwrap();
        assert_eq!(rows_csv(&a), rows_csv(&b));
    }

    #[test]
    fn errors_become_rows() {
        let mut c = small_config(vec![Metric::Dsc]);
        c.distortions = vec![DistortionKind::GaussianNoise];
        c.strengths = vec![1.0];
        let set = ImageSet::phantoms(1, 64, 0).unwrap();
        let rows = run_on(&c, &set, &[Normalization::None], &Models::default()).unwrap();
        assert_eq!(rows.len(), 1);
        assert!(rows[0].score.is_err());
    }

    #[test]
    fn dataset_range_uses_the_whole_sweep() {
        let mut c = small_config(vec![Metric::Psnr]);
        c.distortions = vec![DistortionKind::ShiftIntensity];
        c.strengths = vec![5.0];
        let set = ImageSet::phantoms(2, 64, 0).unwrap();
        c.data_range = DataRangeMode::Pair;
        let pair = run_on(&c, &set, &[Normalization::None], &Models::default()).unwrap();
        c.data_range = DataRangeMode::Dataset;
        let dataset = run_on(&c, &set, &[Normalization::None], &Models::default()).unwrap();
        for (p, d) in pair.iter().zip(&dataset) {
            assert!(d.score.as_ref().unwrap() >= p.score.as_ref().unwrap());
        }
    }
}
