//! Intensity normalization.
//!
//! Every method is a monotone non-decreasing map of intensity computed from
//! the statistics of the image it is applied to (piecewise-linear
//! standardization additionally uses landmarks learned from a corpus).
//! Degenerate inputs never fail: constant images map to the lower target
//! (Minmax, cMinmax), to zero (Zscore, Binning), or are only shifted
//! (Quantile with zero IQR).

mod piecewise;

pub use piecewise::{foreground_mode, pl_apply, pl_fit, PlModel, PL_HISTOGRAM_BINS};

use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};
use crate::image::ImageGrid;

pub const DEFAULT_BINS: usize = 256;
pub const DEFAULT_CLIP_PERCENT: f64 = 5.0;

#[derive(Debug, Clone, PartialEq)]
pub enum Normalization {
    None,
    Minmax {
        target: (f64, f64),
    },
    /// Clip to the `[lower, upper]` percentiles, then Minmax.
    CMinmax {
        lower: f64,
        upper: f64,
        target: (f64, f64),
    },
    Zscore,
    Quantile,
    Binning {
        bins: usize,
    },
    PiecewiseLinear(PlModel),
}

impl Normalization {
    pub fn minmax() -> Self {
        Normalization::Minmax { target: (0.0, 1.0) }
    }

    /// `cMinmax_p%`: clip at `p` and `100 - p`, map to `[0, 1]`.
    pub fn cminmax(p: f64) -> Self {
        Normalization::CMinmax {
            lower: p,
            upper: 100.0 - p,
            target: (0.0, 1.0),
        }
    }

    pub fn binning() -> Self {
        Normalization::Binning { bins: DEFAULT_BINS }
    }

    /// The five statistics-only methods plus the identity, in table order.
    pub fn standard_set() -> Vec<Normalization> {
        vec![
            Normalization::None,
            Normalization::minmax(),
            Normalization::cminmax(DEFAULT_CLIP_PERCENT),
            Normalization::Zscore,
            Normalization::Quantile,
            Normalization::binning(),
        ]
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Normalization::Minmax { target } => check_target(target),
            Normalization::CMinmax { lower, upper, target } => {
                if !(0.0..=100.0).contains(&lower) || !(0.0..=100.0).contains(&upper) || lower >= upper
                {
                    return Err(Error::InvalidParameter(format!(
                        "clip percentiles need 0 <= p < q <= 100, got ({lower}, {upper})"
                    )));
                }
                check_target(target)
            }
            Normalization::Binning { bins } if bins < 2 => Err(Error::InvalidParameter(format!(
                "binning needs at least 2 bins, got {bins}"
            ))),
            Normalization::PiecewiseLinear(ref m) => m.validate(),
            _ => Ok(()),
        }
    }

    pub fn apply(&self, image: &ImageGrid) -> Result<ImageGrid> {
        self.validate()?;
        match *self {
            Normalization::None => Ok(image.clone()),
            Normalization::Minmax { target: (j1, j2) } => {
                minmax(image, image.min(), image.max(), j1, j2)
            }
            Normalization::CMinmax { lower, upper, target: (j1, j2) } => {
                cminmax(image, lower, upper, j1, j2)
            }
            Normalization::Zscore => zscore(image),
            Normalization::Quantile => quantile_norm(image),
            Normalization::Binning { bins } => binning(image, bins),
            Normalization::PiecewiseLinear(ref model) => pl_apply(image, model),
        }
    }

    /// Parses `none|minmax|cminmax[:p]|zscore|quantile|binning[:B]|pl:<model.json>`.
    /// A `pl:` spec loads the model file.
    pub fn from_spec(spec: &str) -> Result<Self> {
        let (name, arg) = match spec.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (spec, None),
        };
        let num = |a: &str| {
            a.parse::<f64>()
                .map_err(|_| Error::InvalidParameter(format!("bad number '{a}' in '{spec}'")))
        };
        let norm = match (name, arg) {
            ("none", None) => Normalization::None,
            ("minmax", None) => Normalization::minmax(),
            ("cminmax", None) => Normalization::cminmax(DEFAULT_CLIP_PERCENT),
            ("cminmax", Some(p)) => Normalization::cminmax(num(p)?),
            ("zscore", None) => Normalization::Zscore,
            ("quantile", None) => Normalization::Quantile,
            ("binning", None) => Normalization::binning(),
            ("binning", Some(b)) => Normalization::Binning {
                bins: b
                    .parse()
                    .map_err(|_| Error::InvalidParameter(format!("bad bin count '{b}'")))?,
            },
            ("pl", Some(path)) => Normalization::PiecewiseLinear(PlModel::load(Path::new(path))?),
            _ => {
                return Err(Error::InvalidParameter(format!(
                    "unknown normalization '{spec}'"
                )))
            }
        };
        norm.validate()?;
        Ok(norm)
    }

    /// Short lowercase name used in reports.
    pub fn label(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Normalization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Normalization::None => f.write_str("none"),
            Normalization::Minmax { .. } => f.write_str("minmax"),
            Normalization::CMinmax { lower, .. } if *lower == DEFAULT_CLIP_PERCENT => {
                f.write_str("cminmax")
            }
            Normalization::CMinmax { lower, .. } => write!(f, "cminmax:{lower}"),
            Normalization::Zscore => f.write_str("zscore"),
            Normalization::Quantile => f.write_str("quantile"),
            Normalization::Binning { bins } if *bins == DEFAULT_BINS => f.write_str("binning"),
            Normalization::Binning { bins } => write!(f, "binning:{bins}"),
            Normalization::PiecewiseLinear(_) => f.write_str("pl"),
        }
    }
}

fn check_target((j1, j2): (f64, f64)) -> Result<()> {
    if j1 < j2 && j1.is_finite() && j2.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "target range needs j1 < j2, got [{j1}, {j2}]"
        )))
    }
}

/// Affine map of `[i1, i2]` onto `[j1, j2]`. A zero-width source range
/// yields the constant `j1`.
pub fn minmax(image: &ImageGrid, i1: f64, i2: f64, j1: f64, j2: f64) -> Result<ImageGrid> {
    if i2 < i1 {
        return Err(Error::InvalidParameter(format!(
            "source range needs i1 <= i2, got [{i1}, {i2}]"
        )));
    }
    if i2 == i1 {
        return image.map(|_| j1);
    }
    let span = i2 - i1;
    let target = j2 - j1;
    image.map(|v| (v - i1) / span * target + j1)
}

/// Clips at the `p`-th and `q`-th percentiles, then maps the clipped range
/// onto `[j1, j2]`.
pub fn cminmax(image: &ImageGrid, p: f64, q: f64, j1: f64, j2: f64) -> Result<ImageGrid> {
    if p >= q {
        return Err(Error::InvalidParameter(format!(
            "clip percentiles need p < q, got ({p}, {q})"
        )));
    }
    let stats = image.stats();
    let (lo, hi) = (stats.percentile(p), stats.percentile(q));
    let clipped = image.map(|v| v.clamp(lo, hi))?;
    minmax(&clipped, lo, hi, j1, j2)
}

/// Zero mean, unit population standard deviation. Constant images map to 0.
pub fn zscore(image: &ImageGrid) -> Result<ImageGrid> {
    let n = image.len() as f64;
    let mean = image.mean();
    let var = image.data().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let std = var.sqrt();
    if std == 0.0 {
        return image.map(|_| 0.0);
    }
    image.map(|v| (v - mean) / std)
}

/// Zero median, unit inter-quartile range. With zero IQR only the shift is
/// applied.
pub fn quantile_norm(image: &ImageGrid) -> Result<ImageGrid> {
    let stats = image.stats();
    let median = stats.median;
    let iqr = stats.iqr();
    if iqr == 0.0 {
        return image.map(|v| v - median);
    }
    image.map(|v| (v - median) / iqr)
}

/// Maps intensities onto `bins` equidistant integer levels `0..bins`.
pub fn binning(image: &ImageGrid, bins: usize) -> Result<ImageGrid> {
    if bins < 2 {
        return Err(Error::InvalidParameter(format!(
            "binning needs at least 2 bins, got {bins}"
        )));
    }
    let (lo, hi) = (image.min(), image.max());
    if hi == lo {
        return image.map(|_| 0.0);
    }
    let b = bins as f64;
    let span = hi - lo;
    image.map(|v| (b * (v - lo) / span).floor().min(b - 1.0))
}
