//! The single registry of metric names, orientations and dispatch.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{resolve_data_range, DataRangeMode, ImageGrid, LabelMask};
use crate::quality::{self, NiqeModel, SvrModel};
use crate::reference::{self, DscClass, DSC_EPSILON, NMI_BINS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Metric {
    Ssim,
    MsSsim,
    CwSsim,
    Psnr,
    Nmse,
    Mse,
    Mae,
    Rmse,
    Nmi,
    Pcc,
    Dsc,
    Be,
    Br,
    Mb,
    Vl,
    Bew,
    Jnb,
    Cpbd,
    Mlc,
    Mslc,
    Brisque,
    Niqe,
    Mtv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    HigherIsBetter,
    LowerIsBetter,
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Orientation::HigherIsBetter => "higher",
            Orientation::LowerIsBetter => "lower",
        })
    }
}

impl Metric {
    /// Every metric in report order: reference metrics first.
    pub const ALL: [Metric; 23] = [
        Metric::Ssim,
        Metric::MsSsim,
        Metric::CwSsim,
        Metric::Psnr,
        Metric::Nmse,
        Metric::Mse,
        Metric::Mae,
        Metric::Rmse,
        Metric::Nmi,
        Metric::Pcc,
        Metric::Dsc,
        Metric::Be,
        Metric::Br,
        Metric::Mb,
        Metric::Vl,
        Metric::Bew,
        Metric::Jnb,
        Metric::Cpbd,
        Metric::Mlc,
        Metric::Mslc,
        Metric::Brisque,
        Metric::Niqe,
        Metric::Mtv,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Ssim => "ssim",
            Metric::MsSsim => "ms-ssim",
            Metric::CwSsim => "cw-ssim",
            Metric::Psnr => "psnr",
            Metric::Nmse => "nmse",
            Metric::Mse => "mse",
            Metric::Mae => "mae",
            Metric::Rmse => "rmse",
            Metric::Nmi => "nmi",
            Metric::Pcc => "pcc",
            Metric::Dsc => "dsc",
            Metric::Be => "be",
            Metric::Br => "br",
            Metric::Mb => "mb",
            Metric::Vl => "vl",
            Metric::Bew => "bew",
            Metric::Jnb => "jnb",
            Metric::Cpbd => "cpbd",
            Metric::Mlc => "mlc",
            Metric::Mslc => "mslc",
            Metric::Brisque => "brisque",
            Metric::Niqe => "niqe",
            Metric::Mtv => "mtv",
        }
    }

    pub fn is_reference(self) -> bool {
        matches!(
            self,
            Metric::Ssim
                | Metric::MsSsim
                | Metric::CwSsim
                | Metric::Psnr
                | Metric::Nmse
                | Metric::Mse
                | Metric::Mae
                | Metric::Rmse
                | Metric::Nmi
                | Metric::Pcc
                | Metric::Dsc
        )
    }

    pub fn orientation(self) -> Orientation {
        match self {
            Metric::Ssim
            | Metric::MsSsim
            | Metric::CwSsim
            | Metric::Psnr
            | Metric::Nmi
            | Metric::Pcc
            | Metric::Dsc
            | Metric::Mb
            | Metric::Cpbd => Orientation::HigherIsBetter,
            _ => Orientation::LowerIsBetter,
        }
    }

    /// Score of a perfect match for reference metrics.
    pub fn identity_value(self) -> Option<f64> {
        match self {
            Metric::Ssim | Metric::MsSsim | Metric::CwSsim | Metric::Pcc | Metric::Dsc => Some(1.0),
            Metric::Nmi => Some(2.0),
            Metric::Psnr => Some(f64::INFINITY),
            Metric::Nmse | Metric::Mse | Metric::Mae | Metric::Rmse => Some(0.0),
            _ => None,
        }
    }

    /// Parses a comma-separated list such as `ssim,psnr`.
    pub fn parse_list(text: &str) -> Result<Vec<Metric>> {
        text.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::parse)
            .collect()
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        Metric::ALL
            .into_iter()
            .find(|m| m.name() == lower)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown metric '{s}'")))
    }
}

impl TryFrom<String> for Metric {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Metric> for String {
    fn from(m: Metric) -> String {
        m.name().to_string()
    }
}

/// Everything a metric may need besides the images.
#[derive(Debug, Clone, Default)]
pub struct MetricContext {
    pub data_range: DataRangeMode,
    /// Range over the whole image set, used in `Dataset` mode.
    pub dataset_range: Option<f64>,
    pub niqe_model: Option<NiqeModel>,
    pub brisque_model: Option<SvrModel>,
    pub dsc_class: Option<DscClass>,
}

impl MetricContext {
    pub fn new(data_range: DataRangeMode) -> Self {
        Self {
            data_range,
            ..Self::default()
        }
    }

    /// `L` for a pair.
    pub fn pair_range(&self, image: &ImageGrid, reference: &ImageGrid) -> Result<f64> {
        match (self.data_range, self.dataset_range) {
            (DataRangeMode::Dataset, Some(l)) => positive(l),
            (mode, _) => resolve_data_range(mode, &[image, reference]),
        }
    }

    /// `L` for a single image; `Pair` degrades to the image's own range.
    pub fn image_range(&self, image: &ImageGrid) -> Result<f64> {
        match (self.data_range, self.dataset_range) {
            (DataRangeMode::Dataset, Some(l)) => positive(l),
            (DataRangeMode::Pair, _) => resolve_data_range(DataRangeMode::PerImage, &[image]),
            (mode, _) => resolve_data_range(mode, &[image]),
        }
    }
}

fn positive(l: f64) -> Result<f64> {
    if l > 0.0 && l.is_finite() {
        Ok(l)
    } else {
        Err(Error::DegenerateRange)
    }
}

/// Scores `metric`. Reference metrics need `reference`; no-reference
/// metrics ignore it. DSC reads both images as integer label maps.
pub fn evaluate(
    metric: Metric,
    image: &ImageGrid,
    reference: Option<&ImageGrid>,
    ctx: &MetricContext,
) -> Result<f64> {
    if metric.is_reference() {
        let reference = reference.ok_or_else(|| {
            Error::InvalidParameter(format!("{metric} needs a reference image"))
        })?;
        image.ensure_same_dims(reference)?;
        return match metric {
            Metric::Ssim => reference::ssim(image, reference, ctx.pair_range(image, reference)?),
            Metric::MsSsim => reference::ms_ssim(image, reference, ctx.pair_range(image, reference)?),
            Metric::CwSsim => reference::cw_ssim(image, reference),
            Metric::Psnr => reference::psnr(image, reference, ctx.pair_range(image, reference)?),
            Metric::Nmse => reference::nmse(image, reference),
            Metric::Mse => Ok(reference::error_metrics(image, reference)?.mse),
            Metric::Mae => Ok(reference::error_metrics(image, reference)?.mae),
            Metric::Rmse => Ok(reference::error_metrics(image, reference)?.rmse),
            Metric::Nmi => reference::nmi(image, reference, NMI_BINS),
            Metric::Pcc => reference::pcc(image, reference),
            Metric::Dsc => reference::dsc(
                &LabelMask::from_image(image)?,
                &LabelMask::from_image(reference)?,
                ctx.dsc_class.unwrap_or(DscClass::TotalForeground),
                DSC_EPSILON,
            ),
            _ => unreachable!("covered by is_reference"),
        };
    }
    match metric {
        Metric::Be => quality::blur_effect(image),
        Metric::Br => Ok(quality::blur_ratio(image, ctx.image_range(image)?)?.ratio),
        Metric::Mb => Ok(quality::blur_ratio(image, ctx.image_range(image)?)?.mean_blur),
        Metric::Vl => Ok(quality::variance_of_laplacian(image)),
        Metric::Bew => quality::blurred_edge_width(image, ctx.image_range(image)?),
        Metric::Jnb => quality::jnb(image, ctx.image_range(image)?),
        Metric::Cpbd => quality::cpbd(image, ctx.image_range(image)?),
        Metric::Mlc => quality::mean_line_correlation(image),
        Metric::Mslc => quality::mean_shifted_line_correlation(image),
        Metric::Brisque => {
            let model = ctx.brisque_model.as_ref().ok_or_else(|| {
                Error::InvalidParameter("brisque needs a regressor model".into())
            })?;
            quality::brisque_score(image, model)
        }
        Metric::Niqe => {
            let model = ctx
                .niqe_model
                .as_ref()
                .ok_or_else(|| Error::InvalidParameter("niqe needs a fitted model".into()))?;
            quality::niqe_score(image, model)
        }
        Metric::Mtv => Ok(quality::mean_total_variation(image)),
        _ => unreachable!("reference metrics handled above"),
    }
}

/// One scored metric, serialisable as a CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub metric: Metric,
    pub score: f64,
    pub orientation: Orientation,
    pub data_range_mode: DataRangeMode,
    pub normalization: String,
}

impl MetricReport {
    pub const CSV_HEADER: &'static str = "metric,score,orientation,data_range_mode,normalization";

    pub fn new(metric: Metric, score: f64, data_range_mode: DataRangeMode, normalization: &str) -> Self {
        Self {
            metric,
            score,
            orientation: metric.orientation(),
            data_range_mode,
            normalization: normalization.to_string(),
        }
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{:?},{},{},{}",
            self.metric, self.score, self.orientation, self.data_range_mode, self.normalization
        )
    }
}
