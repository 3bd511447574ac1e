use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ImageGrid;
use crate::error::{Error, Result};

/// How the data-range constant `L` is obtained.
///
/// For images `I, R` taken from a set `D` the resolved values are ordered
/// `L(PerImage, I) <= L(Pair, I, R) <= L(Dataset, D)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(try_from = "String", into = "String")]
pub enum DataRangeMode {
    /// `max - min` of the first image only.
    PerImage,
    /// Joint `max - min` of the two images of a pair.
    #[default]
    Pair,
    /// Joint `max - min` over every image supplied.
    Dataset,
    Fixed(f64),
}

/// Resolves `L` for `mode` over `images`.
///
/// `Pair` requires exactly two images. `Dataset` accepts any number; the
/// harness passes the whole image set. `Fixed` ignores the images.
pub fn resolve_data_range(mode: DataRangeMode, images: &[&ImageGrid]) -> Result<f64> {
    if images.is_empty() {
        return Err(Error::InvalidParameter(
            "data range needs at least one image".into(),
        ));
    }
    let joint = |imgs: &[&ImageGrid]| {
        let lo = imgs.iter().map(|i| i.min()).fold(f64::INFINITY, f64::min);
        let hi = imgs.iter().map(|i| i.max()).fold(f64::NEG_INFINITY, f64::max);
        hi - lo
    };
    let l = match mode {
        DataRangeMode::PerImage => images[0].range(),
        DataRangeMode::Pair => {
            if images.len() != 2 {
                return Err(Error::InvalidParameter(format!(
                    "pair data range needs exactly 2 images, got {}",
                    images.len()
                )));
            }
            joint(images)
        }
        DataRangeMode::Dataset => joint(images),
        DataRangeMode::Fixed(v) => {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "fixed data range must be positive, got {v}"
                )));
            }
            v
        }
    };
    if l > 0.0 {
        Ok(l)
    } else {
        Err(Error::DegenerateRange)
    }
}

impl DataRangeMode {
    pub fn label(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for DataRangeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DataRangeMode::PerImage => f.write_str("per-image"),
            DataRangeMode::Pair => f.write_str("pair"),
            DataRangeMode::Dataset => f.write_str("dataset"),
            DataRangeMode::Fixed(v) => write!(f, "fixed:{v}"),
        }
    }
}

impl FromStr for DataRangeMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per-image" => Ok(Self::PerImage),
            "pair" => Ok(Self::Pair),
            "dataset" => Ok(Self::Dataset),
            _ => {
                let v = s
                    .strip_prefix("fixed:")
                    .and_then(|v| v.parse::<f64>().ok())
                    .ok_or_else(|| Error::InvalidParameter(format!("unknown data range '{s}'")))?;
                if v.is_finite() && v > 0.0 {
                    Ok(Self::Fixed(v))
                } else {
                    Err(Error::InvalidParameter(format!(
                        "fixed data range must be positive, got {v}"
                    )))
                }
            }
        }
    }
}

impl TryFrom<String> for DataRangeMode {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<DataRangeMode> for String {
    fn from(m: DataRangeMode) -> String {
        m.to_string()
    }
}
