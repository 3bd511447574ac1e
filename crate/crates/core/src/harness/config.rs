use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::distort::{check_strength, DistortionKind};
use crate::error::{Error, Result};
use crate::image::DataRangeMode;
use crate::metric::Metric;
use crate::normalize::Normalization;

pub const DEFAULT_PHANTOM_SIZE: usize = 240;

/// One benchmark sweep, usually read from a TOML file.
///
/// ```toml
/// # Either a directory of .npy/.pgm/.csv rasters...
/// input_dir = "slices"
/// # ...or a number of generated phantoms (phantom_size defaults to 240).
/// # phantoms = 20
/// metrics = ["ssim", "psnr", "niqe"]
/// normalizations = ["none", "minmax", "cminmax", "zscore", "quantile", "binning"]
/// distortions = ["bias-field", "ghosting"]   # default: all eleven
/// strengths = [1, 2, 3, 4, 5]                # default
/// seed = 0
/// data_range = "pair"                        # per-image | pair | dataset | fixed:<v>
/// output_dir = "results"
/// threads = 0                                # 0 = one per core
/// niqe_model = "niqe.json"                   # required when metrics has niqe
/// brisque_model = "brisque.json"             # required when metrics has brisque
/// ```
///
/// Relative paths are resolved against the directory of the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkConfig {
    #[serde(default)]
    pub input_dir: Option<PathBuf>,
    #[serde(default)]
    pub phantoms: Option<usize>,
    #[serde(default = "default_phantom_size")]
    pub phantom_size: usize,
    pub metrics: Vec<Metric>,
    #[serde(default = "default_normalizations")]
    pub normalizations: Vec<String>,
    #[serde(default = "default_distortions")]
    pub distortions: Vec<DistortionKind>,
    #[serde(default = "default_strengths")]
    pub strengths: Vec<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub data_range: DataRangeMode,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub threads: usize,
    #[serde(default)]
    pub niqe_model: Option<PathBuf>,
    #[serde(default)]
    pub brisque_model: Option<PathBuf>,
}

fn default_phantom_size() -> usize {
    DEFAULT_PHANTOM_SIZE
}

fn default_normalizations() -> Vec<String> {
    vec!["none".to_string()]
}

fn default_distortions() -> Vec<DistortionKind> {
    DistortionKind::ALL.to_vec()
}

fn default_strengths() -> Vec<f64> {
    vec![1.0, 2.0, 3.0, 4.0, 5.0]
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("bench-output")
}

impl BenchmarkConfig {
    /// Phantom-corpus config with default lists.
    pub fn phantoms(count: usize, metrics: Vec<Metric>) -> Self {
        Self {
            input_dir: None,
            phantoms: Some(count),
            phantom_size: DEFAULT_PHANTOM_SIZE,
            metrics,
            normalizations: default_normalizations(),
            distortions: default_distortions(),
            strengths: default_strengths(),
            seed: 0,
            data_range: DataRangeMode::default(),
            output_dir: default_output_dir(),
            threads: 0,
            niqe_model: None,
            brisque_model: None,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// Reads and validates a config file, resolving relative paths against
    /// its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let mut config = Self::from_toml(&fs::read_to_string(path)?)?;
        let base = path.parent().unwrap_or(Path::new(""));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(dir) = config.input_dir.as_mut() {
            resolve(dir);
        }
        resolve(&mut config.output_dir);
        if let Some(p) = config.niqe_model.as_mut() {
            resolve(p);
        }
        if let Some(p) = config.brisque_model.as_mut() {
            resolve(p);
        }
        for spec in &mut config.normalizations {
            if let Some(model) = spec.strip_prefix("pl:") {
                let model = Path::new(model);
                if model.is_relative() {
                    *spec = format!("pl:{}", base.join(model).display());
                }
            }
        }
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParameter(msg.to_string()));
        match (&self.input_dir, self.phantoms) {
            (Some(_), Some(_)) => return bad("set either input_dir or phantoms, not both"),
            (None, None) => return bad("one of input_dir or phantoms is required"),
            (None, Some(0)) => return bad("phantoms must be positive"),
            _ => {}
        }
        if self.metrics.is_empty() {
            return bad("metric list is empty");
        }
        if self.distortions.is_empty() {
            return bad("distortion list is empty");
        }
        if self.normalizations.is_empty() {
            return bad("normalization list is empty");
        }
        if self.strengths.is_empty() {
            return bad("strength list is empty");
        }
        for &s in &self.strengths {
            check_strength(s)?;
        }
        if self.metrics.contains(&Metric::Niqe) && self.niqe_model.is_none() {
            return bad("niqe needs niqe_model");
        }
        if self.metrics.contains(&Metric::Brisque) && self.brisque_model.is_none() {
            return bad("brisque needs brisque_model");
        }
        Ok(())
    }

    /// Parsed normalizations; `pl:` entries load their model files.
    pub fn parsed_normalizations(&self) -> Result<Vec<Normalization>> {
        self.normalizations
            .iter()
            .map(|s| Normalization::from_spec(s))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = BenchmarkConfig::from_toml("phantoms = 2\nmetrics = [\"ssim\"]").unwrap();
        assert_eq!(c.distortions.len(), 11);
        assert_eq!(c.strengths, vec![1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!(c.normalizations, vec!["none"]);
        assert_eq!(c.data_range, DataRangeMode::Pair);
        assert_eq!(c.phantom_size, 240);
    }

    #[test]
    fn full_config_parses() {
        let text = r#"
            input_dir = "imgs"
            metrics = ["ssim", "ms-ssim", "mlc"]
            normalizations = ["none", "cminmax:2"]
            distortions = ["ghosting", "stripe"]
            strengths = [1, 2.5]
            seed = 9
            data_range = "fixed:4095"
            output_dir = "out"
            threads = 2
        "#;
        let c = BenchmarkConfig::from_toml(text).unwrap();
        assert_eq!(c.metrics, vec![Metric::Ssim, Metric::MsSsim, Metric::Mlc]);
        assert_eq!(c.data_range, DataRangeMode::Fixed(4095.0));
        assert_eq!(c.strengths, vec![1.0, 2.5]);
        assert_eq!(c.parsed_normalizations().unwrap()[1].label(), "cminmax:2");
    }

    #[test]
    fn rejects_invalid_configs() {
        for text in [
            "metrics = [\"ssim\"]",
            "phantoms = 1\ninput_dir = \"x\"\nmetrics = [\"ssim\"]",
            "phantoms = 1\nmetrics = []",
            "phantoms = 1\nmetrics = [\"ssim\"]\ndistortions = []",
            "phantoms = 1\nmetrics = [\"ssim\"]\nstrengths = [0]",
            "phantoms = 1\nmetrics = [\"ssim\"]\nstrengths = [6]",
            "phantoms = 1\nmetrics = [\"lpips\"]",
            "phantoms = 1\nmetrics = [\"niqe\"]",
            "phantoms = 1\nmetrics = [\"ssim\"]\nbogus = 1",
        ] {
            assert!(BenchmarkConfig::from_toml(text).is_err(), "{text}");
        }
    }
}
