//! Seeded MR-style distortions with a continuous strength in `[1, 5]`.
//!
//! Each kind has a parameter at strength 1 and at strength 5; intermediate
//! strengths interpolate linearly (gamma exponents interpolate in log
//! space). Only [`DistortionKind::GaussianNoise`] and
//! [`DistortionKind::ElasticDeform`] consume the seed.

mod apply;
mod params;

pub use apply::apply;
pub use params::{interpolate_param, DistortionParams};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::ImageGrid;

pub const MIN_STRENGTH: f64 = 1.0;
pub const MAX_STRENGTH: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum DistortionKind {
    BiasField,
    Ghosting,
    StripeArtifact,
    GaussianBlur,
    GaussianNoise,
    ReplaceArtifact,
    GammaHigh,
    GammaLow,
    ShiftIntensity,
    Translation,
    ElasticDeform,
}

impl DistortionKind {
    /// All kinds in report order.
    pub const ALL: [DistortionKind; 11] = [
        DistortionKind::BiasField,
        DistortionKind::Ghosting,
        DistortionKind::StripeArtifact,
        DistortionKind::GaussianBlur,
        DistortionKind::GaussianNoise,
        DistortionKind::ReplaceArtifact,
        DistortionKind::GammaHigh,
        DistortionKind::GammaLow,
        DistortionKind::ShiftIntensity,
        DistortionKind::Translation,
        DistortionKind::ElasticDeform,
    ];

    pub fn label(self) -> &'static str {
        match self {
            DistortionKind::BiasField => "bias-field",
            DistortionKind::Ghosting => "ghosting",
            DistortionKind::StripeArtifact => "stripe",
            DistortionKind::GaussianBlur => "blur",
            DistortionKind::GaussianNoise => "noise",
            DistortionKind::ReplaceArtifact => "replace",
            DistortionKind::GammaHigh => "gamma-high",
            DistortionKind::GammaLow => "gamma-low",
            DistortionKind::ShiftIntensity => "shift",
            DistortionKind::Translation => "translation",
            DistortionKind::ElasticDeform => "elastic",
        }
    }

    /// Human-readable name for tables.
    pub fn title(self) -> &'static str {
        match self {
            DistortionKind::BiasField => "Bias Field",
            DistortionKind::Ghosting => "Ghosting",
            DistortionKind::StripeArtifact => "Stripe Artifact",
            DistortionKind::GaussianBlur => "Gaussian Blur",
            DistortionKind::GaussianNoise => "Gaussian Noise",
            DistortionKind::ReplaceArtifact => "Replace Artifact",
            DistortionKind::GammaHigh => "Gamma High",
            DistortionKind::GammaLow => "Gamma Low",
            DistortionKind::ShiftIntensity => "Shift Intensity",
            DistortionKind::Translation => "Translation",
            DistortionKind::ElasticDeform => "Elastic Deform",
        }
    }

    fn index(self) -> u64 {
        DistortionKind::ALL.iter().position(|&k| k == self).unwrap_or(0) as u64
    }
}

impl fmt::Display for DistortionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for DistortionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DistortionKind::ALL
            .into_iter()
            .find(|k| k.label() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown distortion '{s}'")))
    }
}

impl TryFrom<String> for DistortionKind {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<DistortionKind> for String {
    fn from(k: DistortionKind) -> String {
        k.label().to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistortionSpec {
    pub kind: DistortionKind,
    pub strength: f64,
    pub seed: u64,
}

impl DistortionSpec {
    pub fn new(kind: DistortionKind, strength: f64, seed: u64) -> Result<Self> {
        check_strength(strength)?;
        Ok(Self { kind, strength, seed })
    }
}

pub(crate) fn check_strength(strength: f64) -> Result<()> {
    if (MIN_STRENGTH..=MAX_STRENGTH).contains(&strength) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "strength must lie in [1, 5], got {strength}"
        )))
    }
}

/// Seed for one cell of a sweep: the master seed XOR a splitmix64 hash of
/// `(kind index, strength index)`.
pub fn derive_seed(master: u64, kind: DistortionKind, strength_index: usize) -> u64 {
    master ^ splitmix64((kind.index() << 32) | strength_index as u64)
}

pub(crate) fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Every `(kind, strength)` combination applied to `image`, kinds outer.
pub fn sweep(
    image: &ImageGrid,
    kinds: &[DistortionKind],
    strengths: &[f64],
    seed: u64,
) -> Result<Vec<(DistortionSpec, ImageGrid)>> {
    let mut out = Vec::with_capacity(kinds.len() * strengths.len());
    for &kind in kinds {
        for (si, &strength) in strengths.iter().enumerate() {
            let spec = DistortionSpec::new(kind, strength, derive_seed(seed, kind, si))?;
            out.push((spec, apply(image, &spec)?));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::make_phantom;

    #[test]
    fn labels_round_trip() {
        for k in DistortionKind::ALL {
            assert_eq!(k.label().parse::<DistortionKind>().unwrap(), k);
        }
        assert!("motion".parse::<DistortionKind>().is_err());
    }

    #[test]
    fn strength_bounds() {
        assert!(DistortionSpec::new(DistortionKind::Ghosting, 0.99, 0).is_err());
        assert!(DistortionSpec::new(DistortionKind::Ghosting, 5.01, 0).is_err());
        assert!(DistortionSpec::new(DistortionKind::Ghosting, 5.0, 0).is_ok());
    }

    #[test]
    fn derived_seeds_are_distinct() {
        let mut seen = std::collections::HashSet::new();
        for k in DistortionKind::ALL {
            for s in 0..5 {
                assert!(seen.insert(derive_seed(42, k, s)));
            }
        }
    }

    #[test]
    fn full_sweep_size_and_determinism() {
        let img = make_phantom(0, 64, 64).unwrap();
        let strengths = [1.0, 2.0, 3.0, 4.0, 5.0];
        let a = sweep(&img, &DistortionKind::ALL, &strengths, 9).unwrap();
        assert_eq!(a.len(), 55);
        let b = sweep(&img, &DistortionKind::ALL, &strengths, 9).unwrap();
        for ((sa, ia), (sb, ib)) in a.iter().zip(&b) {
            assert_eq!(sa, sb);
            assert_eq!(ia, ib);
        }
        assert!(sweep(&img, &DistortionKind::ALL, &[], 9).unwrap().is_empty());
    }
}
