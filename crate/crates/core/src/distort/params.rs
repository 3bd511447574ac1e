use super::{check_strength, DistortionKind};
use crate::error::Result;

/// Concrete parameters of one distortion at one strength.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DistortionParams {
    /// Multiplier of the bias polynomial inside the exponential.
    BiasField { c: f64 },
    /// Scale removed from every second spectrum row.
    Ghosting { intensity: f64 },
    /// Injected bin magnitude as a fraction of the spectrum maximum.
    StripeArtifact { intensity: f64 },
    GaussianBlur { sigma: f64 },
    /// Noise standard deviation as a fraction of the intensity range.
    GaussianNoise { sigma_fraction: f64 },
    /// Fraction of the half-width that is overwritten by its mirror.
    ReplaceArtifact { fraction: f64 },
    Gamma { gamma: f64 },
    /// Offset as a fraction of the intensity range.
    ShiftIntensity { fraction: f64 },
    /// Shift as a fraction of the image size.
    Translation { fraction: f64 },
    /// `grid` control points per side, displacement scale `displacement`.
    ElasticDeform { grid: f64, displacement: f64 },
}

fn lerp(p1: f64, p5: f64, strength: f64) -> f64 {
    p1 + (strength - 1.0) / 4.0 * (p5 - p1)
}

pub fn interpolate_param(kind: DistortionKind, strength: f64) -> Result<DistortionParams> {
    check_strength(strength)?;
    let s = strength;
    Ok(match kind {
        DistortionKind::BiasField => DistortionParams::BiasField { c: lerp(0.5, 10.0, s) },
        DistortionKind::Ghosting => DistortionParams::Ghosting {
            intensity: lerp(0.05, 0.4, s),
        },
        DistortionKind::StripeArtifact => DistortionParams::StripeArtifact {
            intensity: lerp(0.05, 0.5, s),
        },
        DistortionKind::GaussianBlur => DistortionParams::GaussianBlur {
            sigma: lerp(0.2, 1.3, s),
        },
        DistortionKind::GaussianNoise => DistortionParams::GaussianNoise {
            sigma_fraction: lerp(0.005, 0.05, s),
        },
        DistortionKind::ReplaceArtifact => DistortionParams::ReplaceArtifact {
            fraction: lerp(0.1, 1.0, s),
        },
        DistortionKind::GammaHigh => DistortionParams::Gamma {
            gamma: lerp(0.095, 0.916, s).exp(),
        },
        DistortionKind::GammaLow => DistortionParams::Gamma {
            gamma: lerp(-0.01, -0.916, s).exp(),
        },
        DistortionKind::ShiftIntensity => DistortionParams::ShiftIntensity {
            fraction: lerp(0.05, 0.25, s),
        },
        DistortionKind::Translation => DistortionParams::Translation {
            fraction: lerp(0.01, 0.2, s),
        },
        DistortionKind::ElasticDeform => DistortionParams::ElasticDeform {
            grid: lerp(18.0, 11.0, s),
            displacement: lerp(0.03, 0.1, s),
        },
    })
}
