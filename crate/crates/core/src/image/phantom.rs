//! Seeded brain-like test images.
//!
//! Layout: exact-zero background, an elliptical head made of nested
//! ellipses with distinct intensities, fine multiplicative texture inside
//! the head, and one bright circular lesion placed in a single lateral half.
//! Every constant below is frozen; changing one changes every golden value
//! derived from phantoms.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ImageGrid, LabelMask};
use crate::error::{Error, Result};

const MIN_SIZE: usize = 64;
const HEAD_SEMI_AXIS_ROWS: f64 = 0.42;
const HEAD_SEMI_AXIS_COLS: f64 = 0.36;
const TISSUE_LOW: f64 = 600.0;
const TISSUE_HIGH: f64 = 3200.0;
const LESION_LOW: f64 = 3800.0;
const LESION_HIGH: f64 = 4400.0;
const TEXTURE_WAVES: usize = 8;
const TEXTURE_AMPLITUDE: f64 = 0.12;

/// Where the phantom generator put things.
#[derive(Debug, Clone)]
pub struct PhantomInfo {
    /// `(row, col)` of the lesion centre.
    pub lesion_center: (f64, f64),
    pub lesion_radius: f64,
    /// 1 = lesion, 2 = other head tissue, 0 = background.
    pub labels: LabelMask,
}

/// Deterministic phantom for `seed`. Both sides must be at least 64 pixels.
pub fn make_phantom(seed: u64, width: usize, height: usize) -> Result<ImageGrid> {
    make_phantom_with_info(seed, width, height).map(|(img, _)| img)
}

pub fn make_phantom_with_info(
    seed: u64,
    width: usize,
    height: usize,
) -> Result<(ImageGrid, PhantomInfo)> {
    if width < MIN_SIZE || height < MIN_SIZE {
        return Err(Error::TooSmall {
            required: MIN_SIZE,
            actual: (width, height),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (w, h) = (width as f64, height as f64);

    let cy = h / 2.0 + rng.random_range(-0.02..0.02) * h;
    let cx = w / 2.0 + rng.random_range(-0.02..0.02) * w;
    let ay = HEAD_SEMI_AXIS_ROWS * h * rng.random_range(0.96..1.04);
    let ax = HEAD_SEMI_AXIS_COLS * w * rng.random_range(0.96..1.04);

    // Nested ellipses, outermost first. Intensities are spread over the
    // tissue range then shuffled so neighbouring layers always differ.
    let layers = rng.random_range(3..=6usize);
    let mut levels: Vec<f64> = (0..layers)
        .map(|k| {
            let t = k as f64 / (layers - 1) as f64;
            TISSUE_LOW + t * (TISSUE_HIGH - TISSUE_LOW) + rng.random_range(-60.0..60.0)
        })
        .collect();
    for i in (1..levels.len()).rev() {
        let j = rng.random_range(0..=i);
        levels.swap(i, j);
    }
    let ellipses: Vec<Ellipse> = (0..layers)
        .map(|k| {
            let shrink = 1.0 - 0.8 * k as f64 / layers as f64;
            Ellipse {
                cy: cy + rng.random_range(-0.03..0.03) * ay * (k > 0) as u8 as f64,
                cx: cx + rng.random_range(-0.03..0.03) * ax * (k > 0) as u8 as f64,
                ry: ay * shrink * rng.random_range(0.95..1.0),
                rx: ax * shrink * rng.random_range(0.95..1.0),
                angle: if k == 0 { 0.0 } else { rng.random_range(-0.3..0.3) },
                value: levels[k],
            }
        })
        .collect();

    let waves: Vec<(f64, f64, f64)> = (0..TEXTURE_WAVES)
        .map(|_| {
            let wavelength = rng.random_range(4.0..14.0);
            let theta = rng.random_range(0.0..PI);
            let k = 2.0 * PI / wavelength;
            (k * theta.cos(), k * theta.sin(), rng.random_range(0.0..2.0 * PI))
        })
        .collect();

    let side = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    let lesion_radius = 0.05 * w.min(h) * rng.random_range(0.8..1.2);
    let lesion_center = (
        cy + rng.random_range(-0.15..0.15) * ay,
        cx + side * rng.random_range(0.35..0.55) * ax,
    );
    let lesion_value = rng.random_range(LESION_LOW..LESION_HIGH);

    let mut data = Vec::with_capacity(width * height);
    let mut labels = Vec::with_capacity(width * height);
    for r in 0..height {
        for c in 0..width {
            let (y, x) = (r as f64 + 0.5, c as f64 + 0.5);
            let inside = ellipses.iter().rev().find(|e| e.contains(y, x));
            let Some(layer) = inside else {
                data.push(0.0);
                labels.push(0);
                continue;
            };
            let dl = ((y - lesion_center.0).powi(2) + (x - lesion_center.1).powi(2)).sqrt();
            let (base, label) = if dl <= lesion_radius {
                (lesion_value, 1)
            } else {
                (layer.value, 2)
            };
            let tex: f64 = waves
                .iter()
                .map(|&(ky, kx, phase)| (ky * y + kx * x + phase).sin())
                .sum::<f64>()
                / (TEXTURE_WAVES as f64 / 2.0).sqrt();
            data.push(base * (1.0 + TEXTURE_AMPLITUDE * tex / 2.0));
            labels.push(label);
        }
    }

    let image = ImageGrid::new(width, height, data)?.with_spacing(1.0, 1.0);
    let info = PhantomInfo {
        lesion_center,
        lesion_radius,
        labels: LabelMask::new(width, height, labels)?,
    };
    Ok((image, info))
}

struct Ellipse {
    cy: f64,
    cx: f64,
    ry: f64,
    rx: f64,
    angle: f64,
    value: f64,
}

impl Ellipse {
    fn contains(&self, y: f64, x: f64) -> bool {
        let (s, c) = self.angle.sin_cos();
        let (dy, dx) = (y - self.cy, x - self.cx);
        let u = c * dx + s * dy;
        let v = -s * dx + c * dy;
        (u / self.rx).powi(2) + (v / self.ry).powi(2) <= 1.0
    }
}
