//! Complex-wavelet SSIM on a frequency-domain complex steerable pyramid.
//!
//! The pyramid follows the classic construction: raised-cosine radial
//! masks on a log2-radius grid, angular masks `cos(phi)^(bands-1)`
//! restricted to one half plane, and a low-pass residual that is cropped
//! to half size in the frequency domain before the next level.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::rc::Rc;

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::{fft2, fftshift, ifft2, ifftshift};
use crate::filter::box_sum_valid;
use crate::image::ImageGrid;
use crate::normalize::minmax;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CwSsimParams {
    pub levels: usize,
    pub orientations: usize,
    /// Side of the square window the local sums run over.
    pub window: usize,
    pub k: f64,
}

impl Default for CwSsimParams {
    fn default() -> Self {
        Self {
            levels: 2,
            orientations: 16,
            window: 7,
            k: 1e-12,
        }
    }
}

/// CW-SSIM with the default pyramid. Each image is first mapped to
/// `[0, 255]` on its own.
pub fn cw_ssim(image: &ImageGrid, reference: &ImageGrid) -> Result<f64> {
    cw_ssim_with(image, reference, &CwSsimParams::default())
}

pub fn cw_ssim_with(image: &ImageGrid, reference: &ImageGrid, params: &CwSsimParams) -> Result<f64> {
    image.ensure_same_dims(reference)?;
    if params.levels == 0 || params.orientations == 0 || params.window == 0 {
        return Err(Error::InvalidParameter(
            "CW-SSIM needs at least one level, orientation and window pixel".into(),
        ));
    }
    let (w, h) = image.dims();
    let (mut lw, mut lh) = (w, h);
    for _ in 1..params.levels {
        (lw, lh) = (half(lw), half(lh));
    }
    if lw < params.window || lh < params.window {
        let mut required = params.window;
        for _ in 1..params.levels {
            required *= 2;
        }
        return Err(Error::TooSmall {
            required,
            actual: (w, h),
        });
    }

    let to_255 = |img: &ImageGrid| minmax(img, img.min(), img.max(), 0.0, 255.0);
    let plan = PyramidPlan::cached(w, h, params.levels, params.orientations);
    let a = plan.build(&to_255(image)?);
    let b = plan.build(&to_255(reference)?);

    let mut total = 0.0;
    let mut count = 0usize;
    for (ba, bb) in a.bands.iter().zip(&b.bands) {
        let corr: Vec<Complex64> = ba.data.iter().zip(&bb.data).map(|(x, y)| x * y.conj()).collect();
        let varr: Vec<f64> = ba
            .data
            .iter()
            .zip(&bb.data)
            .map(|(x, y)| x.norm_sqr() + y.norm_sqr())
            .collect();
        let corr_sum = box_sum_valid(&corr, ba.width, ba.height, params.window);
        let varr_sum = box_sum_valid(&varr, ba.width, ba.height, params.window);
        let map_mean = corr_sum
            .iter()
            .zip(&varr_sum)
            .map(|(c, v)| (2.0 * c.norm() + params.k) / (v + params.k))
            .sum::<f64>()
            / corr_sum.len() as f64;
        total += map_mean;
        count += 1;
    }
    Ok(total / count as f64)
}

/// Side of the cropped low-pass band.
fn half(n: usize) -> usize {
    ((n as f64 - 0.5) / 2.0).ceil() as usize
}

struct Band {
    width: usize,
    height: usize,
    data: Vec<Complex64>,
}

/// Oriented complex subbands, finest level first.
struct SteerablePyramid {
    bands: Vec<Band>,
}

/// Frequency masks of one pyramid level, shared by every image of the
/// same size.
struct LevelPlan {
    width: usize,
    height: usize,
    /// Per orientation, the combined radial and angular gain, laid out in
    /// natural (uncentred) frequency order.
    band_gains: Vec<Vec<f64>>,
    /// `uncentred[i] = centred[gather[i]]`
    gather: Vec<usize>,
    /// `(col, row, width, height)` of the crop to the next level and the
    /// low-pass gain applied after cropping.
    next: Option<(usize, usize, usize, usize, Vec<f64>)>,
}

struct PyramidPlan {
    input_lowpass: Vec<f64>,
    levels: Vec<LevelPlan>,
}

impl PyramidPlan {
    fn new(width: usize, height: usize, levels: usize, orientations: usize) -> Self {
        let (mut w, mut h) = (width, height);
        let (mut log_rad, mut angle) = polar_grid(w, h);
        let input_lowpass = log_rad.iter().map(|&lr| lowpass(lr)).collect();
        let order = orientations - 1;
        let norm = angular_gain(orientations);
        let mut plans = Vec::with_capacity(levels);
        for level in 0..levels {
            let shift = (level + 1) as f64;
            let gather = ifftshift(&(0..w * h).collect::<Vec<usize>>(), w, h);
            let band_gains = (0..orientations)
                .map(|b| {
                    let offset = PI * b as f64 / orientations as f64;
                    gather
                        .iter()
                        .map(|&i| highpass(log_rad[i] + shift) * angular_mask(angle[i] - offset, order, norm))
                        .collect()
                })
                .collect();
            let next = (level + 1 < levels).then(|| {
                let (cw, ch) = (half(w), half(h));
                let (c0, r0) = (crop_start(w, cw), crop_start(h, ch));
                log_rad = crop(&log_rad, w, c0, r0, cw, ch);
                angle = crop(&angle, w, c0, r0, cw, ch);
                let gain = log_rad.iter().map(|&lr| lowpass(lr + shift)).collect();
                (c0, r0, cw, ch, gain)
            });
            plans.push(LevelPlan {
                width: w,
                height: h,
                band_gains,
                gather,
                next: None,
            });
            if let Some(n) = next {
                (w, h) = (n.2, n.3);
                plans.last_mut().unwrap().next = Some(n);
            }
        }
        Self {
            input_lowpass,
            levels: plans,
        }
    }

    /// The plan for the most recent size on this thread is kept; sweeps
    /// score many images of one size.
    fn cached(width: usize, height: usize, levels: usize, orientations: usize) -> Rc<Self> {
        thread_local! {
            static LAST: RefCell<Option<((usize, usize, usize, usize), Rc<PyramidPlan>)>> =
                const { RefCell::new(None) };
        }
        let key = (width, height, levels, orientations);
        LAST.with(|last| {
            let mut last = last.borrow_mut();
            match last.as_ref() {
                Some((k, plan)) if *k == key => Rc::clone(plan),
                _ => {
                    let plan = Rc::new(Self::new(width, height, levels, orientations));
                    *last = Some((key, Rc::clone(&plan)));
                    plan
                }
            }
        })
    }

    fn build(&self, image: &ImageGrid) -> SteerablePyramid {
        let (w, h) = image.dims();
        let mut lodft = fftshift(&fft2(image.data(), w, h), w, h);
        for (v, &g) in lodft.iter_mut().zip(&self.input_lowpass) {
            *v *= g;
        }
        let orientations = self.levels[0].band_gains.len();
        // (-i)^order
        let phase = Complex64::new(0.0, -1.0).powu((orientations - 1) as u32);
        let mut bands = Vec::with_capacity(self.levels.len() * orientations);
        for level in &self.levels {
            let (w, h) = (level.width, level.height);
            for gains in &level.band_gains {
                let mut data: Vec<Complex64> = level
                    .gather
                    .iter()
                    .zip(gains)
                    .map(|(&i, &g)| lodft[i] * phase * g)
                    .collect();
                ifft2(&mut data, w, h);
                bands.push(Band {
                    width: w,
                    height: h,
                    data,
                });
            }
            if let Some((c0, r0, cw, ch, gain)) = &level.next {
                lodft = crop(&lodft, w, *c0, *r0, *cw, *ch);
                for (v, &g) in lodft.iter_mut().zip(gain) {
                    *v *= g;
                }
            }
        }
        SteerablePyramid { bands }
    }
}

fn crop<T: Copy>(v: &[T], width: usize, c0: usize, r0: usize, cw: usize, ch: usize) -> Vec<T> {
    (0..ch)
        .flat_map(|r| v[(r0 + r) * width + c0..(r0 + r) * width + c0 + cw].iter().copied())
        .collect()
}

/// First index of the centred crop of size `lo` from size `n`.
fn crop_start(n: usize, lo: usize) -> usize {
    let ctr = ((n as f64 + 0.5) / 2.0).ceil() as usize;
    let lo_ctr = ((lo as f64 + 0.5) / 2.0).ceil() as usize;
    ctr - lo_ctr
}

/// log2 radius and angle of every frequency in a centred spectrum, with
/// the Nyquist radius at 1. The DC radius borrows its left neighbour's
/// value so the log stays finite.
fn polar_grid(width: usize, height: usize) -> (Vec<f64>, Vec<f64>) {
    let ctr_c = width / 2;
    let ctr_r = height / 2;
    let mut log_rad = Vec::with_capacity(width * height);
    let mut angle = Vec::with_capacity(width * height);
    for r in 0..height {
        let y = (r as f64 - ctr_r as f64) / (height as f64 / 2.0);
        for c in 0..width {
            let x = (c as f64 - ctr_c as f64) / (width as f64 / 2.0);
            log_rad.push((x * x + y * y).sqrt());
            angle.push(y.atan2(x));
        }
    }
    let dc = ctr_r * width + ctr_c;
    log_rad[dc] = log_rad[dc - 1];
    for v in &mut log_rad {
        *v = v.log2();
    }
    (log_rad, angle)
}

/// Raised-cosine transition over `t` in `[-1, 0]`: 1 above, 0 below.
fn highpass(t: f64) -> f64 {
    (PI / 2.0 * t.clamp(-1.0, 0.0)).cos()
}

fn lowpass(t: f64) -> f64 {
    (PI / 2.0 * t.clamp(-1.0, 0.0)).sin().abs()
}

fn angular_gain(orientations: usize) -> f64 {
    let order = orientations - 1;
    let mut factorial = 1.0f64;
    for k in 1..=order {
        factorial *= k as f64;
    }
    let mut factorial_2 = 1.0f64;
    for k in 1..=2 * order {
        factorial_2 *= k as f64;
    }
    let c = 2f64.powi(2 * order as i32) * factorial * factorial / (orientations as f64 * factorial_2);
    2.0 * c.sqrt()
}

fn angular_mask(phi: f64, order: usize, gain: f64) -> f64 {
    let wrapped = (PI + phi).rem_euclid(2.0 * PI) - PI;
    if wrapped.abs() < PI / 2.0 {
        gain * phi.cos().powi(order as i32)
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::make_phantom;

    #[test]
    fn half_sizes() {
        assert_eq!(half(240), 120);
        assert_eq!(half(121), 61);
        assert_eq!(half(7), 4);
        assert_eq!(crop_start(240, 120), 60);
        assert_eq!(crop_start(121, 61), 30);
    }

    #[test]
    fn identity_is_one() {
        let img = make_phantom(2, 96, 80).unwrap();
        assert!((cw_ssim(&img, &img).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn negation_keeps_magnitudes() {
        // after per-image min-max, -I is 255 - I' and every subband flips sign
        let img = make_phantom(4, 64, 64).unwrap();
        let neg = img.map(|v| -v).unwrap();
        assert!((cw_ssim(&neg, &img).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn masks_partition_energy() {
        // lowpass^2 + highpass^2 = 1 at every radius
        for i in -30..=10 {
            let t = i as f64 / 10.0;
            assert!((lowpass(t).powi(2) + highpass(t).powi(2) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn angular_masks_sum_to_constant() {
        // steerability: sum of squared masks over orientations is flat
        let n = 4;
        let gain = angular_gain(n);
        let total = |phi: f64| -> f64 {
            (0..n)
                .map(|b| {
                    let m = angular_mask(phi - PI * b as f64 / n as f64, n - 1, gain);
                    let m2 = angular_mask(phi + PI - PI * b as f64 / n as f64, n - 1, gain);
                    m * m + m2 * m2
                })
                .sum()
        };
        let base = total(0.1);
        for k in 0..20 {
            assert!((total(k as f64 * 0.3) - base).abs() < 1e-9);
        }
    }

    #[test]
    fn too_small_is_rejected() {
        let img = ImageGrid::filled(12, 12, 1.0).unwrap();
        assert!(matches!(cw_ssim(&img, &img), Err(Error::TooSmall { .. })));
        let img = ImageGrid::filled(13, 13, 1.0).unwrap();
        assert!(cw_ssim(&img, &img).is_ok());
    }
}
