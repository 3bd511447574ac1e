//! Piecewise-linear histogram standardization.
//!
//! Training learns three standard-scale landmarks from a corpus: the mean
//! low and high percentiles (`s1`, `s2`) and the mean foreground mode after
//! each image's percentile range has been mapped onto `[s1, s2]` (`m_s`).
//! Applying the model maps an image's own `(p_low, mode, p_high)` onto
//! `(s1, m_s, s2)` with two linear segments and clamps to `[s1, s2]`.

use std::fs;
use std::path::Path;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::ImageGrid;

/// Histogram resolution used to locate the foreground mode.
pub const PL_HISTOGRAM_BINS: usize = 256;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlModel {
    pub s1: f64,
    pub m_s: f64,
    pub s2: f64,
    pub p_low: f64,
    pub p_high: f64,
}

impl PlModel {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=100.0).contains(&self.p_low)
            || !(0.0..=100.0).contains(&self.p_high)
            || self.p_low >= self.p_high
        {
            return Err(Error::InvalidParameter(format!(
                "landmark percentiles need 0 <= low < high <= 100, got ({}, {})",
                self.p_low, self.p_high
            )));
        }
        if !(self.s1 < self.s2) || !self.m_s.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "standard scale needs s1 < s2, got [{}, {}]",
                self.s1, self.s2
            )));
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let model: PlModel = serde_json::from_str(&fs::read_to_string(path)?)?;
        model.validate()?;
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}

/// Centre of the fullest bin of the histogram of strictly positive
/// intensities. Falls back to all pixels when nothing is positive.
pub fn foreground_mode(image: &ImageGrid) -> f64 {
    let fg: Vec<f64> = image.data().iter().copied().filter(|&v| v > 0.0).collect();
    let values: &[f64] = if fg.is_empty() { image.data() } else { &fg };
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi == lo {
        return lo;
    }
    let bins = PL_HISTOGRAM_BINS;
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &v in values {
        let b = (((v - lo) / width) as usize).min(bins - 1);
        counts[b] += 1;
    }
    let mut best = 0;
    for (b, &n) in counts.iter().enumerate() {
        if n > counts[best] {
            best = b;
        }
    }
    lo + (best as f64 + 0.5) * width
}

/// Learns landmarks from `images`. Typical percentiles are 1 and 99.
pub fn pl_fit(images: &[ImageGrid], p_low: f64, p_high: f64) -> Result<PlModel> {
    if images.is_empty() {
        return Err(Error::Empty);
    }
    let mut lows = Vec::with_capacity(images.len());
    let mut highs = Vec::with_capacity(images.len());
    let mut modes = Vec::with_capacity(images.len());
    for image in images {
        let stats = image.stats();
        lows.push(stats.percentile(p_low));
        highs.push(stats.percentile(p_high));
        modes.push(foreground_mode(image));
    }
    let n = images.len() as f64;
    let s1 = lows.iter().sum::<f64>() / n;
    let s2 = highs.iter().sum::<f64>() / n;
    if !(s1 < s2) {
        return Err(Error::degenerate(format!(
            "training corpus has no spread between percentiles {p_low} and {p_high}"
        )));
    }

    let mut mapped = Vec::with_capacity(images.len());
    for ((&lo, &hi), &mode) in lows.iter().zip(&highs).zip(&modes) {
        if hi > lo {
            mapped.push(s1 + (mode - lo) / (hi - lo) * (s2 - s1));
        }
    }
    if mapped.is_empty() {
        return Err(Error::degenerate("every training image is constant"));
    }
    let m_s = mapped.iter().sum::<f64>() / mapped.len() as f64;
    let model = PlModel {
        s1,
        m_s,
        s2,
        p_low,
        p_high,
    };
    model.validate()?;
    Ok(model)
}

pub fn pl_apply(image: &ImageGrid, model: &PlModel) -> Result<ImageGrid> {
    model.validate()?;
    let stats = image.stats();
    let lo = stats.percentile(model.p_low);
    let hi = stats.percentile(model.p_high);
    let (s1, m_s, s2) = (model.s1, model.m_s, model.s2);
    if hi == lo {
        return image.map(|_| s1);
    }
    let mode = foreground_mode(image);
    let two_piece = lo < mode && mode < hi && s1 < m_s && m_s < s2;
    if !two_piece {
        warn!("foreground mode coincides with a landmark endpoint; using a single linear segment");
        return image.map(|v| (s1 + (v - lo) / (hi - lo) * (s2 - s1)).clamp(s1, s2));
    }
    image.map(|v| {
        let out = if v <= mode {
            s1 + (v - lo) / (mode - lo) * (m_s - s1)
        } else {
            m_s + (v - mode) / (hi - mode) * (s2 - m_s)
        };
        out.clamp(s1, s2)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp_with_peak(offset: f64, scale: f64) -> ImageGrid {
        // background zeros, a ramp, and a heavy cluster at 40
        let mut v = vec![0.0; 50];
        v.extend((1..=100).map(f64::from));
        v.extend(std::iter::repeat_n(40.0, 60));
        ImageGrid::new(v.len(), 1, v.into_iter().map(|x| x * scale + offset).collect()).unwrap()
    }

    #[test]
    fn mode_finds_the_cluster() {
        let img = ramp_with_peak(0.0, 1.0);
        let mode = foreground_mode(&img);
        assert!((mode - 40.0).abs() <= 100.0 / 256.0);
    }

    #[test]
    fn fit_then_apply_maps_landmarks() {
        let corpus = vec![ramp_with_peak(0.0, 1.0), ramp_with_peak(0.0, 2.0)];
        let model = pl_fit(&corpus, 1.0, 99.0).unwrap();
        assert!(model.s1 < model.m_s && model.m_s < model.s2);
        let out = pl_apply(&corpus[1], &model).unwrap();
        assert!(out.min() >= model.s1 && out.max() <= model.s2);
        let stats = corpus[1].stats();
        let hi_at = corpus[1]
            .data()
            .iter()
            .position(|&v| v == stats.percentile(99.0))
            .unwrap();
        assert!((out.data()[hi_at] - model.s2).abs() < 1e-9);
    }

    #[test]
    fn apply_is_monotone() {
        let corpus = vec![ramp_with_peak(0.0, 1.0)];
        let model = pl_fit(&corpus, 1.0, 99.0).unwrap();
        let img = ramp_with_peak(5.0, 3.0);
        let out = pl_apply(&img, &model).unwrap();
        let mut idx: Vec<usize> = (0..img.len()).collect();
        idx.sort_by(|&a, &b| img.data()[a].total_cmp(&img.data()[b]));
        assert!(idx.windows(2).all(|w| out.data()[w[0]] <= out.data()[w[1]]));
    }

    #[test]
    fn json_round_trip() {
        let model = PlModel {
            s1: 1.5,
            m_s: 40.25,
            s2: 99.0,
            p_low: 1.0,
            p_high: 99.0,
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pl.json");
        model.save(&path).unwrap();
        assert_eq!(PlModel::load(&path).unwrap(), model);
        let text = fs::read_to_string(&path).unwrap();
        for key in ["s1", "m_s", "s2", "p_low", "p_high"] {
            assert!(text.contains(key));
        }
    }

    #[test]
    fn constant_corpus_is_rejected() {
        let c = ImageGrid::filled(8, 8, 3.0).unwrap();
        assert!(pl_fit(&[c], 1.0, 99.0).unwrap_err().is_numeric());
    }
}
