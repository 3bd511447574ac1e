//! Canny edge detection and the edge-width blur metrics built on it:
//! blurred edge width, just noticeable blur, and the cumulative
//! probability of blur detection.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::filter::{filter_separable, gaussian_kernel_truncated, sobel};
use crate::image::ImageGrid;

pub const CANNY_SIGMA: f64 = 1.0;
/// Hysteresis thresholds as fractions of the data range.
pub const CANNY_LOW: f64 = 0.1;
pub const CANNY_HIGH: f64 = 0.2;

pub const JNB_BLOCK: usize = 64;
pub const JNB_EDGE_FRACTION: f64 = 0.002;
pub const JNB_BETA: f64 = 3.6;
/// Blur detection probability at the just-noticeable width.
pub const CPBD_THRESHOLD: f64 = 0.63;

/// Edge pixels split by the dimension their gradient is strongest in.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeMap {
    pub width: usize,
    pub height: usize,
    /// Edge crosses rows: the gradient points mostly along the row index.
    pub along_rows: Vec<bool>,
    /// Edge crosses columns.
    pub along_cols: Vec<bool>,
    grad_row: Vec<f64>,
    grad_col: Vec<f64>,
}

impl EdgeMap {
    pub fn count(&self) -> usize {
        self.along_rows.iter().zip(&self.along_cols).filter(|(a, b)| **a || **b).count()
    }

    pub fn is_edge(&self, index: usize) -> bool {
        self.along_rows[index] || self.along_cols[index]
    }
}

/// Canny detector: Gaussian smoothing, Sobel gradients, interpolated
/// non-maximum suppression and 8-connected hysteresis with absolute
/// thresholds `low` and `high`.
pub fn canny(image: &ImageGrid, low: f64, high: f64) -> EdgeMap {
    let (w, h) = image.dims();
    let smooth = filter_separable(image.data(), w, h, &gaussian_kernel_truncated(CANNY_SIGMA));
    let (gr, gc) = sobel(&smooth, w, h);
    let mag: Vec<f64> = gr.iter().zip(&gc).map(|(a, b)| a.hypot(*b)).collect();

    let mut thin = vec![false; w * h];
    for r in 1..h.saturating_sub(1) {
        for c in 1..w.saturating_sub(1) {
            let i = r * w + c;
            let m = mag[i];
            if m == 0.0 || m < low {
                continue;
            }
            let (ar, ac) = (gr[i].abs(), gc[i].abs());
            let (sr, sc) = (gr[i].signum() as isize, gc[i].signum() as isize);
            let at = |dr: isize, dc: isize| {
                mag[(r as isize + dr) as usize * w + (c as isize + dc) as usize]
            };
            let (ahead, behind) = if ar >= ac {
                let t = ac / ar;
                (
                    (1.0 - t) * at(sr, 0) + t * at(sr, sc),
                    (1.0 - t) * at(-sr, 0) + t * at(-sr, -sc),
                )
            } else {
                let t = ar / ac;
                (
                    (1.0 - t) * at(0, sc) + t * at(sr, sc),
                    (1.0 - t) * at(0, -sc) + t * at(-sr, -sc),
                )
            };
            thin[i] = m >= ahead && m >= behind;
        }
    }

    let mut keep = vec![false; w * h];
    let mut queue = VecDeque::new();
    for i in 0..w * h {
        if thin[i] && mag[i] >= high {
            keep[i] = true;
            queue.push_back(i);
        }
    }
    while let Some(i) = queue.pop_front() {
        let (r, c) = ((i / w) as isize, (i % w) as isize);
        for dr in -1..=1 {
            for dc in -1..=1 {
                let (nr, nc) = (r + dr, c + dc);
                if nr < 0 || nc < 0 || nr >= h as isize || nc >= w as isize {
                    continue;
                }
                let j = nr as usize * w + nc as usize;
                if !keep[j] && thin[j] && mag[j] >= low {
                    keep[j] = true;
                    queue.push_back(j);
                }
            }
        }
    }

    let mut along_rows = vec![false; w * h];
    let mut along_cols = vec![false; w * h];
    for i in (0..w * h).filter(|&i| keep[i]) {
        if gr[i].abs() >= gc[i].abs() {
            along_rows[i] = true;
        } else {
            along_cols[i] = true;
        }
    }
    EdgeMap {
        width: w,
        height: h,
        along_rows,
        along_cols,
        grad_row: gr,
        grad_col: gc,
    }
}

/// Canny with thresholds `0.1 L` and `0.2 L`.
pub fn canny_for_range(image: &ImageGrid, data_range: f64) -> Result<EdgeMap> {
    if !(data_range > 0.0) || !data_range.is_finite() {
        return Err(Error::DegenerateRange);
    }
    Ok(canny(image, CANNY_LOW * data_range, CANNY_HIGH * data_range))
}

/// Width of the edge at `index` along its own dimension: the number of
/// strictly monotone steps on each side, each side counting at least one.
pub fn edge_width(image: &ImageGrid, edges: &EdgeMap, index: usize) -> Option<f64> {
    let (w, h) = image.dims();
    let (r, c) = (index / w, index % w);
    let (len, pos, slope) = if edges.along_cols[index] {
        (w, c, edges.grad_col[index])
    } else if edges.along_rows[index] {
        (h, r, edges.grad_row[index])
    } else {
        return None;
    };
    let line = |k: usize| {
        if edges.along_cols[index] {
            image.get(r, k)
        } else {
            image.get(k, c)
        }
    };
    let rising = slope > 0.0;
    // moving away from the edge the profile must keep falling behind it
    // and keep rising ahead of it
    let mut back = 0;
    while pos > back {
        let (near, far) = (line(pos - back), line(pos - back - 1));
        if (rising && far < near) || (!rising && far > near) {
            back += 1;
        } else {
            break;
        }
    }
    let mut ahead = 0;
    while pos + ahead + 1 < len {
        let (near, far) = (line(pos + ahead), line(pos + ahead + 1));
        if (rising && far > near) || (!rising && far < near) {
            ahead += 1;
        } else {
            break;
        }
    }
    Some((back.max(1) + ahead.max(1)) as f64)
}

/// Mean edge width per dimension, averaged over the dimensions that have
/// edges.
pub fn blurred_edge_width(image: &ImageGrid, data_range: f64) -> Result<f64> {
    let edges = canny_for_range(image, data_range)?;
    let mut per_dim = Vec::with_capacity(2);
    for mask in [&edges.along_rows, &edges.along_cols] {
        let widths: Vec<f64> = (0..mask.len())
            .filter(|&i| mask[i])
            .filter_map(|i| edge_width(image, &edges, i))
            .collect();
        if !widths.is_empty() {
            per_dim.push(widths.iter().sum::<f64>() / widths.len() as f64);
        }
    }
    if per_dim.is_empty() {
        return Err(Error::degenerate("edge width is undefined without edges"));
    }
    Ok(per_dim.iter().sum::<f64>() / per_dim.len() as f64)
}

/// Just-noticeable blur width for a block with contrast `max - min`.
pub fn jnb_width(contrast: f64, data_range: f64) -> f64 {
    if contrast / data_range <= 50.0 / 255.0 {
        5.0
    } else {
        3.0
    }
}

/// Edge widths of one processed block together with its JNB width.
struct BlockWidths {
    jnb: f64,
    widths: Vec<f64>,
}

fn processed_blocks(image: &ImageGrid, data_range: f64) -> Result<Vec<BlockWidths>> {
    let edges = canny_for_range(image, data_range)?;
    let (w, h) = image.dims();
    let mut blocks = Vec::new();
    for r0 in (0..h).step_by(JNB_BLOCK) {
        for c0 in (0..w).step_by(JNB_BLOCK) {
            let (r1, c1) = ((r0 + JNB_BLOCK).min(h), (c0 + JNB_BLOCK).min(w));
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            let mut indices = Vec::new();
            for r in r0..r1 {
                for c in c0..c1 {
                    let v = image.get(r, c);
                    lo = lo.min(v);
                    hi = hi.max(v);
                    if edges.is_edge(r * w + c) {
                        indices.push(r * w + c);
                    }
                }
            }
            let area = ((r1 - r0) * (c1 - c0)) as f64;
            if indices.len() as f64 / area <= JNB_EDGE_FRACTION {
                continue;
            }
            blocks.push(BlockWidths {
                jnb: jnb_width(hi - lo, data_range),
                widths: indices
                    .into_iter()
                    .filter_map(|i| edge_width(image, &edges, i))
                    .collect(),
            });
        }
    }
    if blocks.is_empty() {
        return Err(Error::degenerate("no block has enough edge pixels"));
    }
    Ok(blocks)
}

/// `(sum (W / W_jnb)^beta)^(1 / beta)` for one block.
pub fn jnb_block_distortion(widths: &[f64], jnb: f64, beta: f64) -> f64 {
    widths
        .iter()
        .map(|w| (w / jnb).powf(beta))
        .sum::<f64>()
        .powf(1.0 / beta)
}

/// Mean perceived blur distortion over blocks with enough edges.
pub fn jnb(image: &ImageGrid, data_range: f64) -> Result<f64> {
    let blocks = processed_blocks(image, data_range)?;
    let total: f64 = blocks
        .iter()
        .map(|b| jnb_block_distortion(&b.widths, b.jnb, JNB_BETA))
        .sum();
    Ok(total / blocks.len() as f64)
}

/// Probability that blur of width `width` is detected.
pub fn blur_probability(width: f64, jnb: f64, beta: f64) -> f64 {
    1.0 - (-(width / jnb).powf(beta)).exp()
}

/// Fraction of edge pixels in processed blocks whose blur detection
/// probability stays at or below 63 %.
pub fn cpbd(image: &ImageGrid, data_range: f64) -> Result<f64> {
    let blocks = processed_blocks(image, data_range)?;
    let (mut sharp, mut total) = (0usize, 0usize);
    for b in &blocks {
        for &w in &b.widths {
            total += 1;
            if blur_probability(w, b.jnb, JNB_BETA) <= CPBD_THRESHOLD {
                sharp += 1;
            }
        }
    }
    if total == 0 {
        return Err(Error::degenerate("no edge pixels in processed blocks"));
    }
    Ok(sharp as f64 / total as f64)
}
