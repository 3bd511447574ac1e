//! Separable filtering on row-major `f64` buffers.
//!
//! Out-of-range reads use half-sample symmetric reflection
//! (`d c b a | a b c d | d c b a`).

/// Maps any integer index into `0..n` by symmetric reflection.
#[inline]
pub fn reflect(i: isize, n: usize) -> usize {
    let n = n as isize;
    let period = 2 * n;
    let mut m = i.rem_euclid(period);
    if m >= n {
        m = period - 1 - m;
    }
    m as usize
}

/// Normalised Gaussian taps of length `2 * radius + 1`.
pub fn gaussian_kernel(sigma: f64, radius: usize) -> Vec<f64> {
    let r = radius as isize;
    let mut k: Vec<f64> = (-r..=r)
        .map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= sum);
    k
}

/// Gaussian taps truncated at `4 sigma` (at least one tap each side).
pub fn gaussian_kernel_truncated(sigma: f64) -> Vec<f64> {
    gaussian_kernel(sigma, ((4.0 * sigma).ceil() as usize).max(1))
}

/// Correlates every row with `kernel` (odd length, centred).
pub fn filter_rows(data: &[f64], width: usize, height: usize, kernel: &[f64]) -> Vec<f64> {
    let r = (kernel.len() / 2) as isize;
    let mut out = vec![0.0; data.len()];
    for row in 0..height {
        let src = &data[row * width..(row + 1) * width];
        let dst = &mut out[row * width..(row + 1) * width];
        for (c, d) in dst.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (k, &tap) in kernel.iter().enumerate() {
                let cc = c as isize + k as isize - r;
                let idx = if cc >= 0 && (cc as usize) < width {
                    cc as usize
                } else {
                    reflect(cc, width)
                };
                acc += tap * src[idx];
            }
            *d = acc;
        }
    }
    out
}

/// Correlates every column with `kernel` (odd length, centred).
pub fn filter_cols(data: &[f64], width: usize, height: usize, kernel: &[f64]) -> Vec<f64> {
    let r = (kernel.len() / 2) as isize;
    let mut out = vec![0.0; data.len()];
    for row in 0..height {
        let dst = &mut out[row * width..(row + 1) * width];
        for (k, &tap) in kernel.iter().enumerate() {
            let rr = row as isize + k as isize - r;
            let src_row = if rr >= 0 && (rr as usize) < height {
                rr as usize
            } else {
                reflect(rr, height)
            };
            let src = &data[src_row * width..(src_row + 1) * width];
            for (d, s) in dst.iter_mut().zip(src) {
                *d += tap * s;
            }
        }
    }
    out
}

/// Same kernel along both axes.
pub fn filter_separable(data: &[f64], width: usize, height: usize, kernel: &[f64]) -> Vec<f64> {
    let tmp = filter_rows(data, width, height, kernel);
    filter_cols(&tmp, width, height, kernel)
}

/// Unnormalised 3x3 Sobel responses `(d/drow, d/dcol)`.
pub fn sobel(data: &[f64], width: usize, height: usize) -> (Vec<f64>, Vec<f64>) {
    let smooth = [1.0, 2.0, 1.0];
    let deriv = [-1.0, 0.0, 1.0];
    let d_row = filter_cols(&filter_rows(data, width, height, &smooth), width, height, &deriv);
    let d_col = filter_rows(&filter_cols(data, width, height, &smooth), width, height, &deriv);
    (d_row, d_col)
}

/// Sum over every `size x size` window fully inside the grid. Output is
/// `(width - size + 1) x (height - size + 1)`.
pub fn box_sum_valid<T>(data: &[T], width: usize, height: usize, size: usize) -> Vec<T>
where
    T: Copy + Default + std::ops::Add<Output = T> + std::ops::Sub<Output = T>,
{
    let ow = width + 1 - size;
    let oh = height + 1 - size;
    // horizontal running sums, then vertical
    let mut horiz = vec![T::default(); ow * height];
    for r in 0..height {
        let row = &data[r * width..(r + 1) * width];
        let mut acc = T::default();
        for v in &row[..size] {
            acc = acc + *v;
        }
        horiz[r * ow] = acc;
        for c in 1..ow {
            acc = acc + row[c + size - 1] - row[c - 1];
            horiz[r * ow + c] = acc;
        }
    }
    let mut out = vec![T::default(); ow * oh];
    for c in 0..ow {
        let mut acc = T::default();
        for r in 0..size {
            acc = acc + horiz[r * ow + c];
        }
        out[c] = acc;
        for r in 1..oh {
            acc = acc + horiz[(r + size - 1) * ow + c] - horiz[(r - 1) * ow + c];
            out[r * ow + c] = acc;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reflect_is_half_sample_symmetric() {
        let idx: Vec<usize> = (-4..8).map(|i| reflect(i, 4)).collect();
        assert_eq!(idx, vec![3, 2, 1, 0, 0, 1, 2, 3, 3, 2, 1, 0]);
        assert_eq!(reflect(-1, 1), 0);
        assert_eq!(reflect(5, 1), 0);
    }

    #[test]
    fn gaussian_kernel_is_normalised_and_symmetric() {
        let k = gaussian_kernel(1.5, 5);
        assert_eq!(k.len(), 11);
        assert!((k.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        for i in 0..5 {
            assert_eq!(k[i], k[10 - i]);
        }
    }

    #[test]
    fn constant_signal_is_preserved() {
        let data = vec![3.0; 5 * 4];
        let k = gaussian_kernel(2.0, 7);
        for v in filter_separable(&data, 5, 4, &k) {
            assert!((v - 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sobel_on_ramp() {
        // I = 2 * col: d/dcol = 8 * 2 away from borders, d/drow = 0
        let w = 6;
        let data: Vec<f64> = (0..w * 5).map(|i| 2.0 * (i % w) as f64).collect();
        let (dr, dc) = sobel(&data, w, 5);
        assert_eq!(dc[2 * w + 2], 16.0);
        assert_eq!(dr[2 * w + 2], 0.0);
    }

    #[test]
    fn box_sum_matches_naive() {
        let (w, h, s) = (7, 5, 3);
        let data: Vec<f64> = (0..w * h).map(|i| ((i * 37) % 11) as f64).collect();
        let out = box_sum_valid(&data, w, h, s);
        for r in 0..=h - s {
            for c in 0..=w - s {
                let mut naive = 0.0;
                for i in 0..s {
                    for j in 0..s {
                        naive += data[(r + i) * w + c + j];
                    }
                }
                assert!((out[r * (w - s + 1) + c] - naive).abs() < 1e-12);
            }
        }
    }
}
