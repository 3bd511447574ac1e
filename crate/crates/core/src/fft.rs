//! 2D discrete Fourier transforms on row-major buffers.
//!
//! Forward transforms are unnormalised; inverse transforms scale by
//! `1 / (width * height)`. In a centred spectrum the zero frequency sits at
//! `(height / 2, width / 2)`.

use std::cell::RefCell;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
    static SCRATCH: RefCell<Vec<Complex64>> = const { RefCell::new(Vec::new()) };
}

fn transform(data: &mut [Complex64], width: usize, height: usize, inverse: bool) {
    let (row_fft, col_fft) = PLANNER.with(|p| {
        let mut planner = p.borrow_mut();
        if inverse {
            (planner.plan_fft_inverse(width), planner.plan_fft_inverse(height))
        } else {
            (planner.plan_fft_forward(width), planner.plan_fft_forward(height))
        }
    });
    SCRATCH.with(|s| {
        let mut scratch = s.borrow_mut();
        let need = row_fft
            .get_inplace_scratch_len()
            .max(col_fft.get_inplace_scratch_len());
        if scratch.len() < need {
            scratch.resize(need, Complex64::default());
        }
        // every row in one call, then every column through a transpose
        row_fft.process_with_scratch(data, &mut scratch[..row_fft.get_inplace_scratch_len()]);
        let mut columns = transpose(data, width, height);
        col_fft.process_with_scratch(&mut columns, &mut scratch[..col_fft.get_inplace_scratch_len()]);
        for (c, column) in columns.chunks_exact(height).enumerate() {
            for (r, v) in column.iter().enumerate() {
                data[r * width + c] = *v;
            }
        }
    });
}

fn transpose(data: &[Complex64], width: usize, height: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::default(); data.len()];
    for r in 0..height {
        for c in 0..width {
            out[c * height + r] = data[r * width + c];
        }
    }
    out
}

pub fn fft2(data: &[f64], width: usize, height: usize) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = data.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    transform(&mut buf, width, height, false);
    buf
}

pub fn fft2_complex(data: &mut [Complex64], width: usize, height: usize) {
    transform(data, width, height, false);
}

pub fn ifft2(data: &mut [Complex64], width: usize, height: usize) {
    transform(data, width, height, true);
    let scale = 1.0 / (width * height) as f64;
    data.iter_mut().for_each(|v| *v *= scale);
}

/// Moves the zero frequency from index 0 to index `n / 2` on both axes.
pub fn fftshift<T: Copy>(data: &[T], width: usize, height: usize) -> Vec<T> {
    roll(data, width, height, width / 2, height / 2)
}

/// Inverse of [`fftshift`], also for odd sizes.
pub fn ifftshift<T: Copy>(data: &[T], width: usize, height: usize) -> Vec<T> {
    roll(data, width, height, width - width / 2, height - height / 2)
}

/// Circular shift: element `(r, c)` moves to `((r + dy) % h, (c + dx) % w)`.
fn roll<T: Copy>(data: &[T], width: usize, height: usize, dx: usize, dy: usize) -> Vec<T> {
    let mut out = data.to_vec();
    for r in 0..height {
        let nr = (r + dy) % height;
        for c in 0..width {
            out[nr * width + (c + dx) % width] = data[r * width + c];
        }
    }
    out
}
