//! Shared fixtures for the criterion benchmarks.

use mrqa::distort::{apply, DistortionKind, DistortionSpec};
use mrqa::image::make_phantom;
use mrqa::ImageGrid;

/// Side length of the benchmark slices.
pub const SIDE: usize = 240;

/// A phantom slice and a noisy copy of it.
pub fn noisy_pair(seed: u64) -> (ImageGrid, ImageGrid) {
    let reference = make_phantom(seed, SIDE, SIDE).expect("phantom");
    let spec = DistortionSpec::new(DistortionKind::GaussianNoise, 3.0, seed).expect("valid spec");
    let distorted = apply(&reference, &spec).expect("noise");
    (reference, distorted)
}

/// Phantom slices used to fit models.
pub fn corpus(count: u64) -> Vec<ImageGrid> {
    (0..count)
        .map(|s| make_phantom(100 + s, SIDE, SIDE).expect("phantom"))
        .collect()
}
