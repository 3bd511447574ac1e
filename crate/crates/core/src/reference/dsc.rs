//! Dice similarity of label masks.

use crate::error::{Error, Result};
use crate::image::LabelMask;

pub const DSC_EPSILON: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DscClass {
    Label(u32),
    /// Every non-zero label counts as foreground.
    TotalForeground,
}

impl DscClass {
    fn matches(self, label: u32) -> bool {
        match self {
            DscClass::Label(id) => label == id,
            DscClass::TotalForeground => label != 0,
        }
    }
}

/// `(2|A and B| + eps) / (|A| + |B| + eps)`; two empty masks give 1.
pub fn dsc(a: &LabelMask, b: &LabelMask, class: DscClass, epsilon: f64) -> Result<f64> {
    if a.dims() != b.dims() {
        return Err(Error::DimensionMismatch {
            left: a.dims(),
            right: b.dims(),
        });
    }
    if !(epsilon > 0.0) {
        return Err(Error::InvalidParameter(format!("epsilon must be positive, got {epsilon}")));
    }
    let (mut both, mut na, mut nb) = (0usize, 0usize, 0usize);
    for (&x, &y) in a.labels().iter().zip(b.labels()) {
        let (in_a, in_b) = (class.matches(x), class.matches(y));
        na += usize::from(in_a);
        nb += usize::from(in_b);
        both += usize::from(in_a && in_b);
    }
    Ok((2.0 * both as f64 + epsilon) / ((na + nb) as f64 + epsilon))
}
