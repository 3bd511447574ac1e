//! MR image quality assessment: intensity normalization, full-reference
//! and no-reference metrics, MR-specific distortion simulation, and a
//! benchmark harness tying them together.

pub mod distort;
pub mod error;
pub mod fft;
pub mod harness;
pub mod filter;
pub mod image;
pub mod metric;
pub mod normalize;
pub mod quality;
pub mod reference;

pub use error::{Error, Result};
pub use image::{DataRangeMode, ImageGrid, LabelMask};
pub use metric::{evaluate, Metric, MetricContext, MetricReport, Orientation};
pub use normalize::Normalization;
