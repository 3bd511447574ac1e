//! Full-reference similarity metrics.
//!
//! Argument order is always `(image, reference)`: the distorted or
//! processed image first, the ground truth second.

mod cwssim;
mod dsc;
mod errors;
mod information;
mod ssim;

pub use cwssim::{cw_ssim, cw_ssim_with, CwSsimParams};
pub use dsc::{dsc, DscClass, DSC_EPSILON};
pub use errors::{error_metrics, mse, nmse, psnr, ErrorMetrics};
pub use information::{entropies, mutual_information, nmi, pcc, Entropies};
pub use ssim::{ms_ssim, ssim, ssim_map, ssim_with, SsimParams, MS_SSIM_MIN_SIZE, MS_SSIM_WEIGHTS};

pub(crate) use information::pearson;

pub const NMI_BINS: usize = 256;
