//! No-reference quality metrics.

mod blur;
mod edges;
mod lines;
mod niqe;
mod nss;

pub use blur::{
    blur_effect, blur_effect_with, blur_ratio, mean_total_variation, variance_of_laplacian, BlurRatio,
    BLUR_EFFECT_KERNEL, INVERSE_BLUR_THRESHOLD,
};
pub use edges::{
    blur_probability, blurred_edge_width, canny, canny_for_range, cpbd, edge_width, jnb, jnb_block_distortion,
    jnb_width, EdgeMap, CANNY_HIGH, CANNY_LOW, CANNY_SIGMA, CPBD_THRESHOLD, JNB_BETA, JNB_BLOCK,
    JNB_EDGE_FRACTION,
};
pub use lines::{mean_line_correlation, mean_shifted_line_correlation};
pub use niqe::{
    niqe_fit, niqe_fit_with, niqe_score, niqe_score_with, NiqeFitOptions, NiqeModel, NIQE_FEATURES,
    NIQE_MIN_CORPUS, NIQE_PATCH, NIQE_SHARPNESS_PERCENTILE,
};
pub use nss::{
    brisque_features, brisque_features_multiscale, brisque_score, fit_aggd, fit_ggd, mscn, FeatureScaling, Mscn,
    NssFeatures, SvrKernel, SvrModel, FEATURES_PER_SCALE, MSCN_C,
};
