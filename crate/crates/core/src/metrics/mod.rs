//! Evaluation metrics and the structural-correspondence analysis.

mod entropy;
mod errors;
mod metrology;
mod stats;
mod structure;

pub use entropy::{differential_entropy, entropy_window, EntropyEstimate, EntropyMethod, ENTROPY_CAP, MIN_ENTROPY_SAMPLES};
pub use errors::{mae, rd, rd_from_errors, rd_point, MaeMode, RdValue, RD_CAP};
pub use metrology::{
    delta_method_sigma, fit_rate, mse_theta, rmse_theta, theta_estimate, theta_estimate_near, FitRate,
};
pub use stats::{bootstrap_ci, pearson, ranks, spearman, ConfidenceInterval};
pub use structure::{
    entropy_correspondence, entropy_curve, spearman_matrix, sum_pool, Correspondence, EntropyCurve,
};

use serde::{Deserialize, Serialize};

use crate::baselines::OverheadLedger;

/// One row of the evaluation table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub model: String,
    pub t1_us: f64,
    pub bucket: String,
    pub sequences: usize,
    pub mae_point: f64,
    pub mae_point_ci_low: f64,
    pub mae_point_ci_high: f64,
    pub mae_seq_norm: f64,
    pub rd_point: f64,
    pub rmse_theta: Option<f64>,
    pub fit_rate_r: Option<f64>,
    #[serde(flatten)]
    pub overhead: OverheadLedger,
    pub overhead_total: u64,
}
