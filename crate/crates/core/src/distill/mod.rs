//! The subset-sum undistillability functional, its sesquilinear form, the
//! two-copy `P/Q/R` reduction, the sandwich-form cross-check and the
//! reproduction bundles written when a predicted inequality fails.

pub mod bundle;
mod functional;
mod rank_two;
mod sandwich;

pub use crate::linalg::SubsystemSet;
pub use bundle::ReproBundle;
pub use functional::{f_bilinear, q_functional, q_normalized, q_value_and_gradient, MAX_COPIES};
pub use rank_two::{
    angle_scan_margin, check_rank2_inequality, pqr, pqr_with_beta, sample_rank_two, Rank2Check,
    RankTwoFactors, SamplingMeasure, RANK2_SLACK_TOL,
};
pub use sandwich::{quadratic_form, sandwich_evaluator, sandwich_operator, MAX_SANDWICH_SIDE};
