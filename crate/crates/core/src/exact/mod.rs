//! Exact probabilities by closed forms, quadrature and rational arithmetic.

mod alg2;
mod alg3;
mod strong;
mod thresholds;

pub use alg2::{alg2_holder_prob, Alg2HolderProb};
pub use alg3::{
    alg3_limits, alg3_p1_limit, alg3_p2_limit, alg3_pi_finite, alg3_ratio, alg3_sale_prob,
    beta_limit_sum, beta_term, unimodality_f, Alg3ExactReport, Alg3Limits, Alg3Ratio, Part,
    UnimodalityReport,
};
pub use strong::{
    delta_limit, delta_limit_quadrature, delta_mu, delta_step_closed_form, StrongExactReport,
};
pub use thresholds::{
    mono_thresholds, optimize_thresholds, MonotonicityThresholds, Objective, OptimizeResult,
};
