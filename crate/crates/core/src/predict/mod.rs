//! Next-day movement prediction.
//!
//! [`predict_exact`] is the ground truth: exact conditional probabilities by
//! weighted enumeration of population assignments. [`predict_limit`] is the
//! many-traders limit for fixed-increment markets with a multinomial
//! population, reduced to a Gaussian cone-probability ratio.

mod cone;
mod exact;
mod limit;
pub mod search;

pub use cone::{estimate_cone_ratio, ConeEstimate, ConeOptions};
pub use exact::{
    composition_count, decide_bounded, decide_unbounded, predict_exact, predict_exact_with,
    BoundedVerdict, ExactOptions, Prediction,
};
pub use limit::{
    classify_limit_constraints, gaussian_covariance, is_positive_definite, predict_limit,
    LimitClassification, LimitPrediction,
};

use crate::bridge::BridgeError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PredictError {
    #[error("history infeasible: {0}")]
    Bridge(#[from] BridgeError),
    #[error("history infeasible: the conditioning event has probability zero")]
    ProbabilityZero,
    #[error("history has limit probability zero (a constraint is violated as m grows)")]
    HistoryLimitInfeasible,
    #[error("enumeration cap exceeded: {0}")]
    CapExceeded(String),
    #[error("conditioning cone has vanishing measure: {hits} hits in {samples} samples")]
    VanishingCone { hits: u64, samples: u64 },
    #[error("covariance matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("unsupported market: {0}")]
    Unsupported(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
