//! Samplers and log-density evaluators for the distribution families that
//! appear in the Gibbs full conditionals.
//!
//! Everything here is a pure function of `(parameters, rng)`: the same seed
//! yields the same draw sequence, and independent rng streams may be used
//! concurrently.

mod bessel;
mod gig;
mod mvn;
mod standard;
mod wishart;

pub use bessel::ln_bessel_k;
pub use gig::{sample_gig, GigParams};
pub use mvn::sample_mvn_from_precision;
pub use standard::{
    draw_beta, draw_binomial, draw_categorical, draw_exponential, draw_from_log_masses,
    draw_gamma, draw_inverse_gamma, log_normal_pdf, logsumexp, sample_standard, StandardDist,
};
pub use wishart::{sample_inverse_wishart, InverseWishartParams};

/// Errors raised by parameter validation or factorization failures.
#[derive(Debug, thiserror::Error)]
pub enum DistributionError {
    #[error("invalid parameters for {family}: {reason}")]
    InvalidParameters { family: &'static str, reason: String },
    #[error("precision matrix is singular or not positive definite")]
    SingularPrecision,
    #[error("scale matrix is not symmetric positive definite")]
    NonSpdScale,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

impl DistributionError {
    pub(crate) fn invalid(family: &'static str, reason: impl Into<String>) -> Self {
        DistributionError::InvalidParameters {
            family,
            reason: reason.into(),
        }
    }
}
