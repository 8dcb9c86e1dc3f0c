use thiserror::Error;

/// Errors raised by the pricing engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PricingError {
    /// A market or contract parameter violates its admissible range.
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    /// The spot or strike lies in a region the pricer has no formula for.
    #[error("unsupported region: {0}")]
    UnsupportedRegion(String),

    /// The square well is too shallow or too narrow to hold a bound state.
    #[error("the well supports no bound state (sqrt(beta^2 - 2 gamma / sigma^2) * (b - a) / pi = {0:.6} < 1)")]
    NoBoundState(f64),

    /// A closed-form approximation was evaluated outside its domain.
    #[error("approximation domain error: {0}")]
    ApproximationDomain(String),

    /// A kernel was requested for coordinates that do not belong to the region.
    #[error("contract violation: {0}")]
    Contract(String),

    /// An integral was requested whose integrand does not decay.
    #[error("divergent integral: {0}")]
    Divergence(String),

    /// Adaptive quadrature ran out of subdivisions.
    #[error("quadrature did not converge after {subdivisions} subdivisions (estimate {estimate:e}, error {error:e})")]
    Quadrature {
        estimate: f64,
        error: f64,
        subdivisions: usize,
    },

    /// Root bracketing failed where a root is guaranteed.
    #[error("internal consistency error: {0}")]
    Internal(String),
}

impl PricingError {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        PricingError::Parameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, PricingError>;
