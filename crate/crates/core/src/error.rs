use thiserror::Error;

/// Errors raised by the simulation, inference and key-rate routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// The Toeplitz system built from the lags is singular or indefinite.
    #[error("degenerate constraint set: {0}")]
    DegenerateConstraint(String),

    /// The reciprocal-form spectrum has a non-positive denominator on the band.
    #[error("infeasible denominator {value:e} at grid point {index}")]
    InfeasibleDenominator { index: usize, value: f64 },

    /// Every gain profile is identically zero, nothing can be inferred.
    #[error("no information: every sub-channel gain profile is zero")]
    NoInformation,

    #[error("degenerate window: {0}")]
    DegenerateWindow(String),
}

pub type Result<T> = std::result::Result<T, Error>;
