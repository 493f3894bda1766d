use thiserror::Error;

/// Errors raised by the numerical pipeline.
///
/// Every variant maps to a short machine-readable reason through [`Error::reason`],
/// which the command-line front end writes into its reports.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid chart: {0}")]
    InvalidChart(String),

    #[error("fields live on different charts")]
    ChartMismatch,

    #[error("metric is not positive definite at grid point {index} (min eigenvalue estimate {value:e})")]
    Positivity { index: usize, value: f64 },

    #[error("pointwise linear system is singular at grid point {index}")]
    SingularSystem { index: usize },

    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("kernel function changes sign (min {min:e}, max {max:e}); discretization too coarse")]
    KernelSign { min: f64, max: f64 },

    #[error("right-hand side is not in the image of the Chern Laplacian (weighted mean {mean:e})")]
    DegreeMismatch { mean: f64 },

    #[error("sign precondition violated: {0}")]
    Sign(String),

    #[error("continuation failed at t = {last_good_t} (attempted {attempted_t})")]
    Continuation { last_good_t: f64, attempted_t: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("serialization: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn reason(&self) -> &'static str {
        match self {
            Error::InvalidChart(_) => "invalid_chart",
            Error::ChartMismatch => "chart_mismatch",
            Error::Positivity { .. } => "positivity_violation",
            Error::SingularSystem { .. } => "singular_pointwise_system",
            Error::NoConvergence { .. } => "no_convergence",
            Error::KernelSign { .. } => "kernel_sign_change",
            Error::DegreeMismatch { .. } => "degree_mismatch",
            Error::Sign(_) => "sign_precondition",
            Error::Continuation { .. } => "continuation_failure",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::Format(_) => "format",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
