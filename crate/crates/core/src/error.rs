use thiserror::Error;

/// Errors raised by the toolkit.
///
/// `EndpointDecay` and `Resolution` are warning-level: the computation could
/// be carried out but its accuracy is not trustworthy on the given grid.
#[derive(Debug, Error)]
pub enum NlsError {
    #[error("non-finite value in {what} at index {index}")]
    NonFinite { what: &'static str, index: usize },

    #[error("grid too small: n = {n}, need at least {min}")]
    GridTooSmall { n: usize, min: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("endpoint decay check failed: endpoint magnitude {magnitude:.3e} exceeds {threshold:.3e}")]
    EndpointDecay { magnitude: f64, threshold: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("reflection coefficient bound violated: |r| = {rho} >= 1 at z = {z}")]
    ReflectionBound { rho: f64, z: f64 },

    #[error("scattering coefficients depend on the matching point at z = {z}: discrepancy {discrepancy:.3e}")]
    MatchingPoint { z: f64, discrepancy: f64 },

    #[error("numerical breakdown at z = {z}: |a| = {abs_a} < 1")]
    ScatteringBreakdown { z: f64, abs_a: f64 },

    #[error("Jost normalization residual {0:.3e} exceeds 1e-10")]
    Normalization(f64),

    #[error("solver did not converge in {iterations} iterations (residual {residual:.3e}); ratio history {ratios:?}")]
    NoConvergence {
        iterations: usize,
        residual: f64,
        ratios: Vec<f64>,
    },

    #[error("resolution check failed: spectral tail {tail:.3e} exceeds {threshold:.3e} of peak")]
    Resolution { tail: f64, threshold: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("unknown verification suite `{0}`")]
    UnknownSuite(String),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl NlsError {
    /// Warning-level errors flag accuracy concerns rather than invalid input.
    pub fn is_warning(&self) -> bool {
        matches!(self, NlsError::EndpointDecay { .. } | NlsError::Resolution { .. })
    }
}

pub type Result<T> = std::result::Result<T, NlsError>;
