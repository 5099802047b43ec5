use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: operands live on different grids")]
    GridMismatch,

    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("underresolved potential: {points:.2} grid points across the e^-1 width of v_N, need at least {required}")]
    UnderresolvedPotential { points: f64, required: f64 },

    #[error("invalid potential profile: {0}")]
    InvalidProfile(String),

    #[error("sh/ch series did not reach tolerance {tol:e} within {terms} terms (last term norm {last:e})")]
    NonConvergence { terms: usize, tol: f64, last: f64 },

    #[error("symmetry violation: {what} residual {residual:e} exceeds {tolerance:e}")]
    SymmetryViolation {
        what: &'static str,
        residual: f64,
        tolerance: f64,
    },

    #[error("diagonal of Gamma has relative imaginary part {0:e}")]
    NonHermitianDiagonal(f64),

    #[error("symmetry drift {drift:e} at t = {t} exceeds abort threshold")]
    SymmetryDrift { drift: f64, t: f64 },

    #[error("Picard iteration failed to contract: differences {0:?}")]
    NoContraction(Vec<f64>),

    #[error("insufficient snapshots for time quadrature: {0} (need at least 4)")]
    InsufficientSnapshots(usize),

    #[error("non-uniform snapshot times in trajectory")]
    NonUniformTimes,

    #[error("config error at line {line}: {message}")]
    ConfigParse { line: usize, message: String },

    #[error("config validation failed: {0}")]
    ConfigValidation(String),

    #[error("snapshot format: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Stable identifier for machine-readable error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidGrid(_) => "invalid_grid",
            Error::GridMismatch => "grid_mismatch",
            Error::ShapeMismatch { .. } => "shape_mismatch",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::UnderresolvedPotential { .. } => "underresolved_potential",
            Error::InvalidProfile(_) => "invalid_profile",
            Error::NonConvergence { .. } => "non_convergence",
            Error::SymmetryViolation { .. } => "symmetry_violation",
            Error::NonHermitianDiagonal(_) => "non_hermitian_diagonal",
            Error::SymmetryDrift { .. } => "symmetry_drift",
            Error::NoContraction(_) => "no_contraction",
            Error::InsufficientSnapshots(_) => "insufficient_snapshots",
            Error::NonUniformTimes => "non_uniform_times",
            Error::ConfigParse { .. } => "config_parse",
            Error::ConfigValidation(_) => "config_validation",
            Error::Snapshot(_) => "snapshot",
            Error::Io(_) => "io",
            Error::Csv(_) => "csv",
        }
    }
}
