use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid value for `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("overdamped regime: lambda = {lambda} must be smaller than omega = {omega}")]
    Overdamped { lambda: f64, omega: f64 },

    #[error("grid size n = {0} must be a power of two and at least 8")]
    GridSize(usize),

    #[error("inverted grid bounds: min = {min}, max = {max}")]
    GridBounds { min: f64, max: f64 },

    #[error("field has {got} samples but its grid holds {expected}")]
    SampleCount { expected: usize, got: usize },

    #[error("non-finite sample at index {0}")]
    NonFinite(usize),

    #[error("negative density sample at index {0}")]
    NegativeDensity(usize),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("integration became unstable at t = {t}")]
    Unstable { t: f64 },

    #[error("the coherent oscillator state requires gamma = 1, got {0}")]
    CoherentGamma(f64),

    #[error("no usable time-derivative source: {0}")]
    MissingTimeDerivative(String),

    #[error("boundary leakage {ratio:.3e} exceeds {tolerance:.1e} at t = {t}")]
    Leakage { t: f64, ratio: f64, tolerance: f64 },

    #[error("invalid snapshot schedule: {0}")]
    Snapshots(String),

    #[error("convergence study needs {0}")]
    Convergence(String),

    #[error("profile is not normalizable on this grid (edge/peak ratio {0:.3e}); use a window")]
    NonNormalizable(f64),

    #[error("peak sits on the domain edge at index {0}")]
    PeakAtEdge(usize),

    #[error("degenerate (all-zero) marginal")]
    DegenerateMarginal,

    #[error("series lengths differ: {0} vs {1}")]
    SeriesLength(usize, usize),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed file {path}: {reason}")]
    Format { path: String, reason: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            source,
        }
    }
}
