use thiserror::Error;

/// Errors produced by fitting, smoothing, scoring and tuning.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty sample")]
    EmptySample,

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("one-fit criterion undefined: every case leaves zero mass after removal")]
    OneFitUndefined,

    #[error("CRPS undefined: infinite first moment (nu = {0})")]
    InfiniteFirstMoment(f64),

    #[error("failed to bracket quantile at level {0}")]
    Bracketing(f64),

    #[error("quadrature did not converge (error estimate {0:e})")]
    Quadrature(f64),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("predictor failed: {0}")]
    Predictor(String),

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of a numerical procedure, as opposed to bad input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::OneFitUndefined
                | Error::InfiniteFirstMoment(_)
                | Error::Bracketing(_)
                | Error::Quadrature(_)
                | Error::Predictor(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
