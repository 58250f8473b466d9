use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("vector must have at least {min} entries, got {len}")]
    Length { len: usize, min: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// `sph` saw a squared cosine further above 1 than roundoff can explain.
    #[error("squared cosine {value} exceeds 1 by more than roundoff")]
    CosineOverflow { value: f64 },

    #[error("matrix has zero rank in the requested directions (top eigenvalue {top})")]
    RankDegenerate { top: f64 },

    #[error("spectrum inconsistent with trace: {0}")]
    InconsistentSpectrum(String),

    #[error("dimension {p} exceeds the direct-path cap {cap}; use the dual (HDLSS) path")]
    DirectPathTooLarge { p: usize, cap: usize },

    #[error("jacobi did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e}, matrix norm {norm:e})")]
    NoConvergence {
        sweeps: usize,
        off_norm: f64,
        norm: f64,
    },

    #[error("{check} bound violated at index {index}: {lhs:e} > {rhs:e}")]
    BoundViolation {
        check: &'static str,
        index: usize,
        lhs: f64,
        rhs: f64,
    },

    #[error("ratio undefined: {0}")]
    UndefinedRatio(String),

    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: u64,
        column: usize,
        message: String,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad parameters or malformed input rather
    /// than by the numerics of a well-formed problem.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter(_)
                | Error::Parse { .. }
                | Error::Length { .. }
                | Error::LengthMismatch { .. }
                | Error::DirectPathTooLarge { .. }
                | Error::Json(_)
                | Error::Csv(_)
        )
    }
}
