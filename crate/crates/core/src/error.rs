use std::path::PathBuf;

/// Errors produced by the solvers, diagnostics and I/O layers.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("fit error: {0}")]
    Fit(String),

    #[error("Newton iteration failed after {iterations} iterations (residual {residual:e})")]
    NewtonDivergence { iterations: usize, residual: f64 },

    #[error("no grid samples fall inside the cylinder")]
    EmptyCylinder,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("field vanishes identically")]
    ZeroField,

    #[error("sub-level set [w <= k] has empty discrete measure")]
    DegenerateDenominator,

    #[error("parse error at line {line}, field `{field}`: {message}")]
    Parse {
        line: usize,
        field: String,
        message: String,
    },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures of the numerical machinery, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NewtonDivergence { .. }
                | Error::Fit(_)
                | Error::EmptyCylinder
                | Error::ZeroField
                | Error::DegenerateDenominator
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
