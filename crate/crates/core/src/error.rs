use std::path::PathBuf;

use thiserror::Error;

use crate::lindblad::SimDiagnostics;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument outside the region where the model or formula is defined.
    #[error("{what}: {detail}")]
    Domain { what: &'static str, detail: String },

    /// A channel failed the complete-positivity / trace-preservation check.
    #[error(
        "channel is not CPTP: min Choi eigenvalue {min_choi_eigenvalue:.3e}, \
         completeness error {completeness_error:.3e}"
    )]
    NotCptp {
        min_choi_eigenvalue: f64,
        completeness_error: f64,
    },

    /// The master-equation run tripped one of its guards.
    #[error("simulation diagnostic failure: {reason}")]
    Diagnostic {
        reason: String,
        diagnostics: Box<SimDiagnostics>,
    },

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(what: &'static str, detail: impl Into<String>) -> Error {
    Error::Domain {
        what,
        detail: detail.into(),
    }
}
