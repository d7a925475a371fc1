//! Crate-wide error type.
//!
//! Every fallible operation in the library returns [`Result`]. Variants are
//! grouped by failure mode rather than by module so callers can match on what
//! went wrong without caring where.

use std::path::PathBuf;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An input collection was empty where at least one element is required.
    #[error("empty input: {0}")]
    EmptyInput(String),

    /// Two collections that must agree in size do not.
    #[error("shape mismatch for {what}: expected {expected}, got {actual}")]
    ShapeMismatch {
        what: String,
        expected: usize,
        actual: usize,
    },

    /// A scalar parameter fell outside its documented domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A requested index range does not fit the data it addresses.
    #[error("range error: {0}")]
    Range(String),

    /// Bad run configuration (file contents or flag combination).
    #[error("config error: {0}")]
    Config(String),

    /// The normal equations are singular; only alpha = 0 can produce this.
    #[error(
        "singular system: X'X is rank deficient and alpha = 0; \
         ridge with alpha > 0 regularizes the solve"
    )]
    SingularSystem,

    /// Fewer spoof windows fit the series than were requested.
    #[error("capacity error: requested {requested} windows, at most {achievable} fit")]
    Capacity { requested: usize, achievable: usize },

    /// A spoof plan is internally inconsistent or does not fit its series.
    #[error("plan error: {0}")]
    Plan(String),

    /// Port demand exceeded grid cap plus available battery discharge.
    #[error(
        "infeasible dispatch at t = {t}: port demand {demand_kw:.3} kW exceeds \
         grid cap plus available storage discharge {available_kw:.3} kW"
    )]
    InfeasibleDispatch {
        t: u64,
        demand_kw: f64,
        available_kw: f64,
    },

    /// A data file failed to parse; `line` is 1-based and counts every line
    /// in the file including headers and comments.
    #[error("parse error in {path} at line {line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Attach a path to a raw I/O error.
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Build a parse error for `path` at 1-based `line`.
    pub fn parse(path: impl Into<PathBuf>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }
}
