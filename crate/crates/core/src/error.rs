use thiserror::Error;

/// Errors raised by the wiretap numerics.
#[derive(Debug, Error)]
pub enum Error {
    #[error("validation failed: {0}")]
    Validation(String),

    #[error("{name} = {value} is outside {range}")]
    Domain {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("required dimension {required} exceeds the configured cap of {cap}")]
    Size { required: usize, cap: usize },

    #[error("cannot compose channels: {0}")]
    Composition(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("solver failed: {0}")]
    Solver(String),

    #[error("malformed channel config at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short machine-readable category, stable across releases.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Validation(_) => "validation",
            Error::Domain { .. } => "domain",
            Error::Size { .. } => "size",
            Error::Composition(_) => "composition",
            Error::Unsupported(_) => "unsupported",
            Error::Solver(_) => "solver",
            Error::Parse { .. } => "parse",
            Error::Io(_) => "io",
        }
    }

    pub(crate) fn domain(name: &'static str, value: f64, range: &'static str) -> Self {
        Error::Domain { name, value, range }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// Checks `value ∈ [0, 1]`, the common precondition on channel parameters.
pub(crate) fn check_probability(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::domain(name, value, "[0, 1]"))
    }
}

/// Checks `value ∈ (0, 1)`.
pub(crate) fn check_open_unit(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(name, value, "(0, 1)"))
    }
}
