use thiserror::Error;

/// Errors raised by the core library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    Dimension {
        context: &'static str,
        expected: String,
        got: String,
    },

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("{name} is not Hermitian: max |A - A^H| entry = {deviation:e}")]
    NotHermitian { name: &'static str, deviation: f64 },

    #[error("invalid parameter {name}: {reason}")]
    Parameter { name: &'static str, reason: String },

    #[error("invalid state: {0}")]
    State(String),

    #[error("degenerate environment spectrum: spectral spread is zero")]
    DegenerateEnvironment,

    #[error("unsupported input: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn dimension(context: &'static str, expected: impl ToString, got: impl ToString) -> Self {
        Error::Dimension {
            context,
            expected: expected.to_string(),
            got: got.to_string(),
        }
    }

    pub fn parameter(name: &'static str, reason: impl ToString) -> Self {
        Error::Parameter {
            name,
            reason: reason.to_string(),
        }
    }
}
