use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("singular matrix: pivot {pivot:e} at step {step} below threshold {threshold:e}")]
    SingularMatrix { step: usize, pivot: f64, threshold: f64 },

    #[error("degenerate mode: {0}")]
    DegenerateMode(String),

    #[error("fixed point did not converge after {iterations} iterations (last increment {last_increment:e})")]
    NonConvergence { iterations: usize, last_increment: f64 },

    #[error("value {value} outside of range [{min}, {max}]")]
    OutOfRange { value: f64, min: f64, max: f64 },

    #[error("division by zero: {0}")]
    DivisionByZero(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("incompatible boundary conditions: {0}")]
    IncompatibleBoundary(String),

    /// `line` is 1-based; 0 when the error concerns a whole file.
    #[error("config error{}: {message}", if *line > 0 { format!(" at line {line}") } else { String::new() })]
    Config { line: usize, message: String },

    #[error("i/o error: {0}")]
    Io(String),

    #[error("{stage}: {source}")]
    Stage { stage: String, source: Box<Error> },
}

impl Error {
    /// Innermost error below any [`Error::Stage`] wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            e => e,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
