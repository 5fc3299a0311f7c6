use thiserror::Error;

/// Failures raised by the numerics.
///
/// Variants split into two families: validation errors (bad input shape or
/// content) and numeric failures (the input was well-formed but the
/// computation cannot proceed). [`Error::is_validation`] tells them apart.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what}: expected dimension {expected}, found {found}")]
    DimensionMismatch {
        what: String,
        expected: usize,
        found: usize,
    },

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("non-finite entry in {0}")]
    NonFinite(String),

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid input: {0}")]
    Invalid(String),

    /// A scenario field failed validation; `path` is e.g. `generators[1][0][2]`.
    #[error("{path}: {source}")]
    Field { path: String, source: Box<Error> },

    #[error("malformed scenario: {0}")]
    Parse(String),

    #[error("matrix is singular to tolerance (smallest singular value {smallest:.3e}, largest {largest:.3e})")]
    Singular { smallest: f64, largest: f64 },

    #[error("postselection probability {p_ps:.3e} is below the floor")]
    VanishingPostselection { p_ps: f64 },

    #[error("eigensolver did not converge")]
    NoConvergence,

    #[error("likelihood is flat to tolerance; parameters are not identifiable")]
    Unidentifiable,

    #[error("geometric quantumness {0} outside [0, 1]")]
    QuantumnessOutOfRange(f64),
}

impl Error {
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::DimensionMismatch { .. }
                | Error::NotSquare { .. }
                | Error::NotHermitian { .. }
                | Error::NonFinite(_)
                | Error::IndexOutOfRange { .. }
                | Error::Invalid(_)
                | Error::Field { .. }
                | Error::Parse(_)
        )
    }

    pub(crate) fn at(self, path: impl Into<String>) -> Self {
        Error::Field {
            path: path.into(),
            source: Box::new(self),
        }
    }

    pub(crate) fn dim(what: impl Into<String>, expected: usize, found: usize) -> Self {
        Error::DimensionMismatch {
            what: what.into(),
            expected,
            found,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
