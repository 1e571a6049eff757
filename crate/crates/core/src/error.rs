use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter violates the precondition of the operation.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("point ({x}, {y}, {z}) is not on the unit sphere (norm {norm})")]
    NotUnit { x: f64, y: f64, z: f64, norm: f64 },

    #[error("points {first} and {second} coincide (distance {distance:e})")]
    CoincidentPoints {
        first: usize,
        second: usize,
        distance: f64,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("malformed points file at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for errors caused by bad input rather than by the numerics.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Numerical(_))
    }
}
