use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed user input: bad graph, wrong vector length, unparsable file.
    #[error("input error: {0}")]
    Input(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    /// The parameters sit on a reflection hyperplane (or an equivalent wall).
    #[error("parameters on a wall: {0}")]
    Wall(String),

    /// Numerical degeneracy: a rank drop, a non-simple eigenvalue, a failed
    /// postcondition check.
    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by non-generic data rather than bad input.
    pub fn is_degeneracy(&self) -> bool {
        matches!(self, Error::Wall(_) | Error::Degenerate(_))
    }
}
