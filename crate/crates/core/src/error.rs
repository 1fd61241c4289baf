use thiserror::Error;

/// Errors produced by the solver stack.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("argument {value} outside of domain {domain}")]
    OutOfDomain { value: f64, domain: &'static str },

    #[error("Chebyshev expansion did not converge within {cap} terms (tail magnitude {tail:.3e})")]
    NonConvergence { cap: usize, tail: f64 },

    #[error("kernel evaluated at coincident points")]
    SingularEvaluation,

    #[error("Hankel function of order {order} has a pole at the origin")]
    Pole { order: u32 },

    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("invalid medium: {0}")]
    Medium(String),

    #[error("scene generation failed: {0}")]
    Generation(String),

    #[error("assembly of block ({row}, {col}) failed: {source}")]
    Block {
        row: usize,
        col: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("linear solve failed: {0}")]
    Singular(String),

    #[error("point ({x}, {y}) is within the masking cutoff of an arc")]
    MaskedPoint { x: f64, y: f64 },

    #[error("quadrature did not converge at ({x}, {y}) with order {order}")]
    Quadrature { x: f64, y: f64, order: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
