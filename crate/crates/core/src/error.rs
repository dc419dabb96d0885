use thiserror::Error;

/// Errors produced across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("validation failed: {0}")]
    Validation(String),

    #[error("wrong jump measure: {0}")]
    WrongMeasure(String),

    #[error("no solution: {0}")]
    NoSolution(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported method: {0}")]
    UnsupportedMethod(String),

    #[error("grid error: {0}")]
    Grid(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("negative jump intensity {0} not admissible for the series pricer")]
    NegativeIntensity(f64),

    #[error("price {0} outside no-arbitrage bounds")]
    OutOfBounds(f64),

    #[error("lattice error: {0}")]
    Lattice(String),

    #[error("no bracket: {0}")]
    NoBracket(String),

    #[error("wealth crossed zero on {count} of {total} paths")]
    PathBlowup { count: usize, total: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error("unknown figure: {0}")]
    UnknownFigure(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
