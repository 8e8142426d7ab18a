use thiserror::Error;

/// Errors surfaced by network construction, equilibrium computation,
/// estimation and inference.
#[derive(Debug, Error)]
pub enum Error {
    /// A numeric argument is outside its admissible domain (e.g. negative flow).
    #[error("domain error: {0}")]
    Domain(String),

    /// Inputs are structurally inconsistent (dangling link ids, dimension
    /// mismatches, empty choice sets).
    #[error("structural error: {0}")]
    Structure(String),

    /// Input is degenerate for the requested operation (e.g. a zero-length
    /// path in the path-size computation).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// Not enough observations for the requested degrees of freedom.
    #[error("degrees of freedom: need more than {k} observations, got {n}")]
    DegreesOfFreedom { n: usize, k: usize },

    /// A test statistic is undefined (e.g. zero variance).
    #[error("undefined test: {0}")]
    UndefinedTest(String),

    /// The normal-equation matrix is singular; the named coefficients span
    /// its null space.
    #[error("non-identifiable coefficients: {0:?}")]
    NonIdentifiable(Vec<String>),

    /// File parsing failed.
    #[error("parse error in {file}:{line}: {message}")]
    Parse {
        file: String,
        line: usize,
        message: String,
    },

    #[error("unknown builtin network `{0}`")]
    UnknownNetwork(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
