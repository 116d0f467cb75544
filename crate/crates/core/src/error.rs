use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid ridge parameter {0}: must be finite and non-negative")]
    InvalidLambda(f64),

    /// `I - H_T` is numerically singular for the test block `indices`.
    #[error("singular test block {indices:?} (partition {partition:?}, condition {condition:.3e})")]
    SingularTestBlock {
        partition: Option<usize>,
        indices: Vec<usize>,
        condition: f64,
    },

    #[error("insufficient data: need at least {needed} units, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("{count} partitions exceed the enumeration guard of {limit}")]
    TooManyPartitions { count: u128, limit: u128 },

    #[error("no feasible ridge parameter on the grid for outer test set {outer:?}")]
    NoFeasibleLambda { outer: Vec<usize> },

    #[error("degenerate variance: test statistic undefined")]
    DegenerateVariance,

    #[error("invalid folds: {0}")]
    InvalidFolds(String),

    #[error("percent change undefined for null error {0}")]
    UndefinedDelta(f64),

    #[error("ingest error at row {row}, column {column}: {message}")]
    Ingest {
        row: usize,
        column: usize,
        message: String,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
