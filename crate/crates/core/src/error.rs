use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("graph has {size} nodes but the padded size is {max_nodes}")]
    SizeExceeded { size: usize, max_nodes: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("permutation of length {0} is not a bijection")]
    InvalidPermutation(usize),

    #[error("cost matrix contains a non-finite entry at ({row}, {col})")]
    NonFiniteCost { row: usize, col: usize },

    #[error("transport plan is not doubly stochastic: {0}")]
    InfeasiblePlan(String),

    #[error("exhaustive search over {size}! permutations refused (limit {limit})")]
    TooLarge { size: usize, limit: usize },

    #[error("ground loss `{0}` has no separable decomposition")]
    NotDecomposable(&'static str),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("generation failed after {attempts} attempts")]
    GenerationFailed { attempts: usize },

    #[error("batch item {index}: {source}")]
    BatchItem {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
