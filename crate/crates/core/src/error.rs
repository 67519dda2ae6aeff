use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("line {line}: {detail}")]
    Parse { line: usize, detail: String },
    #[error("line {line}: duplicate edge {j}-{k}")]
    DuplicateEdge { line: usize, j: usize, k: usize },
    #[error("line {line}: self-loop at vertex {vertex}")]
    SelfLoop { line: usize, vertex: usize },
    #[error("line {line}: vertex {vertex} out of range 1..={n}")]
    IndexOutOfRange { line: usize, vertex: usize, n: usize },
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("invalid generator parameters: {0}")]
    InvalidParameters(String),
    #[error("invalid imbalance sequence: {0}")]
    InvalidImbalance(String),
    #[error("imbalance parity does not match degree parity at vertex {vertex}")]
    Parity { vertex: usize },
    #[error("imbalance sequence is infeasible for this graph")]
    Infeasible,
    #[error("degenerate instance: {0}")]
    Degenerate(String),
    #[error("solver did not converge after {iterations} sweeps (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("graph is disconnected")]
    Disconnected,
    #[error("size limit exceeded: {0}")]
    SizeLimit(String),
    #[error("{0}")]
    Precondition(String),
    #[error("internal consistency check failed: {0}")]
    Inconsistent(String),
}

impl Error {
    /// Stable machine-readable name for the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Parse { .. } => "Parse",
            Error::DuplicateEdge { .. } => "DuplicateEdge",
            Error::SelfLoop { .. } => "SelfLoop",
            Error::IndexOutOfRange { .. } => "IndexOutOfRange",
            Error::InvalidGraph(_) => "InvalidGraph",
            Error::InvalidParameters(_) => "InvalidParameters",
            Error::InvalidImbalance(_) => "InvalidImbalance",
            Error::Parity { .. } => "ParityError",
            Error::Infeasible => "Infeasible",
            Error::Degenerate(_) => "Degenerate",
            Error::NotConverged { .. } => "NotConverged",
            Error::NotPositiveDefinite => "NotPositiveDefinite",
            Error::Disconnected => "Disconnected",
            Error::SizeLimit(_) => "SizeLimit",
            Error::Precondition(_) => "Precondition",
            Error::Inconsistent(_) => "Inconsistent",
        }
    }

    /// Whether the error reflects the input instance rather than a failure of the code.
    pub fn is_instance_error(&self) -> bool {
        matches!(self, Error::Infeasible | Error::Degenerate(_) | Error::Parity { .. } | Error::InvalidImbalance(_))
    }
}
