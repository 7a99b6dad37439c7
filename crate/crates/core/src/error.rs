use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("vertex {index} out of range for a graph with {n} vertices")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("invalid vertex set: {0}")]
    InvalidVertexSet(String),

    #[error("vertex {vertex} violates set membership: {reason}")]
    Membership { vertex: usize, reason: &'static str },

    #[error("invalid affinity matrix: {0}")]
    InvalidMatrix(String),

    #[error("oracle size cap exceeded: {size} > {cap}")]
    OracleCap { size: usize, cap: usize },

    #[error("degenerate solver state: x'Mx = {denominator}")]
    Degenerate { denominator: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(
        "extracted support {support:?} misses the active constraint set {constraints:?} \
         (alpha = {alpha}, iterations = {iterations})"
    )]
    ConstraintMissed {
        support: Vec<usize>,
        constraints: Vec<usize>,
        alpha: f64,
        iterations: usize,
    },

    #[error("graph file line {line}: {message}")]
    GraphFormat { line: usize, message: String },

    #[error("invalid annotation: {0}")]
    Annotation(String),

    #[error("image error: {0}")]
    Image(#[from] image::ImageError),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
