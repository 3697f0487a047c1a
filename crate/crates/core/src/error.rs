use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty vertex set")]
    EmptyVertexSet,

    #[error("vertex {index} has dimension {found}, expected {expected}")]
    RaggedVertices {
        index: usize,
        expected: usize,
        found: usize,
    },

    #[error("degenerate simplex {0:?}: repeated vertex index")]
    DegenerateSimplex(Vec<usize>),

    #[error(
        "simplex {simplex:?} references vertex {index} but the complex has {num_vertices} vertices"
    )]
    IndexOutOfRange {
        simplex: Vec<usize>,
        index: usize,
        num_vertices: usize,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid directions: {0}")]
    InvalidDirections(String),

    #[error("unknown {what} `{value}`")]
    UnknownVariant { what: &'static str, value: String },

    #[error("cannot normalise a zero-norm grid to unit l2 norm")]
    ZeroNorm,

    #[error("grid is already normalised ({0})")]
    AlreadyNormalized(String),

    #[error("non-finite gradient")]
    NonFiniteGradient,

    #[error("invalid complex: {0}")]
    InvalidComplex(String),

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
