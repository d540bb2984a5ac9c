use thiserror::Error;

/// Errors raised by the coordinate-construction library.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid weight vector: {0}")]
    InvalidWeights(String),

    #[error("shape violation: {0}")]
    ShapeViolation(String),

    #[error("invalid Lie algebra: {0}")]
    InvalidAlgebra(String),

    #[error("matrix is singular")]
    SingularMatrix,

    #[error("bracket [X{i},X{j}] has a component along X{k} (w_k = {wk} > {wij}) at the base point")]
    BracketIncompatible {
        i: usize,
        j: usize,
        k: usize,
        wk: u32,
        wij: u32,
    },

    #[error("frame is not linearly adapted at 0: field {0} differs from the coordinate field there")]
    NotAdapted(usize),

    #[error("coordinates are not privileged: field {field} has weight {weight}, expected {expected}")]
    NotPrivileged { field: usize, weight: i64, expected: i64 },

    #[error("fields are not graded-triangular: {0}")]
    NonTriangular(String),

    #[error("structure constants differ: {0}")]
    StructureMismatch(String),

    #[error("unknown catalog entry `{0}`")]
    UnknownCatalog(String),

    #[error("dilation parameter must be nonzero")]
    ZeroScale,

    #[error("map is not invertible: {0}")]
    NotInvertible(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
