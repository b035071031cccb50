use thiserror::Error;

use crate::linalg::Ring;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid ring: {0}")]
    InvalidRing(String),

    #[error("{value} is not an element of {ring}")]
    NotInRing { value: String, ring: Ring },

    #[error("ring mismatch: {0} vs {1}")]
    RingMismatch(Ring, Ring),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("kernel is not a free module over {0}")]
    NonFreeKernel(Ring),

    #[error("operation requires the integers, got {0}")]
    RequiresIntegers(Ring),

    #[error("not a chain complex: {0}")]
    NotAComplex(String),

    #[error("not a chain map: {0}")]
    NotAChainMap(String),

    #[error("not a cofibration (split injection with free cokernel): {0}")]
    NotACofibration(String),

    #[error("not split: {0}")]
    NotSplit(String),

    #[error("complex is not acyclic: {0}")]
    NotAcyclic(String),

    #[error("invalid diagram: {0}")]
    Diagram(String),

    #[error("invalid D0-complex: {0}")]
    D0(String),

    #[error("input is not reduced: {0}")]
    NotReduced(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    /// An error raised while loading the value at `path`.
    #[error("{path}: {inner}")]
    At { path: String, inner: Box<Error> },
}

impl Error {
    /// The error with any location wrappers removed.
    pub fn root(&self) -> &Error {
        match self {
            Error::At { inner, .. } => inner.root(),
            e => e,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
