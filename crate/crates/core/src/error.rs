use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),

    #[error("jet order {order} exceeds the configured maximum {max}")]
    OrderOverflow { order: u32, max: u32 },

    /// A negative power of something that is not a single monomial.
    #[error("expression is not a Laurent polynomial: {0}")]
    NonPolynomial(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("nullspace mismatch between parameter points: {0}")]
    NullspaceMismatch(String),

    #[error("internal verification failed: {0}")]
    Verification(String),

    #[error("commutator [{i}, {j}] is not in the span of the basis")]
    NonClosure { i: usize, j: usize },

    #[error("adjoint series of generator {0} does not terminate within {1} terms")]
    NonTerminating(usize, usize),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("reduction left explicit independent-variable terms: {0}")]
    ResidualDependence(String),

    #[error("domain violation: {0}")]
    Domain(String),

    #[error("numerical failure: {0}")]
    Numeric(String),
}
