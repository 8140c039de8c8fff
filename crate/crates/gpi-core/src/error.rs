//! Crate-wide error type.

use std::fmt;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// A parameter that must be prime is not.
    NotPrime(u64),
    /// A coordinate vector or table has the wrong length.
    DimensionMismatch { expected: usize, found: usize },
    /// The multiplication table fails associativity; the violating basis
    /// triple (i, j, k) is reported.
    NotAssociative { i: usize, j: usize, k: usize },
    /// The designated unity is not a two-sided identity on basis element `i`.
    UnityFailure { index: usize },
    /// A user-supplied extension modulus factors over F_p.
    ReducibleModulus(String),
    /// Operands belong to different algebras.
    AlgebraMismatch,
    /// Operands declare different variable counts and cannot be promoted.
    VarCountMismatch { left: usize, right: usize },
    /// An exhaustive enumeration would exceed the configured budget.
    BudgetExceeded { needed: u128, budget: u64 },
    /// The canonical form for generalized polynomials is undefined over this
    /// algebra (its center is not a field, or the algebra is not free over
    /// its center).
    CenterNotField(String),
    /// Expression syntax error with 1-based line/column.
    Parse { line: usize, col: usize, msg: String },
    /// The coefficient algebra has the wrong characteristic for the request.
    CharMismatch { expected: u64, found: u64 },
    /// A stated hypothesis of an operation is violated.
    Hypothesis(String),
    /// A template evaluates the inverse variable over a non-unit domain.
    InverseOverFullDomain,
    /// The map cannot be written in the requested operator span.
    NotInSpan(String),
    /// Catch-all for invalid parameters.
    BadParameter(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NotPrime(p) => write!(f, "{p} is not prime"),
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::NotAssociative { i, j, k } => write!(
                f,
                "multiplication table is not associative: (b{i}*b{j})*b{k} != b{i}*(b{j}*b{k})"
            ),
            Error::UnityFailure { index } => {
                write!(f, "designated unity is not an identity on basis element {index}")
            }
            Error::ReducibleModulus(m) => write!(f, "modulus {m} is reducible"),
            Error::AlgebraMismatch => write!(f, "operands belong to different algebras"),
            Error::VarCountMismatch { left, right } => {
                write!(f, "variable count mismatch: {left} vs {right}")
            }
            Error::BudgetExceeded { needed, budget } => {
                write!(f, "enumeration of {needed} elements exceeds budget {budget}")
            }
            Error::CenterNotField(why) => {
                write!(f, "canonical form undefined: {why}")
            }
            Error::Parse { line, col, msg } => write!(f, "parse error at {line}:{col}: {msg}"),
            Error::CharMismatch { expected, found } => {
                write!(f, "characteristic mismatch: expected {expected}, found {found}")
            }
            Error::Hypothesis(msg) => write!(f, "hypothesis violated: {msg}"),
            Error::InverseOverFullDomain => {
                write!(f, "the inverse variable requires the unit domain")
            }
            Error::NotInSpan(msg) => write!(f, "not in operator span: {msg}"),
            Error::BadParameter(msg) => write!(f, "{msg}"),
        }
    }
}

impl std::error::Error for Error {}
