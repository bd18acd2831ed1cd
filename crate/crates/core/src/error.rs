//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by construction and computation routines.
///
/// Input-file parse errors carry a line number so the CLI can point at the
/// offending line.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    #[error("multiplication table is not associative: ({0} * {1}) * {2} != {0} * ({1} * {2})")]
    NotAssociative(usize, usize, usize),

    #[error("row or column {0} of the multiplication table is not a permutation")]
    NotPermutation(usize),

    #[error("no two-sided identity element in table")]
    NoIdentity,

    #[error("element {0} has no two-sided inverse")]
    NoInverse(usize),

    #[error("generated group exceeds the maximum order {max}")]
    OrderBudget { max: usize },

    #[error("operation budget exceeded: {0}")]
    Budget(String),

    #[error("subset is not a subgroup: {0}")]
    NotSubgroup(String),

    #[error("mapping is not a group homomorphism at ({0}, {1})")]
    NotHomomorphism(usize, usize),

    #[error("division by zero in Q(zeta_{0})")]
    DivisionByZero(u64),

    #[error("cyclotomic modulus mismatch: {0} vs {1}")]
    ModulusMismatch(u64, u64),

    #[error("matrix dimension mismatch: {0}")]
    DimMismatch(String),

    #[error("linear system is inconsistent")]
    Inconsistent,

    #[error("2-cochain is not a cocycle at ({0}, {1}, {2})")]
    NotCocycle(usize, usize, usize),

    #[error("cohomology groups do not match")]
    GroupDataMismatch,

    #[error("base G-set mismatch: {0}")]
    BaseMismatch(String),

    #[error("kernel is not invertible: {0}")]
    NotInvertible(String),

    #[error("not a linearisation: cocycle law fails at ({0}, {1})")]
    NotLinearisation(usize, usize),

    #[error("object is not simple for this mu-system: non-scalar defect at ({0}, {1})")]
    NonScalarDefect(usize, usize),

    #[error("modulus too small: defect scalar at ({0}, {1}) is not a root of unity of order dividing {2}")]
    ModulusTooSmall(usize, usize, u64),

    #[error("support of the object is not invariant under the group action (point {0}, element {1})")]
    SupportNotInvariant(usize, usize),

    #[error("fiber dimension {0} at point {1} exceeds 1; enumeration handles rank <= 1 only")]
    RankTooLarge(usize, usize),

    #[error("group map is not surjective")]
    NotSurjective,

    #[error("map is not equivariant at (g={0}, x={1})")]
    NotEquivariant(usize, usize),

    #[error("action is not free at (g={0}, x={1})")]
    NotFree(usize, usize),

    #[error("{0}")]
    Scenario(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Convenience result alias used across the crate.
pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, msg: msg.into() }
    }
}
