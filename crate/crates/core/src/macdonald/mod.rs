//! Symmetric functions in `n` variables: monomial basis, Macdonald
//! operators, their eigenvalues, and the polynomials `P_λ(x; q, t)`.

mod expansion;
mod operators;

pub use expansion::{dehomogenize, macdonald_polynomial, MacdonaldExpansion, SymmetricPoly, TwoVarPoly};
pub use operators::{apply_macdonald_operator, eigenvalue_vector, monomial_sym, EigenvalueVector};

use rug::Rational;
use thiserror::Error;

use crate::exact::{ExactError, Partition};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MacdonaldError {
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error("q must avoid 0 and ±1 and t must be nonzero (got q = {q}, t = {t})")]
    InvalidQT { q: Rational, t: Rational },
    #[error("operator index r = {r} exceeds the variable count {n}")]
    OperatorIndex { r: usize, n: usize },
    #[error("eigenvalue collision between ({lambda}) and ({mu}) makes the system singular")]
    SingularSystem { lambda: Partition, mu: Partition },
    #[error("expected 3 variables, got {0}")]
    WrongVariableCount(usize),
    #[error("polynomial is not symmetric")]
    NotSymmetric,
    #[error("constructed polynomial fails the eigen-relation for r = {r}")]
    PostconditionFailed { r: usize },
}

/// An admissible pair of parameters: `q ∉ {0, ±1}`, `t ≠ 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QTPoint {
    pub q: Rational,
    pub t: Rational,
}

impl QTPoint {
    pub fn new(q: Rational, t: Rational) -> Result<Self, MacdonaldError> {
        if q == 0 || q == 1 || q == -1 || t == 0 {
            return Err(MacdonaldError::InvalidQT { q, t });
        }
        Ok(Self { q, t })
    }
}
