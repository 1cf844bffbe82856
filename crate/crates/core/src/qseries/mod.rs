//! High-precision q-series: Pochhammer symbols, basic hypergeometric
//! series, and the separated one-variable functions `φ_λ`, `ψ_λ` together
//! with residual checks for their q-difference equations.

mod real;
mod separated;
mod series;

pub use real::{Precision, Real};
pub use separated::{
    phi_lambda, polynomiality_check_with, psi_lambda, psi_polynomiality_check, separated_equation_residual, separated_equation_residual_with,
    separated_params, PolynomialityReport, PsiPolynomial, SeparatedParams,
};
pub use series::{phi_difference_residual, phi_difference_residual_against, phi_series, q_pochhammer, q_pochhammer_product, PochOrder, SeriesTruncation};

pub(crate) use series::{negligible, normalized_sum};

use thiserror::Error;

use crate::exact::ExactError;
use crate::macdonald::MacdonaldError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QSeriesError {
    #[error("infinite product requires |q| < 1")]
    DivergentProduct,
    #[error("pole: {0}")]
    PoleHit(String),
    #[error("series did not converge within {terms} terms")]
    NonConvergent { terms: usize },
    #[error("expected one more upper than lower parameter, got {numerator} and {denominator}")]
    ParameterCount { numerator: usize, denominator: usize },
    #[error("invalid truncation (eps_term = {eps_term}, max_terms = {max_terms}, consecutive_small = {consecutive_small})")]
    InvalidTruncation { eps_term: f64, max_terms: usize, consecutive_small: usize },
    #[error("precision of {0} digits is below the minimum of 30")]
    InvalidPrecision(u32),
    #[error("at least one variable is required")]
    ZeroVariables,
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error(transparent)]
    Macdonald(#[from] MacdonaldError),
}

impl QSeriesError {
    /// Short stable name used in reports and CLI messages.
    pub fn kind(&self) -> &'static str {
        match self {
            Self::DivergentProduct => "DivergentProduct",
            Self::PoleHit(_) => "PoleHit",
            Self::NonConvergent { .. } => "NonConvergent",
            Self::ParameterCount { .. } => "ParameterCount",
            Self::InvalidTruncation { .. } => "InvalidTruncation",
            Self::InvalidPrecision(_) => "InvalidPrecision",
            Self::ZeroVariables => "ZeroVariables",
            Self::Parse(_) => "ParseError",
            Self::Exact(ExactError::LengthExceedsVariables { .. }) => "LengthExceedsVariables",
            Self::Exact(_) => "ExactError",
            Self::Macdonald(_) => "MacdonaldError",
        }
    }
}
