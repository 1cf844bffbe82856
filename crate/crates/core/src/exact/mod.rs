//! Exact arithmetic substrate: rationals, sparse polynomials, partitions.
//!
//! Rationals are GMP-backed [`rug::Rational`], always held in canonical
//! form (reduced, positive denominator, zero as `0/1`).

mod partition;
mod poly;

pub use partition::{dominance_leq, partitions_of_weight, partitions_up_to, Partition};
pub use poly::{poly_exact_divide, rational_pow, Monomial, MultiPoly};

use rug::ops::Pow;
use rug::{Integer, Rational};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExactError {
    #[error("polynomial division leaves a nonzero remainder")]
    NotDivisible,
    #[error("division by the zero polynomial")]
    DivisionByZero,
    #[error("exact division is only defined for polynomials with non-negative exponents")]
    LaurentDivision,
    #[error("partition of length {length} does not fit in {n} variables")]
    LengthExceedsVariables { length: usize, n: usize },
    #[error("not a partition: {0}")]
    NotAPartition(String),
    #[error("parse error: {0}")]
    Parse(String),
}

/// Parses `"p/q"`, `"p"`, or a finite decimal such as `"-0.125"` into an
/// exact rational.
pub fn parse_rational(s: &str) -> Result<Rational, ExactError> {
    let s = s.trim();
    let bad = || ExactError::Parse(format!("not a rational number: {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n: Integer = n.trim().parse().map_err(|_| bad())?;
        let d: Integer = d.trim().parse().map_err(|_| bad())?;
        if d == 0 {
            return Err(ExactError::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(Rational::from((n, d)));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = int.trim_start().starts_with('-');
        let int_part: Integer = match int.trim() {
            "" | "-" | "+" => Integer::new(),
            other => other.parse().map_err(|_| bad())?,
        };
        let frac_part: Integer = frac.parse().map_err(|_| bad())?;
        let scale = Integer::from(10).pow(frac.len() as u32);
        let mut magnitude = Rational::from((frac_part, scale));
        magnitude += Rational::from(int_part.abs());
        return Ok(if negative { -magnitude } else { magnitude });
    }
    let n: Integer = s.parse().map_err(|_| bad())?;
    Ok(Rational::from(n))
}

/// Canonical string form: `"p/q"`, or `"p"` when the denominator is 1.
pub fn format_rational(r: &Rational) -> String {
    r.to_string()
}
