use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use rug::float::{Constant, Round};
use rug::ops::Pow;
use rug::{Float, Rational};

use super::QSeriesError;

/// Working precision in decimal digits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Precision(u32);

impl Precision {
    pub const MIN_DIGITS: u32 = 30;
    pub const DEFAULT_DIGITS: u32 = 60;
    const GUARD_BITS: u32 = 64;

    pub fn new(digits: u32) -> Result<Self, QSeriesError> {
        if digits < Self::MIN_DIGITS {
            return Err(QSeriesError::InvalidPrecision(digits));
        }
        Ok(Self(digits))
    }

    pub fn digits(self) -> u32 {
        self.0
    }

    /// Mantissa bits: enough for the requested digits plus guard bits that
    /// absorb rounding in long sums and products.
    pub fn bits(self) -> u32 {
        (f64::from(self.0) * std::f64::consts::LOG2_10).ceil() as u32 + Self::GUARD_BITS
    }
}

impl Default for Precision {
    fn default() -> Self {
        Self(Self::DEFAULT_DIGITS)
    }
}

/// A real number carried at a stated precision. Binary operations produce
/// a result at the smaller of the two operand precisions.
#[derive(Clone, Debug)]
pub struct Real {
    value: Float,
    precision: Precision,
}

impl Real {
    pub fn from_rational(r: &Rational, precision: Precision) -> Self {
        Self { value: Float::with_val(precision.bits(), r), precision }
    }

    pub fn from_i64(v: i64, precision: Precision) -> Self {
        Self { value: Float::with_val(precision.bits(), v), precision }
    }

    pub fn from_f64(v: f64, precision: Precision) -> Self {
        Self { value: Float::with_val(precision.bits(), v), precision }
    }

    /// Parses a decimal string (`"0.83"`, `"1e-5"`) or an exact fraction
    /// (`"5/6"`) at full precision.
    pub fn parse(s: &str, precision: Precision) -> Result<Self, QSeriesError> {
        let s = s.trim();
        if s.contains('/') {
            let r = crate::exact::parse_rational(s).map_err(|e| QSeriesError::Parse(e.to_string()))?;
            return Ok(Self::from_rational(&r, precision));
        }
        let parsed = Float::parse(s).map_err(|e| QSeriesError::Parse(format!("{s:?}: {e}")))?;
        Ok(Self { value: Float::with_val(precision.bits(), parsed), precision })
    }

    pub fn zero(precision: Precision) -> Self {
        Self::from_i64(0, precision)
    }

    pub fn one(precision: Precision) -> Self {
        Self::from_i64(1, precision)
    }

    pub fn pi(precision: Precision) -> Self {
        Self { value: Float::with_val(precision.bits(), Constant::Pi), precision }
    }

    pub fn precision(&self) -> Precision {
        self.precision
    }

    pub fn as_float(&self) -> &Float {
        &self.value
    }

    pub fn with_precision(&self, precision: Precision) -> Self {
        Self { value: Float::with_val(precision.bits(), &self.value), precision }
    }

    fn wrap(value: Float, precision: Precision) -> Self {
        Self { value, precision }
    }

    pub fn abs(&self) -> Self {
        Self::wrap(Float::with_val(self.precision.bits(), self.value.abs_ref()), self.precision)
    }

    pub fn sqrt(&self) -> Self {
        Self::wrap(Float::with_val(self.precision.bits(), self.value.sqrt_ref()), self.precision)
    }

    pub fn recip(&self) -> Self {
        Self::wrap(Float::with_val(self.precision.bits(), self.value.recip_ref()), self.precision)
    }

    pub fn powi(&self, e: i64) -> Self {
        let e = i32::try_from(e).expect("exponent fits in i32");
        Self::wrap(Float::with_val(self.precision.bits(), (&self.value).pow(e)), self.precision)
    }

    pub fn powf(&self, e: &Real) -> Self {
        let p = self.precision.min(e.precision);
        Self::wrap(Float::with_val(p.bits(), (&self.value).pow(&e.value)), p)
    }

    pub fn ln(&self) -> Self {
        Self::wrap(Float::with_val(self.precision.bits(), self.value.ln_ref()), self.precision)
    }

    pub fn cos(&self) -> Self {
        Self::wrap(Float::with_val(self.precision.bits(), self.value.cos_ref()), self.precision)
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
    }

    pub fn to_f64(&self) -> f64 {
        self.value.to_f64()
    }

    /// `|self| < bound`.
    pub fn abs_lt(&self, bound: f64) -> bool {
        self.value.clone().abs() < bound
    }

    /// Scientific decimal string with `digits` significant digits.
    pub fn to_decimal(&self, digits: usize) -> String {
        if self.value.is_zero() {
            return "0".to_string();
        }
        self.value.to_string_radix_round(10, Some(digits), Round::Nearest)
    }

    /// Full-precision decimal string.
    pub fn to_decimal_full(&self) -> String {
        self.to_decimal(self.precision.digits() as usize)
    }

    pub fn max_abs<'a>(values: impl IntoIterator<Item = &'a Real>) -> Option<Real> {
        values
            .into_iter()
            .map(Real::abs)
            .max_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal))
    }

    /// `|a − b| / max(|a|, |b|)`, or zero when both vanish.
    pub fn rel_diff(a: &Real, b: &Real) -> Real {
        let scale = Real::max_abs([a, b]).expect("two values");
        let diff = (a - b).abs();
        if scale.is_zero() {
            diff
        } else {
            &diff / &scale
        }
    }
}

impl PartialEq for Real {
    fn eq(&self, other: &Self) -> bool {
        self.value == other.value
    }
}

impl PartialOrd for Real {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.value.partial_cmp(&other.value)
    }
}

impl PartialEq<f64> for Real {
    fn eq(&self, other: &f64) -> bool {
        self.value == *other
    }
}

impl PartialOrd<f64> for Real {
    fn partial_cmp(&self, other: &f64) -> Option<Ordering> {
        self.value.partial_cmp(other)
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal(f.precision().unwrap_or(20)))
    }
}

macro_rules! binary_op {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait<&Real> for &Real {
            type Output = Real;
            fn $method(self, rhs: &Real) -> Real {
                let p = self.precision.min(rhs.precision);
                Real::wrap(Float::with_val(p.bits(), &self.value $op &rhs.value), p)
            }
        }
        impl $trait<Real> for Real {
            type Output = Real;
            fn $method(self, rhs: Real) -> Real {
                &self $op &rhs
            }
        }
        impl $trait<&Real> for Real {
            type Output = Real;
            fn $method(self, rhs: &Real) -> Real {
                &self $op rhs
            }
        }
        impl $trait<Real> for &Real {
            type Output = Real;
            fn $method(self, rhs: Real) -> Real {
                self $op &rhs
            }
        }
    };
}

binary_op!(Add, add, +);
binary_op!(Sub, sub, -);
binary_op!(Mul, mul, *);
binary_op!(Div, div, /);

impl Neg for &Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real::wrap(Float::with_val(self.precision.bits(), -&self.value), self.precision)
    }
}

impl Neg for Real {
    type Output = Real;
    fn neg(self) -> Real {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precision_bounds() {
        assert!(Precision::new(29).is_err());
        assert_eq!(Precision::new(30).unwrap().digits(), 30);
        assert!(Precision::default().bits() >= 200 + 64);
    }

    #[test]
    fn results_take_the_smaller_precision() {
        let lo = Precision::new(30).unwrap();
        let hi = Precision::new(80).unwrap();
        let a = Real::from_i64(2, hi);
        let b = Real::from_i64(3, lo);
        assert_eq!((&a + &b).precision(), lo);
        assert_eq!((&a * &a).precision(), hi);
    }

    #[test]
    fn exact_rationals_round_trip_to_precision() {
        let p = Precision::default();
        let third = Real::from_rational(&Rational::from((1, 3)), p);
        let back = &third * &Real::from_i64(3, p);
        assert!((&back - &Real::one(p)).abs_lt(1e-70));
        let parsed = Real::parse("0.83", p).unwrap();
        let exact = Real::from_rational(&Rational::from((83, 100)), p);
        assert!((&parsed - &exact).abs_lt(1e-70));
        assert_eq!(Real::parse("5/6", p).unwrap(), Real::from_rational(&Rational::from((5, 6)), p));
        assert!(Real::parse("abc", p).is_err());
    }

    #[test]
    fn elementary_functions() {
        let p = Precision::default();
        let two = Real::from_i64(2, p);
        let r = two.sqrt();
        assert!((&(&r * &r) - &two).abs_lt(1e-70));
        let half = Real::from_rational(&Rational::from((1, 2)), p);
        assert!((&half.powf(&Real::from_i64(3, p)) - &half.powi(3)).abs_lt(1e-70));
        assert!((&half.powi(-2) - &Real::from_i64(4, p)).abs_lt(1e-70));
        assert_eq!(Real::from_f64(-1.5, p).to_decimal(3), "-1.50");
        assert_eq!(Real::rel_diff(&Real::zero(p), &Real::zero(p)), 0.0);
    }
}
