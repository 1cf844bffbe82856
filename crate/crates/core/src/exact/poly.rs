//! Sparse multivariate (Laurent) polynomials with exact rational coefficients.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use rug::Rational;

use super::ExactError;

/// Exponent vector ordered graded-lexicographically, so the last key of a
/// `BTreeMap<Monomial, _>` is the leading term.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial(pub Vec<i32>);

impl Monomial {
    pub fn degree(&self) -> i64 {
        self.0.iter().map(|&e| i64::from(e)).sum()
    }

    fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    fn quotient(&self, divisor: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&divisor.0).map(|(a, b)| a - b).collect())
    }

    fn product(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A polynomial in a fixed, named list of variables. Exponents may be
/// negative for Laurent use; zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiPoly {
    vars: Vec<String>,
    terms: BTreeMap<Monomial, Rational>,
}

impl MultiPoly {
    pub fn zero(vars: &[&str]) -> Self {
        Self {
            vars: vars.iter().map(|v| v.to_string()).collect(),
            terms: BTreeMap::new(),
        }
    }

    /// Zero polynomial in `x1, …, xn`.
    pub fn zero_in(n: usize) -> Self {
        Self {
            vars: (1..=n).map(|i| format!("x{i}")).collect(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant_like(&self, c: impl Into<Rational>) -> Self {
        let mut p = self.empty_like();
        p.add_term(vec![0; self.nvars()], c.into());
        p
    }

    pub fn empty_like(&self) -> Self {
        Self {
            vars: self.vars.clone(),
            terms: BTreeMap::new(),
        }
    }

    /// The single variable `vars[i]`.
    pub fn var_like(&self, i: usize) -> Self {
        let mut e = vec![0; self.nvars()];
        e[i] = 1;
        let mut p = self.empty_like();
        p.add_term(e, Rational::from(1));
        p
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[i32], &Rational)> {
        self.terms.iter().map(|(m, c)| (m.0.as_slice(), c))
    }

    pub fn coeff(&self, exps: &[i32]) -> Rational {
        self.terms
            .get(&Monomial(exps.to_vec()))
            .cloned()
            .unwrap_or_default()
    }

    /// Adds `c·x^exps`, dropping the term if it cancels.
    pub fn add_term(&mut self, exps: Vec<i32>, c: Rational) {
        assert_eq!(exps.len(), self.nvars(), "exponent vector length");
        if c == 0 {
            return;
        }
        let key = Monomial(exps);
        match self.terms.get_mut(&key) {
            Some(existing) => {
                *existing += c;
                if *existing == 0 {
                    self.terms.remove(&key);
                }
            }
            None => {
                self.terms.insert(key, c);
            }
        }
    }

    pub fn leading_term(&self) -> Option<(&Monomial, &Rational)> {
        self.terms.last_key_value()
    }

    pub fn total_degree(&self) -> Option<i64> {
        self.terms.keys().map(Monomial::degree).max()
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if *c == 0 {
            return self.empty_like();
        }
        Self {
            vars: self.vars.clone(),
            terms: self
                .terms
                .iter()
                .map(|(m, v)| (m.clone(), Rational::from(v * c)))
                .collect(),
        }
    }

    /// Substitutes `x_i → factors[i]·x_i` for every variable.
    pub fn scale_vars(&self, factors: &[Rational]) -> Self {
        assert_eq!(factors.len(), self.nvars());
        let mut out = self.empty_like();
        for (m, c) in &self.terms {
            let mut v = c.clone();
            for (f, &e) in factors.iter().zip(&m.0) {
                v *= rational_pow(f, e);
            }
            out.add_term(m.0.clone(), v);
        }
        out
    }

    /// Reorders variables: variable `i` of the result is variable `perm[i]`
    /// of `self`.
    pub fn permute_vars(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.nvars());
        let mut out = self.empty_like();
        for (m, c) in &self.terms {
            let mut e = vec![0; self.nvars()];
            for (i, &src) in perm.iter().enumerate() {
                e[src] = m.0[i];
            }
            out.add_term(e, c.clone());
        }
        out
    }

    pub fn eval(&self, point: &[Rational]) -> Rational {
        assert_eq!(point.len(), self.nvars());
        let mut total = Rational::new();
        for (m, c) in &self.terms {
            let mut v = c.clone();
            for (x, &e) in point.iter().zip(&m.0) {
                v *= rational_pow(x, e);
            }
            total += v;
        }
        total
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = self.constant_like(1);
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    fn check_compatible(&self, other: &Self) {
        assert_eq!(self.vars, other.vars, "polynomials over different variables");
    }

    /// Exact division in graded-lex order. Fails with `NotDivisible` if
    /// any remainder is left.
    pub fn exact_divide(&self, divisor: &MultiPoly) -> Result<MultiPoly, ExactError> {
        self.check_compatible(divisor);
        let (lead_m, lead_c) = divisor.leading_term().ok_or(ExactError::DivisionByZero)?;
        if self.has_negative_exponents() || divisor.has_negative_exponents() {
            return Err(ExactError::LaurentDivision);
        }
        let mut rem = self.clone();
        let mut quot = self.empty_like();
        while let Some((m, c)) = rem.leading_term() {
            if !lead_m.divides(m) {
                return Err(ExactError::NotDivisible);
            }
            let qm = m.quotient(lead_m);
            let qc = Rational::from(c / lead_c);
            for (dm, dc) in &divisor.terms {
                rem.add_term(dm.product(&qm).0, -Rational::from(dc * &qc));
            }
            quot.add_term(qm.0, qc);
        }
        Ok(quot)
    }

    fn has_negative_exponents(&self) -> bool {
        self.terms.keys().any(|m| m.0.iter().any(|&e| e < 0))
    }
}

/// `x^e` for an integer exponent, exact.
pub fn rational_pow(x: &Rational, e: i32) -> Rational {
    let mut r = Rational::from(1);
    for _ in 0..e.unsigned_abs() {
        r *= x;
    }
    if e < 0 {
        r.recip_mut();
    }
    r
}

/// Exact `poly_exact_divide` entry point.
pub fn poly_exact_divide(numerator: &MultiPoly, divisor: &MultiPoly) -> Result<MultiPoly, ExactError> {
    numerator.exact_divide(divisor)
}

impl Add for &MultiPoly {
    type Output = MultiPoly;
    fn add(self, rhs: &MultiPoly) -> MultiPoly {
        self.check_compatible(rhs);
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.0.clone(), c.clone());
        }
        out
    }
}

impl Sub for &MultiPoly {
    type Output = MultiPoly;
    fn sub(self, rhs: &MultiPoly) -> MultiPoly {
        self.check_compatible(rhs);
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.0.clone(), -c.clone());
        }
        out
    }
}

impl Mul for &MultiPoly {
    type Output = MultiPoly;
    fn mul(self, rhs: &MultiPoly) -> MultiPoly {
        self.check_compatible(rhs);
        let mut out = self.empty_like();
        for (a, ca) in &self.terms {
            for (b, cb) in &rhs.terms {
                out.add_term(a.product(b).0, Rational::from(ca * cb));
            }
        }
        out
    }
}

impl Neg for &MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        self.scale(&Rational::from(-1))
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (k, (m, c)) in self.terms.iter().rev().enumerate() {
            let mut factors = Vec::new();
            for (v, &e) in self.vars.iter().zip(&m.0) {
                match e {
                    0 => {}
                    1 => factors.push(v.clone()),
                    _ => factors.push(format!("{v}^{e}")),
                }
            }
            let neg = *c < 0;
            let abs = Rational::from(c.abs_ref());
            let body = match (factors.is_empty(), abs == 1) {
                (true, _) => abs.to_string(),
                (false, true) => factors.join("*"),
                (false, false) => format!("{abs}*{}", factors.join("*")),
            };
            match (k, neg) {
                (0, true) => write!(f, "-{body}")?,
                (0, false) => write!(f, "{body}")?,
                (_, true) => write!(f, " - {body}")?,
                (_, false) => write!(f, " + {body}")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::from((n, d))
    }

    fn xy() -> (MultiPoly, MultiPoly) {
        let z = MultiPoly::zero(&["x", "y"]);
        (z.var_like(0), z.var_like(1))
    }

    #[test]
    fn textbook_factorization() {
        let (x, y) = xy();
        let num = &(&x * &x) - &(&y * &y);
        let q = num.exact_divide(&(&x - &y)).unwrap();
        assert_eq!(q, &x + &y);
    }

    #[test]
    fn divide_by_one_is_identity() {
        let (x, y) = xy();
        let p = &(&x.pow(3) + &y.scale(&r(-2, 7))) + &x.constant_like(r(5, 3));
        assert_eq!(p.exact_divide(&p.constant_like(1)).unwrap(), p);
    }

    #[test]
    fn non_divisible_is_reported() {
        let z = MultiPoly::zero_in(2);
        let (x1, x2) = (z.var_like(0), z.var_like(1));
        let t = r(10, 3);
        let num = &(&x1.scale(&t) - &x2) * &(&x1 + &x2);
        assert!(matches!(num.exact_divide(&(&x1 - &x2)), Err(ExactError::NotDivisible)));
        assert!(matches!(num.exact_divide(&z), Err(ExactError::DivisionByZero)));
    }

    #[test]
    fn zero_coefficients_are_not_stored() {
        let (x, _) = xy();
        let d = &x - &x;
        assert!(d.is_zero());
        assert_eq!(d.to_string(), "0");
    }

    #[test]
    fn scale_vars_and_permute() {
        let (x, y) = xy();
        let p = &(&x * &x) + &y;
        let s = p.scale_vars(&[r(1, 2), r(3, 1)]);
        assert_eq!(s.coeff(&[2, 0]), r(1, 4));
        assert_eq!(s.coeff(&[0, 1]), r(3, 1));
        let sw = p.permute_vars(&[1, 0]);
        assert_eq!(sw, &(&y * &y) + &x);
        assert_eq!(p.eval(&[r(2, 1), r(1, 3)]), r(13, 3));
    }

    fn small_poly() -> impl Strategy<Value = MultiPoly> {
        prop::collection::vec(((0i32..3, 0i32..3, 0i32..3), -5i64..=5, 1i64..4), 1..6).prop_map(|ts| {
            let mut p = MultiPoly::zero_in(3);
            for ((a, b, c), n, d) in ts {
                p.add_term(vec![a, b, c], Rational::from((n, d)));
            }
            p
        })
    }

    proptest! {
        #[test]
        fn divide_product_recovers_factor(a in small_poly(), b in small_poly()) {
            prop_assume!(!b.is_zero());
            let prod = &a * &b;
            prop_assert_eq!(prod.exact_divide(&b).unwrap(), a);
        }

        #[test]
        fn ring_axioms(a in small_poly(), b in small_poly(), c in small_poly()) {
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a * &b, &b * &a);
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        }
    }
}
