use super::real::Real;
use super::QSeriesError;

/// When to stop summing a series or multiplying out an infinite product.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesTruncation {
    eps_term: f64,
    max_terms: usize,
    consecutive_small: usize,
}

impl SeriesTruncation {
    pub fn new(eps_term: f64, max_terms: usize, consecutive_small: usize) -> Result<Self, QSeriesError> {
        if eps_term.is_nan() || eps_term <= 0.0 || max_terms < 50 || consecutive_small < 3 {
            return Err(QSeriesError::InvalidTruncation { eps_term, max_terms, consecutive_small });
        }
        Ok(Self { eps_term, max_terms, consecutive_small })
    }

    pub fn eps_term(&self) -> f64 {
        self.eps_term
    }

    pub fn max_terms(&self) -> usize {
        self.max_terms
    }

    pub fn consecutive_small(&self) -> usize {
        self.consecutive_small
    }

    /// Twice the term budget and half the threshold.
    pub fn tightened(&self) -> Self {
        Self { eps_term: self.eps_term / 2.0, max_terms: self.max_terms * 2, consecutive_small: self.consecutive_small }
    }

    pub fn with_max_terms(&self, max_terms: usize) -> Result<Self, QSeriesError> {
        Self::new(self.eps_term, max_terms, self.consecutive_small)
    }

    /// Cap on factors for infinite products, which converge far faster than
    /// the bilateral sums the term budget is sized for.
    pub(crate) fn product_cap(&self) -> usize {
        self.max_terms * 20
    }
}

impl Default for SeriesTruncation {
    fn default() -> Self {
        Self { eps_term: 1e-70, max_terms: 400, consecutive_small: 3 }
    }
}

/// Length of a q-Pochhammer product.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PochOrder {
    Finite(i64),
    Infinite,
}

/// True when `x` is zero up to rounding on the scale `max(|scale|, 1)`.
pub(crate) fn negligible(x: &Real, scale: &Real) -> bool {
    let p = x.precision();
    let scale = if scale.abs_lt(1.0) { Real::one(p) } else { scale.abs() };
    let bound = &scale * &Real::from_f64(10f64.powi(8 - p.digits() as i32), p);
    x.abs() <= bound
}

/// `(a; q)_order`. Negative orders use `(a;q)_{−m} = 1 / ∏_{k=1}^{m} (1 − a q^{−k})`.
pub fn q_pochhammer(a: &Real, q: &Real, order: PochOrder, trunc: &SeriesTruncation) -> Result<Real, QSeriesError> {
    let p = a.precision().min(q.precision());
    let one = Real::one(p);
    match order {
        PochOrder::Finite(n) if n >= 0 => {
            let mut acc = one.clone();
            let mut aqk = a.clone();
            for _ in 0..n {
                acc = &acc * &(&one - &aqk);
                aqk = &aqk * q;
            }
            Ok(acc)
        }
        PochOrder::Finite(n) => {
            let q_inv = q.recip();
            let mut acc = one.clone();
            let mut aqk = a * &q_inv;
            for k in 1..=(-n) {
                let factor = &one - &aqk;
                if negligible(&factor, &aqk) {
                    return Err(QSeriesError::PoleHit(format!("(a;q)_{n} with a·q^-{k} = 1")));
                }
                acc = &acc * &factor;
                aqk = &aqk * &q_inv;
            }
            Ok(acc.recip())
        }
        PochOrder::Infinite => {
            if !q.abs_lt(1.0) {
                return Err(QSeriesError::DivergentProduct);
            }
            let mut acc = one.clone();
            let mut aqk = a.clone();
            let mut small = 0;
            for _ in 0..trunc.product_cap() {
                acc = &acc * &(&one - &aqk);
                if aqk.abs_lt(trunc.eps_term()) {
                    small += 1;
                    if small >= trunc.consecutive_small() {
                        return Ok(acc);
                    }
                } else {
                    small = 0;
                }
                aqk = &aqk * q;
            }
            Err(QSeriesError::NonConvergent { terms: trunc.product_cap() })
        }
    }
}

/// Product of `(aᵢ; q)_∞` over a list of arguments.
pub fn q_pochhammer_product(args: &[Real], q: &Real, trunc: &SeriesTruncation) -> Result<Real, QSeriesError> {
    let mut acc = Real::one(q.precision());
    for a in args {
        acc = &acc * &q_pochhammer(a, q, PochOrder::Infinite, trunc)?;
    }
    Ok(acc)
}

/// The basic hypergeometric series
/// `Σₙ (a₁;q)ₙ⋯(a_{r+1};q)ₙ / ((q;q)ₙ (b₁;q)ₙ⋯(b_r;q)ₙ) zⁿ`,
/// summed by its term recurrence. A numerator factor that vanishes makes
/// the series terminate.
pub fn phi_series(a: &[Real], b: &[Real], q: &Real, z: &Real, trunc: &SeriesTruncation) -> Result<Real, QSeriesError> {
    if a.len() != b.len() + 1 {
        return Err(QSeriesError::ParameterCount { numerator: a.len(), denominator: b.len() });
    }
    if !q.abs_lt(1.0) {
        return Err(QSeriesError::DivergentProduct);
    }
    let p = q.precision().min(z.precision());
    let one = Real::one(p);
    let mut sum = one.clone();
    let mut term = one.clone();
    let mut largest = one.clone();
    let mut qn = one.clone();
    let mut small = 0;
    for _ in 0..trunc.max_terms() {
        let mut num = z.clone();
        for ai in a {
            let aq = ai * &qn;
            let factor = &one - &aq;
            if negligible(&factor, &aq) {
                return Ok(sum);
            }
            num = &num * &factor;
        }
        let mut den = &one - &(&qn * q);
        for bj in b {
            let bq = bj * &qn;
            let factor = &one - &bq;
            if negligible(&factor, &bq) {
                return Err(QSeriesError::PoleHit(format!("denominator parameter {} hits q^-m", bj.to_decimal(12))));
            }
            den = &den * &factor;
        }
        term = &term * &(&num / &den);
        sum = &sum + &term;
        let size = term.abs();
        if size > largest {
            largest = size.clone();
        }
        if size <= &largest * &Real::from_f64(trunc.eps_term(), p) {
            small += 1;
            if small >= trunc.consecutive_small() {
                return Ok(sum);
            }
        } else {
            small = 0;
        }
        qn = &qn * q;
    }
    Err(QSeriesError::NonConvergent { terms: trunc.max_terms() })
}

/// Coefficients of `∏ (1 − cᵢ T)` as a polynomial in `T`.
pub(crate) fn expand_linear_factors(cs: &[Real], one: &Real) -> Vec<Real> {
    let mut poly = vec![one.clone()];
    for c in cs {
        let mut next = poly.clone();
        next.push(Real::zero(one.precision()));
        for (k, coeff) in poly.iter().enumerate() {
            next[k + 1] = &next[k + 1] - &(coeff * c);
        }
        poly = next;
    }
    poly
}

/// Residual of the q-difference equation
/// `[(1 − T) ∏ⱼ(1 − bⱼ T/q) − z ∏ᵢ(1 − aᵢ T)] φ = 0` with `T f(z) = f(qz)`,
/// divided by the largest individual term.
pub fn phi_difference_residual(a: &[Real], b: &[Real], q: &Real, z: &Real, trunc: &SeriesTruncation) -> Result<Real, QSeriesError> {
    phi_difference_residual_against(a, b, a, b, q, z, trunc)
}

/// The same residual with the operator built from `(op_a, op_b)` while the
/// series uses `(a, b)`; a mismatch between the two should be detected.
pub fn phi_difference_residual_against(
    a: &[Real],
    b: &[Real],
    op_a: &[Real],
    op_b: &[Real],
    q: &Real,
    z: &Real,
    trunc: &SeriesTruncation,
) -> Result<Real, QSeriesError> {
    let p = q.precision().min(z.precision());
    let one = Real::one(p);
    let q_inv = q.recip();
    let mut left_roots = vec![one.clone()];
    left_roots.extend(op_b.iter().map(|bj| bj * &q_inv));
    let left = expand_linear_factors(&left_roots, &one);
    let right = expand_linear_factors(op_a, &one);

    let mut terms = Vec::with_capacity(left.len() + right.len());
    let mut zk = z.clone();
    for k in 0..left.len().max(right.len()) {
        let value = phi_series(a, b, q, &zk, trunc)?;
        if let Some(c) = left.get(k) {
            terms.push(c * &value);
        }
        if let Some(c) = right.get(k) {
            terms.push(-(&(z * c) * &value));
        }
        zk = &zk * q;
    }
    Ok(normalized_sum(&terms))
}

/// `|Σ terms| / max |term|`.
pub(crate) fn normalized_sum(terms: &[Real]) -> Real {
    let p = terms[0].precision();
    let total = terms.iter().fold(Real::zero(p), |acc, x| &acc + x);
    let scale = Real::max_abs(terms).expect("nonempty");
    if scale.is_zero() {
        total.abs()
    } else {
        &total.abs() / &scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qseries::Precision;
    use proptest::prelude::*;
    use rug::Rational;

    fn p() -> Precision {
        Precision::default()
    }

    fn r(num: i64, den: i64) -> Real {
        Real::from_rational(&Rational::from((num, den)), p())
    }

    fn tol() -> f64 {
        10f64.powi(-(p().digits() as i32 - 10))
    }

    #[test]
    fn truncation_validation() {
        assert!(SeriesTruncation::new(0.0, 400, 3).is_err());
        assert!(SeriesTruncation::new(1e-70, 49, 3).is_err());
        assert!(SeriesTruncation::new(1e-70, 400, 2).is_err());
        assert!(SeriesTruncation::new(1e-70, 50, 3).is_ok());
    }

    #[test]
    fn pochhammer_examples() {
        let tr = SeriesTruncation::default();
        let (a, q) = (r(3, 7), r(1, 2));
        let one = Real::one(p());
        assert_eq!(q_pochhammer(&a, &q, PochOrder::Finite(0), &tr).unwrap(), one);
        let two = q_pochhammer(&a, &q, PochOrder::Finite(2), &tr).unwrap();
        let expected = &(&one - &a) * &(&one - &(&a * &q));
        assert!(Real::rel_diff(&two, &expected).abs_lt(tol()));
        let minus_one = q_pochhammer(&a, &q, PochOrder::Finite(-1), &tr).unwrap();
        let expected = (&one - &(&a / &q)).recip();
        assert!(Real::rel_diff(&minus_one, &expected).abs_lt(tol()));
    }

    #[test]
    fn pochhammer_errors() {
        let tr = SeriesTruncation::default();
        assert_eq!(
            q_pochhammer(&r(1, 3), &r(3, 2), PochOrder::Infinite, &tr),
            Err(QSeriesError::DivergentProduct)
        );
        // a = q^2 makes the second factor of the negative-order product vanish
        let q = r(1, 3);
        let a = &q * &q;
        assert!(matches!(q_pochhammer(&a, &q, PochOrder::Finite(-3), &tr), Err(QSeriesError::PoleHit(_))));
        assert!(q_pochhammer(&a, &q, PochOrder::Finite(-1), &tr).is_ok());
    }

    #[test]
    fn infinite_product_matches_euler_series() {
        // (z;q)_∞ = Σ (−1)^k q^{k(k−1)/2} z^k / (q;q)_k
        let tr = SeriesTruncation::default();
        let (z, q) = (r(2, 5), r(1, 3));
        let prod = q_pochhammer(&z, &q, PochOrder::Infinite, &tr).unwrap();
        let mut sum = Real::zero(p());
        for k in 0..80i64 {
            let num = &q.powi(k * (k - 1) / 2) * &z.powi(k);
            let den = q_pochhammer(&q, &q, PochOrder::Finite(k), &tr).unwrap();
            let term = &num / &den;
            sum = if k % 2 == 0 { &sum + &term } else { &sum - &term };
        }
        assert!(Real::rel_diff(&prod, &sum).abs_lt(tol()));
    }

    #[test]
    fn series_examples() {
        let tr = SeriesTruncation::default();
        let q = r(1, 2);
        let (a, b) = (vec![r(3, 10), r(7, 10)], vec![r(2, 5)]);
        assert_eq!(phi_series(&a, &b, &q, &Real::zero(p()), &tr).unwrap(), Real::one(p()));

        // q-binomial theorem: 1φ0(a; -; q, z) = (az;q)_∞ / (z;q)_∞
        let (a1, z) = (r(-13, 10), r(9, 20));
        let series = phi_series(std::slice::from_ref(&a1), &[], &q, &z, &tr).unwrap();
        let num = q_pochhammer(&(&a1 * &z), &q, PochOrder::Infinite, &tr).unwrap();
        let den = q_pochhammer(&z, &q, PochOrder::Infinite, &tr).unwrap();
        assert!(Real::rel_diff(&series, &(&num / &den)).abs_lt(tol()));

        // a₁ = q^{-1} terminates after two terms
        let a_term = vec![q.recip(), r(1, 3)];
        let b_term = vec![r(1, 5)];
        let z = r(3, 4);
        let series = phi_series(&a_term, &b_term, &q, &z, &tr).unwrap();
        let one = Real::one(p());
        let second = &(&(&(&one - &a_term[0]) * &(&one - &a_term[1])) / &(&(&one - &q) * &(&one - &b_term[0]))) * &z;
        assert!(Real::rel_diff(&series, &(&one + &second)).abs_lt(tol()));
    }

    #[test]
    fn series_errors() {
        let tr = SeriesTruncation::default();
        let q = r(1, 2);
        assert!(matches!(
            phi_series(&[r(1, 3)], &[r(1, 5)], &q, &r(1, 2), &tr),
            Err(QSeriesError::ParameterCount { .. })
        ));
        assert!(matches!(
            phi_series(&[r(1, 3), r(1, 7)], &[r(4, 1)], &q, &r(1, 2), &tr),
            Err(QSeriesError::PoleHit(_))
        ));
        assert!(matches!(
            phi_series(&[r(1, 3), r(1, 7)], &[r(1, 5)], &q, &r(3, 2), &tr),
            Err(QSeriesError::NonConvergent { .. })
        ));
    }

    #[test]
    fn difference_equation_examples() {
        let tr = SeriesTruncation::default();
        let q = r(1, 2);
        let a = vec![r(3, 10), r(7, 10), r(-1, 5)];
        let b = vec![r(2, 5), r(9, 10)];
        let res = phi_difference_residual(&a, &b, &q, &r(7, 20), &tr).unwrap();
        assert!(res.abs_lt(tol()), "{res}");
        let res = phi_difference_residual(&a, &b, &q, &Real::zero(p()), &tr).unwrap();
        assert!(res.abs_lt(tol()));
        let perturbed = vec![&b[0] + &r(1, 10), b[1].clone()];
        let control = phi_difference_residual_against(&a, &b, &a, &perturbed, &q, &r(7, 20), &tr);
        assert!(control.unwrap() > 1e-6);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn pochhammer_splits(a in -90i64..90, qn in 1i64..9, n in -4i64..6, m in -4i64..6) {
            let tr = SeriesTruncation::default();
            let a = r(a, 37);
            let q = r(qn, 10);
            let left = q_pochhammer(&a, &q, PochOrder::Finite(n), &tr);
            let shifted = &a * &q.powi(n);
            let right = q_pochhammer(&shifted, &q, PochOrder::Finite(m), &tr);
            let whole = q_pochhammer(&a, &q, PochOrder::Finite(n + m), &tr);
            if let (Ok(l), Ok(rr), Ok(w)) = (left, right, whole) {
                prop_assert!(Real::rel_diff(&(&l * &rr), &w).abs_lt(tol()));
            }
        }

        #[test]
        fn difference_equation_holds(
            a in prop::collection::vec(-9i64..9, 3),
            b in prop::collection::vec(-9i64..9, 2),
            qn in 1i64..8,
            zn in -6i64..6,
        ) {
            let tr = SeriesTruncation::default();
            let a: Vec<Real> = a.into_iter().map(|x| r(2 * x + 1, 20)).collect();
            let b: Vec<Real> = b.into_iter().map(|x| r(2 * x + 1, 21)).collect();
            let q = r(qn, 10);
            let z = r(zn, 10);
            let res = phi_difference_residual(&a, &b, &q, &z, &tr).unwrap();
            prop_assert!(res.abs_lt(tol()), "{}", res);
        }
    }
}
