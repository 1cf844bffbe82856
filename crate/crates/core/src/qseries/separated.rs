use rug::Rational;

use super::real::{Precision, Real};
use super::series::{normalized_sum, phi_series, q_pochhammer, PochOrder, SeriesTruncation};
use super::QSeriesError;
use crate::exact::{rational_pow, Partition};
use crate::macdonald::{eigenvalue_vector, QTPoint};

/// Upper parameters `aᵢ = q^{1+λₙ−λᵢ} t^{i−1−n}` (i = 1…n) and lower
/// parameters `bⱼ = t·aⱼ` (j = 1…n−1), held exactly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeparatedParams {
    pub a: Vec<Rational>,
    pub b: Vec<Rational>,
}

impl SeparatedParams {
    pub fn to_real(&self, precision: Precision) -> (Vec<Real>, Vec<Real>) {
        let conv = |v: &[Rational]| v.iter().map(|x| Real::from_rational(x, precision)).collect();
        (conv(&self.a), conv(&self.b))
    }
}

pub fn separated_params(lambda: &Partition, n: usize, qt: &QTPoint) -> Result<SeparatedParams, QSeriesError> {
    let parts = lambda.padded(n)?;
    let last = parts[n - 1] as i32;
    let a: Vec<Rational> = (0..n)
        .map(|i| rational_pow(&qt.q, 1 + last - parts[i] as i32) * rational_pow(&qt.t, i as i32 - n as i32))
        .collect();
    let b = a[..n - 1].iter().map(|x| Rational::from(x * &qt.t)).collect();
    Ok(SeparatedParams { a, b })
}

fn check_variables(n: usize) -> Result<(), QSeriesError> {
    if n == 0 {
        return Err(QSeriesError::ZeroVariables);
    }
    Ok(())
}

/// `φ_λ(z) = z^{λₙ} · ₙφₙ₋₁(a; b; q, z)`.
pub fn phi_lambda(lambda: &Partition, n: usize, qt: &QTPoint, z: &Real, trunc: &SeriesTruncation) -> Result<Real, QSeriesError> {
    check_variables(n)?;
    let prec = z.precision();
    let params = separated_params(lambda, n, qt)?;
    let (a, b) = params.to_real(prec);
    let q = Real::from_rational(&qt.q, prec);
    let series = phi_series(&a, &b, &q, z, trunc)?;
    Ok(&z.powi(i64::from(lambda.part(n - 1))) * &series)
}

/// `ψ_λ(z) = (z;q)_∞ / (q z t^{−n};q)_∞ · φ_λ(z)`.
pub fn psi_lambda(lambda: &Partition, n: usize, qt: &QTPoint, z: &Real, trunc: &SeriesTruncation) -> Result<Real, QSeriesError> {
    check_variables(n)?;
    let prec = z.precision();
    let q = Real::from_rational(&qt.q, prec);
    let shift = Real::from_rational(&(Rational::from(&qt.q) * rational_pow(&qt.t, -(n as i32))), prec);
    let num = q_pochhammer(z, &q, PochOrder::Infinite, trunc)?;
    let den = q_pochhammer(&(&shift * z), &q, PochOrder::Infinite, trunc)?;
    if den.is_zero() {
        return Err(QSeriesError::PoleHit(format!("ψ prefactor at z = {}", z.to_decimal(12))));
    }
    Ok(&(&num / &den) * &phi_lambda(lambda, n, qt, z, trunc)?)
}

/// A polynomial in one variable with high-precision coefficients, lowest
/// degree first.
#[derive(Clone, Debug, PartialEq)]
pub struct PsiPolynomial {
    pub coeffs: Vec<Real>,
}

impl PsiPolynomial {
    pub fn eval(&self, z: &Real) -> Real {
        self.coeffs
            .iter()
            .rev()
            .fold(Real::zero(z.precision()), |acc, c| &(&acc * z) + c)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }
}

/// Outcome of sampling `ψ_λ` and interpolating it.
#[derive(Clone, Debug)]
pub struct PolynomialityReport {
    pub lambda: Partition,
    pub n: usize,
    /// Expected degree window `[λₙ, λ₁]`.
    pub window: (u32, u32),
    pub samples: usize,
    /// Interpolant coefficients, lowest degree first.
    pub interpolant: Vec<Real>,
    /// Largest coefficient above degree `λ₁`, relative to the largest one.
    pub excess_high: Real,
    /// Largest coefficient below degree `λₙ`, relative to the largest one.
    pub excess_low: Real,
    /// Relative mismatch at a point that was not used for interpolation.
    pub holdout_error: Real,
    pub tolerance: f64,
    pub pass: bool,
    /// The interpolant cut to the window, usable in place of `ψ_λ` for
    /// arguments outside the convergence disc.
    pub polynomial: PsiPolynomial,
}

/// Abscissa outside every Chebyshev node set used below.
const HOLDOUT: (i64, i64) = (3137, 10000);

/// Samples `ψ_λ` at `λ₁ + 3` Chebyshev nodes on `[−1/2, 1/2]`, interpolates,
/// and checks the degree window and an extra holdout point.
pub fn psi_polynomiality_check(
    lambda: &Partition,
    n: usize,
    qt: &QTPoint,
    trunc: &SeriesTruncation,
    precision: Precision,
    tolerance: f64,
) -> Result<PolynomialityReport, QSeriesError> {
    polynomiality_check_with(lambda, n, precision, tolerance, |z| psi_lambda(lambda, n, qt, z, trunc))
}

/// The same interpolation test applied to an arbitrary function, with the
/// degree window `[λₙ, λ₁]`.
pub fn polynomiality_check_with(
    lambda: &Partition,
    n: usize,
    precision: Precision,
    tolerance: f64,
    f: impl Fn(&Real) -> Result<Real, QSeriesError>,
) -> Result<PolynomialityReport, QSeriesError> {
    check_variables(n)?;
    lambda.padded(n)?;
    let (low, high) = (lambda.part(n - 1), lambda.part(0));
    let count = high as usize + 3;
    let half = Real::from_rational(&Rational::from((1, 2)), precision);
    let pi = Real::pi(precision);
    let nodes: Vec<Real> = (0..count)
        .map(|k| {
            let angle = &pi * &Real::from_rational(&Rational::from((2 * k as i64 + 1, 2 * count as i64)), precision);
            &half * &angle.cos()
        })
        .collect();
    let values = nodes
        .iter()
        .map(&f)
        .collect::<Result<Vec<_>, _>>()?;
    let interpolant = interpolate(&nodes, &values);

    let scale = Real::max_abs(&interpolant).expect("nonempty");
    let relative = |c: &Real| if scale.is_zero() { c.abs() } else { &c.abs() / &scale };
    let zero = Real::zero(precision);
    let excess_high = interpolant[high as usize + 1..].iter().map(relative).fold(zero.clone(), max_real);
    let excess_low = interpolant[..low as usize].iter().map(relative).fold(zero.clone(), max_real);

    let holdout = Real::from_rational(&Rational::from(HOLDOUT), precision);
    let polynomial = PsiPolynomial { coeffs: interpolant[..=high as usize].to_vec() };
    let direct = f(&holdout)?;
    let holdout_error = Real::rel_diff(&direct, &polynomial.eval(&holdout));

    let pass = [&excess_high, &excess_low, &holdout_error].iter().all(|x| x.abs_lt(tolerance));
    Ok(PolynomialityReport {
        lambda: lambda.clone(),
        n,
        window: (low, high),
        samples: count,
        interpolant,
        excess_high,
        excess_low,
        holdout_error,
        tolerance,
        pass,
        polynomial,
    })
}

fn max_real(a: Real, b: Real) -> Real {
    if b > a {
        b
    } else {
        a
    }
}

/// Newton divided differences converted to monomial coefficients.
fn interpolate(nodes: &[Real], values: &[Real]) -> Vec<Real> {
    let m = nodes.len();
    let mut dd = values.to_vec();
    for level in 1..m {
        for i in (level..m).rev() {
            dd[i] = &(&dd[i] - &dd[i - 1]) / &(&nodes[i] - &nodes[i - level]);
        }
    }
    let prec = values[0].precision();
    let mut coeffs = vec![dd[m - 1].clone()];
    for k in (0..m - 1).rev() {
        // coeffs ← coeffs·(z − nodes[k]) + dd[k]
        let mut next = vec![Real::zero(prec); coeffs.len() + 1];
        for (j, c) in coeffs.iter().enumerate() {
            next[j + 1] = &next[j + 1] + c;
            next[j] = &next[j] - &(c * &nodes[k]);
        }
        next[0] = &next[0] + &dd[k];
        coeffs = next;
    }
    coeffs
}

/// Residual of `Σᵢ (1 − z(q/t)ⁱ) dₙ^{n−i}(λ) (−T_z)ⁱ φ_λ = 0`, with the
/// eigenvalues of the Macdonald operators as coefficients.
pub fn separated_equation_residual(lambda: &Partition, n: usize, qt: &QTPoint, z: &Real, trunc: &SeriesTruncation) -> Result<Real, QSeriesError> {
    let prec = z.precision();
    let eigen = eigenvalue_vector(lambda, n, qt)?;
    let d: Vec<Real> = eigen.d.iter().map(|x| Real::from_rational(x, prec)).collect();
    separated_equation_residual_with(lambda, n, qt, z, &d, trunc)
}

/// Same residual with caller-supplied coefficients `d[0..=n]`.
pub fn separated_equation_residual_with(
    lambda: &Partition,
    n: usize,
    qt: &QTPoint,
    z: &Real,
    d: &[Real],
    trunc: &SeriesTruncation,
) -> Result<Real, QSeriesError> {
    check_variables(n)?;
    if d.len() != n + 1 {
        return Err(QSeriesError::ParameterCount { numerator: d.len(), denominator: n + 1 });
    }
    let prec = z.precision();
    let q = Real::from_rational(&qt.q, prec);
    let ratio = Real::from_rational(&(Rational::from(&qt.q / &qt.t)), prec);
    let one = Real::one(prec);
    let mut terms = Vec::with_capacity(n + 1);
    let mut shifted = z.clone();
    let mut ratio_i = one.clone();
    for i in 0..=n {
        let phi = phi_lambda(lambda, n, qt, &shifted, trunc)?;
        let mut term = &(&(&one - &(z * &ratio_i)) * &d[n - i]) * &phi;
        if i % 2 == 1 {
            term = -term;
        }
        terms.push(term);
        shifted = &shifted * &q;
        ratio_i = &ratio_i * &ratio;
    }
    Ok(normalized_sum(&terms))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::partitions_up_to;
    use proptest::prelude::*;

    fn qt() -> QTPoint {
        QTPoint::new(Rational::from((1, 2)), Rational::from(10)).unwrap()
    }

    fn prec() -> Precision {
        Precision::default()
    }

    fn tol() -> f64 {
        10f64.powi(-(prec().digits() as i32 - 10))
    }

    fn p(s: &str) -> Partition {
        s.parse().unwrap()
    }

    fn real(num: i64, den: i64) -> Real {
        Real::from_rational(&Rational::from((num, den)), prec())
    }

    #[test]
    fn parameter_examples() {
        let qt = qt();
        let (q, t) = (&qt.q, &qt.t);
        let params = separated_params(&p("2,1"), 3, &qt).unwrap();
        assert_eq!(params.a, vec![rational_pow(q, -1) * rational_pow(t, -3), rational_pow(t, -2), Rational::from(q / t)]);
        assert_eq!(params.b, vec![rational_pow(q, -1) * rational_pow(t, -2), rational_pow(t, -1)]);
        let params = separated_params(&Partition::empty(), 3, &qt).unwrap();
        assert_eq!(params.a, vec![Rational::from(q * &rational_pow(t, -3)), Rational::from(q * &rational_pow(t, -2)), Rational::from(q / t)]);
        for lam in partitions_up_to(4, 3) {
            let params = separated_params(&lam, 3, &qt).unwrap();
            for (a, b) in params.a.iter().zip(&params.b) {
                assert_eq!(Rational::from(a * t), *b);
            }
        }
    }

    #[test]
    fn psi_of_rectangular_partitions_is_a_power() {
        let tr = SeriesTruncation::default();
        for z in [real(3, 10), real(-9, 20), real(1, 7)] {
            let one = psi_lambda(&Partition::empty(), 3, &qt(), &z, &tr).unwrap();
            assert!(Real::rel_diff(&one, &Real::one(prec())).abs_lt(tol()));
            let cube = psi_lambda(&p("2,2,2"), 3, &qt(), &z, &tr).unwrap();
            assert!(Real::rel_diff(&cube, &z.powi(2)).abs_lt(tol()));
        }
    }

    #[test]
    fn psi_of_a_single_box_is_linear() {
        let tr = SeriesTruncation::default();
        let zs = [real(1, 10), real(1, 4), real(2, 5)];
        let vals: Vec<Real> = zs.iter().map(|z| psi_lambda(&p("1"), 3, &qt(), z, &tr).unwrap()).collect();
        let slope = &(&vals[1] - &vals[0]) / &(&zs[1] - &zs[0]);
        let predicted = &vals[0] + &(&slope * &(&zs[2] - &zs[0]));
        assert!(Real::rel_diff(&predicted, &vals[2]).abs_lt(tol()));
    }

    #[test]
    fn polynomiality_examples() {
        let tr = SeriesTruncation::default();
        for (lam, window) in [("2,1", (0, 2)), ("", (0, 0)), ("3,1", (0, 3)), ("2,2,1", (1, 2))] {
            let report = psi_polynomiality_check(&p(lam), 3, &qt(), &tr, prec(), tol()).unwrap();
            assert_eq!(report.window, window);
            assert!(report.pass, "{lam}: {report:?}");
        }
        let report = psi_polynomiality_check(&p("2"), 3, &qt(), &tr, prec(), tol()).unwrap();
        assert_eq!(report.polynomial.degree(), 2);
    }

    #[test]
    fn bare_series_is_not_polynomial() {
        let tr = SeriesTruncation::default();
        let lam = p("2,1");
        let report = polynomiality_check_with(&lam, 3, prec(), tol(), |z| phi_lambda(&lam, 3, &qt(), z, &tr)).unwrap();
        assert!(!report.pass);
        assert!(report.holdout_error > 1e-6 || report.excess_high > 1e-6);
    }

    #[test]
    fn interpolation_recovers_a_polynomial() {
        let poly = PsiPolynomial { coeffs: vec![real(1, 3), real(-2, 1), real(0, 1), real(5, 7)] };
        let nodes: Vec<Real> = (0..4).map(|k| real(2 * k + 1, 9)).collect();
        let vals: Vec<Real> = nodes.iter().map(|z| poly.eval(z)).collect();
        for (got, want) in interpolate(&nodes, &vals).iter().zip(&poly.coeffs) {
            assert!((got - want).abs_lt(1e-60));
        }
    }

    #[test]
    fn separated_equation_examples() {
        let tr = SeriesTruncation::default();
        let z = real(3, 10);
        for lam in ["", "2,1"] {
            let res = separated_equation_residual(&p(lam), 3, &qt(), &z, &tr).unwrap();
            assert!(res.abs_lt(tol()), "{lam}: {res}");
        }
        let eigen = eigenvalue_vector(&p("2,1"), 3, &qt()).unwrap();
        let mut d: Vec<Real> = eigen.d.iter().map(|x| Real::from_rational(x, prec())).collect();
        d[1] = &d[1] + &Real::one(prec());
        let control = separated_equation_residual_with(&p("2,1"), 3, &qt(), &z, &d, &tr).unwrap();
        assert!(control > 1e-6, "{control}");
    }

    #[test]
    fn ratio_identity_of_consecutive_parameters() {
        // (a_{i+1};q)_l / (b_i;q)_l = (b_i q^l;q)_{λᵢ−λᵢ₊₁} / (b_i;q)_{λᵢ−λᵢ₊₁}
        let tr = SeriesTruncation::default();
        let q = Real::from_rational(&qt().q, prec());
        for lam in partitions_up_to(5, 3) {
            let params = separated_params(&lam, 3, &qt()).unwrap();
            let (a, b) = params.to_real(prec());
            for i in 0..2 {
                let gap = i64::from(lam.part(i) - lam.part(i + 1));
                for l in 0..=10i64 {
                    let poch = |x: &Real, k: i64| q_pochhammer(x, &q, PochOrder::Finite(k), &tr).unwrap();
                    let left = &poch(&a[i + 1], l) / &poch(&b[i], l);
                    let right = &poch(&(&b[i] * &q.powi(l)), gap) / &poch(&b[i], gap);
                    assert!(Real::rel_diff(&left, &right).abs_lt(tol()), "{lam} i={i} l={l}");
                }
            }
        }
    }

    #[test]
    fn truncation_is_sound() {
        let tr = SeriesTruncation::default();
        let z = real(-2, 5);
        let base = psi_lambda(&p("3,1"), 3, &qt(), &z, &tr).unwrap();
        let tight = psi_lambda(&p("3,1"), 3, &qt(), &z, &tr.tightened()).unwrap();
        assert!(Real::rel_diff(&base, &tight).abs_lt(tol()));
    }

    #[test]
    fn errors() {
        let tr = SeriesTruncation::default();
        assert!(matches!(
            phi_lambda(&p("1,1,1,1"), 3, &qt(), &real(1, 3), &tr),
            Err(QSeriesError::Exact(_))
        ));
        assert!(matches!(
            phi_lambda(&p("1"), 3, &qt(), &real(3, 2), &tr),
            Err(QSeriesError::NonConvergent { .. })
        ));
        assert_eq!(phi_lambda(&p("1"), 0, &qt(), &real(1, 3), &tr), Err(QSeriesError::ZeroVariables));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]
        #[test]
        fn separated_equation_holds(idx in 0usize..16, zn in -9i64..9) {
            let lam = partitions_up_to(5, 3)[idx].clone();
            let z = real(zn, 20);
            let res = separated_equation_residual(&lam, 3, &qt(), &z, &SeriesTruncation::default()).unwrap();
            prop_assert!(res.abs_lt(tol()), "{} at {}: {}", lam, z, res);
        }
    }
}
