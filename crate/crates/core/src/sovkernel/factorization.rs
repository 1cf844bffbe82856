use super::{KernelAction, KernelContext, SovKernelError};
use crate::exact::Partition;
use crate::macdonald::{dehomogenize, macdonald_polynomial, TwoVarPoly};
use crate::qseries::{psi_polynomiality_check, Real};

pub const MIN_SAMPLES: usize = 5;

#[derive(Clone, Debug)]
pub struct FactorizationSample {
    pub sigma: Real,
    pub xi: Real,
    /// `(K∘p_λ)(σ, ξ)`.
    pub lhs: Real,
    /// `ψ_λ(t^{3/2}σξ)`.
    pub psi1: Real,
    /// `ψ_λ(t^{3/2}σ/ξ)`.
    pub psi2: Real,
    pub c_estimate: Real,
}

#[derive(Clone, Debug)]
pub struct FactorizationReport {
    pub lambda: Partition,
    pub samples: Vec<FactorizationSample>,
    pub c_mean: Real,
    /// `max |cᵢ − c̄| / |c̄|` over the samples.
    pub max_relative_spread: Real,
    pub tolerance: f64,
    pub pass: bool,
}

/// Checks that `K∘p_λ = c_λ ψ_λ(t^{3/2}z₁) ψ_λ(t^{3/2}z₂)` with a
/// sample-independent constant, where `p_λ` is the three-variable Macdonald
/// polynomial with its last variable set to 1. `ψ_λ` is taken from its
/// interpolating polynomial, since the defining series only converges for
/// `|z| < 1`.
pub fn factorization_check(
    ctx: &KernelContext,
    lambda: &Partition,
    samples: &[(Real, Real)],
    s: &Real,
    tolerance: f64,
) -> Result<FactorizationReport, SovKernelError> {
    ctx.domain(lambda.weight()).check()?;
    let p = dehomogenize(&macdonald_polynomial(lambda, 3, &ctx.qt)?)?;
    factorization_check_for(ctx, lambda, &p, samples, s, tolerance)
}

/// Divides `K∘p` by `ψ_λ(t^{3/2}z₁) ψ_λ(t^{3/2}z₂)` for an arbitrary `p`.
pub fn factorization_check_for(
    ctx: &KernelContext,
    lambda: &Partition,
    p: &TwoVarPoly,
    samples: &[(Real, Real)],
    s: &Real,
    tolerance: f64,
) -> Result<FactorizationReport, SovKernelError> {
    if samples.len() < MIN_SAMPLES {
        return Err(SovKernelError::TooFewSamples { needed: MIN_SAMPLES, got: samples.len() });
    }
    ctx.domain(p.total_degree().unwrap_or(0)).check()?;
    let interpolation_tol = 10f64.powi(-(ctx.precision.digits() as i32 / 2));
    let psi = psi_polynomiality_check(lambda, 3, &ctx.qt, &ctx.trunc, ctx.precision, interpolation_tol)?.polynomial;
    let floor = 10f64.powi(-(ctx.precision.digits() as i32 / 3));

    let psi_at = |w: &Real, index: usize, sigma: &Real, xi: &Real| -> Result<Real, SovKernelError> {
        let value = psi.eval(w);
        let scale = psi
            .coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| &c.abs() * &w.abs().powi(j as i64))
            .fold(Real::zero(ctx.precision), |a, b| &a + &b);
        if value.is_zero() || (&value.abs() / &scale).abs_lt(floor) {
            return Err(SovKernelError::NearZeroDivisor { index, sigma: sigma.to_decimal(12), xi: xi.to_decimal(12) });
        }
        Ok(value)
    };

    let mut out = Vec::with_capacity(samples.len());
    for (index, (sigma, xi)) in samples.iter().enumerate() {
        let base = ctx.t_three_halves() * sigma;
        let psi1 = psi_at(&(&base * xi), index, sigma, xi)?;
        let psi2 = psi_at(&(&base / xi), index, sigma, xi)?;
        let lhs = KernelAction::new(ctx, sigma, xi, s)?.apply(p)?;
        let c_estimate = &lhs / &(&psi1 * &psi2);
        out.push(FactorizationSample { sigma: sigma.clone(), xi: xi.clone(), lhs, psi1, psi2, c_estimate });
    }

    let count = Real::from_i64(out.len() as i64, ctx.precision);
    let c_mean = &out.iter().fold(Real::zero(ctx.precision), |a, x| &a + &x.c_estimate) / &count;
    let max_relative_spread = out
        .iter()
        .map(|x| if c_mean.is_zero() { x.c_estimate.abs() } else { &(&x.c_estimate - &c_mean).abs() / &c_mean.abs() })
        .fold(Real::zero(ctx.precision), |a, b| if b > a { b } else { a });
    let pass = max_relative_spread.abs_lt(tolerance);
    Ok(FactorizationReport { lambda: lambda.clone(), samples: out, c_mean, max_relative_spread, tolerance, pass })
}

/// Largest pairwise relative difference of `(K∘p)(σ, ξ)` across the given
/// values of `s`.
pub fn s_independence_check(ctx: &KernelContext, p: &TwoVarPoly, sigma: &Real, xi: &Real, s_values: &[Real]) -> Result<Real, SovKernelError> {
    let values = s_values
        .iter()
        .map(|s| KernelAction::new(ctx, sigma, xi, s)?.apply(p))
        .collect::<Result<Vec<_>, _>>()?;
    let mut worst = Real::zero(ctx.precision);
    for (i, a) in values.iter().enumerate() {
        for b in &values[i + 1..] {
            let d = Real::rel_diff(a, b);
            if d > worst {
                worst = d;
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::super::test_support::*;
    use super::*;

    fn samples(ctx: &KernelContext) -> Vec<(Real, Real)> {
        [((4, 5), (11, 10)), ((13, 10), (7, 10)), ((9, 10), (19, 20)), ((6, 5), (5, 4)), ((71, 100), (123, 100))]
            .into_iter()
            .map(|(a, b)| (real(ctx, a.0, a.1), real(ctx, b.0, b.1)))
            .collect()
    }

    #[test]
    fn empty_partition_has_unit_constant() {
        let ctx = reference();
        let report = factorization_check(&ctx, &Partition::empty(), &samples(&ctx), &real(&ctx, 1, 4), 1e-20).unwrap();
        assert!(report.pass);
        assert!((&report.c_mean - &Real::one(ctx.precision)).abs_lt(1e-45));
    }

    #[test]
    fn small_partitions_factorize() {
        let ctx = reference();
        for parts in [vec![1], vec![2], vec![1, 1], vec![2, 1]] {
            let lambda = Partition::new(parts).unwrap();
            let report = factorization_check(&ctx, &lambda, &samples(&ctx), &real(&ctx, 1, 4), 1e-20).unwrap();
            assert!(report.pass, "{lambda}: {}", report.max_relative_spread.to_decimal(6));
            assert!(!report.c_mean.is_zero());
        }
    }

    #[test]
    fn wrong_polynomial_does_not_factorize() {
        // adding y₁ breaks the symmetry, so the image is no product of ψ's
        let ctx = reference();
        let lambda = Partition::new(vec![1]).unwrap();
        let p = TwoVarPoly::parse("2*z1 + z2 + 1").unwrap();
        let report = factorization_check_for(&ctx, &lambda, &p, &samples(&ctx), &real(&ctx, 1, 4), 1e-20).unwrap();
        assert!(!report.pass && report.max_relative_spread > 1e-6);
    }

    #[test]
    fn requires_enough_samples() {
        let ctx = reference();
        let few = &samples(&ctx)[..3];
        assert!(matches!(
            factorization_check(&ctx, &Partition::new(vec![1]).unwrap(), few, &real(&ctx, 1, 4), 1e-20),
            Err(SovKernelError::TooFewSamples { needed: 5, got: 3 })
        ));
    }

    #[test]
    fn action_does_not_depend_on_s() {
        let ctx = reference();
        let (sigma, xi) = (real(&ctx, 4, 5), real(&ctx, 11, 10));
        let s_values = [real(&ctx, 1, 10), real(&ctx, 1, 4), real(&ctx, 2, 5)];
        let one = TwoVarPoly::from_terms([((0, 0), rug::Rational::from(1))]);
        assert!(s_independence_check(&ctx, &one, &sigma, &xi, &s_values).unwrap().abs_lt(tol(&ctx, 12)));
        let p = TwoVarPoly::parse("z1 + z2 + 1").unwrap();
        assert!(s_independence_check(&ctx, &p, &sigma, &xi, &s_values).unwrap().abs_lt(tol(&ctx, 12)));
        assert!(s_independence_check(&ctx, &TwoVarPoly::power_sum(2), &sigma, &xi, &s_values).unwrap().abs_lt(tol(&ctx, 12)));
    }
}
