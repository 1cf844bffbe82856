use super::{KernelContext, SovKernelError};
use crate::qseries::{q_pochhammer, q_pochhammer_product, PochOrder, Real};

/// Closed-form product for the `n = 0` lattice sum, from Bailey's
/// summation of a very-well-poised bilateral series:
///
/// `2 q^s (1−q^{2s}) (q, q^{1−2s}, q^{1+2s}, q/t, q/t²; q)_∞ / (t^{3s} (q/t³; q)_∞)`
/// `× (qσξ/t^{3/2}, qσ/(ξt^{3/2}), qξ/(σt^{3/2}), q/(σξt^{3/2}); q)_∞`
/// `/ (tq^s/σ, tσq^s, ξ√t q^s, √t q^s/ξ, qσ/(tq^s), q/(tσq^s), q/(ξ√t q^s), qξ/(√t q^s); q)_∞`.
pub fn bailey_phi0(ctx: &KernelContext, s: &Real, sigma: &Real, xi: &Real) -> Result<Real, SovKernelError> {
    if *s <= 0.0 || *s > 1.0 {
        return Err(SovKernelError::Domain(format!("s must lie in (0, 1] (got {})", s.to_decimal(12))));
    }
    ctx.domain(0).check()?;
    let p = ctx.precision;
    let (q, t, st, t32) = (ctx.q(), ctx.t(), ctx.sqrt_t(), ctx.t_three_halves());
    let one = Real::one(p);
    let qs = q.powf(s);
    let q2s = &qs * &qs;
    let t2 = t * t;
    let t3 = &t2 * t;

    let lead = q_pochhammer_product(&[q.clone(), q / &q2s, q * &q2s, q / t, q / &t2], q, &ctx.trunc)?;
    let lead_den = q_pochhammer(&(q / &t3), q, PochOrder::Infinite, &ctx.trunc)?;
    let prefactor = &(&(&Real::from_i64(2, p) * &qs) * &(&one - &q2s)) * &lead / &(&t.powf(&(&Real::from_i64(3, p) * s)) * &lead_den);

    let num = q_pochhammer_product(
        &[
            &(&(q * sigma) * xi) / t32,
            &(q * sigma) / &(xi * t32),
            &(q * xi) / &(sigma * t32),
            q / &(&(sigma * xi) * t32),
        ],
        q,
        &ctx.trunc,
    )?;
    let den = q_pochhammer_product(
        &[
            &(t * &qs) / sigma,
            &(t * sigma) * &qs,
            &(xi * st) * &qs,
            &(st * &qs) / xi,
            &(q * sigma) / &(t * &qs),
            q / &(&(t * sigma) * &qs),
            q / &(&(xi * st) * &qs),
            &(q * xi) / &(st * &qs),
        ],
        q,
        &ctx.trunc,
    )?;
    if den.is_zero() {
        return Err(SovKernelError::PoleHit("closed-form denominator vanishes".into()));
    }
    Ok(&(&prefactor * &num) / &den)
}

/// The Laurent polynomials `P(σ, ξ; n)` for `n = 1, 2, 3` that the ratio
/// `Φ(s; n) / Φ(s; 0)` is expected to equal.
pub fn conjecture_p(ctx: &KernelContext, n: u32, sigma: &Real, xi: &Real) -> Result<Real, SovKernelError> {
    let p = ctx.precision;
    let (q, t, st) = (ctx.q(), ctx.t(), ctx.sqrt_t());
    let one = Real::one(p);
    let two = Real::from_i64(2, p);
    let sym = |x: &Real, k: i64| &x.powi(k) + &x.powi(-k);
    let (s1, s2, s3) = (sym(sigma, 1), sym(sigma, 2), sym(sigma, 3));
    let (x1, x2, x3) = (sym(xi, 1), sym(xi, 2), sym(xi, 3));
    let t2 = t * t;
    let t3 = &t2 * t;
    let qt = q * t;
    let q2 = q * q;
    let base = &(&one + t) + &t2;

    match n {
        0 => Ok(one),
        1 => {
            let num = &(t * &s1) + &(&(&(t + &one) * st) * &x1);
            Ok(&num / &(&two * &base))
        }
        2 => {
            let den = &(&two * &(&(q * &t3) - &one)) * &base;
            let a = t * &(&(&(t * &(&qt - &one)) * &s2) + &(&(&(&one + t) * &(&(q * &t2) - &one)) * &x2));
            let b = &(&(&one + q) * &(&t2 - &one))
                * &(&(&(&(t * st) * &s1) * &x1) - &(&(&one + t) * &(&(&one - t) + &t2)));
            Ok(&(&a + &b) / &den)
        }
        3 => {
            let qt3 = &(q * &t3) - &one;
            let q2t3 = &(&q2 * &t3) - &one;
            let outer = &(&(&two * &base) * &q2t3) * &qt3;
            let pre = &(&(&(&(&one + q) + &q2) * &(&t2 - &one)) * st) / &outer;
            let t4 = &t3 * t;
            let t5 = &t4 * t;
            let first = &(st * &s1)
                * &(&(&(&one + &(&(&one + q) * &(&t3 - t))) - &(q * &t4)) + &(&(t * &(&(q * &t2) - &one)) * &x2));
            let second = &x1
                * &(&(&(&one + &(&(&one + q) * &(&t3 - &t2))) - &(q * &t5)) + &(&(&t2 * &(&qt - &one)) * &s2));
            let last_num = &(&(&(&t3 * &(&qt - &one)) * &(&(&q2 * t) - &one)) * &s3)
                + &(&(&(&(&(&one + t) * &(&(&q2 * &t2) - &one)) * &(&(q * &t2) - &one)) * &(t * st)) * &x3);
            Ok(&(&pre * &(&first + &second)) + &(&last_num / &outer))
        }
        other => Err(SovKernelError::UnsupportedN(other)),
    }
}

#[cfg(test)]
mod tests {
    use super::super::test_support::*;
    use super::super::phi_function;
    use super::*;

    #[test]
    fn bailey_matches_lattice_sum() {
        let ctx = reference();
        for (sigma, xi, s) in [((4, 5), (11, 10), (1, 4)), ((13, 10), (7, 10), (1, 10)), ((9, 10), (19, 20), (2, 5))] {
            let (sigma, xi, s) = (real(&ctx, sigma.0, sigma.1), real(&ctx, xi.0, xi.1), real(&ctx, s.0, s.1));
            let closed = bailey_phi0(&ctx, &s, &sigma, &xi).unwrap();
            let direct = phi_function(&ctx, &s, &sigma, &xi, 0).unwrap();
            assert!(Real::rel_diff(&closed, &direct).abs_lt(tol(&ctx, 10)));
            let flipped = bailey_phi0(&ctx, &s, &sigma.recip(), &xi.recip()).unwrap();
            assert!(Real::rel_diff(&closed, &flipped).abs_lt(tol(&ctx, 10)));
        }
    }

    #[test]
    fn bailey_vanishes_with_s() {
        let ctx = reference();
        let (sigma, xi) = (real(&ctx, 83, 100), real(&ctx, 117, 100));
        let a = bailey_phi0(&ctx, &real(&ctx, 1, 100), &sigma, &xi).unwrap().abs();
        let b = bailey_phi0(&ctx, &real(&ctx, 1, 10000), &sigma, &xi).unwrap().abs();
        // (1 − q^{2s}) makes the value linear in s near 0
        assert!(&b * &Real::from_i64(20, ctx.precision) < a);
    }

    #[test]
    fn first_polynomial_at_unit_point() {
        let ctx = reference();
        let one = Real::one(ctx.precision);
        let got = conjecture_p(&ctx, 1, &one, &one).unwrap();
        let (t, st) = (ctx.t(), ctx.sqrt_t());
        let want = &(t + &(&(t + &one) * st)) / &(&(&one + t) + &(t * t));
        assert!(Real::rel_diff(&got, &want).abs_lt(tol(&ctx, 10)));
        assert_eq!(conjecture_p(&ctx, 4, &one, &one), Err(SovKernelError::UnsupportedN(4)));
    }

    #[test]
    fn polynomials_are_inversion_symmetric_and_match_ratios() {
        let ctx = reference();
        let (sigma, xi) = (real(&ctx, 83, 100), real(&ctx, 117, 100));
        for n in 1..=3 {
            let p = conjecture_p(&ctx, n, &sigma, &xi).unwrap();
            let inv = conjecture_p(&ctx, n, &sigma.recip(), &xi.recip()).unwrap();
            assert!(Real::rel_diff(&p, &inv).abs_lt(tol(&ctx, 10)));
            for s in [(1, 10), (1, 4), (2, 5)] {
                let s = real(&ctx, s.0, s.1);
                let ratio = &phi_function(&ctx, &s, &sigma, &xi, n).unwrap() / &phi_function(&ctx, &s, &sigma, &xi, 0).unwrap();
                assert!(Real::rel_diff(&ratio, &p).abs_lt(tol(&ctx, 12)), "n = {n}");
            }
        }
    }
}
