use std::collections::BTreeMap;

use rug::Rational;

use super::{KernelContext, KernelExponent, KernelPoint, SovKernelError};
use crate::macdonald::TwoVarPoly;
use crate::qseries::{negligible, q_pochhammer_product, Real};

/// Argument multipliers of the kernel Pochhammer symbols for fixed `(σ, ξ)`;
/// each is multiplied by `η` before entering `(·; q)_∞`.
struct FactorSet {
    numerator: [Real; 4],
    denominator: [Real; 4],
}

impl FactorSet {
    fn new(ctx: &KernelContext, sigma: &Real, xi: &Real) -> Self {
        let (q, t, st) = (ctx.q(), ctx.t(), ctx.sqrt_t());
        Self {
            numerator: [
                &(q / sigma) / t,
                &(q * sigma) / t,
                &(q * xi) / st,
                &(q / xi) / st,
            ],
            denominator: [t * sigma, t / sigma, xi * st, st / xi],
        }
    }
}

fn check_positive(name: &str, x: &Real) -> Result<(), SovKernelError> {
    if *x <= 0.0 {
        return Err(SovKernelError::Domain(format!("{name} must be positive (got {})", x.to_decimal(12))));
    }
    Ok(())
}

/// The unnormalized kernel at lattice exponent `e`:
/// `η(1−η²) t^{−3e} ∏(num·η; q)_∞ / ∏(den·η; q)_∞` with `η = q^e`, or
/// `t^{−3e/2}` under [`KernelExponent::ThreeHalves`].
fn kernel_at(ctx: &KernelContext, factors: &FactorSet, e: &Real) -> Result<Real, SovKernelError> {
    let eta = ctx.q().powf(e);
    let one = Real::one(ctx.precision);
    let vanishing = &one - &(&eta * &eta);
    if vanishing.is_zero() {
        return Ok(Real::zero(ctx.precision));
    }
    let scale: Vec<Real> = factors.denominator.iter().map(|c| c * &eta).collect();
    let den = q_pochhammer_product(&scale, ctx.q(), &ctx.trunc)?;
    if den.is_zero() || negligible(&den, &one) {
        return Err(SovKernelError::PoleHit(format!("kernel denominator vanishes at exponent {}", e.to_decimal(12))));
    }
    let num_args: Vec<Real> = factors.numerator.iter().map(|c| c * &eta).collect();
    let num = q_pochhammer_product(&num_args, ctx.q(), &ctx.trunc)?;
    let power = match ctx.exponent {
        KernelExponent::Cubic => Real::from_i64(-3, ctx.precision),
        KernelExponent::ThreeHalves => Real::from_rational(&Rational::from((-3, 2)), ctx.precision),
    };
    let t_factor = ctx.t().powf(&(&power * e));
    Ok(&(&(&(&eta * &vanishing) * &t_factor) * &num) / &den)
}

/// The unnormalized kernel at a lattice point.
pub fn kernel_k(ctx: &KernelContext, pt: &KernelPoint) -> Result<Real, SovKernelError> {
    check_positive("sigma", &pt.sigma)?;
    check_positive("xi", &pt.xi)?;
    kernel_at(ctx, &FactorSet::new(ctx, &pt.sigma, &pt.xi), &pt.exponent())
}

/// Kernel value at `(σ, ξ)` and an arbitrary real lattice exponent; used by
/// the difference relations, which shift `η` by half-steps.
pub(crate) fn kernel_at_exponent(ctx: &KernelContext, sigma: &Real, xi: &Real, e: &Real) -> Result<Real, SovKernelError> {
    kernel_at(ctx, &FactorSet::new(ctx, sigma, xi), e)
}

/// Sum of the weighted kernel over the lattice `s + ℤ` for fixed `(σ, ξ)`.
/// Kernel values are cached so several weights can reuse them.
struct Lattice {
    offset: Real,
    cache: BTreeMap<i64, (Real, Real)>,
}

/// Running totals of one lattice sum.
struct LatticeSum {
    value: Real,
    magnitude: Real,
}

impl Lattice {
    fn new(offset: Real) -> Self {
        Self { offset, cache: BTreeMap::new() }
    }

    fn term(&mut self, ctx: &KernelContext, factors: &FactorSet, l: i64) -> Result<(Real, Real), SovKernelError> {
        if let Some(hit) = self.cache.get(&l) {
            return Ok(hit.clone());
        }
        let e = &self.offset + &Real::from_i64(l, ctx.precision);
        let eta = ctx.q().powf(&e);
        let k = kernel_at(ctx, factors, &e)?;
        self.cache.insert(l, (eta.clone(), k.clone()));
        Ok((eta, k))
    }

    /// `Σ_l k(s+l) · weight(η)`, summed outward from `l = 0` until
    /// `consecutive_small` successive terms fall below `eps_term` times the
    /// largest term seen.
    fn sum(
        &mut self,
        ctx: &KernelContext,
        factors: &FactorSet,
        weight: &dyn Fn(&Real) -> Real,
    ) -> Result<LatticeSum, SovKernelError> {
        let (eta0, k0) = self.term(ctx, factors, 0)?;
        let first = &k0 * &weight(&eta0);
        let mut value = first.clone();
        let mut magnitude = first.abs();
        let mut largest = first.abs();
        let eps = Real::from_f64(ctx.trunc.eps_term(), ctx.precision);
        for direction in [1i64, -1] {
            let mut small = 0;
            let mut steps = 0;
            let mut l = direction;
            loop {
                let (eta, k) = self.term(ctx, factors, l)?;
                let term = &k * &weight(&eta);
                let size = term.abs();
                value = &value + &term;
                magnitude = &magnitude + &size;
                if size > largest {
                    largest = size.clone();
                }
                if size <= &largest * &eps {
                    small += 1;
                    if small >= ctx.trunc.consecutive_small() {
                        break;
                    }
                } else {
                    small = 0;
                }
                steps += 1;
                if steps >= ctx.trunc.max_terms() {
                    return Err(SovKernelError::NonConvergent { terms: ctx.trunc.max_terms() });
                }
                l += direction;
            }
        }
        Ok(LatticeSum { value, magnitude })
    }
}

fn power_weight(n: u32) -> impl Fn(&Real) -> Real {
    move |eta: &Real| {
        let up = eta.powi(i64::from(n));
        &up + &up.recip()
    }
}

fn check_phi_s(s: &Real) -> Result<(), SovKernelError> {
    if *s <= 0.0 || *s > 1.0 {
        return Err(SovKernelError::Domain(format!("s must lie in (0, 1] (got {})", s.to_decimal(12))));
    }
    Ok(())
}

/// `Φ(s, σ, ξ; n) = Σ_{l∈ℤ} k(s+l) (η^n + η^{−n})` with the `t^{−3e}`
/// kernel, for `s ∈ (0, 1]`.
pub fn phi_function(ctx: &KernelContext, s: &Real, sigma: &Real, xi: &Real, n: u32) -> Result<Real, SovKernelError> {
    check_phi_s(s)?;
    check_positive("sigma", sigma)?;
    check_positive("xi", xi)?;
    ctx.domain(n).check()?;
    let ctx = ctx.clone().with_exponent(KernelExponent::Cubic);
    let factors = FactorSet::new(&ctx, sigma, xi);
    Ok(Lattice::new(s.clone()).sum(&ctx, &factors, &power_weight(n))?.value)
}

/// The operator `K` at a fixed point `(σ, ξ)`, summing over the two lattice
/// branches `s + ℤ` and `s + 1/2 + ℤ`. Kernel values are cached across
/// calls, so applying it to several polynomials costs one kernel sweep.
pub struct KernelAction<'a> {
    ctx: &'a KernelContext,
    sigma: Real,
    s: Real,
    factors: FactorSet,
    branches: [Lattice; 2],
    g: Option<Real>,
}

impl<'a> KernelAction<'a> {
    /// Requires `s ∈ (0, 1/2]` and positive `σ, ξ`.
    pub fn new(ctx: &'a KernelContext, sigma: &Real, xi: &Real, s: &Real) -> Result<Self, SovKernelError> {
        if *s <= 0.0 || *s > 0.5 {
            return Err(SovKernelError::Domain(format!("s must lie in (0, 1/2] (got {})", s.to_decimal(12))));
        }
        check_positive("sigma", sigma)?;
        check_positive("xi", xi)?;
        ctx.domain(0).check()?;
        let half = Real::from_rational(&Rational::from((1, 2)), ctx.precision);
        Ok(Self {
            ctx,
            sigma: sigma.clone(),
            s: s.clone(),
            factors: FactorSet::new(ctx, sigma, xi),
            branches: [Lattice::new(s.clone()), Lattice::new(s + &half)],
            g: None,
        })
    }

    pub fn s(&self) -> &Real {
        &self.s
    }

    /// `Φ` on one branch (0 for `s`, 1 for `s + 1/2`) with this action's
    /// exponent convention.
    pub fn branch_phi(&mut self, branch: usize, n: u32) -> Result<Real, SovKernelError> {
        self.ctx.domain(n).check()?;
        let weight = power_weight(n);
        Ok(self.branches[branch].sum(self.ctx, &self.factors, &weight)?.value)
    }

    /// `g = 2 / (Φ(s; 0) + Φ(s + 1/2; 0))`.
    pub fn g(&mut self) -> Result<Real, SovKernelError> {
        if let Some(g) = &self.g {
            return Ok(g.clone());
        }
        let weight = power_weight(0);
        let a = self.branches[0].sum(self.ctx, &self.factors, &weight)?;
        let b = self.branches[1].sum(self.ctx, &self.factors, &weight)?;
        let total = &a.value + &b.value;
        let magnitude = &a.magnitude + &b.magnitude;
        if total.is_zero() || negligible(&total, &magnitude) {
            return Err(SovKernelError::DivisionByZero);
        }
        let g = &Real::from_i64(2, self.ctx.precision) / &total;
        self.g = Some(g.clone());
        Ok(g)
    }

    /// `Σ_branches Σ_l k · p(ση, σ/η)`, without the normalization.
    pub fn raw_sum(&mut self, p: &TwoVarPoly) -> Result<Real, SovKernelError> {
        self.ctx.domain(p.total_degree().unwrap_or(0)).check()?;
        let prec = self.ctx.precision;
        let coeffs: Vec<((u32, u32), Real)> = p.terms().map(|(ij, c)| (ij, Real::from_rational(c, prec))).collect();
        let sigma = self.sigma.clone();
        let weight = move |eta: &Real| {
            let (y1, y2) = (&sigma * eta, &sigma / eta);
            coeffs.iter().fold(Real::zero(prec), |acc, ((i, j), c)| {
                &acc + &(&(c * &y1.powi(i64::from(*i))) * &y2.powi(i64::from(*j)))
            })
        };
        let mut total = Real::zero(prec);
        for branch in &mut self.branches {
            total = &total + &branch.sum(self.ctx, &self.factors, &weight)?.value;
        }
        Ok(total)
    }

    /// `(K∘p)(σ, ξ) = g · Σ_branches Σ_l k · p(ση, σ/η)`.
    pub fn apply(&mut self, p: &TwoVarPoly) -> Result<Real, SovKernelError> {
        let raw = self.raw_sum(p)?;
        Ok(&self.g()? * &raw)
    }

    /// `g σⁿ (Φ(s; n) + Φ(s + 1/2; n))`, the action on `y₁ⁿ + y₂ⁿ`.
    pub fn power_sum(&mut self, n: u32) -> Result<Real, SovKernelError> {
        let total = &self.branch_phi(0, n)? + &self.branch_phi(1, n)?;
        Ok(&(&self.g()? * &self.sigma.powi(i64::from(n))) * &total)
    }
}

pub fn g_norm(ctx: &KernelContext, sigma: &Real, xi: &Real, s: &Real) -> Result<Real, SovKernelError> {
    KernelAction::new(ctx, sigma, xi, s)?.g()
}

pub fn apply_k(ctx: &KernelContext, p: &TwoVarPoly, sigma: &Real, xi: &Real, s: &Real) -> Result<Real, SovKernelError> {
    KernelAction::new(ctx, sigma, xi, s)?.apply(p)
}

pub fn power_sum_action(ctx: &KernelContext, n: u32, sigma: &Real, xi: &Real, s: &Real) -> Result<Real, SovKernelError> {
    KernelAction::new(ctx, sigma, xi, s)?.power_sum(n)
}

#[cfg(test)]
mod tests {
    use super::super::test_support::*;
    use super::*;
    use crate::qseries::q_pochhammer;
    use crate::qseries::PochOrder;

    #[test]
    fn kernel_vanishes_at_unit_eta() {
        let ctx = reference();
        let pt = KernelPoint { sigma: real(&ctx, 4, 5), xi: real(&ctx, 11, 10), s: Real::zero(ctx.precision), l: 0 };
        assert!(kernel_k(&ctx, &pt).unwrap().is_zero());
    }

    #[test]
    fn kernel_is_invariant_under_sigma_inversion() {
        let ctx = reference();
        let sigma = real(&ctx, 4, 5);
        for l in [-2, 0, 3] {
            let a = KernelPoint { sigma: sigma.clone(), xi: real(&ctx, 11, 10), s: real(&ctx, 1, 4), l };
            let b = KernelPoint { sigma: sigma.recip(), ..a.clone() };
            let (ka, kb) = (kernel_k(&ctx, &a).unwrap(), kernel_k(&ctx, &b).unwrap());
            assert!(Real::rel_diff(&ka, &kb).abs_lt(tol(&ctx, 10)));
        }
    }

    #[test]
    fn kernel_matches_reverse_order_evaluation() {
        let ctx = reference();
        let (sigma, xi, s) = (real(&ctx, 93, 100), real(&ctx, 6, 5), real(&ctx, 1, 10));
        for l in [-3i64, -1, 0, 2] {
            let pt = KernelPoint { sigma: sigma.clone(), xi: xi.clone(), s: s.clone(), l };
            let direct = kernel_k(&ctx, &pt).unwrap();
            // independent evaluation: denominators first, factors reversed
            let e = pt.exponent();
            let eta = ctx.q().powf(&e);
            let (q, t, st) = (ctx.q(), ctx.t(), ctx.sqrt_t());
            let den_args = [&(st / &xi) * &eta, &(&xi * st) * &eta, &(t / &sigma) * &eta, &(t * &sigma) * &eta];
            let num_args = [&(q / &(&xi * st)) * &eta, &(&(q * &xi) / st) * &eta, &(&(q * &sigma) / t) * &eta, &(q / &(&sigma * t)) * &eta];
            let mut value = Real::one(ctx.precision);
            for a in &den_args {
                value = &value / &q_pochhammer(a, q, PochOrder::Infinite, &ctx.trunc).unwrap();
            }
            for a in &num_args {
                value = &value * &q_pochhammer(a, q, PochOrder::Infinite, &ctx.trunc).unwrap();
            }
            let t_cubed_e = t.powi(3).powf(&e);
            value = &(&value / &t_cubed_e) * &(&eta * &(&Real::one(ctx.precision) - &(&eta * &eta)));
            assert!(Real::rel_diff(&direct, &value).abs_lt(tol(&ctx, 10)), "l = {l}");
        }
    }

    #[test]
    fn phi_symmetries_and_errors() {
        let ctx = reference();
        let (sigma, xi, s) = (real(&ctx, 4, 5), real(&ctx, 11, 10), real(&ctx, 1, 4));
        for n in 0..=2 {
            let base = phi_function(&ctx, &s, &sigma, &xi, n).unwrap();
            let a = phi_function(&ctx, &s, &sigma.recip(), &xi, n).unwrap();
            let b = phi_function(&ctx, &s, &sigma, &xi.recip(), n).unwrap();
            assert!(Real::rel_diff(&base, &a).abs_lt(tol(&ctx, 10)));
            assert!(Real::rel_diff(&base, &b).abs_lt(tol(&ctx, 10)));
        }
        assert!(matches!(phi_function(&ctx, &Real::zero(ctx.precision), &sigma, &xi, 0), Err(SovKernelError::Domain(_))));
        // 2^{n−1} < 1000 holds up to n = 10
        assert!(phi_function(&ctx, &s, &sigma, &xi, 10).is_ok());
        assert!(matches!(phi_function(&ctx, &s, &sigma, &xi, 11), Err(SovKernelError::Domain(_))));
    }

    #[test]
    fn phi_decays_as_s_approaches_zero() {
        let ctx = reference();
        let (sigma, xi) = (real(&ctx, 83, 100), real(&ctx, 117, 100));
        let values: Vec<Real> = [(1, 100), (1, 1000), (1, 10000)]
            .iter()
            .map(|&(a, b)| phi_function(&ctx, &real(&ctx, a, b), &sigma, &xi, 0).unwrap().abs())
            .collect();
        assert!(values[0] > values[1] && values[1] > values[2]);
    }

    #[test]
    fn normalization_and_power_sums() {
        let ctx = reference();
        let (sigma, xi, s) = (real(&ctx, 4, 5), real(&ctx, 11, 10), real(&ctx, 1, 4));
        let mut action = KernelAction::new(&ctx, &sigma, &xi, &s).unwrap();
        let one = action.apply(&TwoVarPoly::parse("1").unwrap()).unwrap();
        assert!((&one - &Real::one(ctx.precision)).abs_lt(tol(&ctx, 12)));
        for n in 1..=4 {
            let generic = action.apply(&TwoVarPoly::power_sum(n)).unwrap();
            let fast = action.power_sum(n).unwrap();
            assert!(Real::rel_diff(&generic, &fast).abs_lt(tol(&ctx, 10)), "n = {n}");
        }
        // σ is a spectator of the lattice sum
        let y1y2 = action.apply(&TwoVarPoly::parse("y1*y2").unwrap()).unwrap();
        assert!(Real::rel_diff(&y1y2, &(&sigma * &sigma)).abs_lt(tol(&ctx, 12)));
    }

    #[test]
    fn g_grows_near_zero() {
        let ctx = reference();
        let (sigma, xi) = (real(&ctx, 83, 100), real(&ctx, 117, 100));
        let g = |a, b| g_norm(&ctx, &sigma, &xi, &real(&ctx, a, b)).unwrap().abs();
        let (g3, g2, g1) = (g(1, 1000), g(1, 100), g(1, 4));
        assert!(g3 > g2 && g2 > g1);
    }

    #[test]
    fn g_half_step_recurrence() {
        // g(q^{1/2}σ, q^{±1/2}ξ) / g(σ, ξ) = (t^{3/2}/q^{1/2}) (1 − q zᵢ/t³) / (1 − zᵢ)
        let ctx = reference();
        let (sigma, xi, s) = (real(&ctx, 83, 100), real(&ctx, 117, 100), real(&ctx, 1, 4));
        let one = Real::one(ctx.precision);
        let h = ctx.sqrt_q();
        let base = g_norm(&ctx, &sigma, &xi, &s).unwrap();
        let t3 = ctx.t().powi(3);
        for (step, z) in [(h.clone(), ctx.t_three_halves() * &(&sigma * &xi)), (h.recip(), ctx.t_three_halves() * &(&sigma / &xi))] {
            let shifted = g_norm(&ctx, &(h * &sigma), &(&step * &xi), &s).unwrap();
            let want = &(&(ctx.t_three_halves() / h) * &(&one - &(&(ctx.q() * &z) / &t3))) / &(&one - &z);
            assert!(Real::rel_diff(&(&shifted / &base), &want).abs_lt(tol(&ctx, 12)));
        }
    }

    #[test]
    fn action_rejects_bad_input() {
        let ctx = reference();
        let (sigma, xi) = (real(&ctx, 4, 5), real(&ctx, 11, 10));
        assert!(KernelAction::new(&ctx, &sigma, &xi, &real(&ctx, 3, 4)).is_err());
        assert!(KernelAction::new(&ctx, &-&sigma, &xi, &real(&ctx, 1, 4)).is_err());
        let high = TwoVarPoly::power_sum(11);
        assert!(matches!(apply_k(&ctx, &high, &sigma, &xi, &real(&ctx, 1, 4)), Err(SovKernelError::Domain(_))));
    }

    #[test]
    fn doubling_the_budget_changes_nothing() {
        let ctx = reference();
        let tight = ctx.clone().with_trunc(ctx.trunc.with_max_terms(800).unwrap());
        let (sigma, xi, s) = (real(&ctx, 4, 5), real(&ctx, 11, 10), real(&ctx, 1, 4));
        let a = phi_function(&ctx, &s, &sigma, &xi, 3).unwrap();
        let b = phi_function(&tight, &s, &sigma, &xi, 3).unwrap();
        assert!(Real::rel_diff(&a, &b).abs_lt(1e-40));
    }
}
