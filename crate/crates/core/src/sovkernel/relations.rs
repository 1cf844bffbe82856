use std::fmt;
use std::str::FromStr;

use rug::Rational;

use super::kernel::kernel_at_exponent;
use super::{KernelContext, KernelPoint, SovKernelError};
use crate::qseries::{normalized_sum, Real};

/// The first-order and second-order q-difference relations the kernel
/// satisfies in the variables `(y₁, y₂, z₁, z₂)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum KernelRelation {
    /// `T_{zᵢ} T_{y₁} K / K` as a rational function.
    ShiftY1,
    /// `T_{zᵢ} T_{y₂} K / K` as a rational function.
    ShiftY2,
    /// Second-order relation whose leading coefficient is `t − zᵢ`.
    SecondOrderFirst,
    /// Second-order relation whose leading coefficient is `(1 − zᵢ) t`.
    SecondOrderSecond,
}

impl KernelRelation {
    pub const ALL: [KernelRelation; 4] = [Self::ShiftY1, Self::ShiftY2, Self::SecondOrderFirst, Self::SecondOrderSecond];

    pub fn name(self) -> &'static str {
        match self {
            Self::ShiftY1 => "shift-y1",
            Self::ShiftY2 => "shift-y2",
            Self::SecondOrderFirst => "second-order-1",
            Self::SecondOrderSecond => "second-order-2",
        }
    }
}

impl fmt::Display for KernelRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KernelRelation {
    type Err = SovKernelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| SovKernelError::Domain(format!("unknown kernel relation {s:?}")))
    }
}

/// Which of `z₁ = t^{3/2}σξ`, `z₂ = t^{3/2}σ/ξ` is shifted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ZIndex {
    First,
    Second,
}

impl ZIndex {
    pub fn number(self) -> u8 {
        match self {
            Self::First => 1,
            Self::Second => 2,
        }
    }
}

/// Residual of one kernel relation at a lattice point.
///
/// Shifts are realized on `(σ, ξ, η)`: `T_{zᵢ}T_{y₁}` sends `σ → q^{1/2}σ`,
/// `ξ → q^{±1/2}ξ`, `η → q^{1/2}η`; `T_{zᵢ}T_{y₂}` does the same with
/// `η → q^{−1/2}η`, and `T_{zᵢ}² T_{y₁}T_{y₂}` sends `σ → qσ`, `ξ → q^{±1}ξ`.
/// Each half-step in `(σ, ξ)` multiplies the normalized kernel by
/// `t^{3/2}/q^{1/2}`. First-order relations report the relative mismatch
/// with their rational right side; second-order ones report the sum
/// divided by its largest term.
pub fn kernel_relation_residual(ctx: &KernelContext, which: KernelRelation, pt: &KernelPoint, i: ZIndex) -> Result<Real, SovKernelError> {
    let p = ctx.precision;
    let (q, t, h) = (ctx.q(), ctx.t(), ctx.sqrt_q());
    let one = Real::one(p);
    let half = Real::from_rational(&Rational::from((1, 2)), p);
    let e = pt.exponent();
    let (y1, y2) = pt.y(ctx);
    let (z1, z2) = pt.z(ctx);
    let (z, xi_step) = match i {
        ZIndex::First => (z1, h.clone()),
        ZIndex::Second => (z2, h.recip()),
    };
    let gain = ctx.t_three_halves() / h;
    let (sigma, xi) = (&pt.sigma, &pt.xi);
    let kernel = |sig: &Real, x: &Real, exp: &Real| kernel_at_exponent(ctx, sig, x, exp);

    let k0 = kernel(sigma, xi, &e)?;
    if k0.is_zero() {
        return Err(SovKernelError::PoleHit("kernel vanishes at the base point".into()));
    }
    let shifted_sigma = h * sigma;
    let shifted_xi = &xi_step * xi;
    let k_up = &gain * &kernel(&shifted_sigma, &shifted_xi, &(&e + &half))?;
    let k_down = &gain * &kernel(&shifted_sigma, &shifted_xi, &(&e - &half))?;
    let t2 = t * t;
    let t3 = &t2 * t;

    match which {
        KernelRelation::ShiftY1 | KernelRelation::ShiftY2 => {
            let (shifted, a, b) = match which {
                KernelRelation::ShiftY1 => (k_up, &y1, &y2),
                _ => (k_down, &y2, &y1),
            };
            let lhs = &shifted / &k0;
            let num = &(&(&(&t2 * &(&(t * a) - &one)) * &(b - &(q * a))) * &(&z - &(t * b)));
            let den = &(&(&(q * a) - t) * &(b - a)) * &(&(q * &z) - &(&t2 * b));
            let rhs = num / &den;
            Ok(&(&lhs - &rhs).abs() / &rhs.abs())
        }
        KernelRelation::SecondOrderFirst | KernelRelation::SecondOrderSecond => {
            let k_double = &(&gain * &gain) * &kernel(&(q * sigma), &(&(&xi_step * &xi_step) * xi), &e)?;
            let terms = if which == KernelRelation::SecondOrderFirst {
                let r = &(&(&one - &y1) * &(&one - &y2)) / &(&(&one - &(t * &y1)) * &(&one - &(t * &y2)));
                let a = &(&(&(t * &y1) - &(q * &y2)) * &(&one - &y2)) / &(&(&y1 - &(q * &y2)) * &(&one - &(t * &y2)));
                let b = &(&(&(t * &y2) - &(q * &y1)) * &(&one - &y1)) / &(&(&y2 - &(q * &y1)) * &(&one - &(t * &y1)));
                let c2 = &one - &(&(&z * &(q * q)) / &t3);
                let c1 = &one - &(&(&z * q) / &t2);
                vec![
                    &(t - &z) * &k0,
                    &(&c2 * &r) * &k_double,
                    -(&(&c1 * &a) * &k_down),
                    -(&(&c1 * &b) * &k_up),
                ]
            } else {
                let qy1t = &(q * &y1) / t;
                let qy2t = &(q * &y2) / t;
                let r = &(&(&one - &qy1t) * &(&one - &qy2t)) / &(&(&one - &(q * &y1)) * &(&one - &(q * &y2)));
                let a = &(&(&(t * &y1) - &(q * &y2)) * &(&one - &qy2t)) / &(&(&y1 - &(q * &y2)) * &(&one - &(q * &y2)));
                let b = &(&(&(t * &y2) - &(q * &y1)) * &(&one - &qy1t)) / &(&(&y2 - &(q * &y1)) * &(&one - &(q * &y1)));
                let c2 = &one - &(&(&z * &(q * q)) / &t2);
                let c1 = &one - &(&(&z * q) / t);
                vec![
                    &(&(&one - &z) * t) * &k0,
                    &(&c2 * &r) * &k_double,
                    -(&(&c1 * &a) * &k_down),
                    -(&(&c1 * &b) * &k_up),
                ]
            };
            Ok(normalized_sum(&terms))
        }
    }
}
