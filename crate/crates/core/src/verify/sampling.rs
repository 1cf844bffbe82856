use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::Rational;

use crate::qseries::Real;
use crate::sovkernel::KernelContext;

const LOW: i64 = 600_000;
const HIGH: i64 = 1_400_000;
const SCALE: i64 = 1_000_000;
const MIN_CLEARANCE: f64 = 1e-3;

/// A sample `(σ, ξ)` with six-decimal coordinates, held exactly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SamplePoint {
    pub sigma: Rational,
    pub xi: Rational,
}

impl SamplePoint {
    pub fn to_real(&self, ctx: &KernelContext) -> (Real, Real) {
        (ctx.real(&self.sigma), ctx.real(&self.xi))
    }

    pub fn decimal(r: &Rational) -> String {
        let scaled = Rational::from(r * SCALE);
        let units = scaled.numer().to_i64().expect("six-decimal sample") / scaled.denom().to_i64().expect("exact");
        format!("{}.{:06}", units / SCALE, units % SCALE)
    }
}

/// The first `count` seeded points of `[0.6, 1.4]²` that stay at least
/// `10⁻³` (in lattice units) away from every denominator zero for each of
/// the given offsets `s`.
pub fn sample_points(ctx: &KernelContext, count: usize, seed: u64, s_values: &[f64]) -> Vec<SamplePoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let a = rng.gen_range(LOW..=HIGH);
        let b = rng.gen_range(LOW..=HIGH);
        let (sigma, xi) = (a as f64 / SCALE as f64, b as f64 / SCALE as f64);
        if s_values.iter().all(|&s| ctx.pole_clearance(sigma, xi, s) > MIN_CLEARANCE) {
            out.push(SamplePoint { sigma: Rational::from((a, SCALE)), xi: Rational::from((b, SCALE)) });
        }
    }
    out
}
