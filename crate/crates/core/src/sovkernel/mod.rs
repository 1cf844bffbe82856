//! The separating operator `K` for three variables: its bilateral-sum
//! kernel, normalization, closed-form checks, the difference relations the
//! kernel solves, and the factorization of `K` acting on Macdonald
//! polynomials into products of separated functions.

mod closed_forms;
mod factorization;
mod kernel;
mod relations;

pub use closed_forms::{bailey_phi0, conjecture_p};
pub use factorization::{factorization_check, factorization_check_for, s_independence_check, MIN_SAMPLES, FactorizationReport, FactorizationSample};
pub use kernel::{apply_k, g_norm, kernel_k, phi_function, power_sum_action, KernelAction};
pub use relations::{kernel_relation_residual, KernelRelation, ZIndex};

use std::fmt;
use std::str::FromStr;

use rug::Rational;
use thiserror::Error;

use crate::exact::rational_pow;
use crate::macdonald::{MacdonaldError, QTPoint};
use crate::qseries::{Precision, QSeriesError, Real, SeriesTruncation};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SovKernelError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("pole: {0}")]
    PoleHit(String),
    #[error("bilateral sum did not converge within {terms} terms per direction")]
    NonConvergent { terms: usize },
    #[error("normalization sum vanishes (s too close to a zero of the lattice sum)")]
    DivisionByZero,
    #[error("no closed form is known for n = {0}")]
    UnsupportedN(u32),
    #[error("separated factor nearly vanishes at sample {index} (sigma = {sigma}, xi = {xi}); choose another sample")]
    NearZeroDivisor { index: usize, sigma: String, xi: String },
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error(transparent)]
    QSeries(#[from] QSeriesError),
    #[error(transparent)]
    Macdonald(#[from] MacdonaldError),
}

impl SovKernelError {
    /// Short stable name used in reports and CLI messages.
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Domain(_) => "DomainError",
            Self::PoleHit(_) | Self::QSeries(QSeriesError::PoleHit(_)) => "PoleHit",
            Self::NonConvergent { .. } | Self::QSeries(QSeriesError::NonConvergent { .. }) => "NonConvergent",
            Self::DivisionByZero => "DivisionByZero",
            Self::UnsupportedN(_) => "UnsupportedN",
            Self::NearZeroDivisor { .. } => "NearZeroDivisor",
            Self::TooFewSamples { .. } => "TooFewSamples",
            Self::QSeries(_) => "QSeriesError",
            Self::Macdonald(MacdonaldError::SingularSystem { .. }) => "SingularSystem",
            Self::Macdonald(_) => "MacdonaldError",
        }
    }
}

/// Power of `t` multiplying each lattice term of the kernel: `t^{−3e}` or
/// `t^{−3e/2}` with `e = s + l`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum KernelExponent {
    #[default]
    Cubic,
    ThreeHalves,
}

impl fmt::Display for KernelExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Cubic => "t-cubed",
            Self::ThreeHalves => "t-three-halves",
        })
    }
}

impl FromStr for KernelExponent {
    type Err = SovKernelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "t-cubed" => Ok(Self::Cubic),
            "t-three-halves" => Ok(Self::ThreeHalves),
            other => Err(SovKernelError::Domain(format!("unknown kernel exponent {other:?}"))),
        }
    }
}

/// `|q| < 1` and `|q^{1−n}/t³| < 1` for every `0 ≤ n ≤ n_max`, checked
/// exactly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConvergenceDomain {
    pub q: Rational,
    pub t: Rational,
    pub n_max: u32,
}

impl ConvergenceDomain {
    pub fn new(qt: &QTPoint, n_max: u32) -> Self {
        Self { q: qt.q.clone(), t: qt.t.clone(), n_max }
    }

    pub fn check(&self) -> Result<(), SovKernelError> {
        if Rational::from(self.q.abs_ref()) >= 1 {
            return Err(SovKernelError::Domain(format!("|q| = |{}| is not below 1", self.q)));
        }
        let t3 = rational_pow(&self.t, 3);
        for n in 0..=self.n_max {
            let ratio = rational_pow(&self.q, 1 - n as i32) / Rational::from(&t3);
            if ratio.abs() >= 1 {
                return Err(SovKernelError::Domain(format!(
                    "|q^(1-{n})/t^3| >= 1 at q = {}, t = {}: the lattice sums diverge for exponent {n}",
                    self.q, self.t
                )));
            }
        }
        Ok(())
    }
}

/// Parameters shared by every kernel evaluation: `(q, t)` exactly and at
/// working precision, the truncation policy and the exponent convention.
#[derive(Clone, Debug)]
pub struct KernelContext {
    pub qt: QTPoint,
    pub precision: Precision,
    pub trunc: SeriesTruncation,
    pub exponent: KernelExponent,
    q: Real,
    t: Real,
    sqrt_t: Real,
    t_three_halves: Real,
    sqrt_q: Real,
}

impl KernelContext {
    /// Requires `0 < q < 1` and `t > 0` so that real powers `q^s` and `√t`
    /// are defined.
    pub fn new(qt: QTPoint, precision: Precision, trunc: SeriesTruncation) -> Result<Self, SovKernelError> {
        if qt.q <= 0 || qt.q >= 1 || qt.t <= 0 {
            return Err(SovKernelError::Domain(format!(
                "kernel evaluation needs 0 < q < 1 and t > 0 (got q = {}, t = {})",
                qt.q, qt.t
            )));
        }
        let q = Real::from_rational(&qt.q, precision);
        let t = Real::from_rational(&qt.t, precision);
        let sqrt_t = t.sqrt();
        let t_three_halves = &t * &sqrt_t;
        let sqrt_q = q.sqrt();
        Ok(Self { qt, precision, trunc, exponent: KernelExponent::default(), q, t, sqrt_t, t_three_halves, sqrt_q })
    }

    pub fn with_exponent(mut self, exponent: KernelExponent) -> Self {
        self.exponent = exponent;
        self
    }

    pub fn with_trunc(mut self, trunc: SeriesTruncation) -> Self {
        self.trunc = trunc;
        self
    }

    pub fn q(&self) -> &Real {
        &self.q
    }

    pub fn t(&self) -> &Real {
        &self.t
    }

    pub fn sqrt_t(&self) -> &Real {
        &self.sqrt_t
    }

    pub fn t_three_halves(&self) -> &Real {
        &self.t_three_halves
    }

    pub fn sqrt_q(&self) -> &Real {
        &self.sqrt_q
    }

    pub fn real(&self, r: &Rational) -> Real {
        Real::from_rational(r, self.precision)
    }

    pub fn domain(&self, n_max: u32) -> ConvergenceDomain {
        ConvergenceDomain::new(&self.qt, n_max)
    }

    /// Distance (in units of the lattice exponent) from `(σ, ξ, s)` to the
    /// nearest zero of a kernel Pochhammer factor on the half-integer
    /// lattice `s + ℤ/2`. Computed in double precision for sampling.
    pub fn pole_clearance(&self, sigma: f64, xi: f64, s: f64) -> f64 {
        let q = self.q.to_f64();
        let t = self.t.to_f64();
        let st = t.sqrt();
        let args = [
            t * sigma,
            t / sigma,
            xi * st,
            st / xi,
            q / (sigma * t),
            q * sigma / t,
            q * xi / st,
            q / (xi * st),
        ];
        let ln_q = q.ln();
        args.iter()
            .map(|x| {
                // x q^{e+k} = 1 ⇔ e ≡ −log_q x (mod 1); shifts move e by 1/2
                let v = 2.0 * (x.ln() / ln_q + s);
                (v - v.round()).abs() / 2.0
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// A point of the kernel lattice: `η = q^{s+l}`, `y₁ = ση`, `y₂ = σ/η`,
/// `z₁ = t^{3/2}σξ`, `z₂ = t^{3/2}σ/ξ`.
#[derive(Clone, Debug)]
pub struct KernelPoint {
    pub sigma: Real,
    pub xi: Real,
    pub s: Real,
    pub l: i64,
}

impl KernelPoint {
    pub fn exponent(&self) -> Real {
        &self.s + &Real::from_i64(self.l, self.s.precision())
    }

    pub fn eta(&self, ctx: &KernelContext) -> Real {
        ctx.q().powf(&self.exponent())
    }

    pub fn y(&self, ctx: &KernelContext) -> (Real, Real) {
        let eta = self.eta(ctx);
        (&self.sigma * &eta, &self.sigma / &eta)
    }

    pub fn z(&self, ctx: &KernelContext) -> (Real, Real) {
        let base = ctx.t_three_halves() * &self.sigma;
        (&base * &self.xi, &base / &self.xi)
    }
}
