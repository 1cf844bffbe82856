//! Verification harness: runs named suites of residual checks with seeded,
//! pole-avoiding sample points and collects them into a deterministic
//! report.

mod report;
mod sampling;
mod suites;

pub use report::{CheckRecord, Status, SuiteReport, Summary, Threshold};
pub use sampling::{sample_points, SamplePoint};

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use rug::Rational;
use serde::Serialize;
use thiserror::Error;

use crate::exact::format_rational;
use crate::macdonald::QTPoint;
use crate::qseries::{Precision, SeriesTruncation};
use crate::sovkernel::{ConvergenceDomain, KernelContext, KernelExponent, SovKernelError};

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Domain(#[from] SovKernelError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Eigen,
    Separated,
    Polynomiality,
    Bailey,
    Conjecture,
    KernelRelations,
    Normalization,
    Factorization,
    All,
}

impl Suite {
    pub const EACH: [Suite; 8] = [
        Suite::Eigen,
        Suite::Separated,
        Suite::Polynomiality,
        Suite::Bailey,
        Suite::Conjecture,
        Suite::KernelRelations,
        Suite::Normalization,
        Suite::Factorization,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Eigen => "eigen",
            Suite::Separated => "separated",
            Suite::Polynomiality => "polynomiality",
            Suite::Bailey => "bailey",
            Suite::Conjecture => "conjecture",
            Suite::KernelRelations => "kernel-relations",
            Suite::Normalization => "normalization",
            Suite::Factorization => "factorization",
            Suite::All => "all",
        }
    }

    /// Largest power-sum exponent the suite feeds into lattice sums, or
    /// `None` when it never touches the kernel.
    pub fn required_n_max(self) -> Option<u32> {
        match self {
            Suite::Eigen | Suite::Separated | Suite::Polynomiality => None,
            Suite::Bailey | Suite::KernelRelations => Some(0),
            Suite::Conjecture => Some(3),
            Suite::Normalization | Suite::Factorization | Suite::All => Some(4),
        }
    }

    fn members(self) -> Vec<Suite> {
        match self {
            Suite::All => Suite::EACH.to_vec(),
            other => vec![other],
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = VerifyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Suite::EACH
            .into_iter()
            .chain([Suite::All])
            .find(|x| x.name() == s)
            .ok_or_else(|| VerifyError::InvalidConfig(format!("unknown suite {s:?}")))
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub precision: Precision,
    pub qt: QTPoint,
    /// Lattice offset used by single-`s` checks.
    pub s: Rational,
    pub trunc: SeriesTruncation,
    pub samples: usize,
    pub seed: u64,
    pub exponent: KernelExponent,
    /// Overrides the suite's own exponent bound for the domain check.
    pub n_max: Option<u32>,
    pub timings: bool,
}

impl RunConfig {
    pub fn reference() -> Self {
        Self {
            precision: Precision::default(),
            qt: QTPoint::new(Rational::from((1, 2)), Rational::from(10)).expect("valid point"),
            s: Rational::from((1, 4)),
            trunc: SeriesTruncation::default(),
            samples: 10,
            seed: 20240617,
            exponent: KernelExponent::default(),
            n_max: None,
            timings: false,
        }
    }

    pub fn kernel_context(&self) -> Result<KernelContext, SovKernelError> {
        Ok(KernelContext::new(self.qt.clone(), self.precision, self.trunc)?.with_exponent(self.exponent))
    }

    fn echo(&self) -> ConfigEcho {
        ConfigEcho {
            precision: self.precision.digits(),
            q: format_rational(&self.qt.q),
            t: format_rational(&self.qt.t),
            s: format_rational(&self.s),
            eps_term: format!("{:e}", self.trunc.eps_term()),
            max_terms: self.trunc.max_terms(),
            consecutive_small: self.trunc.consecutive_small(),
            samples: self.samples,
            seed: self.seed,
            kernel_exponent: self.exponent.to_string(),
            n_max: self.n_max,
        }
    }

    /// Checks everything that can be checked before any series is summed.
    pub fn validate(&self, suite: Suite) -> Result<(), VerifyError> {
        if self.samples < crate::sovkernel::MIN_SAMPLES {
            return Err(VerifyError::InvalidConfig(format!(
                "at least {} samples are required (got {})",
                crate::sovkernel::MIN_SAMPLES,
                self.samples
            )));
        }
        if self.s <= 0 || self.s > Rational::from((1, 2)) {
            return Err(VerifyError::InvalidConfig(format!("s must lie in (0, 1/2] (got {})", self.s)));
        }
        let needs_series = suite.members().iter().any(|m| *m != Suite::Eigen);
        if needs_series && Rational::from(self.qt.q.abs_ref()) >= 1 {
            return Err(SovKernelError::Domain(format!("|q| = |{}| is not below 1", self.qt.q)).into());
        }
        if let Some(required) = suite.required_n_max() {
            let n_max = self.n_max.map_or(required, |n| n.max(required));
            ConvergenceDomain::new(&self.qt, n_max).check()?;
            self.kernel_context()?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConfigEcho {
    pub precision: u32,
    pub q: String,
    pub t: String,
    pub s: String,
    pub eps_term: String,
    pub max_terms: usize,
    pub consecutive_small: usize,
    pub samples: usize,
    pub seed: u64,
    pub kernel_exponent: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_max: Option<u32>,
}

pub(crate) type Job = Box<dyn Fn() -> Vec<CheckRecord> + Send + Sync>;

/// Validates the configuration, then runs every check of the suite in
/// parallel; records keep their declaration order.
pub fn run_suite(suite: Suite, config: &RunConfig) -> Result<SuiteReport, VerifyError> {
    config.validate(suite)?;
    let mut jobs: Vec<Job> = Vec::new();
    for member in suite.members() {
        jobs.extend(suites::jobs(member, config)?);
    }
    let timings = config.timings;
    let records: Vec<CheckRecord> = jobs
        .into_par_iter()
        .map(|job| {
            let start = timings.then(std::time::Instant::now);
            let mut records = job();
            let elapsed = start.map(|s| s.elapsed().as_secs_f64() * 1e3);
            for r in &mut records {
                r.elapsed_ms = elapsed;
            }
            records
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    Ok(SuiteReport::new(suite, config.echo(), records))
}
