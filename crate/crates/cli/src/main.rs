use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use macsep::exact::{parse_rational, ExactError, Partition};
use macsep::macdonald::{macdonald_polynomial, MacdonaldError, QTPoint, TwoVarPoly};
use macsep::qseries::{phi_lambda, psi_lambda, Precision, QSeriesError, Real, SeriesTruncation};
use macsep::sovkernel::{apply_k, kernel_k, phi_function, KernelContext, KernelExponent, KernelPoint, SovKernelError};
use macsep::verify::{run_suite, RunConfig, Suite, SuiteReport, VerifyError};
use macsep::Rational;

const EXIT_PARSE: u8 = 1;
const EXIT_SINGULAR: u8 = 2;
const EXIT_EVALUATION: u8 = 3;
const EXIT_THRESHOLD: u8 = 4;

#[derive(Parser)]
#[command(name = "macsep", version, about = "A2 Macdonald polynomials and a separation-of-variables kernel, verified at high precision")]
struct Cli {
    /// Working precision in decimal digits (at least 30).
    #[arg(long, global = true, env = "MACSEP_PRECISION", default_value_t = 60)]
    precision: u32,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the monomial expansion of P_lambda as JSON.
    Macdonald {
        /// Comma-separated parts, e.g. 2,1.
        #[arg(long, allow_hyphen_values = true)]
        lambda: String,
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        qt: QtArgs,
    },
    /// Evaluate a single function at full precision.
    Eval(EvalArgs),
    /// Run a verification suite and emit a report.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct QtArgs {
    #[arg(long, allow_hyphen_values = true)]
    q: String,
    #[arg(long, allow_hyphen_values = true)]
    t: String,
}

#[derive(Args)]
struct TruncArgs {
    /// Relative size below which a term counts as negligible.
    #[arg(long)]
    eps_term: Option<f64>,
    /// Hard cap on terms per series or lattice direction.
    #[arg(long)]
    max_terms: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    /// phi_lambda(z): needs --lambda, --n, --z
    #[value(name = "phi")]
    Phi,
    /// psi_lambda(z): needs --lambda, --n, --z
    #[value(name = "psi")]
    Psi,
    /// The lattice sum Phi(s; n): needs --n, --s, --sigma, --xi
    #[value(name = "Phi")]
    LatticePhi,
    /// One kernel value: needs --sigma, --xi, --s, --l
    #[value(name = "kernel")]
    Kernel,
    /// (K p)(sigma, xi): needs --poly, --sigma, --xi, --s
    #[value(name = "applyK")]
    ApplyK,
}

#[derive(Args)]
struct EvalArgs {
    target: Target,
    #[command(flatten)]
    qt: QtArgs,
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<String>,
    /// Variable count for phi/psi, power-sum exponent for Phi.
    #[arg(long)]
    n: Option<u32>,
    #[arg(long, allow_hyphen_values = true)]
    z: Option<String>,
    #[arg(long)]
    sigma: Option<String>,
    #[arg(long)]
    xi: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    s: Option<String>,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0)]
    l: i64,
    /// Polynomial in y1, y2 (or z1, z2), e.g. "y1^2 + 3/2*y1*y2".
    #[arg(long)]
    poly: Option<String>,
    #[arg(long, value_enum, default_value_t = ExponentArg::TCubed)]
    kernel_exponent: ExponentArg,
    #[command(flatten)]
    trunc: TruncArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExponentArg {
    TCubed,
    TThreeHalves,
}

impl From<ExponentArg> for KernelExponent {
    fn from(e: ExponentArg) -> Self {
        match e {
            ExponentArg::TCubed => KernelExponent::Cubic,
            ExponentArg::TThreeHalves => KernelExponent::ThreeHalves,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
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

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::Eigen => Suite::Eigen,
            SuiteArg::Separated => Suite::Separated,
            SuiteArg::Polynomiality => Suite::Polynomiality,
            SuiteArg::Bailey => Suite::Bailey,
            SuiteArg::Conjecture => Suite::Conjecture,
            SuiteArg::KernelRelations => Suite::KernelRelations,
            SuiteArg::Normalization => Suite::Normalization,
            SuiteArg::Factorization => Suite::Factorization,
            SuiteArg::All => Suite::All,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct VerifyArgs {
    suite: SuiteArg,
    #[arg(long, allow_hyphen_values = true, default_value = "1/2")]
    q: String,
    #[arg(long, allow_hyphen_values = true, default_value = "10")]
    t: String,
    #[arg(long, default_value = "0.25")]
    s: String,
    #[arg(long, default_value_t = 20240617)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    samples: usize,
    /// Largest power-sum exponent to validate the convergence domain for.
    #[arg(long)]
    n_max: Option<u32>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long, value_enum, default_value_t = ExponentArg::TCubed)]
    kernel_exponent: ExponentArg,
    /// Include per-record wall-clock times (makes reports non-reproducible).
    #[arg(long)]
    timings: bool,
    #[command(flatten)]
    trunc: TruncArgs,
}

/// An error with the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn parse(message: impl Into<String>) -> Self {
        Self { code: EXIT_PARSE, message: message.into() }
    }

    fn evaluation(kind: &str, err: impl std::fmt::Display) -> Self {
        Self { code: EXIT_EVALUATION, message: format!("{kind}: {err}") }
    }
}

impl From<ExactError> for Failure {
    fn from(e: ExactError) -> Self {
        let kind = match e {
            ExactError::LengthExceedsVariables { .. } => "LengthExceedsVariables",
            _ => "ParseError",
        };
        Failure::parse(format!("{kind}: {e}"))
    }
}

impl From<MacdonaldError> for Failure {
    fn from(e: MacdonaldError) -> Self {
        match e {
            MacdonaldError::Exact(inner) => inner.into(),
            MacdonaldError::SingularSystem { .. } => Failure { code: EXIT_SINGULAR, message: format!("SingularSystem: {e}") },
            MacdonaldError::InvalidQT { .. } => Failure::parse(format!("InvalidParameters: {e}")),
            other => Failure::evaluation("MacdonaldError", other),
        }
    }
}

impl From<QSeriesError> for Failure {
    fn from(e: QSeriesError) -> Self {
        match e {
            QSeriesError::Exact(inner) => inner.into(),
            QSeriesError::Parse(_) | QSeriesError::InvalidPrecision(_) | QSeriesError::InvalidTruncation { .. } => {
                Failure::parse(format!("{}: {e}", e.kind()))
            }
            other => Failure::evaluation(other.kind(), &other),
        }
    }
}

impl From<SovKernelError> for Failure {
    fn from(e: SovKernelError) -> Self {
        match e {
            SovKernelError::QSeries(inner) => inner.into(),
            SovKernelError::Macdonald(inner) => inner.into(),
            other => Failure::evaluation(other.kind(), &other),
        }
    }
}

impl From<VerifyError> for Failure {
    fn from(e: VerifyError) -> Self {
        match e {
            VerifyError::InvalidConfig(_) => Failure::parse(e.to_string()),
            VerifyError::Domain(inner) => inner.into(),
        }
    }
}

fn rational(name: &str, s: &str) -> Result<Rational, Failure> {
    parse_rational(s).map_err(|e| Failure::parse(format!("--{name}: {e}")))
}

fn required<'a>(name: &str, v: &'a Option<String>) -> Result<&'a str, Failure> {
    v.as_deref().ok_or_else(|| Failure::parse(format!("--{name} is required for this target")))
}

fn qt_point(q: &str, t: &str) -> Result<QTPoint, Failure> {
    Ok(QTPoint::new(rational("q", q)?, rational("t", t)?)?)
}

fn partition(s: &str) -> Result<Partition, Failure> {
    Ok(s.parse::<Partition>()?)
}

fn truncation(args: &TruncArgs) -> Result<SeriesTruncation, Failure> {
    let base = SeriesTruncation::default();
    Ok(SeriesTruncation::new(
        args.eps_term.unwrap_or(base.eps_term()),
        args.max_terms.unwrap_or(base.max_terms()),
        base.consecutive_small(),
    )?)
}

fn real(name: &str, s: &str, precision: Precision) -> Result<Real, Failure> {
    Real::parse(s, precision).map_err(|e| Failure::parse(format!("--{name}: {e}")))
}

fn cmd_macdonald(lambda: &str, n: usize, qt: &QtArgs) -> Result<String, Failure> {
    let lambda = partition(lambda)?;
    let qt = qt_point(&qt.q, &qt.t)?;
    lambda.padded(n)?;
    let expansion = macdonald_polynomial(&lambda, n, &qt)?;
    Ok(serde_json::to_string_pretty(&expansion.to_json()).expect("json"))
}

fn cmd_eval(args: &EvalArgs, precision: Precision) -> Result<String, Failure> {
    let qt = qt_point(&args.qt.q, &args.qt.t)?;
    let trunc = truncation(&args.trunc)?;
    let value = match args.target {
        Target::Phi | Target::Psi => {
            let lambda = partition(required("lambda", &args.lambda)?)?;
            let n = args.n.ok_or_else(|| Failure::parse("--n is required for this target"))? as usize;
            lambda.padded(n)?;
            let z = real("z", required("z", &args.z)?, precision)?;
            match args.target {
                Target::Phi => phi_lambda(&lambda, n, &qt, &z, &trunc)?,
                _ => psi_lambda(&lambda, n, &qt, &z, &trunc)?,
            }
        }
        Target::LatticePhi | Target::Kernel | Target::ApplyK => {
            let sigma = real("sigma", required("sigma", &args.sigma)?, precision)?;
            let xi = real("xi", required("xi", &args.xi)?, precision)?;
            let s = real("s", required("s", &args.s)?, precision)?;
            let ctx = KernelContext::new(qt, precision, trunc)?.with_exponent(args.kernel_exponent.into());
            match args.target {
                Target::LatticePhi => {
                    let n = args.n.ok_or_else(|| Failure::parse("--n is required for this target"))?;
                    phi_function(&ctx, &s, &sigma, &xi, n)?
                }
                Target::Kernel => kernel_k(&ctx, &KernelPoint { sigma, xi, s, l: args.l })?,
                _ => {
                    let poly = TwoVarPoly::parse(required("poly", &args.poly)?)?;
                    apply_k(&ctx, &poly, &sigma, &xi, &s)?
                }
            }
        }
    };
    Ok(value.to_decimal_full())
}

fn cmd_verify(args: &VerifyArgs, precision: Precision) -> Result<(SuiteReport, String), Failure> {
    let config = RunConfig {
        precision,
        qt: qt_point(&args.q, &args.t)?,
        s: rational("s", &args.s)?,
        trunc: truncation(&args.trunc)?,
        samples: args.samples,
        seed: args.seed,
        exponent: args.kernel_exponent.into(),
        n_max: args.n_max,
        timings: args.timings,
    };
    let report = run_suite(args.suite.into(), &config)?;
    let text = match args.format {
        Format::Json => report.to_json() + "\n",
        Format::Csv => report.to_csv(),
    };
    Ok((report, text))
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let precision = Precision::new(cli.precision)?;
    match &cli.command {
        Command::Macdonald { lambda, n, qt } => {
            println!("{}", cmd_macdonald(lambda, *n, qt)?);
            Ok(0)
        }
        Command::Eval(args) => {
            println!("{}", cmd_eval(args, precision)?);
            Ok(0)
        }
        Command::Verify(args) => {
            let (report, text) = cmd_verify(args, precision)?;
            match &args.out {
                Some(path) => fs::write(path, text).map_err(|e| Failure::parse(format!("cannot write {}: {e}", path.display())))?,
                None => print!("{text}"),
            }
            let s = &report.summary;
            eprintln!("{}: {} records, {} pass, {} fail, {} error", report.suite, s.total, s.pass_count, s.fail_count, s.error_count);
            Ok(if s.error_count > 0 {
                EXIT_EVALUATION
            } else if s.fail_count > 0 {
                EXIT_THRESHOLD
            } else {
                0
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARSE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
