use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::Rational;

use super::report::{CheckRecord, Threshold};
use super::sampling::{sample_points, SamplePoint};
use super::{Job, RunConfig, Suite, VerifyError};
use crate::exact::{format_rational, partitions_up_to, MultiPoly, Partition};
use crate::macdonald::{apply_macdonald_operator, dehomogenize, eigenvalue_vector, macdonald_polynomial, monomial_sym, MacdonaldError, QTPoint, TwoVarPoly};
use crate::qseries::{
    phi_difference_residual_against, phi_lambda, polynomiality_check_with, psi_polynomiality_check, separated_equation_residual,
    separated_params, QSeriesError, Real,
};
use crate::sovkernel::{
    bailey_phi0, conjecture_p, factorization_check, factorization_check_for, kernel_relation_residual, phi_function,
    s_independence_check, KernelAction, KernelContext, KernelExponent, KernelPoint, KernelRelation, SovKernelError, ZIndex,
};

const CONTROL: Threshold = Threshold::Above(1e-6);
const S_TRIPLE: [(i64, i64); 3] = [(1, 10), (1, 4), (2, 5)];

/// `10^{−min(e, D−20)}`: the pinned tolerance, loosened only when the
/// working precision cannot support it.
fn bound(config: &RunConfig, exponent: i32) -> Threshold {
    let digits = config.precision.digits() as i32;
    Threshold::Below(10f64.powi(-exponent.min(digits - 20)))
}

fn base_params(config: &RunConfig) -> BTreeMap<String, String> {
    let mut p = BTreeMap::new();
    p.insert("q".into(), format_rational(&config.qt.q));
    p.insert("t".into(), format_rational(&config.qt.t));
    p.insert("precision".into(), config.precision.digits().to_string());
    p
}

fn with(mut params: BTreeMap<String, String>, extra: &[(&str, String)]) -> BTreeMap<String, String> {
    for (k, v) in extra {
        params.insert((*k).into(), v.clone());
    }
    params
}

fn point_params(config: &RunConfig, pt: &SamplePoint, s: &Rational) -> BTreeMap<String, String> {
    with(
        base_params(config),
        &[("s", format_rational(s)), ("sigma", SamplePoint::decimal(&pt.sigma)), ("xi", SamplePoint::decimal(&pt.xi))],
    )
}

fn lambda_label(lambda: &Partition) -> Option<String> {
    Some(format!("({lambda})"))
}

fn job(f: impl Fn() -> Vec<CheckRecord> + Send + Sync + 'static) -> Job {
    Box::new(f)
}

pub(super) fn jobs(suite: Suite, config: &RunConfig) -> Result<Vec<Job>, VerifyError> {
    Ok(match suite {
        Suite::Eigen => eigen(config),
        Suite::Separated => separated(config),
        Suite::Polynomiality => polynomiality(config),
        Suite::Bailey => bailey(config)?,
        Suite::Conjecture => conjecture(config)?,
        Suite::KernelRelations => kernel_relations(config)?,
        Suite::Normalization => normalization(config)?,
        Suite::Factorization => factorization(config)?,
        Suite::All => unreachable!("expanded by the caller"),
    })
}

fn max_abs_coeff(f: &MultiPoly) -> Rational {
    f.terms().map(|(_, c)| Rational::from(c.abs_ref())).max().unwrap_or_default()
}

fn relative(diff: &MultiPoly, reference: &MultiPoly) -> Rational {
    let scale = max_abs_coeff(reference);
    let top = max_abs_coeff(diff);
    if scale == 0 {
        top
    } else {
        top / scale
    }
}

/// Largest relative coefficient of `D_r P_λ − (d_r(λ) + shift) P_λ` over
/// `r = 0…3`, exact.
pub(crate) fn eigen_residual(lambda: &Partition, qt: &QTPoint, shift: i64) -> Result<Rational, MacdonaldError> {
    let p = macdonald_polynomial(lambda, 3, qt)?.to_multipoly()?;
    let d = eigenvalue_vector(lambda, 3, qt)?;
    let mut worst = Rational::new();
    for r in 0..=3 {
        let lhs = apply_macdonald_operator(r, &p, qt)?;
        let rhs = p.scale(&Rational::from(d.get(r) + shift));
        worst = worst.max(relative(&(&lhs - &rhs), &p));
    }
    Ok(worst)
}

/// `count` seeded random symmetric polynomials of degree at most 5 in three
/// variables, as combinations of monomial symmetric functions.
pub(crate) fn random_symmetric(seed: u64, count: usize) -> Result<Vec<MultiPoly>, MacdonaldError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let basis = partitions_up_to(5, 3);
    (0..count)
        .map(|_| {
            let mut f = MultiPoly::zero_in(3);
            for _ in 0..rng.gen_range(1..=4) {
                let mu = &basis[rng.gen_range(0..basis.len())];
                let mut num = rng.gen_range(-9i64..=8);
                if num >= 0 {
                    num += 1;
                }
                let c = Rational::from((num, rng.gen_range(1i64..=5)));
                f = &f + &monomial_sym(mu, 3)?.scale(&c);
            }
            Ok(f)
        })
        .collect()
}

/// Largest relative coefficient of `D₁D₂f − D₂D₁f` over the given inputs.
pub(crate) fn commutator_residual(polys: &[MultiPoly], qt: &QTPoint) -> Result<Rational, MacdonaldError> {
    let mut worst = Rational::new();
    for f in polys {
        let a = apply_macdonald_operator(1, &apply_macdonald_operator(2, f, qt)?, qt)?;
        let b = apply_macdonald_operator(2, &apply_macdonald_operator(1, f, qt)?, qt)?;
        worst = worst.max(relative(&(&a - &b), f));
    }
    Ok(worst)
}

fn eigen(config: &RunConfig) -> Vec<Job> {
    let anchor = "Macdonald operators: D_r P_lambda = d_r(lambda) P_lambda, r = 0..3";
    let mut out = Vec::new();
    for lambda in partitions_up_to(6, 3) {
        let c = config.clone();
        out.push(job(move || {
            let value = eigen_residual(&lambda, &c.qt, 0).map(|r| Real::from_rational(&r, c.precision));
            vec![CheckRecord::judge("eigen", anchor, lambda_label(&lambda), with(base_params(&c), &[("n", "3".into())]), Threshold::Exact, value)]
        }));
    }
    let c = config.clone();
    out.push(job(move || {
        let value = random_symmetric(c.seed, 20)
            .and_then(|ps| commutator_residual(&ps, &c.qt))
            .map(|r| Real::from_rational(&r, c.precision));
        let params = with(base_params(&c), &[("inputs", "20".into()), ("seed", c.seed.to_string())]);
        vec![CheckRecord::judge("eigen/commutativity", "Macdonald operators commute: D_1 D_2 = D_2 D_1", None, params, Threshold::Exact, value)]
    }));
    let c = config.clone();
    out.push(job(move || {
        let lambda = Partition::new(vec![2, 1]).expect("partition");
        let value = eigen_residual(&lambda, &c.qt, 1).map(|r| Real::from_rational(&r, c.precision));
        let params = with(base_params(&c), &[("perturbation", "eigenvalue + 1".into())]);
        vec![CheckRecord::judge("eigen/control", anchor, lambda_label(&lambda), params, CONTROL, value)]
    }));
    out
}

fn separated(config: &RunConfig) -> Vec<Job> {
    let anchor = "separated q-difference equation for phi_lambda with eigenvalue coefficients";
    let zs = [Rational::from((1, 10)), Rational::from((3, 10)), Rational::from((-1, 4))];
    let mut out = Vec::new();
    for lambda in partitions_up_to(5, 3) {
        for z in &zs {
            let (c, z, lambda) = (config.clone(), z.clone(), lambda.clone());
            out.push(job(move || {
                let value = separated_equation_residual(&lambda, 3, &c.qt, &Real::from_rational(&z, c.precision), &c.trunc);
                let params = with(base_params(&c), &[("n", "3".into()), ("z", format_rational(&z))]);
                vec![CheckRecord::judge("separated", anchor, lambda_label(&lambda), params, bound(&c, 30), value)]
            }));
        }
    }
    let c = config.clone();
    out.push(job(move || {
        let lambda = Partition::new(vec![2, 1]).expect("partition");
        let z = Rational::from((7, 20));
        let value = separated_params(&lambda, 3, &c.qt).and_then(|params| {
            let (a, b) = params.to_real(c.precision);
            let mut shifted = b.clone();
            shifted[0] = &shifted[0] + &Real::from_rational(&Rational::from((1, 10)), c.precision);
            let q = Real::from_rational(&c.qt.q, c.precision);
            phi_difference_residual_against(&a, &b, &a, &shifted, &q, &Real::from_rational(&z, c.precision), &c.trunc)
        });
        let params = with(base_params(&c), &[("z", format_rational(&z)), ("perturbation", "b1 + 0.1 in the operator".into())]);
        vec![CheckRecord::judge("separated/control", "basic hypergeometric q-difference equation", lambda_label(&lambda), params, CONTROL, value)]
    }));
    out
}

fn polynomiality(config: &RunConfig) -> Vec<Job> {
    let anchor = "psi_lambda is a polynomial in z of degree window [lambda_n, lambda_1]";
    let mut out = Vec::new();
    for n in [2usize, 3] {
        for lambda in partitions_up_to(5, n) {
            let c = config.clone();
            out.push(job(move || {
                let Threshold::Below(tol) = bound(&c, 30) else { unreachable!() };
                let value = psi_polynomiality_check(&lambda, n, &c.qt, &c.trunc, c.precision, tol).map(|r| {
                    [r.excess_high, r.excess_low, r.holdout_error].into_iter().fold(Real::zero(c.precision), |a, b| if b > a { b } else { a })
                });
                vec![CheckRecord::judge("polynomiality", anchor, lambda_label(&lambda), with(base_params(&c), &[("n", n.to_string())]), bound(&c, 30), value)]
            }));
        }
    }
    let c = config.clone();
    out.push(job(move || {
        let lambda = Partition::new(vec![2, 1]).expect("partition");
        let value = polynomiality_check_with(&lambda, 3, c.precision, 1e-30, |z| phi_lambda(&lambda, 3, &c.qt, z, &c.trunc))
            .map(|r| if r.holdout_error > r.excess_high { r.holdout_error } else { r.excess_high });
        let params = with(base_params(&c), &[("n", "3".into()), ("perturbation", "phi_lambda without the psi prefactor".into())]);
        vec![CheckRecord::judge::<QSeriesError>("polynomiality/control", anchor, lambda_label(&lambda), params, CONTROL, value)]
    }));
    out
}

fn context(config: &RunConfig) -> Result<Arc<KernelContext>, VerifyError> {
    Ok(Arc::new(config.kernel_context()?))
}

fn s_triple(ctx: &KernelContext) -> Vec<Real> {
    S_TRIPLE.iter().map(|&s| ctx.real(&Rational::from(s))).collect()
}

fn bailey(config: &RunConfig) -> Result<Vec<Job>, VerifyError> {
    let anchor = "n = 0 lattice sum equals the very-well-poised bilateral summation product";
    let ctx = context(config)?;
    let points = sample_points(&ctx, config.samples, config.seed, &[0.1, 0.25, 0.4]);
    let mut out = Vec::new();
    for (i, pt) in points.iter().enumerate() {
        let (c, ctx, pt) = (config.clone(), ctx.clone(), pt.clone());
        out.push(job(move || {
            let s = Rational::from(S_TRIPLE[i % 3]);
            let (sigma, xi) = pt.to_real(&ctx);
            let sr = ctx.real(&s);
            let value = phi_function(&ctx, &sr, &sigma, &xi, 0)
                .and_then(|direct| Ok(Real::rel_diff(&direct, &bailey_phi0(&ctx, &sr, &sigma, &xi)?)));
            vec![CheckRecord::judge("bailey", anchor, None, point_params(&c, &pt, &s), bound(&c, 30), value)]
        }));
    }
    let (c, ctx, pt) = (config.clone(), ctx.clone(), points[0].clone());
    out.push(job(move || {
        let s = Rational::from(S_TRIPLE[0]);
        let (sigma, xi) = pt.to_real(&ctx);
        let sr = ctx.real(&s);
        let moved = &xi + &ctx.real(&Rational::from((1, 10)));
        let value = phi_function(&ctx, &sr, &sigma, &xi, 0)
            .and_then(|direct| Ok(Real::rel_diff(&direct, &bailey_phi0(&ctx, &sr, &sigma, &moved)?)));
        let params = with(point_params(&c, &pt, &s), &[("perturbation", "xi + 0.1 in the product".into())]);
        vec![CheckRecord::judge("bailey/control", anchor, None, params, CONTROL, value)]
    }));
    Ok(out)
}

fn conjecture(config: &RunConfig) -> Result<Vec<Job>, VerifyError> {
    let anchor = "Phi(s; n) / Phi(s; 0) is an s-independent Laurent polynomial in sigma, xi";
    let ctx = context(config)?;
    let points = sample_points(&ctx, config.samples, config.seed, &[0.1, 0.25, 0.4]);
    let mut out = Vec::new();
    for pt in &points {
        for n in 1..=3u32 {
            let (c, ctx, pt) = (config.clone(), ctx.clone(), pt.clone());
            out.push(job(move || {
                let (sigma, xi) = pt.to_real(&ctx);
                let ratios: Result<Vec<Real>, SovKernelError> = s_triple(&ctx)
                    .iter()
                    .map(|s| Ok(&phi_function(&ctx, s, &sigma, &xi, n)? / &phi_function(&ctx, s, &sigma, &xi, 0)?))
                    .collect();
                let closed = conjecture_p(&ctx, n, &sigma, &xi);
                let params = with(
                    point_params(&c, &pt, &Rational::from(S_TRIPLE[0])),
                    &[("s", "1/10,1/4,2/5".into()), ("n", n.to_string())],
                );
                let (match_value, spread_value) = match (ratios, closed) {
                    (Ok(ratios), Ok(p)) => {
                        let worst = |vals: Vec<Real>| vals.into_iter().fold(Real::zero(c.precision), |a, b| if b > a { b } else { a });
                        let matched = worst(ratios.iter().map(|r| Real::rel_diff(r, &p)).collect());
                        let spread = worst(
                            (0..ratios.len())
                                .flat_map(|i| (i + 1..ratios.len()).map(move |j| (i, j)))
                                .map(|(i, j)| Real::rel_diff(&ratios[i], &ratios[j]))
                                .collect(),
                        );
                        (Ok(matched), Ok(spread))
                    }
                    (Err(e), _) | (_, Err(e)) => (Err(e.clone()), Err(e)),
                };
                vec![
                    CheckRecord::judge("conjecture", anchor, None, params.clone(), bound(&c, 28), match_value),
                    CheckRecord::judge("conjecture/s-spread", anchor, None, params, bound(&c, 28), spread_value),
                ]
            }));
        }
    }
    let (c, ctx, pt) = (config.clone(), ctx.clone(), points[0].clone());
    out.push(job(move || {
        let s = Rational::from(S_TRIPLE[1]);
        let (sigma, xi) = pt.to_real(&ctx);
        let sr = ctx.real(&s);
        let moved = &sigma + &ctx.real(&Rational::from((1, 10)));
        let value = (|| {
            let ratio = &phi_function(&ctx, &sr, &sigma, &xi, 2)? / &phi_function(&ctx, &sr, &sigma, &xi, 0)?;
            Ok::<_, SovKernelError>(Real::rel_diff(&ratio, &conjecture_p(&ctx, 2, &moved, &xi)?))
        })();
        let params = with(point_params(&c, &pt, &s), &[("n", "2".into()), ("perturbation", "sigma + 0.1 in the polynomial".into())]);
        vec![CheckRecord::judge("conjecture/control", anchor, None, params, CONTROL, value)]
    }));
    Ok(out)
}

fn kernel_relations(config: &RunConfig) -> Result<Vec<Job>, VerifyError> {
    let anchor = "kernel difference equations in y1, y2, z1, z2";
    let ctx = context(config)?;
    let s_f64 = ctx.real(&config.s).to_f64();
    let points = sample_points(&ctx, config.samples, config.seed, &[s_f64]);
    let mut out = Vec::new();
    for (idx, pt) in points.iter().enumerate() {
        let (c, ctx, pt) = (config.clone(), ctx.clone(), pt.clone());
        out.push(job(move || {
            let (sigma, xi) = pt.to_real(&ctx);
            let l = idx as i64 % 5 - 2;
            let kp = KernelPoint { sigma, xi, s: ctx.real(&c.s), l };
            let mut records = Vec::new();
            for which in KernelRelation::ALL {
                for i in [ZIndex::First, ZIndex::Second] {
                    let value = kernel_relation_residual(&ctx, which, &kp, i);
                    let params = with(point_params(&c, &pt, &c.s), &[("l", l.to_string()), ("i", i.number().to_string())]);
                    records.push(CheckRecord::judge(format!("kernel-relations/{which}"), anchor, None, params, bound(&c, 28), value));
                }
            }
            records
        }));
    }
    let (c, pt) = (config.clone(), points[0].clone());
    let other = match config.exponent {
        KernelExponent::Cubic => KernelExponent::ThreeHalves,
        KernelExponent::ThreeHalves => KernelExponent::Cubic,
    };
    let ctx = Arc::new((*ctx).clone().with_exponent(other));
    out.push(job(move || {
        let (sigma, xi) = pt.to_real(&ctx);
        let kp = KernelPoint { sigma, xi, s: ctx.real(&c.s), l: 0 };
        let value = kernel_relation_residual(&ctx, KernelRelation::ShiftY1, &kp, ZIndex::First);
        let params = with(point_params(&c, &pt, &c.s), &[("l", "0".into()), ("i", "1".into()), ("perturbation", format!("kernel exponent {other}"))]);
        vec![CheckRecord::judge("kernel-relations/control", anchor, None, params, CONTROL, value)]
    }));
    Ok(out)
}

fn normalization(config: &RunConfig) -> Result<Vec<Job>, VerifyError> {
    let ctx = context(config)?;
    let s_f64 = ctx.real(&config.s).to_f64();
    let points = sample_points(&ctx, config.samples, config.seed, &[s_f64, 0.1, 0.25, 0.4]);
    let mut out = Vec::new();
    for pt in &points {
        let (c, ctx, pt) = (config.clone(), ctx.clone(), pt.clone());
        out.push(job(move || {
            let (sigma, xi) = pt.to_real(&ctx);
            let params = point_params(&c, &pt, &c.s);
            let tol = bound(&c, 28);
            let mut action = match KernelAction::new(&ctx, &sigma, &xi, &ctx.real(&c.s)) {
                Ok(a) => a,
                Err(e) => return vec![CheckRecord::judge::<SovKernelError>("normalization", "K applied to 1 is 1", None, params, tol, Err(e))],
            };
            let one = unit();
            let mut records = vec![CheckRecord::judge(
                "normalization",
                "K applied to 1 is 1",
                None,
                params.clone(),
                tol,
                action.apply(&one).map(|v| (&v - &Real::one(c.precision)).abs()),
            )];
            let power = (|| {
                let mut worst = Real::zero(c.precision);
                for n in 1..=4 {
                    let d = Real::rel_diff(&action.apply(&TwoVarPoly::power_sum(n))?, &action.power_sum(n)?);
                    if d > worst {
                        worst = d;
                    }
                }
                Ok::<_, SovKernelError>(worst)
            })();
            records.push(CheckRecord::judge(
                "normalization/power-sum",
                "K on y1^n + y2^n equals g sigma^n (Phi(s; n) + Phi(s + 1/2; n)), n = 1..4",
                None,
                params.clone(),
                tol,
                power,
            ));
            let t = ctx.t().clone();
            for m in 1..=2u32 {
                let p = TwoVarPoly::from_terms([((m, m), Rational::from(1))]);
                let sigma_power = sigma.powi(2 * i64::from(m));
                let image = action.apply(&p);
                let mp = with(params.clone(), &[("m", m.to_string())]);
                let claimed = &t.powi(3 * i64::from(m)) * &sigma_power;
                records.push(CheckRecord::judge(
                    "normalization/sigma-action",
                    "K on (y1 y2)^m equals t^{3m} sigma^{2m}",
                    None,
                    mp.clone(),
                    tol,
                    image.clone().map(|v| Real::rel_diff(&v, &claimed)),
                ));
                records.push(CheckRecord::judge(
                    "normalization/sigma-spectator",
                    "K on (y1 y2)^m equals sigma^{2m}",
                    None,
                    mp,
                    tol,
                    image.map(|v| Real::rel_diff(&v, &sigma_power)),
                ));
            }
            let linear = TwoVarPoly::parse("y1 + y2 + 1").expect("literal polynomial");
            records.push(CheckRecord::judge(
                "normalization/s-independence",
                "K does not depend on s",
                None,
                with(params, &[("s", "1/10,1/4,2/5".into()), ("poly", "y1 + y2 + 1".into())]),
                tol,
                s_independence_check(&ctx, &linear, &sigma, &xi, &s_triple(&ctx)),
            ));
            records
        }));
    }
    let (c, ctx, pt) = (config.clone(), ctx.clone(), points[0].clone());
    out.push(job(move || {
        let (sigma, xi) = pt.to_real(&ctx);
        let s = ctx.real(&c.s);
        let moved = &xi + &ctx.real(&Rational::from((1, 10)));
        let value = (|| {
            let raw = KernelAction::new(&ctx, &sigma, &xi, &s)?.raw_sum(&unit())?;
            let g = KernelAction::new(&ctx, &sigma, &moved, &s)?.g()?;
            Ok::<_, SovKernelError>((&(&g * &raw) - &Real::one(c.precision)).abs())
        })();
        let params = with(point_params(&c, &pt, &c.s), &[("perturbation", "g taken at xi + 0.1".into())]);
        vec![CheckRecord::judge("normalization/control", "K applied to 1 is 1", None, params, CONTROL, value)]
    }));
    Ok(out)
}

fn unit() -> TwoVarPoly {
    TwoVarPoly::from_terms([((0, 0), Rational::from(1))])
}

const RESAMPLE_BUDGET: usize = 10;

fn factorization(config: &RunConfig) -> Result<Vec<Job>, VerifyError> {
    let anchor = "K p_lambda = c_lambda psi_lambda(t^{3/2} z1) psi_lambda(t^{3/2} z2)";
    let ctx = context(config)?;
    let s_f64 = ctx.real(&config.s).to_f64();
    let candidates = Arc::new(sample_points(&ctx, config.samples + RESAMPLE_BUDGET, config.seed, &[s_f64]));
    let mut out = Vec::new();
    for lambda in partitions_up_to(4, 3) {
        let (c, ctx, candidates) = (config.clone(), ctx.clone(), candidates.clone());
        out.push(job(move || {
            let s = ctx.real(&c.s);
            let mut pool: Vec<SamplePoint> = candidates.to_vec();
            let result = loop {
                let chosen: Vec<(Real, Real)> = pool[..c.samples].iter().map(|p| p.to_real(&ctx)).collect();
                match factorization_check(&ctx, &lambda, &chosen, &s, 0.0) {
                    Err(SovKernelError::NearZeroDivisor { index, .. }) if pool.len() > c.samples => {
                        pool.remove(index);
                    }
                    other => break other,
                }
            };
            let mut params = with(base_params(&c), &[("s", format_rational(&c.s)), ("samples", c.samples.to_string())]);
            if let Ok(report) = &result {
                params.insert("c_lambda".into(), report.c_mean.to_decimal(20));
            }
            let value = result.map(|r| r.max_relative_spread);
            vec![CheckRecord::judge("factorization", anchor, lambda_label(&lambda), params, bound(&c, 20), value)]
        }));
    }
    let (c, ctx, candidates) = (config.clone(), ctx.clone(), candidates.clone());
    out.push(job(move || {
        let lambda = Partition::new(vec![1]).expect("partition");
        let s = ctx.real(&c.s);
        let chosen: Vec<(Real, Real)> = candidates[..c.samples].iter().map(|p| p.to_real(&ctx)).collect();
        let value = macdonald_polynomial(&lambda, 3, &ctx.qt)
            .and_then(|p| dehomogenize(&p))
            .map_err(SovKernelError::from)
            .and_then(|p| {
                let mut skewed = p;
                skewed.add_term((1, 0), Rational::from(1));
                factorization_check_for(&ctx, &lambda, &skewed, &chosen, &s, 0.0)
            })
            .map(|r| r.max_relative_spread);
        let params = with(
            base_params(&c),
            &[("s", format_rational(&c.s)), ("samples", c.samples.to_string()), ("perturbation", "p_lambda + y1".into())],
        );
        vec![CheckRecord::judge("factorization/control", anchor, lambda_label(&lambda), params, CONTROL, value)]
    }));
    Ok(out)
}
