//! `linspecial`: exact and certified computations around special points on linear
//! subvarieties of affine space.
//!
//! Exit codes: 0 success, 1 runtime error, 2 solve finished with undecided tuples,
//! 3 solve refused (cap above the refusal threshold), 64 usage error.

mod error;
mod job;
mod output;

use std::fmt::Display;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use linspecial_core::ball::Ball;
use linspecial_core::bounds::discriminant_cap;
use linspecial_core::exact_linear::parse_rational;
use linspecial_core::heights::{subspace_height, HEIGHT_PREC};
use linspecial_core::modular::{
    j_eval, rational_singular_modulus, reduce_to_fundamental, tau_delta, CMPeriod, ClassPolynomialCache, CACHE_DIR_ENV,
    MAX_PREC,
};
use linspecial_core::quadratic::{
    class_number, psi, rcf_degree_lower_bound, rcf_degree_ratio, reduced_forms, two_rank, two_rank_log_bound,
    two_rank_root_bound, Discriminant, ReducedForm,
};
use linspecial_core::search::{
    check_point, format_residual, solve, verify_equation_bound, ModulusId, SolveOptions, ZeroTest, DEFAULT_REFUSAL_THRESHOLD,
};
use serde::Serialize;

use crate::error::CliError;
use crate::job::Job;
use crate::output::*;

const EXIT_USAGE: u8 = 64;

#[derive(Debug, Parser)]
#[command(name = "linspecial", version, about = "Special points on linear subvarieties of affine space")]
struct Cli {
    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Directory for the persistent class polynomial cache.
    #[arg(long, global = true, env = CACHE_DIR_ENV)]
    cache_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Height of the subvariety in a job file.
    Height { job: PathBuf },
    /// Discriminant cap for a job's subvariety.
    Bound {
        job: PathBuf,
        /// Overrides the job's degree.
        #[arg(long)]
        degree: Option<u64>,
    },
    /// Class number h(Δ).
    #[command(allow_negative_numbers = true)]
    ClassNumber { discriminant: i64 },
    /// Hilbert class polynomial H_Δ.
    #[command(allow_negative_numbers = true)]
    ClassPoly { discriminant: i64 },
    /// Primitive reduced forms of discriminant Δ.
    #[command(allow_negative_numbers = true)]
    ReduceForms { discriminant: i64 },
    /// Certified j(τ) at a CM point of discriminant Δ.
    #[command(allow_negative_numbers = true)]
    JEval {
        discriminant: i64,
        /// Reduced form `a,b,c` (default: the principal form).
        #[arg(long, allow_hyphen_values = true)]
        form: Option<String>,
        /// Target absolute radius 10^-digits.
        #[arg(long, default_value_t = 30)]
        digits: u32,
    },
    /// Move τ = re + i·im into the standard fundamental domain.
    ReduceTau {
        #[arg(allow_hyphen_values = true)]
        re: String,
        im: String,
    },
    /// Dedekind ψ(N) = N·∏(1 + 1/p).
    Psi { n: u64 },
    /// Degree ratio of ring class fields [K[cf] : K[f]] for fundamental d.
    #[command(allow_negative_numbers = true)]
    RcfDegree { d: i64, f: u64, c: u64 },
    /// 2-rank of the class group and its upper bounds.
    #[command(allow_negative_numbers = true)]
    TwoRank {
        discriminant: i64,
        /// Largest root index n for the 4n²|Δ|^(1/n) bound.
        #[arg(long, default_value_t = 4)]
        max_n: u32,
    },
    /// All special points on a job's subvariety outside its special locus.
    Solve {
        job: PathBuf,
        /// Overrides the job's discriminant cap.
        #[arg(long)]
        cap: Option<u64>,
        /// Disable size-window pruning.
        #[arg(long)]
        no_prune: bool,
        /// Refuse when the effective cap exceeds this.
        #[arg(long)]
        refusal_threshold: Option<u64>,
    },
    /// Classify one tuple of singular moduli against a job's subvariety.
    CheckPoint {
        job: PathBuf,
        /// `Δ:(a,b,c)` per coordinate, separated by `;`.
        #[arg(long, allow_hyphen_values = true)]
        point: String,
    },
    /// Solve a₁z₁ + … + a_k z_k + b = 0 in distinct moduli and compare with the bound.
    #[command(allow_negative_numbers = true)]
    VerifyLemma {
        /// The coefficients a₁ … a_k followed by b. Put negative fractions after `--`.
        #[arg(num_args = 2.., required = true)]
        values: Vec<String>,
        #[arg(long)]
        cap: u64,
    },
}

struct Printer {
    json: bool,
}

impl Printer {
    fn emit<T: Serialize + Display>(&self, value: &T) -> Result<(), CliError> {
        let text = if self.json {
            serde_json::to_string_pretty(value).map_err(|e| CliError::Usage(e.to_string()))?
        } else {
            value.to_string()
        };
        // A closed pipe (`| head`) is not an error.
        let _ = writeln!(std::io::stdout().lock(), "{text}");
        Ok(())
    }
}

fn disc(value: i64) -> Result<Discriminant, CliError> {
    Ok(Discriminant::new(value)?)
}

fn rational(s: &str) -> Result<linspecial_core::exact_linear::ExactRational, CliError> {
    parse_rational(s).map_err(|e| CliError::Usage(format!("{s:?}: {e}")))
}

fn parse_form(s: &str) -> Result<ReducedForm, CliError> {
    let parts: Vec<i64> = s
        .trim_matches(|c| c == '(' || c == ')')
        .split(',')
        .map(|p| p.trim().parse::<i64>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::Usage(format!("expected a,b,c, got {s:?}")))?;
    match parts[..] {
        [a, b, c] => Ok(ReducedForm::new(a, b, c)?),
        _ => Err(CliError::Usage(format!("expected a,b,c, got {s:?}"))),
    }
}

fn run(cli: Cli) -> Result<u8, CliError> {
    if let Some(t) = cli.threads {
        // Fails only if a pool already exists, which is harmless.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    let out = Printer { json: cli.json };
    match cli.command {
        Command::Height { job } => {
            let l = Job::load(&job)?.subvariety;
            let h = subspace_height(&l);
            out.emit(&HeightOut {
                ambient_dim: l.ambient_dim(),
                dim: l.dim(),
                equations: l.equations().iter().map(ToString::to_string).collect(),
                height: h.value().display_certified(),
                height_squared: h.square().to_string(),
                log_height: h.log().display_certified(),
            })?;
        }
        Command::Bound { job, degree } => {
            let job = Job::load(&job)?;
            let b = discriminant_cap(&job.subvariety, degree.unwrap_or(job.spec.degree))?;
            out.emit(&BoundOut {
                n: b.n,
                degree: b.degree,
                log_height: b.log_height.display_certified(),
                c1: b.c1.to_string(),
                c2: b.c2.to_string(),
                sqrt_cap: b.sqrt_cap.display_certified(),
                discriminant_cap: b.discriminant_cap.to_string(),
            })?;
        }
        Command::ClassNumber { discriminant } => {
            let d = disc(discriminant)?;
            out.emit(&ClassNumberOut {
                discriminant,
                fundamental: d.fundamental(),
                conductor: d.conductor(),
                class_number: class_number(&d),
            })?;
        }
        Command::ClassPoly { discriminant } => {
            let d = disc(discriminant)?;
            let cache = match &cli.cache_dir {
                Some(dir) => ClassPolynomialCache::with_dir(dir),
                None => ClassPolynomialCache::in_memory(),
            };
            let p = cache.get(&d)?;
            out.emit(&ClassPolyOut {
                discriminant,
                degree: p.degree(),
                coefficients: p.coefficients.iter().map(ToString::to_string).collect(),
                polynomial: p.to_string(),
                precision_bits: p.precision_bits,
            })?;
        }
        Command::ReduceForms { discriminant } => {
            let forms = reduced_forms(&disc(discriminant)?);
            out.emit(&FormsOut {
                discriminant,
                class_number: forms.len(),
                forms: forms.iter().map(ToString::to_string).collect(),
            })?;
        }
        Command::JEval { discriminant, form, digits } => {
            let d = disc(discriminant)?;
            let period = match form {
                Some(s) => {
                    let f = parse_form(&s)?;
                    if f.discriminant() != discriminant {
                        return Err(CliError::Usage(format!("form {f} has discriminant {}", f.discriminant())));
                    }
                    CMPeriod::new(f)?
                }
                None => tau_delta(&d),
            };
            let radius = 10f64.powi(-(digits.min(300) as i32));
            let m = j_eval(&period, radius)?;
            let integer = if class_number(&d) == 1 { rational_singular_modulus(&m).map(|n| n.to_string()) } else { None };
            let r = m.value.re.rad_f64().max(m.value.im.rad_f64());
            out.emit(&JEvalOut {
                discriminant,
                form: period.form().to_string(),
                tau: period.tau().to_string(),
                value: m.value.to_string(),
                radius: format_residual(r),
                precision_bits: m.precision_bits,
                integer,
            })?;
        }
        Command::ReduceTau { re, im } => {
            let (x, y) = (rational(&re)?, rational(&im)?);
            let tau = linspecial_core::ball::ComplexBall::new(Ball::from_rational(&x, HEIGHT_PREC), Ball::from_rational(&y, HEIGHT_PREC));
            let (reduced, g) = reduce_to_fundamental(&tau)?;
            out.emit(&ReduceTauOut { tau: tau.to_string(), reduced: reduced.to_string(), transform: g.to_string() })?;
        }
        Command::Psi { n } => out.emit(&PsiOut { n, psi: psi(n)? })?,
        Command::RcfDegree { d, f, c } => {
            let ratio = rcf_degree_ratio(d, f, c)?;
            out.emit(&RcfDegreeOut {
                d,
                f,
                c,
                ratio: ratio.to_string(),
                lower_bound: rcf_degree_lower_bound(c).display_certified(),
            })?;
        }
        Command::TwoRank { discriminant, max_n } => {
            let d = disc(discriminant)?;
            let r = two_rank(&d);
            let bounds = (1..=max_n)
                .map(|n| {
                    let b = two_rank_root_bound(&d, n)?;
                    Ok(TwoRankBoundOut {
                        n,
                        holds: Ball::from_int(r).certainly_le(&b.bound),
                        bound: b.bound.display_certified(),
                    })
                })
                .collect::<Result<_, CliError>>()?;
            out.emit(&TwoRankOut {
                discriminant,
                two_rank: r,
                log_bound: two_rank_log_bound(&d).display_certified(),
                bounds,
            })?;
        }
        Command::Solve { job, cap, no_prune, refusal_threshold } => {
            let job = Job::load(&job)?;
            let spec = &job.spec;
            let opts = SolveOptions {
                cap: cap.or(spec.cap),
                degree: spec.degree,
                threads: cli.threads.or(spec.threads),
                refusal_threshold: refusal_threshold.or(spec.refusal_threshold).unwrap_or(DEFAULT_REFUSAL_THRESHOLD),
                prune: !no_prune,
                max_prec: spec.max_precision.unwrap_or(MAX_PREC),
            };
            let solution = solve(&job.subvariety, &opts)?;
            out.emit(&SolveOut(solution.report()))?;
            return Ok(solution.status.exit_code() as u8);
        }
        Command::CheckPoint { job, point } => {
            let job = Job::load(&job)?;
            let ids: Vec<ModulusId> = point
                .split(';')
                .filter(|s| !s.trim().is_empty())
                .map(|s| s.trim().parse::<ModulusId>())
                .collect::<Result<_, _>>()?;
            let c = check_point(&job.subvariety, &ids, job.spec.max_precision.unwrap_or(MAX_PREC))?;
            let classification = match (c.on_subvariety, &c.special_witness) {
                (ZeroTest::Nonzero, _) => "not on L",
                (ZeroTest::NeedsPrecision, _) => "undecided at the precision ceiling",
                (ZeroTest::Zero, Some(_)) => "on L, inside a positive-dimensional special subvariety of L",
                (ZeroTest::Zero, None) => "isolated special point of L",
            };
            out.emit(&CheckPointOut {
                moduli: c.moduli.iter().map(ToString::to_string).collect(),
                values: c.values.iter().map(ToString::to_string).collect(),
                pattern: c.pattern.to_string(),
                on_subvariety: c.on_subvariety,
                residual: format_residual(c.residual),
                special_witness: c.special_witness.as_ref().map(|w| w.iter().map(|i| i + 1).collect()),
                classification: classification.to_string(),
            })?;
        }
        Command::VerifyLemma { values, cap } => {
            let parsed: Vec<_> = values.iter().map(|s| rational(s)).collect::<Result<_, _>>()?;
            let (b, a) = parsed.split_last().expect("at least two values");
            let report = verify_equation_bound(a, b, cap, MAX_PREC)?;
            out.emit(&LemmaOut(report))?;
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if matches!(e, CliError::Usage(_)) { EXIT_USAGE } else { 1 })
        }
    }
}
