//! Command-line front end for `canonical-fock`.
//!
//! [`run`] does all the work and returns the exit code together with the
//! bytes for stdout and stderr, so tests can drive it in-process.

pub mod literal;

use std::ffi::OsString;
use std::path::PathBuf;

use canonical_fock::berezin::{
    berezin, berezin_bound, berezin_modsq_lp_norm, berezin_modsq_lp_norm_quadrature, profile,
    profile_csv, ProfileKind,
};
use canonical_fock::kernel::{kernel_bound, DEFAULT_CLASSIFY_TOL};
use canonical_fock::report::{complex_pair, error_json};
use canonical_fock::spectral::{auto_dimension, trace_closed};
use canonical_fock::verify::{run_suite, Fault, Suite, VerifyOptions, AREA_ORDER, DEFAULT_SEED};
use canonical_fock::{
    classify, kernel_eval, Complex, Error, ParameterPair, QuadratureGrid, SpectralReport,
    TruncatedOperator,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

/// Exit status for malformed command lines.
pub const EXIT_USAGE: i32 = 64;
/// Exit status for parameters outside the domain of the requested quantity.
pub const EXIT_DOMAIN: i32 = 2;
/// Exit status for failed verification or internal errors.
pub const EXIT_FAILURE: i32 = 1;

#[derive(Debug, Parser)]
#[command(
    name = "canonical-fock",
    version,
    about = "Canonical integral operators on the Fock space"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Write the artifact here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Output format; `spectrum`, `matrix` and `profile` default to csv, the rest to json.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct Pair {
    /// Complex literal, e.g. `2+0i`.
    #[arg(long, allow_hyphen_values = true, value_parser = complex_arg)]
    pub s: Complex,
    #[arg(long, allow_hyphen_values = true, value_parser = complex_arg)]
    pub t: Complex,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Regime of the operator and the discriminant |s|²−|t|²−1.
    Classify {
        #[command(flatten)]
        pair: Pair,
        /// Half-width of the band counted as the unitary boundary.
        #[arg(long, default_value_t = DEFAULT_CLASSIFY_TOL)]
        tol: f64,
    },
    /// The kernel K(z, w) and its pointwise bound.
    Kernel {
        #[command(flatten)]
        pair: Pair,
        #[arg(long, allow_hyphen_values = true, value_parser = complex_arg)]
        z: Complex,
        #[arg(long, allow_hyphen_values = true, value_parser = complex_arg)]
        w: Complex,
    },
    /// The finite section M[m][n] = ⟨T e_n, e_m⟩.
    Matrix {
        #[command(flatten)]
        pair: Pair,
        #[arg(long, default_value_t = 64, value_parser = clap::value_parser!(u16).range(1..=256))]
        dim: u16,
    },
    /// Closed-form against numeric singular values, Schatten norms and trace.
    Spectrum {
        #[command(flatten)]
        pair: Pair,
        /// Truncation dimension; chosen automatically when omitted.
        #[arg(long, value_parser = clap::value_parser!(u16).range(1..=256))]
        dim: Option<u16>,
        #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u16).range(1..=256))]
        count: u16,
        /// Schatten exponents (repeatable, or comma separated; `inf` allowed).
        #[arg(long, value_delimiter = ',', value_parser = exponent_arg, default_values_t = [1.0, 2.0])]
        p: Vec<f64>,
    },
    /// Trace in closed form and as a diagonal sum.
    Trace {
        #[command(flatten)]
        pair: Pair,
        #[arg(long, value_parser = clap::value_parser!(u16).range(1..=256))]
        dim: Option<u16>,
    },
    /// The bivariate Berezin transform, optionally with its L^{p/2} norm.
    Berezin {
        #[command(flatten)]
        pair: Pair,
        #[arg(long, allow_hyphen_values = true, value_parser = complex_arg, default_value = "0+0i")]
        z: Complex,
        #[arg(long, allow_hyphen_values = true, value_parser = complex_arg, default_value = "0+0i")]
        w: Complex,
        /// Also report the L^{p/2} norm of the diagonal modulus, closed form and quadrature.
        #[arg(long, value_parser = exponent_arg)]
        p: Option<f64>,
    },
    /// ‖T k_w‖_p (or the kernel L¹ profile) on rays |w| ∈ {0, 1, 2, 4, 8}.
    Profile {
        #[command(flatten)]
        pair: Pair,
        #[arg(long, value_parser = exponent_arg, default_value = "2")]
        p: f64,
        #[arg(long, value_enum, default_value_t = ProfileChoice::Tkw)]
        kind: ProfileChoice,
    },
    /// Runs the invariant suite.
    Verify {
        #[arg(long, value_enum, default_value_t = SuiteChoice::Fast)]
        suite: SuiteChoice,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Deliberately break one routine to check that the suite notices.
        #[arg(long, value_enum)]
        inject_fault: Option<FaultChoice>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProfileChoice {
    Tkw,
    L1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuiteChoice {
    Fast,
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FaultChoice {
    NegateConjugatePhase,
}

fn complex_arg(text: &str) -> Result<Complex, String> {
    literal::parse(text).map_err(|e| e.to_string())
}

fn exponent_arg(text: &str) -> Result<f64, String> {
    let p: f64 = match text.trim() {
        "inf" | "∞" => f64::INFINITY,
        other => other
            .parse()
            .map_err(|_| format!("not an exponent: {text:?}"))?,
    };
    if p > 0.0 {
        Ok(p)
    } else {
        Err(format!("exponent must be positive, got {text:?}"))
    }
}

/// What a run produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn usage(message: String) -> Self {
        Self {
            code: EXIT_USAGE,
            stdout: String::new(),
            stderr: message,
        }
    }
}

enum Failure {
    Usage(String),
    Library(Error),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Library(e)
    }
}

/// Parses `args` (program name first) and executes the command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    Outcome {
                        code: 0,
                        stdout: text,
                        stderr: String::new(),
                    }
                }
                _ => Outcome::usage(text),
            };
        }
    };
    let (artifact, code) = match execute(&cli) {
        Ok(done) => done,
        Err(Failure::Usage(msg)) => return Outcome::usage(format!("error: {msg}\n")),
        Err(Failure::Io(msg)) => {
            return Outcome {
                code: EXIT_FAILURE,
                stdout: String::new(),
                stderr: format!("{}\n", json!({"error": "io", "message": msg})),
            }
        }
        Err(Failure::Library(e)) => {
            let code = if e.is_domain_error() {
                EXIT_DOMAIN
            } else {
                EXIT_FAILURE
            };
            return Outcome {
                code,
                stdout: String::new(),
                stderr: format!("{}\n", error_json(&e)),
            };
        }
    };
    match &cli.out {
        Some(path) => match std::fs::write(path, &artifact) {
            Ok(()) => Outcome {
                code,
                stdout: String::new(),
                stderr: String::new(),
            },
            Err(e) => Outcome {
                code: EXIT_FAILURE,
                stdout: String::new(),
                stderr: format!("{}\n", json!({"error": "io", "message": e.to_string()})),
            },
        },
        None => Outcome {
            code,
            stdout: artifact,
            stderr: String::new(),
        },
    }
}

fn pair(p: &Pair) -> Result<ParameterPair, Failure> {
    if p.s == Complex::new(0.0, 0.0) {
        return Err(Failure::Usage("--s must be nonzero".into()));
    }
    Ok(ParameterPair::new(p.s, p.t)?)
}

fn json_line(v: &Value) -> String {
    format!("{v}\n")
}

fn execute(cli: &Cli) -> Result<(String, i32), Failure> {
    let csv_default = matches!(
        cli.command,
        Command::Spectrum { .. } | Command::Matrix { .. } | Command::Profile { .. }
    );
    let format = cli.format.unwrap_or(if csv_default {
        Format::Csv
    } else {
        Format::Json
    });
    let json_only = |name: &str| {
        if format == Format::Csv {
            Err(Failure::Usage(format!("{name} has no csv output")))
        } else {
            Ok(())
        }
    };
    let artifact = match &cli.command {
        Command::Classify { pair: pp, tol } => {
            json_only("classify")?;
            let class = classify(&pair(pp)?, *tol);
            json_line(&json!({"class": class.regime.as_str(), "discriminant": class.discriminant}))
        }
        Command::Kernel { pair: pp, z, w } => {
            json_only("kernel")?;
            let p = pair(pp)?;
            let value = kernel_eval(&p, *z, *w)?;
            // the bound needs K_w ∈ F²; elsewhere it is reported as null
            let bound = kernel_bound(&p, *z, *w).ok().map(|b| b.bound);
            json_line(&json!({
                "value": complex_pair(value),
                "modulus": value.norm(),
                "bound": bound,
            }))
        }
        Command::Matrix { pair: pp, dim } => {
            let op = TruncatedOperator::build(pair(pp)?, usize::from(*dim))?;
            match format {
                Format::Csv => op.to_csv(),
                Format::Json => {
                    let mut v = op.header_json();
                    // row-major, nonzero entries only, like the csv
                    let n = op.dim();
                    let entries: Vec<Value> = (0..n * n)
                        .map(|k| (k / n, k % n))
                        .map(|(m, col)| (m, col, op.entry(m, col)))
                        .filter(|(_, _, z)| z.re != 0.0 || z.im != 0.0)
                        .map(|(m, col, z)| json!([m, col, z.re, z.im]))
                        .collect();
                    v["entries"] = Value::Array(entries);
                    json_line(&v)
                }
            }
        }
        Command::Spectrum {
            pair: pp,
            dim,
            count,
            p: exps,
        } => {
            let report = SpectralReport::compute(
                &pair(pp)?,
                usize::from(*count),
                dim.map(usize::from),
                exps,
            )?;
            match format {
                Format::Csv => report.to_csv(),
                Format::Json => json_line(&report.to_json()),
            }
        }
        Command::Trace { pair: pp, dim } => {
            json_only("trace")?;
            let p = pair(pp)?;
            let closed = trace_closed(&p)?;
            let dim = match dim {
                Some(d) => usize::from(*d),
                None => auto_dimension(&p)?,
            };
            let numeric = TruncatedOperator::build(p, dim)?.trace_diagonal();
            json_line(&json!({
                "closed": complex_pair(closed),
                "numeric": complex_pair(numeric),
                "dim": dim,
            }))
        }
        Command::Berezin {
            pair: pp,
            z,
            w,
            p: pexp,
        } => {
            json_only("berezin")?;
            let p = pair(pp)?;
            let mut v = json!({
                "z": complex_pair(*z),
                "w": complex_pair(*w),
                "value": complex_pair(berezin(&p, *z, *w)?),
                "bound": berezin_bound(&p, *z, *w)?,
            });
            if let Some(pexp) = pexp {
                let grid = QuadratureGrid::gauss_hermite(AREA_ORDER)?;
                v["lp_norm"] = json!({
                    "p": canonical_fock::report::exponent_key(*pexp),
                    "closed": berezin_modsq_lp_norm(&p, *pexp)?,
                    "quadrature": berezin_modsq_lp_norm_quadrature(&p, *pexp, &grid)?,
                });
            }
            json_line(&v)
        }
        Command::Profile {
            pair: pp,
            p: pnorm,
            kind,
        } => {
            let kind = match kind {
                ProfileChoice::Tkw => ProfileKind::TkwNorm { pnorm: *pnorm },
                ProfileChoice::L1 => ProfileKind::KernelL1,
            };
            let rows = profile(&pair(pp)?, kind)?;
            match format {
                Format::Csv => profile_csv(&rows),
                Format::Json => {
                    json_line(&serde_json::to_value(&rows).map_err(|e| Failure::Io(e.to_string()))?)
                }
            }
        }
        Command::Verify {
            suite,
            seed,
            inject_fault,
        } => {
            json_only("verify")?;
            let report = run_suite(VerifyOptions {
                suite: match suite {
                    SuiteChoice::Fast => Suite::Fast,
                    SuiteChoice::Full => Suite::Full,
                },
                seed: *seed,
                fault: inject_fault.map(|f| match f {
                    FaultChoice::NegateConjugatePhase => Fault::NegateConjugatePhase,
                }),
            });
            let code = if report.all_passed() { 0 } else { EXIT_FAILURE };
            return Ok((json_line(&report.to_json()), code));
        }
    };
    Ok((artifact, 0))
}
