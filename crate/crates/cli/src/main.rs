use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use magnus_umq::bch;
use magnus_umq::convexity::{check_umd_sampled, check_umq_sampled, LpSpace};
use magnus_umq::freealg::RatPoly;
use magnus_umq::kernels::reduced_kernel;
use magnus_umq::magnus::{self, Variant};
use magnus_umq::par::Exec;
use magnus_umq::rational::{fmt_rational, parse_rational, to_f64};
use magnus_umq::specrad::{power_iteration_hopf, radius_refined, Diagonal, OperatorGrid};
use magnus_umq::umqnorm::{fa_norm_exact, theta_ab, theta_k, ConvexityClass};
use magnus_umq::{round_sig, verify, Error};

const SCHEMA: &str = "magnus-umq/1";

#[derive(Parser)]
#[command(name = "magnus-umq", version, about = "Convergence-radius bounds for Magnus and BCH expansions")]
struct Cli {
    /// Output format; each subcommand has its own default.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Args, Clone)]
struct ClassArgs {
    /// Convexity exponent q (rational, or "plain" for ordinary Banach algebras).
    #[arg(long, default_value = "1")]
    q: String,
    /// Explicit rational cross-term cost in [1/2, 1], overriding q.
    #[arg(long)]
    kappa: Option<String>,
}

impl ClassArgs {
    fn class(&self) -> Result<ConvexityClass, Error> {
        if let Some(k) = &self.kappa {
            return ConvexityClass::with_kappa(parse_rational(k)?);
        }
        match self.q.as_str() {
            "plain" | "inf" => Ok(ConvexityClass::plain()),
            q => ConvexityClass::new(parse_rational(q)?),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Normalized universal norm Θ_k or Θ_{a,b}.
    Theta {
        #[arg(long, conflicts_with_all = ["a", "b"])]
        k: Option<usize>,
        #[arg(long, requires = "b")]
        a: Option<usize>,
        #[arg(long, requires = "a")]
        b: Option<usize>,
        #[arg(long, default_value = "1/2")]
        lambda: String,
        #[command(flatten)]
        class: ClassArgs,
    },
    /// Universal norm of a polynomial given as JSON (file or stdin).
    Norm {
        /// JSON polynomial; "-" or absent reads stdin.
        #[arg(long)]
        input: Option<PathBuf>,
        #[command(flatten)]
        class: ClassArgs,
    },
    /// Reduced kernel K̃_{p−1}: exact data as JSON or samples as CSV.
    Kernel {
        #[arg(long, default_value_t = 5)]
        p: usize,
        #[arg(long, default_value = "1/2")]
        lambda: String,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[command(flatten)]
        class: ClassArgs,
    },
    /// Spectral radius of the two-sided kernel.
    Radius {
        #[arg(long, default_value_t = 5)]
        p: usize,
        #[arg(long, default_value = "1/2")]
        lambda: String,
        #[arg(long, default_value_t = magnus_umq::specrad::DEFAULT_N)]
        n: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Richardson-refine over doubling grids up to n.
        #[arg(long)]
        refine: bool,
        #[command(flatten)]
        class: ClassArgs,
    },
    /// Radius bound by the chosen method.
    Bound {
        #[arg(long, value_enum)]
        method: BoundMethod,
        #[arg(long)]
        lambda: Option<String>,
        #[arg(long, default_value_t = 5)]
        p: usize,
        /// λ grid points on [0, 1/2] for the log method.
        #[arg(long, default_value_t = 101)]
        grid: usize,
        #[arg(long, value_enum, default_value = "cayley")]
        variant: VariantArg,
        #[command(flatten)]
        class: ClassArgs,
    },
    /// λ scan of w and the p-th-root bound as CSV.
    Scan {
        #[arg(long, default_value_t = 5)]
        p: usize,
        #[arg(long, default_value_t = 51)]
        points: usize,
        #[arg(long, default_value_t = 0.0)]
        from: f64,
        #[arg(long, default_value_t = 0.5)]
        to: f64,
        #[command(flatten)]
        class: ClassArgs,
    },
    /// BCH block-series quantities.
    Bch {
        #[arg(long, default_value_t = bch::C2 / 2.0)]
        x1: f64,
        #[arg(long, default_value_t = bch::C2 / 2.0)]
        x2: f64,
        #[arg(long)]
        lambda: Option<f64>,
        /// Only |Υ|_{ℓ¹} (maximized over λ unless --lambda is given).
        #[arg(long)]
        l1: bool,
        /// Improved BCH radius for the class.
        #[arg(long)]
        scan_c2: bool,
        /// λ maximizing |Υ|_{ℓ¹} at (x1, x2).
        #[arg(long)]
        critical_lambda: bool,
        #[arg(long, default_value_t = bch::DEFAULT_ORDER)]
        order: usize,
        #[arg(long, default_value_t = 1000)]
        grid: usize,
        #[command(flatten)]
        class: ClassArgs,
    },
    /// Randomized convexity checks on ℓ_p^n.
    VerifyConvexity {
        #[arg(long, default_value = "2")]
        p: String,
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Golden-constant suite; nonzero exit on any failure.
    Verify {
        /// Run only these criteria (1-12).
        #[arg(long, value_delimiter = ',')]
        only: Vec<usize>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum BoundMethod {
    ClosedForm,
    PthRoot,
    Log,
    Ode,
    CrudeRatio,
    TrivialUpper,
    Sicompar,
    Ricompar,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Cayley,
    Magnus,
}

enum Failure {
    Usage(String),
    Runtime(String),
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidInput(_) | Error::OutOfRange(_) | Error::InvalidUse(_) | Error::ExhaustiveUnavailable { .. } => {
                Failure::Usage(e.to_string())
            }
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

/// Rounds every float to 12 significant digits.
fn normalize(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round_sig(n.as_f64().unwrap_or(f64::NAN));
            serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(normalize).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, normalize(v))).collect()),
        other => other,
    }
}

fn envelope(command: &str, result: impl Serialize) -> Result<String, Failure> {
    let v = serde_json::to_value(result).map_err(|e| Failure::Runtime(e.to_string()))?;
    let doc = json!({ "schema": SCHEMA, "command": command, "result": normalize(v) });
    serde_json::to_string_pretty(&doc)
        .map(|s| s + "\n")
        .map_err(|e| Failure::Runtime(e.to_string()))
}

fn lambda_arg(s: &str) -> Result<magnus_umq::rational::Rational, Failure> {
    Ok(parse_rational(s)?)
}

fn run(cli: &Cli) -> Result<String, Failure> {
    let fmt = cli.format;
    match &cli.command {
        Command::Theta { k, a, b, lambda, class } => {
            let class = class.class()?;
            let l = lambda_arg(lambda)?;
            let v = match (k, a, b) {
                (Some(k), _, _) => theta_k(*k, &l, &class)?,
                (None, Some(a), Some(b)) => theta_ab(*a, *b, &l, &class)?,
                _ => return Err(Failure::Usage("give --k or both --a and --b".into())),
            };
            match fmt.unwrap_or(Format::Text) {
                Format::Text => Ok(match v.as_exact() {
                    Some(x) => format!("{}\n", fmt_rational(x)),
                    None => format!("[{}, {}]\n", fmt_rational(&v.lo), fmt_rational(&v.hi)),
                }),
                Format::Json => envelope("theta", json!({ "lambda": fmt_rational(&l), "class": class.describe(), "value": v })),
                Format::Csv => Err(Failure::Usage("theta has no CSV form".into())),
            }
        }
        Command::Norm { input, class } => {
            let class = class.class()?;
            let mut text = String::new();
            match input {
                Some(p) if p.as_os_str() != "-" => {
                    text = std::fs::read_to_string(p).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?
                }
                _ => {
                    std::io::stdin()
                        .read_to_string(&mut text)
                        .map_err(|e| Failure::Runtime(e.to_string()))?;
                }
            }
            let poly: RatPoly = serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("polynomial JSON: {e}")))?;
            let n = fa_norm_exact(&poly, &class)?;
            match fmt.unwrap_or(Format::Json) {
                Format::Text => Ok(format!("{}\n", n.value)),
                Format::Json => envelope("norm", json!({ "class": class.describe(), "norm": n })),
                Format::Csv => Err(Failure::Usage("norm has no CSV form".into())),
            }
        }
        Command::Kernel { p, lambda, samples, class } => {
            let class = class.class()?;
            if *p == 0 {
                return Err(Failure::Usage("p must be at least 1".into()));
            }
            let k = reduced_kernel(p - 1, &lambda_arg(lambda)?, &class)?;
            match fmt.unwrap_or(Format::Json) {
                Format::Csv => Ok(k.to_csv(*samples)),
                Format::Json => envelope("kernel", k.export()),
                Format::Text => Ok(k.coeffs_exact().map_or_else(
                    || format!("{:?}\n", k.coeffs_hi_f64()),
                    |c| c.iter().map(fmt_rational).collect::<Vec<_>>().join(" ") + "\n",
                )),
            }
        }
        Command::Radius { p, lambda, n, tol, refine, class } => {
            let class = class.class()?;
            if *p == 0 {
                return Err(Failure::Usage("p must be at least 1".into()));
            }
            let k = reduced_kernel(p - 1, &lambda_arg(lambda)?, &class)?;
            let (result, extra) = if *refine {
                let r = radius_refined(|m| OperatorGrid::from_reduced(&k, m, Diagonal::Average), 64.min(*n), *n, *tol)?;
                let extra = json!({ "extrapolated": r.radius, "levels": r.levels });
                (r.finest, Some(extra))
            } else {
                let g = OperatorGrid::from_reduced(&k, *n, Diagonal::Average)?;
                (power_iteration_hopf(&g, *tol, 100 * n), None)
            };
            match fmt.unwrap_or(Format::Json) {
                Format::Csv => Ok(result.eigvec_csv()),
                Format::Text => Ok(format!("{}\n", magnus_umq::fmt_sig(extra.as_ref().map_or(result.radius, |e| e["extrapolated"].as_f64().unwrap_or(result.radius))))),
                Format::Json => envelope("radius", json!({ "radius": result, "refined": extra })),
            }
        }
        Command::Bound { method, lambda, p, grid, variant, class } => {
            let class = class.class()?;
            let lam = |default: Option<f64>| -> Result<f64, Failure> {
                match lambda {
                    Some(s) => Ok(to_f64(&lambda_arg(s)?)),
                    None => default.ok_or_else(|| Failure::Usage("--lambda is required for this method".into())),
                }
            };
            let report = match method {
                BoundMethod::ClosedForm => magnus::closed_form(lam(None)?)?,
                BoundMethod::PthRoot => magnus::c_bound_pth_root(lam(Some(0.5))?, *p, &class)?,
                BoundMethod::Log => magnus::c_log_bound(*p, &class, *grid)?,
                BoundMethod::Ode => magnus::ode_report(lam(Some(0.5))?, &class)?,
                BoundMethod::CrudeRatio => magnus::crude_ratio_bound(lam(Some(0.5))?, *p, &class)?,
                BoundMethod::Sicompar => magnus::sicompar_bound(lam(Some(0.5))?, *p, &class)?,
                BoundMethod::Ricompar => magnus::ricompar_bound(lam(Some(0.5))?, *p, &class)?,
                BoundMethod::TrivialUpper => match variant {
                    VariantArg::Cayley => magnus::upper_trivial(&class, Variant::Cayley, None)?,
                    VariantArg::Magnus => magnus::upper_trivial(&class, Variant::Magnus, Some(lam(None)?))?,
                },
            };
            match fmt.unwrap_or(Format::Json) {
                Format::Text => Ok(format!("{}\n", magnus_umq::fmt_sig(report.value()))),
                Format::Json => envelope("bound", report),
                Format::Csv => Err(Failure::Usage("bound has no CSV form".into())),
            }
        }
        Command::Scan { p, points, from, to, class } => {
            let class = class.class()?;
            if *points < 2 || !(0.0..=1.0).contains(from) || !(0.0..=1.0).contains(to) || from >= to {
                return Err(Failure::Usage("need points >= 2 and 0 <= from < to <= 1".into()));
            }
            let lambdas: Vec<f64> = (0..*points)
                .map(|i| from + (to - from) * i as f64 / (*points - 1) as f64)
                .collect();
            let rows = magnus::scan_lambda(*p, &class, &lambdas, Exec::default())?;
            match fmt.unwrap_or(Format::Csv) {
                Format::Csv | Format::Text => {
                    let mut s = String::from("lambda,w,c_bound\n");
                    for r in rows {
                        s.push_str(&format!(
                            "{},{},{}\n",
                            magnus_umq::fmt_sig(r.lambda),
                            magnus_umq::fmt_sig(r.w),
                            magnus_umq::fmt_sig(r.c)
                        ));
                    }
                    Ok(s)
                }
                Format::Json => envelope("scan", rows),
            }
        }
        Command::Bch { x1, x2, lambda, l1, scan_c2, critical_lambda, order, grid, class } => {
            let class = class.class()?;
            if *scan_c2 {
                let r = bch::c2_improved(&class, *grid, *order)?;
                return match fmt.unwrap_or(Format::Json) {
                    Format::Text => Ok(format!("{}\n", magnus_umq::fmt_sig(r.value))),
                    _ => envelope("bch", r),
                };
            }
            let crit = bch::critical_lambda(*x1, *x2, *order)?;
            if *critical_lambda {
                return match fmt.unwrap_or(Format::Json) {
                    Format::Text => Ok(format!("{}\n", magnus_umq::fmt_sig(crit.lambda))),
                    _ => envelope("bch", crit),
                };
            }
            let l = lambda.unwrap_or(crit.lambda);
            let u = bch::upsilon_l1(l, *x1, *x2, *order)?;
            if *l1 {
                return match fmt.unwrap_or(Format::Text) {
                    Format::Text => Ok(format!("{}\n", magnus_umq::fmt_sig(u.value))),
                    _ => envelope("bch", u),
                };
            }
            let g = bch::bch_gain_upper(l, &class, *x1, *x2, *order)?;
            let out = json!({
                "l1": u.value,
                "gain": g.gain,
                "bound": g.bound,
                "criticalLambda": crit.lambda,
                "lambda": l,
                "aligned": g.aligned,
                "inconclusive": g.inconclusive || u.inconclusive,
            });
            envelope("bch", out)
        }
        Command::VerifyConvexity { p, n, trials, seed } => {
            let p = to_f64(&parse_rational(p)?);
            let space = LpSpace::new(*n, p)?;
            let a = check_umd_sampled(&space, *trials, *seed)?;
            let b = check_umq_sampled(&space, *trials, *seed)?;
            let passed = a.passed() && b.passed();
            let text = match fmt.unwrap_or(Format::Json) {
                Format::Json => envelope("verify-convexity", json!({ "passed": passed, "umd": a, "umq": b }))?,
                _ => format!(
                    "umd max ratio {} ({} violations)\numq max ratio {} ({} violations)\n",
                    magnus_umq::fmt_sig(a.max_ratio),
                    a.violations.len(),
                    magnus_umq::fmt_sig(b.max_ratio),
                    b.violations.len()
                ),
            };
            if passed {
                Ok(text)
            } else {
                Err(Failure::Check(text))
            }
        }
        Command::Verify { only } => {
            if let Some(bad) = only.iter().find(|i| !(1..=12).contains(*i)) {
                return Err(Failure::Usage(format!("no criterion {bad}")));
            }
            let results: Vec<_> = verify::criteria()
                .into_iter()
                .filter(|(id, _)| only.is_empty() || only.contains(id))
                .map(|(_, f)| f())
                .collect();
            let passed = results.iter().all(|r| r.passed);
            let text = match fmt.unwrap_or(Format::Text) {
                Format::Json => envelope("verify", json!({ "passed": passed, "criteria": results }))?,
                _ => results.iter().map(|r| format!("{r}\n")).collect(),
            };
            if passed {
                Ok(text)
            } else {
                Err(Failure::Check(text))
            }
        }
    }
}

fn emit(cli: &Cli, text: &str) -> Result<(), String> {
    match &cli.out {
        Some(p) => std::fs::write(p, text).map_err(|e| format!("{}: {e}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(text) => match emit(&cli, &text) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(1)
            }
        },
        Err(Failure::Check(text)) => {
            let _ = emit(&cli, &text);
            eprintln!("verification failed");
            ExitCode::from(1)
        }
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
