//! The `padelic` command line: local number theory, Gaussian integrals,
//! classical actions, v-adic and adelic kernels, and the verification suite.

pub mod config;
pub mod verify;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_bigint::BigInt;
use num_traits::Zero;
use padelic::action::Boundary;
use padelic::adelic::{self, AdelicBoundary, DEFAULT_TAIL_SAMPLES};
use padelic::integrals::{
    ball_gaussian_1d, brute_force_ball_integral, gaussian_nd, stabilization_radius, QuadraticIntegrand,
};
use padelic::kernel::Propagator;
use padelic::lagrangian::QuadraticLagrangian;
use padelic::linalg::Matrix;
use padelic::number_theory::{chi, hilbert, lambda, legendre};
use padelic::rational::{format_rational, parse_rational, parse_rational_list};
use padelic::residue::{local_constancy_resolution, BallSpec};
use padelic::{Amplitude, Error, Prime, Rational, Valuation};
use serde_json::{json, Map, Value};

use config::{Config, OutputFormat};

#[derive(Parser, Debug)]
#[command(name = "padelic", version, about = "Exact p-adic and adelic propagators for quadratic Lagrangians")]
pub struct Cli {
    /// Config document (JSON).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<OutputFormat>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// λ_v(x).
    Lambda {
        #[arg(long)]
        v: Valuation,
        #[arg(long, value_parser = rational, allow_hyphen_values = true)]
        x: Rational,
    },
    /// The Hilbert symbol (a, b)_v.
    Hilbert {
        #[arg(long)]
        v: Valuation,
        #[arg(long, value_parser = rational, allow_hyphen_values = true)]
        a: Rational,
        #[arg(long, value_parser = rational, allow_hyphen_values = true)]
        b: Rational,
    },
    /// The Legendre symbol (a|p).
    Legendre {
        #[arg(long, allow_hyphen_values = true)]
        a: BigInt,
        #[arg(long)]
        p: Prime,
    },
    /// χ_v(x).
    Chi {
        #[arg(long)]
        v: Valuation,
        #[arg(long, value_parser = rational, allow_hyphen_values = true)]
        x: Rational,
    },
    /// ∫ χ_v(xᵀαx + βᵀx) dx in closed form, or by brute force with `--oracle`.
    Gauss {
        #[arg(long, alias = "v")]
        valuation: Valuation,
        /// Rows separated by `;`, entries by `,`.
        #[arg(long, value_parser = matrix, allow_hyphen_values = true)]
        alpha: Matrix<Rational>,
        #[arg(long, value_parser = rational, value_delimiter = ',', allow_hyphen_values = true)]
        beta: Vec<Rational>,
        /// Ball radius: integrate over |x|_p ≤ p^N.
        #[arg(long = "n", allow_hyphen_values = true)]
        radius: Option<i64>,
        /// Sampling resolution of the oracle.
        #[arg(long = "m")]
        resolution: Option<i64>,
        #[arg(long)]
        oracle: bool,
    },
    /// The pieces Ā, B̄, C̄, D̄, Ē, ε̄ of the classical action.
    Action {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long, value_parser = rational, allow_hyphen_values = true)]
        t1: Rational,
        #[arg(long, value_parser = rational, allow_hyphen_values = true)]
        t2: Rational,
        #[arg(long, default_value = "inf")]
        valuation: Valuation,
    },
    /// K_v(x″,t″; x′,t′).
    Kernel {
        #[arg(long)]
        valuation: Valuation,
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        boundary: BoundaryArgs,
    },
    /// Adelic product formulas.
    AdelicProduct {
        #[command(subcommand)]
        which: ProductKind,
    },
    /// Kernels at ∞ and the listed primes, their product, and tail checks.
    AdelicKernel {
        #[arg(long, value_delimiter = ',')]
        primes: Vec<Prime>,
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        boundary: BoundaryArgs,
        #[arg(long, default_value_t = DEFAULT_TAIL_SAMPLES)]
        tail: usize,
    },
    /// ∫_{Z_p} K_p dx′ against the vacuum Ω(|x″|_p) (n = 1).
    Vacuum {
        #[arg(long)]
        p: Prime,
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long, value_parser = rational, allow_hyphen_values = true)]
        t1: Rational,
        #[arg(long, value_parser = rational, allow_hyphen_values = true)]
        t2: Rational,
    },
    /// Run every verification suite in a fixed order.
    Verify {
        /// Run only suites whose name contains this string.
        #[arg(long)]
        only: Option<String>,
    },
}

#[derive(Subcommand, Debug)]
pub enum ProductKind {
    Norm {
        #[arg(long, value_parser = rational, allow_hyphen_values = true)]
        x: Rational,
    },
    Lambda {
        #[arg(long, value_parser = rational, allow_hyphen_values = true)]
        x: Rational,
    },
    Hilbert {
        #[arg(long, value_parser = rational, allow_hyphen_values = true)]
        x: Rational,
        #[arg(long, value_parser = rational, allow_hyphen_values = true)]
        y: Rational,
    },
    Chi {
        #[arg(long, value_parser = rational, allow_hyphen_values = true)]
        x: Rational,
    },
}

#[derive(Args, Debug)]
pub struct SystemArgs {
    /// Lagrangian JSON file; the 1-d free particle when omitted.
    #[arg(long)]
    pub lagrangian: Option<PathBuf>,
    #[arg(long, value_parser = rational)]
    pub h: Option<Rational>,
    #[arg(long)]
    pub order: Option<usize>,
}

#[derive(Args, Debug)]
pub struct BoundaryArgs {
    #[arg(long, value_parser = rational, allow_hyphen_values = true)]
    pub t1: Rational,
    #[arg(long, value_parser = rational, allow_hyphen_values = true)]
    pub t2: Rational,
    #[arg(long, value_parser = rational, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub x1: Vec<Rational>,
    #[arg(long, value_parser = rational, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub x2: Vec<Rational>,
}

fn rational(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

fn rational_list(s: &str) -> Result<Vec<Rational>, String> {
    parse_rational_list(s).map_err(|e| e.to_string())
}

fn matrix(s: &str) -> Result<Matrix<Rational>, String> {
    let rows = s.split(';').map(rational_list).collect::<Result<Vec<_>, _>>()?;
    Matrix::from_rows(rows).map_err(|e| e.to_string())
}

/// What went wrong, and which exit status it maps to.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Compute(Error),
    File { path: PathBuf, message: String },
    Verify(Value),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 2,
            _ => 1,
        }
    }

    fn document(&self) -> Value {
        match self {
            Failure::Usage(m) => json!({"error": {"precondition": "usage", "message": m}}),
            Failure::Compute(e) => {
                let mut body = Map::new();
                body.insert("precondition".into(), json!(e.precondition()));
                if let Some(v) = e.valuation() {
                    body.insert("valuation".into(), json!(v.to_string()));
                }
                body.insert("message".into(), json!(e.to_string()));
                json!({ "error": body })
            }
            Failure::File { path, message } => json!({"error": {
                "precondition": "lagrangian_file",
                "path": path.display().to_string(),
                "message": message,
            }}),
            Failure::Verify(report) => report.clone(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Compute(e)
    }
}

/// Exit status with the text for stdout and stderr.
#[derive(Debug, Default)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            return if code == 0 {
                Outcome { code, stdout: text, ..Default::default() }
            } else {
                Outcome { code, stderr: text, ..Default::default() }
            };
        }
    };
    let config = match Config::load(cli.config.as_deref()) {
        Ok(c) => c,
        Err(m) => return failure(&Failure::Usage(m), OutputFormat::Json),
    };
    let format = cli.format.unwrap_or(config.output_format);
    match execute(&cli.command, &config) {
        Ok(doc) => Outcome {
            code: 0,
            stdout: render(&doc, format),
            stderr: String::new(),
        },
        Err(f @ Failure::Verify(_)) => Outcome {
            code: 1,
            stdout: render(&f.document(), format),
            stderr: String::new(),
        },
        Err(f) => failure(&f, format),
    }
}

fn failure(f: &Failure, format: OutputFormat) -> Outcome {
    Outcome {
        code: f.exit_code(),
        stdout: String::new(),
        stderr: render(&f.document(), format),
    }
}

fn render(doc: &Value, format: OutputFormat) -> String {
    match format {
        OutputFormat::Json => format!("{doc}\n"),
        OutputFormat::Text => {
            let mut out = String::new();
            text_lines(doc, "", &mut out);
            out
        }
    }
}

fn text_lines(doc: &Value, prefix: &str, out: &mut String) {
    match doc {
        Value::Object(m) => {
            for (k, v) in m {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                text_lines(v, &key, out);
            }
        }
        Value::String(s) => out.push_str(&format!("{prefix} = {s}\n")),
        other => out.push_str(&format!("{prefix} = {other}\n")),
    }
}

fn rat(x: &Rational) -> Value {
    Value::String(format_rational(x))
}

fn rats(xs: &[Rational]) -> Value {
    Value::Array(xs.iter().map(rat).collect())
}

fn mat(m: &Matrix<Rational>) -> Value {
    Value::Array((0..m.rows()).map(|i| rats(m.row(i))).collect())
}

fn amp(a: &Amplitude) -> Value {
    json!({"magSq": format_rational(a.mag_sq()), "phase": a.phase().to_string()})
}

fn load_lagrangian(path: Option<&Path>) -> Result<QuadraticLagrangian, Failure> {
    let Some(path) = path else {
        return Ok(QuadraticLagrangian::free_particle(1));
    };
    let text = std::fs::read_to_string(path).map_err(|e| Failure::File {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    Ok(QuadraticLagrangian::from_json(&text)?)
}

fn propagator(args: &SystemArgs, config: &Config) -> Result<Propagator, Failure> {
    let l = load_lagrangian(args.lagrangian.as_deref())?;
    let h = args.h.clone().unwrap_or_else(|| config.h.clone());
    let order = args.order.unwrap_or(config.truncation_order);
    Ok(Propagator::from_lagrangian(l, order, h)?)
}

fn boundary(b: &BoundaryArgs) -> Result<Boundary, Failure> {
    Ok(Boundary::new(b.t1.clone(), b.x1.clone(), b.t2.clone(), b.x2.clone())?)
}

pub fn execute(command: &Command, config: &Config) -> Result<Value, Failure> {
    match command {
        Command::Lambda { v, x } => Ok(json!({"phase": lambda(v, x).to_string()})),
        Command::Hilbert { v, a, b } => Ok(json!({"sign": hilbert(v, a, b)?.as_i8()})),
        Command::Legendre { a, p } => Ok(json!({"symbol": legendre(a, p)?})),
        Command::Chi { v, x } => Ok(json!({"phase": chi(v, x).to_string()})),
        Command::Gauss {
            valuation,
            alpha,
            beta,
            radius,
            resolution,
            oracle,
        } => gauss(valuation, alpha, beta, *radius, *resolution, *oracle, config),
        Command::Action { system, t1, t2, valuation } => {
            let prop = propagator(system, config)?;
            let a = prop.action(valuation, t1, t2)?;
            Ok(json!({
                "aBar": mat(&a.a_bar),
                "bBar": mat(&a.b_bar),
                "cBar": mat(&a.c_bar),
                "dBar": rats(&a.d_bar),
                "eBar": rats(&a.e_bar),
                "epsBar": rat(&a.eps_bar),
                "delta": rat(&a.delta),
            }))
        }
        Command::Kernel { valuation, system, boundary: b } => {
            let prop = propagator(system, config)?;
            let k = prop.kernel(valuation, &boundary(b)?)?;
            Ok(json!({
                "magSq": format_rational(k.amplitude.mag_sq()),
                "phase": k.amplitude.phase().to_string(),
                "valuation": k.valuation.to_string(),
                "detBbar": rat(&k.det_b_bar),
                "action": rat(&k.action_value),
            }))
        }
        Command::AdelicProduct { which } => Ok(match which {
            ProductKind::Norm { x } => json!({"product": rat(&adelic::norm_product(x)?)}),
            ProductKind::Lambda { x } => json!({"product": adelic::lambda_product(x)?.to_string()}),
            ProductKind::Hilbert { x, y } => json!({"product": adelic::hilbert_product(x, y)?.as_i8()}),
            ProductKind::Chi { x } => json!({"product": adelic::chi_product(x).to_string()}),
        }),
        Command::AdelicKernel {
            primes,
            system,
            boundary: b,
            tail,
        } => {
            let prop = propagator(system, config)?;
            let ab = AdelicBoundary::principal(&boundary(b)?);
            let k = adelic::adelic_kernel(&prop, &ab, primes, *tail, config.oracle_budget)?;
            let per: Map<String, Value> = k.per_valuation.iter().map(|(v, a)| (v.to_string(), amp(a))).collect();
            let tail: Vec<Value> = k
                .tail_certificate
                .iter()
                .map(|s| json!({"prime": s.prime.to_string(), "vacuum": s.vacuum}))
                .collect();
            Ok(json!({
                "perValuation": per,
                "total": amp(&k.total),
                "tailCertificate": tail,
                "tail": "primes outside the list are certified only by the sampled vacuum checks",
            }))
        }
        Command::Vacuum { p, system, t1, t2 } => {
            let prop = propagator(system, config)?;
            let r = adelic::vacuum_check(&prop, p, t1, t2, config.oracle_budget)?;
            let rows: Vec<Value> = r
                .rows
                .iter()
                .map(|row| {
                    json!({
                        "x2": rat(&row.x2),
                        "integral": amp(&row.exact),
                        "oracle": {"re": row.brute.re, "im": row.brute.im},
                        "expected": row.expected,
                    })
                })
                .collect();
            Ok(json!({"holds": r.holds, "rows": rows}))
        }
        Command::Verify { only } => {
            let report = verify::run_suites(config, only.as_deref());
            let doc = serde_json::to_value(&report).expect("report serializes");
            if report.passed {
                Ok(doc)
            } else {
                Err(Failure::Verify(doc))
            }
        }
    }
}

fn gauss(
    v: &Valuation,
    alpha: &Matrix<Rational>,
    beta: &[Rational],
    radius: Option<i64>,
    resolution: Option<i64>,
    oracle: bool,
    config: &Config,
) -> Result<Value, Failure> {
    let beta = if beta.is_empty() { vec![Rational::zero(); alpha.rows()] } else { beta.to_vec() };
    let q = QuadraticIntegrand::new(alpha.clone(), beta.clone())?;
    let p = match v {
        Valuation::Prime(p) => Some(p),
        Valuation::Infinity => None,
    };
    if !oracle {
        return match (p, radius) {
            (Some(p), Some(n)) if q.dim() == 1 => Ok(amp(&ball_gaussian_1d(p, &alpha[(0, 0)], &beta[0], n))),
            (_, Some(_)) => Err(Failure::Usage("--n without --oracle needs a prime valuation and n = 1".into())),
            _ => Ok(amp(&gaussian_nd(v, &q)?)),
        };
    }
    let p = p.ok_or_else(|| Failure::Usage("--oracle needs a prime valuation".into()))?;
    let n = match radius {
        Some(n) => n,
        None if q.dim() == 1 => stabilization_radius(p, &alpha[(0, 0)], &beta[0])?,
        None => return Err(Failure::Usage("--oracle in more than one dimension needs --n".into())),
    };
    let m = match resolution {
        Some(m) => m,
        None => local_constancy_resolution(p, &q.phase(), &vec![n; q.dim()])
            .into_iter()
            .max()
            .unwrap_or(1)
            .max(1)
            .max(-n),
    };
    let spec = BallSpec::new(n, m)?;
    let z = brute_force_ball_integral(p, &q, spec, config.oracle_budget)?;
    Ok(json!({"re": z.re, "im": z.im, "n": n, "m": m}))
}
