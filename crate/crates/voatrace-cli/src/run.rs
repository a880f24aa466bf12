//! Command-line entry points: argument definitions and subcommand drivers.

use clap::{Args, Parser, Subcommand, ValueEnum};

use voatrace_core::fock::{bracket_to_round, brute_force_z};
use voatrace_core::lattice::{
    brute_force_lattice_z, lattice_trace, theta_harmonic, theta_weighted,
};
use voatrace_core::modforms::{eisenstein, qm_from_series};
use voatrace_core::scalar::{parse_rational, GaussianRational, Rational};
use voatrace_core::zhu::reduce_boson_trace;
use voatrace_core::Error as CoreError;

use crate::expr::{parse_state_expr, ExprMode};
use crate::output::{Format, SeriesOutput, TraceOutput};
use crate::spec_io::{load_harmonic_arg, load_lattice_arg};
use crate::suites::run_suite;

/// Exact trace functions of free-boson and lattice vertex operator algebras.
#[derive(Debug, Parser)]
#[command(name = "voatrace", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute the graded trace of a bracket-monomial state.
    Trace(TraceArgs),
    /// Compute plain, weighted, or harmonic theta series of a lattice coset.
    Theta(ThetaArgs),
    /// Print an Eisenstein series in the trace normalization.
    Eisenstein(EisensteinArgs),
    /// Run a verification suite against the built-in presets.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct TraceArgs {
    /// Trace over the rank-d free boson algebra.
    #[arg(long, conflicts_with = "lattice")]
    pub boson: bool,
    /// Rank of the free boson algebra.
    #[arg(short = 'd', long, requires = "boson")]
    pub rank: Option<u32>,
    /// Lattice description: preset name, file path, or inline JSON.
    #[arg(long)]
    pub lattice: Option<String>,
    /// Coset index into the lattice's coset list (0 = the lattice itself).
    #[arg(long, default_value_t = 0)]
    pub coset: usize,
    /// State expression in bracket modes, e.g. "h1[-2]^2 vac".
    #[arg(long)]
    pub state: String,
    /// Truncation order T (integer or p/q): the series is exact below T.
    #[arg(long)]
    pub order: String,
    #[arg(long, value_enum, default_value_t = CliFormat::Text)]
    pub format: CliFormat,
    /// Use the brute-force trace instead of the symbolic engine.
    #[arg(long)]
    pub brute: bool,
}

#[derive(Debug, Args)]
pub struct ThetaArgs {
    /// Lattice description: preset name, file path, or inline JSON.
    #[arg(long)]
    pub lattice: String,
    /// Coset index into the lattice's coset list.
    #[arg(long, default_value_t = 0)]
    pub coset: usize,
    /// Harmonic polynomial description (inline JSON or file path).
    #[arg(long, conflicts_with_all = ["weight_vector", "k"])]
    pub harmonic: Option<String>,
    /// Comma-separated frame coordinates of the weighting vector.
    #[arg(long, requires = "k")]
    pub weight_vector: Option<String>,
    /// Power of the pairing in the weighted theta.
    #[arg(long, requires = "weight_vector")]
    pub k: Option<u32>,
    /// Truncation order T (integer or p/q).
    #[arg(long)]
    pub order: String,
    #[arg(long, value_enum, default_value_t = CliFormat::Text)]
    pub format: CliFormat,
}

#[derive(Debug, Args)]
pub struct EisensteinArgs {
    /// Even weight 2k >= 2.
    #[arg(long)]
    pub weight: i64,
    /// Truncation order T (integer or p/q).
    #[arg(long)]
    pub order: String,
    #[arg(long, value_enum, default_value_t = CliFormat::Text)]
    pub format: CliFormat,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Which suite to run.
    #[arg(long, value_enum)]
    pub suite: SuiteName,
    /// Largest bracket weight for the boson and lattice suites.
    #[arg(long)]
    pub max_weight: Option<u64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum CliFormat {
    Text,
    Json,
}

impl From<CliFormat> for Format {
    fn from(f: CliFormat) -> Format {
        match f {
            CliFormat::Text => Format::Text,
            CliFormat::Json => Format::Json,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SuiteName {
    Boson,
    Lattice,
    Lemmas,
    #[value(name = "e2-transform")]
    E2Transform,
    Waldspurger,
}

impl SuiteName {
    fn as_str(&self) -> &'static str {
        match self {
            SuiteName::Boson => "boson",
            SuiteName::Lattice => "lattice",
            SuiteName::Lemmas => "lemmas",
            SuiteName::E2Transform => "e2-transform",
            SuiteName::Waldspurger => "waldspurger",
        }
    }
}

/// Exit status conventions: 0 success / all-pass, 1 verification failure,
/// 2 usage or input error.
pub fn main_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // clap prints help/version on stdout with status 0
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            2
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32, String> {
    match cli.command {
        Command::Trace(args) => cmd_trace(args),
        Command::Theta(args) => cmd_theta(args),
        Command::Eisenstein(args) => cmd_eisenstein(args),
        Command::Verify(args) => cmd_verify(args),
    }
}

fn parse_order(text: &str) -> Result<Rational, String> {
    parse_rational(text).map_err(|e| format!("bad --order value: {e}"))
}

fn cmd_trace(args: TraceArgs) -> Result<i32, String> {
    let t = parse_order(&args.order)?;
    let format: Format = args.format.into();
    if args.boson {
        let rank = args.rank.ok_or("--boson requires -d <rank>")?;
        if rank == 0 {
            return Err("rank must be at least 1".into());
        }
        let expr =
            parse_state_expr(&args.state, rank, ExprMode::Bracket).map_err(|e| e.to_string())?;
        let monomial = expr.bracket().expect("bracket mode");
        let (series, f) = if args.brute {
            let z = brute_force_z(&bracket_to_round(monomial), &t).map_err(|e| e.to_string())?;
            (z, None)
        } else {
            let result = reduce_boson_trace(monomial);
            (result.series(&t), Some(result.f.to_wire()))
        };
        let out = TraceOutput {
            kind: "trace",
            engine: if args.brute {
                "brute-force"
            } else {
                "symbolic"
            },
            rank,
            lattice: None,
            coset: None,
            state: expr.render(),
            f,
            eta_exponent: -(rank as i64),
            note: None,
            series: series.to_wire(),
        };
        print!("{}", out.render(format));
        return Ok(0);
    }
    let Some(lattice_arg) = args.lattice else {
        return Err("trace needs either --boson or --lattice".into());
    };
    let lattice = load_lattice_arg(&lattice_arg).map_err(|e| e.to_string())?;
    let rank = lattice.rank() as u32;
    let coset = lattice
        .coset(args.coset)
        .map_err(|e| e.to_string())?
        .clone();
    let expr = parse_state_expr(&args.state, rank, ExprMode::Bracket).map_err(|e| e.to_string())?;
    let monomial = expr.bracket().expect("bracket mode");
    if args.brute && rank >= 8 && t > Rational::from_integer(40.into()) {
        return Err(format!(
            "brute-force traces over a rank-{rank} lattice are refused for order > 40: \
             the vector count grows combinatorially; use the symbolic engine instead"
        ));
    }
    let series = if args.brute {
        brute_force_lattice_z(&lattice, &coset, &bracket_to_round(monomial), &t)
            .map_err(|e| e.to_string())?
    } else {
        lattice_trace(&lattice, &coset, monomial, None, &t).map_err(|e| e.to_string())?
    };
    // modular decomposition of eta^d Z at level 1
    let mut note = None;
    let mut f = None;
    if args.brute {
        note = Some("decomposition skipped for the brute-force engine".to_string());
    } else if lattice.level() == &num_bigint::BigInt::from(1) {
        let d = lattice.rank() as i64;
        let window = &t + Rational::new(d.into(), 24.into());
        let numerator = series
            .mul(&voatrace_core::modforms::eta_power(d, &window))
            .truncated(&window);
        match qm_from_series(&numerator, monomial.weight() as u32 + (d as u32) / 2) {
            Ok(poly) => f = Some(poly.to_wire()),
            Err(CoreError::InsufficientPrecision { need, have }) => {
                note = Some(format!(
                    "decomposition needs {need} exact coefficients, have {have}: increase --order"
                ));
            }
            Err(e) => return Err(format!("modular decomposition failed: {e}")),
        }
    } else {
        note = Some(format!(
            "modular decomposition unavailable at level {}",
            lattice.level()
        ));
    }
    let out = TraceOutput {
        kind: "trace",
        engine: if args.brute {
            "brute-force"
        } else {
            "symbolic"
        },
        rank,
        lattice: Some(lattice.name().to_string()),
        coset: Some(args.coset),
        state: expr.render(),
        f,
        eta_exponent: -(rank as i64),
        note,
        series: series.to_wire(),
    };
    print!("{}", out.render(format));
    Ok(0)
}

fn cmd_theta(args: ThetaArgs) -> Result<i32, String> {
    let t = parse_order(&args.order)?;
    let format: Format = args.format.into();
    let lattice = load_lattice_arg(&args.lattice).map_err(|e| e.to_string())?;
    let coset = lattice
        .coset(args.coset)
        .map_err(|e| e.to_string())?
        .clone();
    let (series, weight, harmonic_degree) = if let Some(h) = &args.harmonic {
        let p = load_harmonic_arg(h, lattice.rank()).map_err(|e| e.to_string())?;
        if !coset.is_zero() {
            return Err("harmonic thetas are computed over the full lattice (coset 0)".into());
        }
        let s = theta_harmonic(&lattice, &p, &t).map_err(|e| e.to_string())?;
        (s, None, Some(p.degree()))
    } else if let Some(wv) = &args.weight_vector {
        let k = args.k.expect("clap enforces --k");
        let a: Vec<GaussianRational> = wv
            .split(',')
            .map(|s| GaussianRational::parse(s.trim()).map_err(|e| e.to_string()))
            .collect::<Result<Vec<_>, _>>()?;
        if a.len() != lattice.rank() {
            return Err(format!(
                "weight vector has {} coordinates, lattice rank is {}",
                a.len(),
                lattice.rank()
            ));
        }
        let s = theta_weighted(&lattice, &coset, &a, k, &t).map_err(|e| e.to_string())?;
        (s, Some(k as i64), None)
    } else {
        let a = vec![GaussianRational::zero(); lattice.rank()];
        let s = theta_weighted(&lattice, &coset, &a, 0, &t).map_err(|e| e.to_string())?;
        (s, None, None)
    };
    let out = SeriesOutput {
        kind: "theta",
        lattice: Some(lattice.name().to_string()),
        coset: Some(args.coset),
        weight,
        harmonic_degree,
        series: series.to_wire(),
    };
    print!("{}", out.render(format));
    Ok(0)
}

fn cmd_eisenstein(args: EisensteinArgs) -> Result<i32, String> {
    let t = parse_order(&args.order)?;
    let format: Format = args.format.into();
    let series = eisenstein(args.weight, &t).map_err(|e| e.to_string())?;
    let out = SeriesOutput {
        kind: "eisenstein",
        lattice: None,
        coset: None,
        weight: Some(args.weight),
        harmonic_degree: None,
        series: series.to_wire(),
    };
    print!("{}", out.render(format));
    Ok(0)
}

fn cmd_verify(args: VerifyArgs) -> Result<i32, String> {
    let name = args.suite.as_str();
    let results = run_suite(name, args.max_weight).ok_or("unknown suite")?;
    let mut failures = 0usize;
    for case in &results {
        if case.pass {
            println!("PASS {}", case.name);
        } else {
            failures += 1;
            println!("FAIL {}: {}", case.name, case.detail);
        }
    }
    println!(
        "suite {name}: {} passed, {failures} failed, {} total",
        results.len() - failures,
        results.len()
    );
    Ok(if failures == 0 { 0 } else { 1 })
}
