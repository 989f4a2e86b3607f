mod input;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use morita_core::calculus::{leibniz_chain_check, DifferenceScheme, DEFAULT_GUARD};
use morita_core::diffpoly::{compute_r, exact_divide, parse, shift_transform, DifferentialPolynomial, RationalFunction};
use morita_core::falsifier::{search_annihilator, SearchBounds, SearchConfig, Status, Subject, DEFAULT_MIN_CERTIFIED};
use morita_core::gamma::{f_poly, wilson_check};
use morita_core::padic::is_prime;
use morita_core::{Error, GammaEvaluator, PadicNumber, Prime};

use input::{padic_value, rational, rational_list, report_core_error, report_error};

/// p-adic gamma function toolkit.
#[derive(Parser)]
#[command(name = "morita", version)]
struct Cli {
    /// Largest modulus p^K accepted, in bits.
    #[arg(long, global = true, default_value_t = 65536)]
    max_bits: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate Γ_p(x) modulo p^prec.
    Gamma(GammaArgs),
    /// Run a property suite and report per-sample discrepancies.
    #[command(subcommand)]
    Check(CheckCommand),
    /// Differential polynomial operations.
    #[command(subcommand)]
    Dpoly(DpolyCommand),
    /// Search a bounded family for a polynomial differential relation.
    Falsify(FalsifyArgs),
}

#[derive(Args)]
struct GammaArgs {
    #[arg(long)]
    p: u64,
    #[arg(long)]
    prec: i64,
    /// Integer, fraction a/b, or comma-separated digits (lowest first).
    #[arg(long, allow_hyphen_values = true)]
    x: String,
    /// Valuation of a digit list.
    #[arg(long, allow_hyphen_values = true)]
    v: Option<i64>,
    /// Print the integer representative in [0, p^prec) instead.
    #[arg(long)]
    residue: bool,
}

#[derive(Args)]
struct Sampling {
    #[arg(long)]
    p: u64,
    #[arg(long, default_value_t = 30)]
    prec: i64,
    #[arg(long, default_value_t = 100)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum CheckCommand {
    /// Γ_p(x+1) = h_p(x) Γ_p(x) on random x in Z_p.
    Functional(Sampling),
    /// g(x+p) = f(x) g(x) on random x in pZ_p.
    Pstep(Sampling),
    /// Derivatives of the p-step relation on random x in pZ_p.
    Leibniz {
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 2)]
        n: u32,
        #[arg(long, default_value_t = 4)]
        m: u32,
        #[arg(long, default_value_t = 40)]
        prec: i64,
        #[arg(long, default_value_t = DEFAULT_GUARD)]
        guard: i64,
        #[arg(long, default_value_t = 20)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// (p-1)! = -1 mod p for every prime below max-p.
    Wilson {
        #[arg(long, default_value_t = 200)]
        max_p: u64,
    },
}

#[derive(Args)]
struct ExprArgs {
    #[arg(long, allow_hyphen_values = true)]
    expr: String,
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand)]
enum DpolyCommand {
    /// Leading term under the antilexicographic order.
    Lt(ExprArgs),
    /// Substitute X -> X+p and Y_k -> k-th derivative of f(X)*Y0.
    Transform {
        #[command(flatten)]
        e: ExprArgs,
        #[arg(long)]
        p: u64,
    },
    /// Exact quotient expr / expr2 as a rational function of X.
    Divide {
        #[command(flatten)]
        e: ExprArgs,
        #[arg(long, allow_hyphen_values = true)]
        expr2: String,
    },
    /// The rational function R with transform(P) = R * P, when it exists.
    R {
        #[command(flatten)]
        e: ExprArgs,
        #[arg(long)]
        p: u64,
    },
    /// Evaluate at X = x, Y_k = y_k in Q_p.
    Eval {
        #[command(flatten)]
        e: ExprArgs,
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 20)]
        prec: i64,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        /// Comma-separated values of Y0, Y1, ...
        #[arg(long, allow_hyphen_values = true)]
        y: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Control {
    Identity,
    Reciprocal,
}

#[derive(Args)]
struct FalsifyArgs {
    #[arg(long, default_value_t = 5)]
    p: u64,
    #[arg(long, default_value_t = 1)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    d: u32,
    #[arg(long, default_value_t = 2)]
    e: u32,
    #[arg(long, default_value_t = 60)]
    prec: i64,
    #[arg(long, default_value_t = 4)]
    m: u32,
    /// Defaults to twice the number of unknowns.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_GUARD)]
    guard: i64,
    #[arg(long, default_value_t = DEFAULT_MIN_CERTIFIED)]
    min_certified: i64,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Search a function with known relations instead of Γ_p.
    #[arg(long)]
    control: Option<Control>,
}

/// Failure with its exit code.
enum Failure {
    /// Bad flags or configuration.
    Config(String),
    /// Domain or syntax error, or a failed check; already reported.
    Reported,
    Domain(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::ConfigRejected(msg) => Failure::Config(msg),
            Error::NotPrime(_) | Error::InvalidPrecision(_) => Failure::Config(e.to_string()),
            other => Failure::Domain(other),
        }
    }
}

type Outcome = Result<ExitCode, Failure>;

fn prime(p: u64) -> Result<Prime, Failure> {
    Ok(Prime::new(p)?)
}

fn evaluator(p: Prime, prec: i64, max_bits: u64) -> Result<GammaEvaluator, Failure> {
    Ok(GammaEvaluator::with_work_limit(p, prec, max_bits)?)
}

fn run_gamma(a: GammaArgs, max_bits: u64) -> Outcome {
    let p = prime(a.p)?;
    let ev = evaluator(p, a.prec, max_bits)?;
    let x = padic_value(&a.x, a.v, p, ev.input_digits()).map_err(Failure::Config)?;
    let y = ev.gamma(&x)?;
    if a.residue {
        println!("{}", y.residue(a.prec)?);
    } else {
        println!("{y}");
    }
    Ok(ExitCode::SUCCESS)
}

/// `count` seeded points `p^valuation * u` known to `digits` absolute digits.
fn sample_points(p: Prime, digits: i64, valuation: i64, count: usize, seed: u64) -> Vec<PadicNumber> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n = (0..digits).fold(BigUint::from(0u32), |acc, _| acc * p.get() + rng.gen_range(0..p.get()));
            PadicNumber::from_parts(p, valuation, n, digits - valuation)
        })
        .collect()
}

fn run_identity_check(s: Sampling, pstep: bool, max_bits: u64) -> Outcome {
    let p = prime(s.p)?;
    let ev = evaluator(p, s.prec, max_bits)?;
    let name = if pstep { "pstep" } else { "functional" };
    let mut failures = 0;
    for (i, x) in sample_points(p, ev.input_digits(), i64::from(pstep), s.samples, s.seed).iter().enumerate() {
        let c = if pstep { ev.check_pstep(x)? } else { ev.check_functional(x)? };
        let verdict = if c.holds() { "ok" } else { "FAIL" };
        println!("sample {i}: discrepancy {} of {} {verdict}", c.discrepancy, c.precision);
        failures += usize::from(!c.holds());
    }
    println!("{name} p={p} K={}: {} of {} samples pass", s.prec, s.samples - failures, s.samples);
    Ok(if failures == 0 { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

#[allow(clippy::too_many_arguments)]
fn run_leibniz(p: u64, n: u32, m: u32, prec: i64, guard: i64, samples: usize, seed: u64, max_bits: u64) -> Outcome {
    let p = prime(p)?;
    if n < 1 || m < 1 {
        return Err(Failure::Config("--n and --m must be at least 1".into()));
    }
    let ev = evaluator(p, prec, max_bits)?;
    let scheme = DifferenceScheme::new(m, prec).with_guard(guard);
    let f = f_poly(p);
    let mut failures = 0;
    for (i, x) in sample_points(p, prec, 1, samples, seed).iter().enumerate() {
        let report = leibniz_chain_check(&ev, &f, x, n, &scheme).map_err(|e| match e {
            Error::InsufficientPrecision { .. } => Failure::Config(e.to_string()),
            other => other.into(),
        })?;
        let lines: Vec<String> =
            report.lines.iter().map(|l| format!("g^({}) {}/{}", l.order, l.discrepancy, l.threshold)).collect();
        let verdict = if report.passed() { "ok" } else { "FAIL" };
        println!("sample {i}: {} {verdict}", lines.join(", "));
        failures += usize::from(!report.passed());
    }
    println!("leibniz p={p} n={n} m={m} K={prec}: {} of {samples} samples pass", samples - failures);
    Ok(if failures == 0 { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn run_wilson(max_p: u64) -> Outcome {
    let mut failures = 0;
    let mut count = 0;
    for p in (2..max_p).filter(|&n| is_prime(n)) {
        let ok = wilson_check(prime(p)?);
        println!("p={p}: {}", if ok { "ok" } else { "FAIL" });
        count += 1;
        failures += usize::from(!ok);
    }
    println!("wilson: {} of {count} primes pass", count - failures);
    Ok(if failures == 0 { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn parse_expr(label: &str, text: &str) -> Result<DifferentialPolynomial, Failure> {
    parse(text).map_err(|e| {
        report_core_error(&e, Some((label, text)));
        Failure::Reported
    })
}

fn print_poly(p: &DifferentialPolynomial, as_json: bool) {
    if as_json {
        println!("{}", json!({ "text": p.to_string(), "terms": p.term_records() }));
    } else {
        println!("{p}");
    }
}

fn print_rational_function(r: &RationalFunction, as_json: bool) {
    if as_json {
        println!(
            "{}",
            json!({
                "text": r.to_string(),
                "numerator": r.numerator().to_string(),
                "denominator": r.denominator().to_string(),
            })
        );
    } else {
        println!("{r}");
    }
}

fn run_dpoly(cmd: DpolyCommand) -> Outcome {
    match cmd {
        DpolyCommand::Lt(e) => {
            let p = parse_expr("expr", &e.expr)?;
            let (alpha, q) = p.leading_term()?;
            print_poly(&DifferentialPolynomial::monomial(q.clone(), alpha.clone()), e.json);
        }
        DpolyCommand::Transform { e, p } => {
            let prime = prime(p)?;
            let poly = parse_expr("expr", &e.expr)?;
            print_poly(&shift_transform(&poly, prime), e.json);
        }
        DpolyCommand::Divide { e, expr2 } => {
            let q = parse_expr("expr", &e.expr)?;
            let p = parse_expr("expr2", &expr2)?;
            print_rational_function(&exact_divide(&q, &p)?, e.json);
        }
        DpolyCommand::R { e, p } => {
            let prime = prime(p)?;
            let poly = parse_expr("expr", &e.expr)?;
            print_rational_function(&compute_r(&poly, prime)?, e.json);
        }
        DpolyCommand::Eval { e, p, prec, x, y } => {
            let prime = prime(p)?;
            if prec < 1 {
                return Err(Failure::Config(format!("precision must be positive, got {prec}")));
            }
            let poly = parse_expr("expr", &e.expr)?;
            let x = rational(&x).map_err(Failure::Config)?;
            let ys = rational_list(&y).map_err(Failure::Config)?;
            let x = PadicNumber::from_bigrational(&x, prime, prec);
            let ys: Vec<PadicNumber> = ys.iter().map(|q| PadicNumber::from_bigrational(q, prime, prec)).collect();
            let value = poly.evaluate(&x, &ys)?;
            if e.json {
                println!("{}", json!({ "text": value.to_string(), "value": value }));
            } else {
                println!("{value}");
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn run_falsify(a: FalsifyArgs, max_bits: u64) -> Outcome {
    let p = prime(a.p)?;
    let subject = match a.control {
        None => Subject::Gamma,
        Some(Control::Identity) => Subject::Identity,
        Some(Control::Reciprocal) => Subject::Reciprocal,
    };
    let bounds = SearchBounds::new(a.n, a.d, a.e)?;
    if subject == Subject::Gamma && a.prec >= 1 {
        // refuse oversized moduli before any work
        evaluator(p, a.prec, max_bits)?;
    }
    let samples = a.samples.unwrap_or(2 * bounds.column_count());
    let mut config = SearchConfig::new(a.prec, a.m, samples, a.seed);
    config.guard = a.guard;
    config.min_certified = a.min_certified;

    let report = match search_annihilator(p, subject, bounds, config) {
        Ok(r) => r,
        Err(Error::UnconfirmedCandidate(msg)) if !subject.is_control() => {
            report_error(&format!("unconfirmed annihilator candidate for gamma: {msg}"));
            return Ok(ExitCode::from(3));
        }
        Err(e) => return Err(e.into()),
    };
    let text = report.to_json();
    match &a.out {
        Some(path) => {
            std::fs::write(path, format!("{text}\n"))
                .map_err(|e| Failure::Config(format!("cannot write {}: {e}", path.display())))?;
            let found = report.annihilator.as_ref().map(|r| format!(" {}", r.text)).unwrap_or_default();
            println!(
                "{}: rank {}/{}, certified {} digits{found}",
                serde_json::to_value(report.status).expect("status serializes").as_str().unwrap_or_default(),
                report.rank,
                report.columns,
                report.certified_digits
            );
        }
        None => println!("{text}"),
    }
    if report.status == Status::Found && !subject.is_control() {
        report_error("annihilator found for gamma; this contradicts differential transcendence and needs investigation");
        return Ok(ExitCode::from(3));
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let max_bits = cli.max_bits;
    let outcome = match cli.command {
        Command::Gamma(a) => run_gamma(a, max_bits),
        Command::Check(CheckCommand::Functional(s)) => run_identity_check(s, false, max_bits),
        Command::Check(CheckCommand::Pstep(s)) => run_identity_check(s, true, max_bits),
        Command::Check(CheckCommand::Leibniz { p, n, m, prec, guard, samples, seed }) => {
            run_leibniz(p, n, m, prec, guard, samples, seed, max_bits)
        }
        Command::Check(CheckCommand::Wilson { max_p }) => run_wilson(max_p),
        Command::Dpoly(cmd) => run_dpoly(cmd),
        Command::Falsify(a) => run_falsify(a, max_bits),
    };
    match outcome {
        Ok(code) => code,
        Err(Failure::Config(msg)) => {
            report_error(&format!("configuration rejected: {msg}"));
            ExitCode::from(2)
        }
        Err(Failure::Reported) => ExitCode::from(1),
        Err(Failure::Domain(e)) => {
            report_core_error(&e, None);
            ExitCode::from(1)
        }
    }
}
