mod bench;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ellipt::applications::{example_pair, jsr_invariant_polytope, lyapunov_single, JsrOptions, MatrixFamily};
use ellipt::cutting::{ellipse_norm_with, pe_norm_socp};
use ellipt::engine::{decide, reduce_indices};
use ellipt::experiments::Instance;
use ellipt::hardness::{build_perturbed_lift, count_local_maxima};
use ellipt::projection::{ellipse_norm_lp, level_for, pe_norm_lp};
use ellipt::{Ellipse, EllipticPolytope, Method, Outcome};
use serde::Deserialize;
use serde_json::json;

use io::{emit, parse, read_json, read_text, CliError, CliResult};

#[derive(Parser)]
#[command(name = "ellipt", version, about = "Inclusion tests and norms for convex hulls of ellipses")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Inclusion tests, norms and redundancy removal.
    #[command(subcommand)]
    Ee(EeCommand),
    /// Invariant elliptic polytope (Lyapunov function) of one matrix.
    Lyapunov(LyapunovArgs),
    /// Joint spectral radius of a matrix family.
    Jsr(JsrArgs),
    /// The lifted polygon with 2ⁿ distinct local maxima of the squared norm.
    Hardness(HardnessArgs),
    /// Experiments writing CSV or JSON under an output directory.
    #[command(subcommand)]
    Bench(bench::BenchCommand),
}

#[derive(Subcommand)]
enum EeCommand {
    /// Decide whether E₀ lies in P.
    Decide(DecideArgs),
    /// Bracket for the norm of a point or an ellipse.
    Norm(NormArgs),
    /// Drop ellipses lying in the hull of the others.
    Reduce(ReduceArgs),
}

#[derive(Args)]
struct DecideArgs {
    /// Instance JSON: {"e0": {"a": [..], "b": [..]}, "p": {"dim": d, "ellipses": [..]}}.
    #[arg(short, long)]
    input: PathBuf,
    /// exact, cpm, cutting, projection or mixed; exact for d ≤ 3, otherwise mixed.
    #[arg(short, long)]
    method: Option<String>,
    /// Target factor for the approximate methods.
    #[arg(short, long, default_value_t = 0.995)]
    q: f64,
    /// Exit with code 1 unless the verdict is Inside.
    #[arg(long)]
    expect_inside: bool,
}

#[derive(Args)]
struct NormArgs {
    /// {"w": [..], "p": ..} for a point or {"e0": .., "p": ..} for an ellipse.
    #[arg(short, long)]
    input: PathBuf,
    /// lp or socp.
    #[arg(long, default_value = "lp")]
    oracle: String,
    /// Polygon level of the LP oracle; derived from q when absent.
    #[arg(short = 'n', long)]
    level: Option<u32>,
    /// Target ratio lo/hi.
    #[arg(short, long, default_value_t = 0.995)]
    q: f64,
}

#[derive(Args)]
struct ReduceArgs {
    /// Ellipse set JSON: {"dim": d, "ellipses": [..]}.
    #[arg(short, long)]
    input: PathBuf,
    #[arg(short, long)]
    method: Option<String>,
    #[arg(short, long, default_value_t = 0.995)]
    q: f64,
}

#[derive(Args)]
struct LyapunovArgs {
    /// {"matrices": [A]} with a single square matrix.
    #[arg(short, long)]
    input: PathBuf,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 200)]
    max_iter: usize,
}

#[derive(Args)]
struct JsrArgs {
    /// {"matrices": [..]} or {"pair": {"alpha": .., "beta": ..}}.
    #[arg(short, long)]
    input: Option<PathBuf>,
    /// Parameters of the two-matrix example family; override the file.
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    beta: Option<f64>,
    /// Longest product searched for the candidate.
    #[arg(long, default_value_t = 6)]
    smp_depth: usize,
    #[arg(long, default_value_t = 200)]
    max_iter: usize,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
}

#[derive(Args)]
struct HardnessArgs {
    #[arg(short, long)]
    n: u32,
    /// Bound on the perturbation of the regular polygon.
    #[arg(long, default_value_t = 1e-2)]
    eps: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

/// `ELLIPT_SEED` wins over the flag.
pub(crate) fn effective_seed(flag: u64) -> CliResult<u64> {
    match std::env::var("ELLIPT_SEED") {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("ELLIPT_SEED={s:?} is not an unsigned integer"))),
        Err(_) => Ok(flag),
    }
}

fn method_for(name: Option<&str>, d: usize) -> CliResult<Method> {
    match name {
        Some(m) => Ok(m.parse()?),
        None if d <= 3 => Ok(Method::Exact),
        None => Ok(Method::Mixed),
    }
}

fn check_q(q: f64) -> CliResult<()> {
    if q > 0.0 && q < 1.0 {
        Ok(())
    } else {
        Err(CliError::Usage(format!("q = {q} must lie in (0, 1)")))
    }
}

fn outcome_name(o: Outcome) -> &'static str {
    match o {
        Outcome::Inside => "Inside",
        Outcome::Outside => "Outside",
        Outcome::QInside => "QInside",
    }
}

fn ee_decide(args: &DecideArgs) -> CliResult<i32> {
    check_q(args.q)?;
    let inst: Instance = read_json(&args.input)?;
    let method = method_for(args.method.as_deref(), inst.p.dim())?;
    let v = decide(&inst.e0, &inst.p, method, args.q)?;
    emit(&json!({
        "verdict": outcome_name(v.outcome),
        "q": v.factor,
        "method": v.method,
        "certificate": v.certificate,
    }))?;
    Ok(if args.expect_inside && !v.is_inside() { 1 } else { 0 })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NormInput {
    #[serde(default)]
    w: Option<Vec<f64>>,
    #[serde(default)]
    e0: Option<Ellipse>,
    p: EllipticPolytope,
}

fn ee_norm(args: &NormArgs) -> CliResult<i32> {
    check_q(args.q)?;
    let input: NormInput = read_json(&args.input)?;
    let p = &input.p;
    let level = match args.level {
        Some(n) => n,
        None => level_for(args.q)?,
    };
    let lp = |w: &[f64]| pe_norm_lp(w, p, level);
    let (lo, hi) = match (&input.w, &input.e0, args.oracle.as_str()) {
        (Some(w), None, "lp") => {
            let b = lp(w)?;
            (b.lo, b.hi)
        }
        (Some(w), None, "socp") => {
            let b = pe_norm_socp(w, p)?;
            (b.lo, b.hi)
        }
        (None, Some(e0), "lp") if args.level.is_none() => ellipse_norm_lp(e0, p, args.q)?,
        (None, Some(e0), "lp") => ellipse_norm_with(e0, p, args.q, 100_000, &lp)?,
        (None, Some(e0), "socp") => ellipse_norm_with(e0, p, args.q, 100_000, &|w| pe_norm_socp(w, p))?,
        (_, _, "lp" | "socp") => return Err(CliError::Usage("give exactly one of \"w\" and \"e0\"".into())),
        (_, _, other) => return Err(CliError::Usage(format!("unknown oracle {other:?} (expected lp or socp)"))),
    };
    let finite = |v: f64| if v.is_finite() { json!(v) } else { json!(null) };
    emit(&json!({ "lo": finite(lo), "hi": finite(hi), "in_span": hi.is_finite() }))?;
    Ok(0)
}

fn ee_reduce(args: &ReduceArgs) -> CliResult<i32> {
    check_q(args.q)?;
    let p: EllipticPolytope = read_json(&args.input)?;
    let method = method_for(args.method.as_deref(), p.dim())?;
    let keep = reduce_indices(&p, method, args.q)?;
    let kept = EllipticPolytope::new(keep.iter().map(|&i| p.ellipses()[i].clone()).collect())?;
    emit(&json!({ "keep": keep, "before": p.len(), "after": kept.len(), "polytope": kept }))?;
    Ok(0)
}

fn lyapunov(args: &LyapunovArgs) -> CliResult<i32> {
    let fam: MatrixFamily = read_json(&args.input)?;
    if fam.len() != 1 {
        return Err(CliError::Usage(format!("expected one matrix, got {}", fam.len())));
    }
    let cert = lyapunov_single(&fam.matrices()[0], args.tol, args.max_iter)?;
    emit(&json!({
        "rho": cert.lambda,
        "valid": cert.valid,
        "converged": cert.converged,
        "iterations": cert.iterations,
        "vertices": cert.polytope.len(),
        "polytope": cert.polytope,
        "table": cert.table,
    }))?;
    Ok(if cert.valid { 0 } else { 1 })
}

#[derive(Deserialize)]
struct PairParams {
    alpha: f64,
    beta: f64,
}

fn jsr_family(args: &JsrArgs) -> CliResult<MatrixFamily> {
    let mut params = None;
    let mut fam = None;
    if let Some(path) = &args.input {
        let text = read_text(path)?;
        let value: serde_json::Value = parse(path, &text)?;
        if value.get("pair").is_some() {
            #[derive(Deserialize)]
            struct Wrapper {
                pair: PairParams,
            }
            let w: Wrapper = parse(path, &text)?;
            params = Some((w.pair.alpha, w.pair.beta));
        } else {
            fam = Some(parse::<MatrixFamily>(path, &text)?);
        }
    }
    if args.alpha.is_some() || args.beta.is_some() {
        if fam.is_some() {
            return Err(CliError::Usage("--alpha/--beta apply to the example family, not to explicit matrices".into()));
        }
        let (a0, b0) = params.unwrap_or((f64::NAN, f64::NAN));
        let alpha = args.alpha.unwrap_or(a0);
        let beta = args.beta.unwrap_or(b0);
        if alpha.is_nan() || beta.is_nan() {
            return Err(CliError::Usage("both --alpha and --beta are needed".into()));
        }
        params = Some((alpha, beta));
    }
    match (fam, params) {
        (Some(f), _) => Ok(f),
        (None, Some((alpha, beta))) => Ok(example_pair(alpha, beta)?),
        (None, None) => Err(CliError::Usage("give --input or --alpha and --beta".into())),
    }
}

fn jsr(args: &JsrArgs) -> CliResult<i32> {
    let fam = jsr_family(args)?;
    let mut opts = JsrOptions {
        smp_depth: args.smp_depth,
        ..JsrOptions::default()
    };
    opts.iteration.max_iter = args.max_iter;
    opts.iteration.tol = args.tol;
    let rep = jsr_invariant_polytope(&fam, &opts)?;
    let cert = rep.certificate.as_ref();
    emit(&json!({
        "jsr": rep.lambda,
        "smp": rep.smp.as_ref().map(|s| s.word.clone()),
        "exact": rep.is_exact(),
        "lower": rep.lower,
        "upper": rep.upper,
        "iterations": cert.map(|c| c.iterations),
        "vertices": cert.map(|c| c.polytope.len()),
        "polytope": cert.map(|c| &c.polytope),
        "diagnosis": rep.diagnosis,
    }))?;
    Ok(if rep.is_exact() { 0 } else { 1 })
}

fn hardness(args: &HardnessArgs) -> CliResult<i32> {
    let seed = effective_seed(args.seed)?;
    let lift = build_perturbed_lift(args.n, args.eps, seed)?;
    let (maxima, distinct) = count_local_maxima(&lift);
    let facets = lift.hrep.facet_count()?;
    emit(&json!({
        "n": args.n,
        "local_maxima": maxima,
        "distinct_values": distinct.len(),
        "facets": facets,
        "vertices": lift.polygon.len(),
        "hausdorff": lift.hausdorff,
        "min_gap": lift.min_gap,
        "shears": lift.shears,
        "tilt": lift.tilt,
        "hrep": lift.hrep,
        "polygon": lift.polygon,
    }))?;
    Ok(0)
}

fn single_threaded() {
    // the library parallelizes some loops; only bench may use several threads
    let _ = rayon::ThreadPoolBuilder::new().num_threads(1).build_global();
}

fn run(cli: Cli) -> CliResult<i32> {
    match &cli.command {
        Command::Bench(cmd) => bench::run(cmd),
        other => {
            single_threaded();
            match other {
                Command::Ee(EeCommand::Decide(a)) => ee_decide(a),
                Command::Ee(EeCommand::Norm(a)) => ee_norm(a),
                Command::Ee(EeCommand::Reduce(a)) => ee_reduce(a),
                Command::Lyapunov(a) => lyapunov(a),
                Command::Jsr(a) => jsr(a),
                Command::Hardness(a) => hardness(a),
                Command::Bench(_) => unreachable!(),
            }
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code() as u8)
        }
    }
}
