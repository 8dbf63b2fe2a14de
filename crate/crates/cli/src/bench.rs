use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Subcommand};
use rayon::prelude::*;
use ellipt::experiments::{
    cpm_factor, dataset_a, dataset_b, factor_density, median, run_methods, vertex_fraction, write_csv, Distribution,
    Instance, SampleObject, SampleSpec, SCHEMA_VERSION,
};
use ellipt::Method;
use serde::Serialize;
use serde_json::json;

use crate::effective_seed;
use crate::io::{create_dir, create_file, emit, write_json, CliError, CliResult};

#[derive(Subcommand)]
pub enum BenchCommand {
    /// Times the methods on a dataset and measures the factor achieved by
    /// the complex polytope method against the projection method.
    Accuracy(AccuracyArgs),
    /// Fraction of random points or ellipses that are extreme.
    Vertexfrac(VertexfracArgs),
    /// Writes one instance JSON per file, readable by `ee decide`.
    Dataset(DatasetArgs),
}

#[derive(Args, Clone)]
pub struct Common {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Worker threads; all cores when absent.
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(short, long, default_value = "bench-out")]
    out: PathBuf,
}

#[derive(Args, Clone)]
pub struct DatasetShape {
    /// a (Gaussian ellipses) or b (harvested from the invariant polytope iteration).
    #[arg(long, default_value = "a")]
    kind: String,
    #[arg(long, default_value_t = 2)]
    d_min: usize,
    #[arg(long, default_value_t = 5)]
    d_max: usize,
    /// Ellipses per polytope (dataset a).
    #[arg(short, long, default_value_t = 10)]
    n: usize,
    /// Polytopes per dimension (dataset a) or matrix families (dataset b).
    #[arg(long, default_value_t = 2)]
    polytopes: usize,
    /// Test ellipses per polytope.
    #[arg(long, default_value_t = 6)]
    per: usize,
}

#[derive(Args)]
pub struct AccuracyArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    shape: DatasetShape,
    /// Comma-separated methods; exact is skipped for d > 3.
    #[arg(long, default_value = "exact,cpm,projection,mixed")]
    methods: String,
    #[arg(short, long, default_value_t = 0.995)]
    q: f64,
    #[arg(long, default_value_t = 20)]
    bins: usize,
}

#[derive(Args)]
pub struct VertexfracArgs {
    #[command(flatten)]
    common: Common,
    /// ball-uniform, cube-uniform or gaussian.
    #[arg(long, default_value = "gaussian")]
    distribution: String,
    /// points or ellipses.
    #[arg(long, default_value = "ellipses")]
    object: String,
    #[arg(short, long, default_value_t = 2)]
    d: usize,
    /// Comma-separated sample sizes.
    #[arg(short, long, default_value = "10,20,40")]
    n: String,
    /// Samples per cell.
    #[arg(long, default_value_t = 20)]
    seeds: u64,
    #[arg(long, default_value = "mixed")]
    method: String,
    #[arg(short, long, default_value_t = 0.995)]
    q: f64,
}

#[derive(Args)]
pub struct DatasetArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    shape: DatasetShape,
}

fn pool(common: &Common) -> CliResult<()> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(j) = common.jobs {
        if j == 0 {
            return Err(CliError::Usage("--jobs must be positive".into()));
        }
        b = b.num_threads(j);
    }
    b.build_global().map_err(|e| CliError::Usage(format!("thread pool: {e}")))
}

fn instances(shape: &DatasetShape, seed: u64) -> CliResult<Vec<Instance>> {
    if shape.d_min < 2 || shape.d_min > shape.d_max {
        return Err(CliError::Usage(format!("bad dimension range {}..={}", shape.d_min, shape.d_max)));
    }
    let mut out = Vec::new();
    for d in shape.d_min..=shape.d_max {
        match shape.kind.as_str() {
            "a" => out.extend(dataset_a(d, shape.n, shape.polytopes, shape.per, seed)?),
            "b" => out.extend(dataset_b(d, shape.polytopes, shape.per, seed)?),
            other => return Err(CliError::Usage(format!("unknown dataset {other:?} (expected a or b)"))),
        }
    }
    Ok(out)
}

fn csv_to<T: Serialize>(path: &Path, rows: &[T]) -> CliResult<()> {
    Ok(write_csv(create_file(path)?, rows)?)
}

fn parse_methods(s: &str) -> CliResult<Vec<Method>> {
    s.split(',').map(|m| Ok(m.trim().parse()?)).collect()
}

#[derive(Serialize)]
struct FactorRow {
    schema: u32,
    run_id: String,
    instance: String,
    d: usize,
    n_vertices: usize,
    factor: f64,
}

fn accuracy(args: &AccuracyArgs) -> CliResult<i32> {
    let seed = effective_seed(args.common.seed)?;
    let insts = instances(&args.shape, seed)?;
    let methods = parse_methods(&args.methods)?;
    let run_id = format!("accuracy-{}-{seed}", args.shape.kind);
    let mut records = Vec::new();
    for d in args.shape.d_min..=args.shape.d_max {
        let cell: Vec<Instance> = insts.iter().filter(|i| i.p.dim() == d).cloned().collect();
        let ms: Vec<Method> = methods.iter().copied().filter(|m| *m != Method::Exact || d <= 3).collect();
        records.extend(run_methods(&run_id, &cell, &ms, args.q));
    }
    records.sort_by(|a, b| (&a.instance, &a.method).cmp(&(&b.instance, &b.method)));
    let measured: Vec<Option<f64>> = insts
        .par_iter()
        .map(|i| match cpm_factor(&i.e0, &i.p, true) {
            Ok(f) => f,
            Err(e) => {
                log::warn!("{}: {e}", i.id);
                None
            }
        })
        .collect();
    let rows: Vec<FactorRow> = insts
        .iter()
        .zip(&measured)
        .filter_map(|(inst, f)| {
            f.map(|factor| FactorRow {
                schema: SCHEMA_VERSION,
                run_id: run_id.clone(),
                instance: inst.id.clone(),
                d: inst.p.dim(),
                n_vertices: inst.p.len(),
                factor,
            })
        })
        .collect();
    let values: Vec<f64> = rows.iter().map(|r| r.factor).collect();
    let dropped = insts.len() - rows.len();
    create_dir(&args.common.out)?;
    csv_to(&args.common.out.join("runs.csv"), &records)?;
    csv_to(&args.common.out.join("factors.csv"), &rows)?;
    let errors = records.iter().filter(|r| r.verdict.starts_with("error")).count();
    emit(&json!({
        "run_id": run_id,
        "instances": insts.len(),
        "records": records.len(),
        "errors": errors,
        "median_factor": median(&values),
        "factor_histogram": factor_density(&values, args.bins),
        "dropped": dropped,
        "out": args.common.out,
    }))?;
    Ok(0)
}

#[derive(Serialize)]
struct FractionRow {
    schema: u32,
    run_id: String,
    distribution: String,
    object: String,
    d: usize,
    n: usize,
    seed: u64,
    method: String,
    q: f64,
    time_ms: f64,
    fraction: f64,
}

fn vertexfrac(args: &VertexfracArgs) -> CliResult<i32> {
    let seed = effective_seed(args.common.seed)?;
    let distribution: Distribution = args.distribution.parse()?;
    let object = match args.object.as_str() {
        "points" => SampleObject::Points,
        "ellipses" => SampleObject::Ellipses,
        other => return Err(CliError::Usage(format!("unknown object {other:?} (expected points or ellipses)"))),
    };
    let method: Method = args.method.parse()?;
    let sizes: Vec<usize> = args
        .n
        .split(',')
        .map(|s| s.trim().parse().map_err(|_| CliError::Usage(format!("bad sample size {s:?}"))))
        .collect::<CliResult<_>>()?;
    let run_id = format!("vertexfrac-{seed}");
    let cells: Vec<(usize, u64)> = sizes.iter().flat_map(|&n| (0..args.seeds).map(move |k| (n, k))).collect();
    let rows: Vec<FractionRow> = cells
        .par_iter()
        .map(|&(n, k)| {
            let spec = SampleSpec {
                distribution,
                d: args.d,
                n,
                seed: seed.wrapping_mul(1_000_003).wrapping_add(k),
                object,
            };
            let start = Instant::now();
            let fraction = vertex_fraction(&spec, method, args.q)?;
            Ok(FractionRow {
                schema: SCHEMA_VERSION,
                run_id: run_id.clone(),
                distribution: args.distribution.clone(),
                object: args.object.clone(),
                d: args.d,
                n,
                seed: spec.seed,
                method: args.method.clone(),
                q: args.q,
                time_ms: start.elapsed().as_secs_f64() * 1e3,
                fraction,
            })
        })
        .collect::<CliResult<_>>()?;
    create_dir(&args.common.out)?;
    csv_to(&args.common.out.join("vertexfrac.csv"), &rows)?;
    let means: Vec<_> = sizes
        .iter()
        .map(|&n| {
            let v: Vec<f64> = rows.iter().filter(|r| r.n == n).map(|r| r.fraction).collect();
            json!({ "n": n, "mean_fraction": v.iter().sum::<f64>() / v.len().max(1) as f64 })
        })
        .collect();
    emit(&json!({ "run_id": run_id, "cells": means, "out": args.common.out }))?;
    Ok(0)
}

fn dataset(args: &DatasetArgs) -> CliResult<i32> {
    let seed = effective_seed(args.common.seed)?;
    let insts = instances(&args.shape, seed)?;
    create_dir(&args.common.out)?;
    for inst in &insts {
        write_json(&args.common.out.join(format!("{}.json", inst.id)), inst)?;
    }
    emit(&json!({ "written": insts.len(), "out": args.common.out }))?;
    Ok(0)
}

pub fn run(cmd: &BenchCommand) -> CliResult<i32> {
    match cmd {
        BenchCommand::Accuracy(a) => {
            pool(&a.common)?;
            accuracy(a)
        }
        BenchCommand::Vertexfrac(a) => {
            pool(&a.common)?;
            vertexfrac(a)
        }
        BenchCommand::Dataset(a) => {
            pool(&a.common)?;
            dataset(a)
        }
    }
}
