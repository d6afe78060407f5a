//! The `grover` subcommand: single searches and scaling studies.

use clap::Args;
use lculab_core::{
    grover_with_iterations, make_instance, run_search, scaling_study, RandomSource, SearchMethod,
};
use serde::Serialize;

use crate::emit::emit_records;
use crate::error::CliError;
use crate::input::parse_list;
use crate::Globals;

#[derive(Args, Debug)]
pub struct GroverArgs {
    /// Search-space size for a single run.
    #[arg(long)]
    pub n: Option<usize>,
    /// Comma-separated marked items; default is one random item.
    #[arg(long)]
    pub marked: Option<String>,
    /// standard, hadamard, eig, pe, iterate, or classical.
    #[arg(long, default_value = "standard")]
    pub method: String,
    /// Comma-separated sizes; runs the scaling study instead of a search.
    #[arg(long, conflicts_with = "n")]
    pub sizes: Option<String>,
    /// Runs averaged per size in the scaling study.
    #[arg(long, default_value_t = 4)]
    pub seeds: u64,
    /// Fixed iteration count (standard method only).
    #[arg(long)]
    pub iterations: Option<u64>,
}

#[derive(Serialize)]
struct SearchRecord {
    command: &'static str,
    version: &'static str,
    seed: u64,
    method: String,
    n: usize,
    marked: Vec<usize>,
    iterations_requested: Option<u64>,
    cost_model: &'static str,
    shots: u64,
    found: usize,
    success: bool,
    queries: u64,
    iterations: u64,
    success_probability: f64,
    marked_is_modal: bool,
    oracle_queries: u64,
    input_preps: u64,
    elementary_ops: u64,
    estimator_samples: u64,
}

const SEARCH_COLUMNS: &[&str] = &[
    "command",
    "version",
    "seed",
    "method",
    "n",
    "marked",
    "iterations_requested",
    "cost_model",
    "shots",
    "found",
    "success",
    "queries",
    "iterations",
    "success_probability",
    "marked_is_modal",
    "oracle_queries",
    "input_preps",
    "elementary_ops",
    "estimator_samples",
];

#[derive(Serialize)]
struct ScalingRecord {
    command: &'static str,
    version: &'static str,
    seed: u64,
    method: String,
    n: usize,
    seeds: u64,
    mean_queries: f64,
    exponent: f64,
    r_squared: f64,
}

const SCALING_COLUMNS: &[&str] = &[
    "command",
    "version",
    "seed",
    "method",
    "n",
    "seeds",
    "mean_queries",
    "exponent",
    "r_squared",
];

pub fn run(args: &GroverArgs, g: &Globals, buf: &mut Vec<u8>) -> Result<(), CliError> {
    let method: SearchMethod = args
        .method
        .parse()
        .map_err(|e: lculab_core::CoreError| CliError::Config(e.to_string()))?;

    if let Some(sizes_raw) = &args.sizes {
        if args.marked.is_some() || args.iterations.is_some() {
            return Err(CliError::Config(
                "--marked and --iterations apply to single runs, not --sizes".into(),
            ));
        }
        let sizes = parse_list::<usize>(sizes_raw, "--sizes")?;
        let mut rng = RandomSource::new(g.seed);
        let fit = scaling_study(method, &sizes, args.seeds, &mut rng)?;
        let records: Vec<ScalingRecord> = fit
            .points
            .iter()
            .map(|p| ScalingRecord {
                command: "grover",
                version: env!("CARGO_PKG_VERSION"),
                seed: g.seed,
                method: fit.method.clone(),
                n: p.n,
                seeds: args.seeds,
                mean_queries: p.mean_queries,
                exponent: fit.exponent,
                r_squared: fit.r_squared,
            })
            .collect();
        return emit_records(&records, SCALING_COLUMNS, g.format, buf);
    }

    let n = args
        .n
        .ok_or_else(|| CliError::Config("one of --n or --sizes is required".into()))?;
    if n == 0 {
        return Err(CliError::Config("--n must be positive".into()));
    }
    let base = RandomSource::new(g.seed);
    let marked: Vec<usize> = match &args.marked {
        Some(raw) => parse_list(raw, "--marked")?,
        None => vec![base.derive(0).gen_range(n)],
    };
    let inst = make_instance(n, &marked)?;
    let mut run_rng = base.derive(1);
    let result = match args.iterations {
        Some(k) => {
            if method != SearchMethod::Standard {
                return Err(CliError::Config(
                    "--iterations is only meaningful for --method standard".into(),
                ));
            }
            grover_with_iterations(&inst, k, &mut run_rng)?
        }
        None => run_search(&inst, method, &mut run_rng)?,
    };

    let record = SearchRecord {
        command: "grover",
        version: env!("CARGO_PKG_VERSION"),
        seed: g.seed,
        method: method.to_string(),
        n,
        marked,
        iterations_requested: args.iterations,
        cost_model: g.cost_model.label(),
        shots: g.shots,
        found: result.found,
        success: result.success,
        queries: result.queries,
        iterations: result.iterations,
        success_probability: result.success_probability,
        marked_is_modal: result.marked_is_modal,
        oracle_queries: result.ledger.oracle_queries,
        input_preps: result.ledger.input_preps,
        elementary_ops: result.ledger.elementary_ops,
        estimator_samples: result.ledger.estimator_samples,
    };
    emit_records(&[record], SEARCH_COLUMNS, g.format, buf)
}
