//! The `bench` subcommand: method-comparison grids for the combination
//! circuits and the preparation routes.
//!
//! Cells always run on rngs derived from their grid index, so the record
//! stream is byte-identical whether cells run serially or fanned out
//! across `LCULAB_THREADS` workers.

use clap::Args;
use lculab_core::{
    prep_bench_cell, random_log_uniform_vector, table1_bench_cell, BenchCell, ClassicalVector,
    CoeffProfile, CoreError, PrepMethod, RandomSource, StateFamily,
};
use serde::Serialize;

use crate::emit::emit_records;
use crate::error::CliError;
use crate::input::parse_list;
use crate::Globals;

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// lcu or prep.
    #[arg(long, default_value = "lcu")]
    pub suite: String,
    /// Comma-separated state counts for the lcu grid.
    #[arg(long = "m-list", default_value = "2,4,8")]
    pub m_list: String,
    /// Comma-separated dimensions for the lcu grid.
    #[arg(long = "dim-list", default_value = "16")]
    pub dim_list: String,
    /// Comma-separated vector lengths for the prep grid.
    #[arg(long = "n-list", default_value = "16,64,256")]
    pub n_list: String,
    /// Comma-separated log2 dynamic ranges for the prep grid.
    #[arg(long = "log2-kappa-list", default_value = "2,5,10")]
    pub log2_kappa_list: String,
    /// Random vectors per prep grid cell.
    #[arg(long, default_value_t = 2)]
    pub count: usize,
    /// Per-leaf budget for the recursive combiner, and thm2 accuracy.
    #[arg(long, default_value_t = 0.01)]
    pub eps: f64,
}

fn thread_cap() -> Result<usize, CliError> {
    match std::env::var("LCULAB_THREADS") {
        Err(std::env::VarError::NotPresent) => Ok(1),
        Err(e) => Err(CliError::Config(format!("LCULAB_THREADS: {e}"))),
        Ok(raw) => raw
            .trim()
            .parse::<usize>()
            .map(|t| t.max(1))
            .map_err(|e| CliError::Config(format!("LCULAB_THREADS: {e}"))),
    }
}

/// Evaluate `count` independent cells, serially or on up to `threads`
/// workers, returning results in index order either way.
fn run_indexed<T, F>(count: usize, threads: usize, task: F) -> Result<Vec<T>, CoreError>
where
    T: Send,
    F: Fn(usize) -> Result<T, CoreError> + Sync,
{
    let workers = threads.min(count);
    if workers <= 1 {
        return (0..count).map(task).collect();
    }
    let chunk = count.div_ceil(workers);
    let mut outcomes: Vec<Result<T, CoreError>> = std::thread::scope(|scope| {
        let task = &task;
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let lo = w * chunk;
                let hi = ((w + 1) * chunk).min(count);
                scope.spawn(move || (lo..hi).map(task).collect::<Vec<_>>())
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("bench worker panicked"))
            .collect()
    });
    let mut results = Vec::with_capacity(count);
    for outcome in outcomes.drain(..) {
        results.push(outcome?);
    }
    Ok(results)
}

#[derive(Serialize)]
struct LcuBenchRecord {
    command: &'static str,
    version: &'static str,
    seed: u64,
    suite: &'static str,
    eps: f64,
    m: usize,
    dim: usize,
    profile: String,
    family: String,
    method: String,
    attempts: u64,
    target_fidelity: f64,
    success_probability: Option<f64>,
    failure: Option<String>,
    oracle_queries: u64,
    input_preps: u64,
    elementary_ops: u64,
    estimator_samples: u64,
}

const LCU_BENCH_COLUMNS: &[&str] = &[
    "command",
    "version",
    "seed",
    "suite",
    "eps",
    "m",
    "dim",
    "profile",
    "family",
    "method",
    "attempts",
    "target_fidelity",
    "success_probability",
    "failure",
    "oracle_queries",
    "input_preps",
    "elementary_ops",
    "estimator_samples",
];

#[derive(Serialize)]
struct PrepBenchRecord {
    command: &'static str,
    version: &'static str,
    seed: u64,
    suite: &'static str,
    eps: f64,
    log2_kappa: f64,
    rep: usize,
    n: usize,
    kappa: f64,
    q: usize,
    method: String,
    fidelity: f64,
    attempts: u64,
    success_probability: Option<f64>,
    bound_check: Option<bool>,
    failure: Option<String>,
    oracle_queries: u64,
    input_preps: u64,
    elementary_ops: u64,
    estimator_samples: u64,
}

const PREP_BENCH_COLUMNS: &[&str] = &[
    "command",
    "version",
    "seed",
    "suite",
    "eps",
    "log2_kappa",
    "rep",
    "n",
    "kappa",
    "q",
    "method",
    "fidelity",
    "attempts",
    "success_probability",
    "bound_check",
    "failure",
    "oracle_queries",
    "input_preps",
    "elementary_ops",
    "estimator_samples",
];

pub fn run(args: &BenchArgs, g: &Globals, buf: &mut Vec<u8>) -> Result<(), CliError> {
    let threads = thread_cap()?;
    match args.suite.as_str() {
        "lcu" => run_lcu(args, g, threads, buf),
        "prep" => run_prep(args, g, threads, buf),
        other => Err(CliError::Config(format!("unknown bench suite {other:?}"))),
    }
}

fn run_lcu(
    args: &BenchArgs,
    g: &Globals,
    threads: usize,
    buf: &mut Vec<u8>,
) -> Result<(), CliError> {
    let mut m_list = parse_list::<usize>(&args.m_list, "--m-list")?;
    let mut dim_list = parse_list::<usize>(&args.dim_list, "--dim-list")?;
    m_list.sort_unstable();
    m_list.dedup();
    dim_list.sort_unstable();
    dim_list.dedup();
    let profiles = [CoeffProfile::Uniform, CoeffProfile::Geometric { ratio: 10.0 }];
    let families =
        [StateFamily::RandomReal, StateFamily::Orthonormal, StateFamily::NearIdentical];

    let mut cells = Vec::new();
    for &m in &m_list {
        for &dim in &dim_list {
            for &profile in &profiles {
                for &family in &families {
                    cells.push(BenchCell { m, dim, profile, family });
                }
            }
        }
    }

    let base = RandomSource::new(g.seed);
    let per_cell = run_indexed(cells.len(), threads, |i| {
        let mut rng = base.derive(i as u64);
        table1_bench_cell(&cells[i], args.eps, &mut rng)
    })?;

    let records: Vec<LcuBenchRecord> = per_cell
        .into_iter()
        .flatten()
        .map(|r| LcuBenchRecord {
            command: "bench",
            version: env!("CARGO_PKG_VERSION"),
            seed: g.seed,
            suite: "lcu",
            eps: args.eps,
            m: r.m,
            dim: r.dim,
            profile: r.profile,
            family: r.family,
            method: r.method,
            attempts: r.attempts,
            target_fidelity: r.target_fidelity,
            success_probability: r.success_probability,
            failure: r.failure,
            oracle_queries: r.ledger.oracle_queries,
            input_preps: r.ledger.input_preps,
            elementary_ops: r.ledger.elementary_ops,
            estimator_samples: r.ledger.estimator_samples,
        })
        .collect();
    emit_records(&records, LCU_BENCH_COLUMNS, g.format, buf)
}

fn run_prep(
    args: &BenchArgs,
    g: &Globals,
    threads: usize,
    buf: &mut Vec<u8>,
) -> Result<(), CliError> {
    let mut n_list = parse_list::<usize>(&args.n_list, "--n-list")?;
    let mut kappa_list = parse_list::<f64>(&args.log2_kappa_list, "--log2-kappa-list")?;
    n_list.sort_unstable();
    n_list.dedup();
    kappa_list.sort_by(f64::total_cmp);
    kappa_list.dedup();
    if args.count == 0 {
        return Err(CliError::Config("--count must be at least 1".into()));
    }

    let base = RandomSource::new(g.seed);
    let mut keys = Vec::new();
    let mut corpus: Vec<ClassicalVector> = Vec::new();
    for &n in &n_list {
        for &log2_kappa in &kappa_list {
            for rep in 0..args.count {
                let label = 0x10_0000 + corpus.len() as u64;
                corpus.push(random_log_uniform_vector(n, log2_kappa, &mut base.derive(label))?);
                keys.push((log2_kappa, rep));
            }
        }
    }

    let methods =
        [PrepMethod::Naive, PrepMethod::Uniformish, PrepMethod::Thm1, PrepMethod::Thm2];
    let grid_rng = base.derive(1);
    let cells = run_indexed(corpus.len() * methods.len(), threads, |task| {
        let (i, j) = (task / methods.len(), task % methods.len());
        let mut rng = grid_rng.derive(((i as u64) << 8) | j as u64);
        Ok(prep_bench_cell(&corpus[i], methods[j], args.eps, &mut rng))
    })?;

    let records: Vec<PrepBenchRecord> = cells
        .into_iter()
        .enumerate()
        .map(|(task, r)| {
            let (log2_kappa, rep) = keys[task / methods.len()];
            PrepBenchRecord {
                command: "bench",
                version: env!("CARGO_PKG_VERSION"),
                seed: g.seed,
                suite: "prep",
                eps: args.eps,
                log2_kappa,
                rep,
                n: r.n,
                kappa: r.kappa,
                q: r.q,
                method: r.method,
                fidelity: r.fidelity,
                attempts: r.attempts,
                success_probability: r.success_probability,
                bound_check: r.bound_check,
                failure: r.failure,
                oracle_queries: r.ledger.oracle_queries,
                input_preps: r.ledger.input_preps,
                elementary_ops: r.ledger.elementary_ops,
                estimator_samples: r.ledger.estimator_samples,
            }
        })
        .collect();
    emit_records(&records, PREP_BENCH_COLUMNS, g.format, buf)
}
