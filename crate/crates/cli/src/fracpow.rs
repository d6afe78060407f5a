//! The `fracpow` subcommand: draw a random plane rotation and apply a
//! fractional power of it through the chosen route.

use clap::Args;
use lculab_core::fracpow::{frac_power_eig, frac_power_iterate, frac_power_pe};
use lculab_core::linalg::op_distance;
use lculab_core::random::{random_real_state, random_state};
use lculab_core::{CostLedger, RandomSource, UnitaryOp};
use serde::Serialize;

use crate::emit::emit_records;
use crate::error::CliError;
use crate::Globals;

#[derive(Args, Debug)]
pub struct FracpowArgs {
    /// State dimension of the random pair spanning the rotation plane.
    #[arg(long, default_value_t = 8)]
    pub dim: usize,
    /// Fractional power to apply.
    #[arg(long, default_value_t = 0.25)]
    pub t: f64,
    /// eig, pe, or iterate.
    #[arg(long, default_value = "eig")]
    pub method: String,
    /// Phase register width for the pe route.
    #[arg(long, default_value_t = 8)]
    pub bits: u32,
    /// Cost-accounting accuracy for the eig route.
    #[arg(long, default_value_t = 1e-3)]
    pub eps: f64,
    /// Acceptable wraparound phase distance for the iterate route.
    #[arg(long, default_value_t = 1e-2)]
    pub tol: f64,
    /// Largest whole-application count the iterate route scans.
    #[arg(long = "max-k", default_value_t = 100_000)]
    pub max_k: u64,
}

#[derive(Serialize)]
struct FracpowRecord {
    command: &'static str,
    version: &'static str,
    seed: u64,
    method: String,
    dim: usize,
    t: f64,
    bits: u32,
    eps: f64,
    tol: f64,
    max_k: u64,
    cost_model: &'static str,
    shots: u64,
    angle: f64,
    overlap: f64,
    deviation: f64,
    residual: Option<f64>,
    pe_bound: Option<f64>,
    k: Option<u64>,
    phase_error: Option<f64>,
    oracle_queries: u64,
    input_preps: u64,
    elementary_ops: u64,
    estimator_samples: u64,
}

const FRACPOW_COLUMNS: &[&str] = &[
    "command",
    "version",
    "seed",
    "method",
    "dim",
    "t",
    "bits",
    "eps",
    "tol",
    "max_k",
    "cost_model",
    "shots",
    "angle",
    "overlap",
    "deviation",
    "residual",
    "pe_bound",
    "k",
    "phase_error",
    "oracle_queries",
    "input_preps",
    "elementary_ops",
    "estimator_samples",
];

fn max_abs_state_diff(
    a: &lculab_core::StateVector,
    b: &lculab_core::StateVector,
) -> f64 {
    a.amplitudes()
        .iter()
        .zip(b.amplitudes().iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0f64, f64::max)
}

/// Spectral distance between W^p and U when 1/t is a small whole number.
fn integer_power_residual(w: &UnitaryOp, u: &UnitaryOp, t: f64) -> Option<f64> {
    let p = (1.0 / t).round();
    if (p * t - 1.0).abs() > 1e-9 || !(1.0..=64.0).contains(&p) {
        return None;
    }
    let mut acc = w.matrix().clone();
    for _ in 1..(p as u32) {
        acc = acc.dot(w.matrix());
    }
    Some(op_distance(&acc, u.matrix()))
}

pub fn run(args: &FracpowArgs, g: &Globals, buf: &mut Vec<u8>) -> Result<(), CliError> {
    if !matches!(args.method.as_str(), "eig" | "pe" | "iterate") {
        return Err(CliError::Config(format!(
            "unknown fracpow method {:?}",
            args.method
        )));
    }

    let base = RandomSource::new(g.seed);
    let a = random_real_state(args.dim, &mut base.derive(0))?;
    let mut b = random_real_state(args.dim, &mut base.derive(1))?;
    // Keep the pair on the acute side so every route shares the
    // principal branch of the rotation.
    let mut overlap = a.inner(&b)?.re;
    if overlap < 0.0 {
        b = b.negated();
        overlap = -overlap;
    }
    let spec = lculab_core::fracpow::rotation_generator(&a, &b)?;
    let probe = random_state(args.dim, &mut base.derive(2))?;
    let reference = spec.apply_power(&probe, args.t);

    let (deviation, residual, pe_bound, k, phase_error, ledger) = match args.method.as_str() {
        "eig" => {
            let u = spec.generator.evolve(1.0)?.with_cost(CostLedger::ops(1));
            let w = frac_power_eig(&u, args.t, args.eps)?;
            let mut scratch = CostLedger::ZERO;
            let applied = w.apply(&probe, &mut scratch)?;
            let deviation = max_abs_state_diff(&applied, &reference);
            (deviation, integer_power_residual(&w, &u, args.t), None, None, None, w.cost())
        }
        "pe" => {
            let u = spec.generator.evolve(1.0)?.with_cost(CostLedger::ops(1));
            let w = frac_power_pe(&u, args.t, args.bits)?;
            let mut scratch = CostLedger::ZERO;
            let applied = w.apply(&probe, &mut scratch)?;
            let deviation = max_abs_state_diff(&applied, &reference);
            let bound = 2.0 * std::f64::consts::PI * args.t / (1u64 << args.bits) as f64;
            (deviation, integer_power_residual(&w, &u, args.t), Some(bound), None, None, w.cost())
        }
        _ => {
            let (k, err) = frac_power_iterate(&spec, args.t, args.tol, args.max_k)?;
            let applied = spec.apply_power(&probe, k as f64);
            let deviation = max_abs_state_diff(&applied, &reference);
            (deviation, None, None, Some(k), Some(err), CostLedger::ops(k))
        }
    };

    let record = FracpowRecord {
        command: "fracpow",
        version: env!("CARGO_PKG_VERSION"),
        seed: g.seed,
        method: args.method.clone(),
        dim: args.dim,
        t: args.t,
        bits: args.bits,
        eps: args.eps,
        tol: args.tol,
        max_k: args.max_k,
        cost_model: g.cost_model.label(),
        shots: g.shots,
        angle: spec.angle,
        overlap,
        deviation,
        residual,
        pe_bound,
        k,
        phase_error,
        oracle_queries: ledger.oracle_queries,
        input_preps: ledger.input_preps,
        elementary_ops: ledger.elementary_ops,
        estimator_samples: ledger.estimator_samples,
    };
    emit_records(&[record], FRACPOW_COLUMNS, g.format, buf)
}
