//! The `prep` subcommand: load or generate a classical vector and prepare
//! its normalized state.

use std::path::PathBuf;

use clap::Args;
use lculab_core::{
    measure, prep_naive, prep_thm1, prep_thm2, prep_uniformish, random_log_uniform_vector,
    verify_shift_bound, ClassicalVector, CostLedger, PrepMethod, RandomSource, StateVector,
};
use serde::Serialize;

use crate::emit::{emit_records, histogram_string};
use crate::error::CliError;
use crate::input::parse_vector;
use crate::lcu::parse_variant;
use crate::Globals;

#[derive(Args, Debug)]
pub struct PrepArgs {
    /// Vector file: a JSON numeric array or whitespace-separated text.
    #[arg(long)]
    pub file: Option<PathBuf>,
    /// Generate a random vector of this length instead of reading a file.
    #[arg(long, conflicts_with = "file")]
    pub n: Option<usize>,
    /// log2 of the dynamic range for the generated vector.
    #[arg(long = "log2-kappa", default_value_t = 8.0)]
    pub log2_kappa: f64,
    /// naive, uniformish, thm1, or thm2.
    #[arg(long, default_value = "thm2")]
    pub method: String,
    /// Output accuracy for thm2.
    #[arg(long, default_value_t = 0.01)]
    pub eps: f64,
    /// Fractional-power route used by thm2: eig, pe, or iterate.
    #[arg(long, default_value = "eig")]
    pub variant: String,
    /// Amplify the uniformish route instead of repeating postselection.
    #[arg(long)]
    pub amplify: bool,
}

struct Outcome {
    output: StateVector,
    fidelity: f64,
    attempts: u64,
    success_probability: Option<f64>,
    ledger: CostLedger,
}

#[derive(Serialize)]
struct PrepCliRecord {
    command: &'static str,
    version: &'static str,
    seed: u64,
    input: String,
    n: usize,
    kappa: f64,
    q: usize,
    method: String,
    eps: f64,
    variant: String,
    amplify: bool,
    cost_model: &'static str,
    shots: u64,
    fidelity: f64,
    attempts: u64,
    success_probability: Option<f64>,
    bound_check: Option<bool>,
    histogram: Option<String>,
    oracle_queries: u64,
    input_preps: u64,
    elementary_ops: u64,
    estimator_samples: u64,
}

const PREP_COLUMNS: &[&str] = &[
    "command",
    "version",
    "seed",
    "input",
    "n",
    "kappa",
    "q",
    "method",
    "eps",
    "variant",
    "amplify",
    "cost_model",
    "shots",
    "fidelity",
    "attempts",
    "success_probability",
    "bound_check",
    "histogram",
    "oracle_queries",
    "input_preps",
    "elementary_ops",
    "estimator_samples",
];

pub fn run(args: &PrepArgs, g: &Globals, buf: &mut Vec<u8>) -> Result<(), CliError> {
    let method: PrepMethod = args
        .method
        .parse()
        .map_err(|e: lculab_core::CoreError| CliError::Config(e.to_string()))?;
    let variant = parse_variant(&args.variant)?;
    if args.amplify && method != PrepMethod::Uniformish {
        return Err(CliError::Config(
            "--amplify only applies to --method uniformish".into(),
        ));
    }

    let base = RandomSource::new(g.seed);
    let (x, input_desc) = match (&args.file, args.n) {
        (Some(path), None) => {
            let entries = parse_vector(path)?;
            (ClassicalVector::new(entries)?, format!("file:{}", path.display()))
        }
        (None, Some(n)) => {
            let x = random_log_uniform_vector(n, args.log2_kappa, &mut base.derive(0))?;
            (x, format!("random:n={n},log2_kappa={}", args.log2_kappa))
        }
        _ => return Err(CliError::Config("one of --file or --n is required".into())),
    };

    let mut rng = base.derive(1);
    let outcome = match method {
        PrepMethod::Naive => {
            let (op, state) = prep_naive(&x)?;
            let target = x.normalized_state()?;
            let fidelity = state.fidelity(&target)?.min(1.0);
            Outcome {
                output: state,
                fidelity,
                attempts: 1,
                success_probability: None,
                ledger: op.cost(),
            }
        }
        PrepMethod::Uniformish => {
            let report = prep_uniformish(&x, &mut rng, args.amplify)?;
            Outcome {
                output: report.output,
                fidelity: report.target_fidelity,
                attempts: report.attempts,
                success_probability: report.success_probability,
                ledger: report.ledger,
            }
        }
        PrepMethod::Thm1 => {
            let report = prep_thm1(&x, &mut rng)?;
            Outcome {
                output: report.output,
                fidelity: report.target_fidelity,
                attempts: report.attempts,
                success_probability: report.success_probability,
                ledger: report.ledger,
            }
        }
        PrepMethod::Thm2 => {
            let report = prep_thm2(&x, args.eps, variant, &mut rng)?;
            Outcome {
                output: report.output,
                fidelity: report.target_fidelity,
                attempts: report.attempts,
                success_probability: report.success_probability,
                ledger: report.ledger,
            }
        }
    };

    let histogram = if g.shots > 0 {
        Some(histogram_string(&measure(&outcome.output, g.shots, &mut base.derive(2))))
    } else {
        None
    };

    let record = PrepCliRecord {
        command: "prep",
        version: env!("CARGO_PKG_VERSION"),
        seed: g.seed,
        input: input_desc,
        n: x.len(),
        kappa: x.kappa(),
        q: lculab_core::decompose_bins(&x).q(),
        method: method.to_string(),
        eps: args.eps,
        variant: args.variant.clone(),
        amplify: args.amplify,
        cost_model: g.cost_model.label(),
        shots: g.shots,
        fidelity: outcome.fidelity,
        attempts: outcome.attempts,
        success_probability: outcome.success_probability,
        bound_check: verify_shift_bound(&x),
        histogram,
        oracle_queries: outcome.ledger.oracle_queries,
        input_preps: outcome.ledger.input_preps,
        elementary_ops: outcome.ledger.elementary_ops,
        estimator_samples: outcome.ledger.estimator_samples,
    };
    emit_records(&[record], PREP_COLUMNS, g.format, buf)
}
