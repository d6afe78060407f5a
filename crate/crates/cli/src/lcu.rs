//! The `lcu` subcommand: combine random input states as a weighted sum
//! with one of the circuit routes and report the outcome.

use clap::Args;
use lculab_core::{
    combine2_hadamard, combine2_rotation, combine_multi_v1, combine_multi_v2, combine_recursive,
    measure, AngleMode, CombineReport, RandomSource, RotationVariant, StateFamily,
};
use serde::Serialize;

use crate::emit::{emit_records, histogram_string};
use crate::error::CliError;
use crate::input::parse_list;
use crate::Globals;

#[derive(Args, Debug)]
pub struct LcuArgs {
    /// hadamard, rotation-eig, rotation-pe, rotation-iterate, multi-v1,
    /// multi-v2, or recursive.
    #[arg(long, default_value = "multi-v2")]
    pub method: String,
    /// Number of input states.
    #[arg(long, default_value_t = 2)]
    pub m: usize,
    /// State dimension.
    #[arg(long, default_value_t = 8)]
    pub dim: usize,
    /// Comma-separated combination coefficients; default all ones.
    #[arg(long)]
    pub coeffs: Option<String>,
    /// Draw mutually orthonormal input states.
    #[arg(long)]
    pub orthonormal: bool,
    /// Draw nearly identical input states.
    #[arg(long = "near-identical", conflicts_with = "orthonormal")]
    pub near_identical: bool,
    /// Rotation closeness parameter; per-leaf budget for the recursive tree.
    #[arg(long, default_value_t = 0.01)]
    pub eps: f64,
    /// Fractional-power route for rotation pairs inside the recursive
    /// tree: eig, pe, or iterate.
    #[arg(long, default_value = "eig")]
    pub variant: String,
    /// Amplify instead of repeating postselection where supported.
    #[arg(long)]
    pub amplify: bool,
    /// Derive combination angles from sampled overlap estimates instead
    /// of exact arithmetic.
    #[arg(long = "estimate-angles")]
    pub estimate_angles: bool,
}

enum LcuMethod {
    Hadamard,
    Rotation(RotationVariant),
    MultiV1,
    MultiV2,
    Recursive,
}

fn parse_method(s: &str) -> Result<LcuMethod, CliError> {
    match s {
        "hadamard" => Ok(LcuMethod::Hadamard),
        "rotation-eig" => Ok(LcuMethod::Rotation(RotationVariant::Eig)),
        "rotation-pe" => Ok(LcuMethod::Rotation(RotationVariant::Pe)),
        "rotation-iterate" => Ok(LcuMethod::Rotation(RotationVariant::Iterate)),
        "multi-v1" => Ok(LcuMethod::MultiV1),
        "multi-v2" => Ok(LcuMethod::MultiV2),
        "recursive" => Ok(LcuMethod::Recursive),
        other => Err(CliError::Config(format!("unknown lcu method {other:?}"))),
    }
}

pub fn parse_variant(s: &str) -> Result<RotationVariant, CliError> {
    match s {
        "eig" => Ok(RotationVariant::Eig),
        "pe" => Ok(RotationVariant::Pe),
        "iterate" => Ok(RotationVariant::Iterate),
        other => Err(CliError::Config(format!("unknown variant {other:?}"))),
    }
}

#[derive(Serialize)]
struct LcuRecord {
    command: &'static str,
    version: &'static str,
    seed: u64,
    method: String,
    m: usize,
    dim: usize,
    family: String,
    coeffs: Vec<f64>,
    eps: f64,
    variant: String,
    amplify: bool,
    estimate_angles: bool,
    cost_model: &'static str,
    shots: u64,
    attempts: u64,
    target_fidelity: f64,
    success_probability: Option<f64>,
    histogram: Option<String>,
    oracle_queries: u64,
    input_preps: u64,
    elementary_ops: u64,
    estimator_samples: u64,
}

const LCU_COLUMNS: &[&str] = &[
    "command",
    "version",
    "seed",
    "method",
    "m",
    "dim",
    "family",
    "coeffs",
    "eps",
    "variant",
    "amplify",
    "estimate_angles",
    "cost_model",
    "shots",
    "attempts",
    "target_fidelity",
    "success_probability",
    "histogram",
    "oracle_queries",
    "input_preps",
    "elementary_ops",
    "estimator_samples",
];

pub fn run(args: &LcuArgs, g: &Globals, buf: &mut Vec<u8>) -> Result<(), CliError> {
    let method = parse_method(&args.method)?;
    let variant = parse_variant(&args.variant)?;
    let coeffs: Vec<f64> = match &args.coeffs {
        Some(raw) => parse_list(raw, "--coeffs")?,
        None => vec![1.0; args.m],
    };
    if coeffs.len() != args.m {
        return Err(CliError::Config(format!(
            "--coeffs has {} entries but --m is {}",
            coeffs.len(),
            args.m
        )));
    }
    let two_state = matches!(method, LcuMethod::Hadamard | LcuMethod::Rotation(_));
    if two_state && args.m != 2 {
        return Err(CliError::Config(format!(
            "{} combines exactly two states; got --m {}",
            args.method, args.m
        )));
    }
    if args.amplify && !matches!(method, LcuMethod::Hadamard | LcuMethod::MultiV1 | LcuMethod::MultiV2)
    {
        return Err(CliError::Config(format!(
            "--amplify is not supported by {}",
            args.method
        )));
    }
    if args.estimate_angles && !matches!(method, LcuMethod::Rotation(_) | LcuMethod::Recursive) {
        return Err(CliError::Config(format!(
            "--estimate-angles is not supported by {}",
            args.method
        )));
    }
    if matches!(method, LcuMethod::Hadamard) && coeffs[0] != coeffs[1] {
        return Err(CliError::Config(
            "the hadamard route combines two states with equal weights".into(),
        ));
    }

    let family = if args.orthonormal {
        StateFamily::Orthonormal
    } else if args.near_identical {
        StateFamily::NearIdentical
    } else {
        StateFamily::RandomReal
    };
    let angles = if args.estimate_angles {
        AngleMode::Estimated { epsilon: args.eps, model: g.cost_model.to_model() }
    } else {
        AngleMode::Exact
    };

    let base = RandomSource::new(g.seed);
    let states = family.draw(args.m, args.dim, &mut base.derive(0))?;
    let mut rng = base.derive(1);
    let report: CombineReport = match method {
        LcuMethod::Hadamard => {
            combine2_hadamard(&states[0], &states[1], &mut rng, args.amplify)?
        }
        LcuMethod::Rotation(v) => combine2_rotation(
            &states[0],
            &states[1],
            coeffs[0],
            coeffs[1],
            args.eps,
            v,
            angles,
            &mut rng,
        )?,
        LcuMethod::MultiV1 => combine_multi_v1(&states, &coeffs, &mut rng, args.amplify)?,
        LcuMethod::MultiV2 => combine_multi_v2(&states, &coeffs, &mut rng, args.amplify)?,
        LcuMethod::Recursive => {
            combine_recursive(&states, &coeffs, args.eps, variant, angles, &mut rng)?
        }
    };

    let histogram = if g.shots > 0 {
        Some(histogram_string(&measure(&report.output, g.shots, &mut base.derive(2))))
    } else {
        None
    };

    let record = LcuRecord {
        command: "lcu",
        version: env!("CARGO_PKG_VERSION"),
        seed: g.seed,
        method: args.method.clone(),
        m: args.m,
        dim: args.dim,
        family: family.to_string(),
        coeffs,
        eps: args.eps,
        variant: args.variant.clone(),
        amplify: args.amplify,
        estimate_angles: args.estimate_angles,
        cost_model: g.cost_model.label(),
        shots: g.shots,
        attempts: report.attempts,
        target_fidelity: report.target_fidelity,
        success_probability: report.success_probability,
        histogram,
        oracle_queries: report.ledger.oracle_queries,
        input_preps: report.ledger.input_preps,
        elementary_ops: report.ledger.elementary_ops,
        estimator_samples: report.ledger.estimator_samples,
    };
    emit_records(&[record], LCU_COLUMNS, g.format, buf)
}
