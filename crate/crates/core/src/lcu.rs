//! Combining quantum states into normalized linear combinations.
//!
//! Two-state combiners come in an ancilla-Hadamard flavor (post-selective,
//! optionally amplitude-amplified) and a planar-rotation flavor whose
//! fractional power is realized by exact eigenphases, phase-estimation
//! style quantized phases, or repeated whole applications. Multi-state
//! combiners implement two select-prepare circuits with closed-form
//! acceptance probabilities, and a recursive pairwise tree reduces an
//! m-term combination to two-term rotations with tracked error growth.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::str::FromStr;

use ndarray::Array1;
use serde::Serialize;

use crate::error::{CoreError, Result};
use crate::estimate;
use crate::fracpow::{self, quantize_phase};
use crate::ledger::{CostLedger, CostModel};
use crate::linalg::{C64, PrepUnitary};
use crate::qcore::{amplitude_amplify, postselect, GoodSubspace, LinearUnitary, StateVector};
use crate::random::{random_real_state, RandomSource};

/// Norm below which a requested combination counts as cancelled.
pub const CANCEL_TOL: f64 = 1e-12;

/// Overlap magnitudes above 1 minus this count as aligned states. The
/// sine-based collinearity gate alone misses states identical up to
/// rounding noise, whose plane vector would cancel catastrophically.
pub const ALIGNED_TOL: f64 = 1e-12;

/// Hard cap on post-selection retries before the run is abandoned.
pub const MAX_ATTEMPTS: u64 = 1_000_000;

/// A state together with the ledger cost of preparing one copy of it.
#[derive(Debug, Clone)]
pub struct PreparedState {
    pub state: StateVector,
    pub prep_cost: CostLedger,
}

impl PreparedState {
    /// Tag a state with the default cost of one input preparation.
    pub fn new(state: StateVector) -> Self {
        PreparedState { state, prep_cost: CostLedger::preps(1) }
    }

    pub fn with_cost(state: StateVector, prep_cost: CostLedger) -> Self {
        PreparedState { state, prep_cost }
    }
}

/// One pairing step in a combination tree.
#[derive(Debug, Clone, Serialize)]
pub struct TreeNodeTrace {
    pub level: usize,
    pub index: usize,
    /// Norm of the unnormalized pair combination, the coefficient the
    /// node contributes upward.
    pub coeff: f64,
    /// Angle between the two child states, when a rotation was used.
    pub phi: Option<f64>,
    /// Rotation angle actually targeted, when a rotation was used.
    pub theta: Option<f64>,
}

/// Outcome of any combination method.
#[derive(Debug, Clone)]
pub struct CombineReport {
    pub output: StateVector,
    /// Fidelity against the directly computed normalized combination.
    pub target_fidelity: f64,
    /// Post-selection attempts consumed (1 for deterministic methods).
    pub attempts: u64,
    pub ledger: CostLedger,
    pub tree_trace: Vec<TreeNodeTrace>,
    /// Per-attempt acceptance probability for post-selective methods.
    pub success_probability: Option<f64>,
}

/// How a two-state rotation realizes the fractional power.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RotationVariant {
    /// Exact eigenphase arithmetic.
    Eig,
    /// Eigenphases rounded to a finite binary grid first.
    Pe,
    /// Whole applications of the rotation, wrapping around the circle.
    Iterate,
}

impl FromStr for RotationVariant {
    type Err = CoreError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "eig" => Ok(RotationVariant::Eig),
            "pe" => Ok(RotationVariant::Pe),
            "iterate" => Ok(RotationVariant::Iterate),
            other => Err(CoreError::InvalidArgument(format!("unknown rotation variant {other:?}"))),
        }
    }
}

impl fmt::Display for RotationVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RotationVariant::Eig => "eig",
            RotationVariant::Pe => "pe",
            RotationVariant::Iterate => "iterate",
        })
    }
}

/// Where the pair angles come from: read off the simulator state, or
/// estimated by the swap-test pipeline at the given precision (charged
/// to the ledger under the given cost model).
#[derive(Debug, Clone, Copy)]
pub enum AngleMode {
    Exact,
    Estimated { epsilon: f64, model: CostModel },
}

fn absorb_sign(state: &StateVector, coeff: f64) -> (StateVector, f64) {
    if coeff < 0.0 {
        (state.negated(), -coeff)
    } else {
        (state.clone(), coeff)
    }
}

fn combination(parts: &[(&StateVector, f64)]) -> Array1<C64> {
    let dim = parts[0].0.dim();
    let mut acc: Array1<C64> = Array1::zeros(dim);
    for (state, coeff) in parts {
        acc.iter_mut()
            .zip(state.amplitudes().iter())
            .for_each(|(a, z)| *a += z * *coeff);
    }
    acc
}

fn vec_norm(v: &Array1<C64>) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Repeat a Bernoulli(p) draw until it succeeds, returning the number of
/// attempts consumed.
pub(crate) fn run_postselection(p: f64, rng: &mut RandomSource) -> Result<u64> {
    for attempt in 1..=MAX_ATTEMPTS {
        if rng.gen_f64() < p {
            return Ok(attempt);
        }
    }
    Err(CoreError::NumericalFailure(format!(
        "post-selection did not succeed within {MAX_ATTEMPTS} attempts \
         (acceptance probability {p:.3e})"
    )))
}

/// (H on ancilla) (select prepare-a / prepare-b) (H on ancilla), acting on
/// an ancilla-major two-block register. From the joint ground state it
/// prepares (|0>(a+b) + |1>(a-b))/2.
struct TwoStateCircuit {
    ua: PrepUnitary,
    ub: PrepUnitary,
    cost: CostLedger,
}

impl TwoStateCircuit {
    fn hadamard_pairs(v: &Array1<C64>, n: usize) -> (Array1<C64>, Array1<C64>) {
        let mut h0 = Array1::zeros(n);
        let mut h1 = Array1::zeros(n);
        for s in 0..n {
            h0[s] = (v[s] + v[n + s]) * FRAC_1_SQRT_2;
            h1[s] = (v[s] - v[n + s]) * FRAC_1_SQRT_2;
        }
        (h0, h1)
    }

    fn merge(s0: &Array1<C64>, s1: &Array1<C64>, n: usize) -> Array1<C64> {
        let mut out = Array1::zeros(2 * n);
        for s in 0..n {
            out[s] = (s0[s] + s1[s]) * FRAC_1_SQRT_2;
            out[n + s] = (s0[s] - s1[s]) * FRAC_1_SQRT_2;
        }
        out
    }
}

impl LinearUnitary for TwoStateCircuit {
    fn dim(&self) -> usize {
        2 * self.ua.dim()
    }

    fn apply_vec(&self, v: &Array1<C64>) -> Array1<C64> {
        let n = self.ua.dim();
        let (h0, h1) = Self::hadamard_pairs(v, n);
        Self::merge(&self.ua.apply(&h0), &self.ub.apply(&h1), n)
    }

    fn apply_adjoint_vec(&self, v: &Array1<C64>) -> Array1<C64> {
        let n = self.ua.dim();
        let (h0, h1) = Self::hadamard_pairs(v, n);
        Self::merge(&self.ua.apply_adjoint(&h0), &self.ub.apply_adjoint(&h1), n)
    }

    fn application_cost(&self) -> CostLedger {
        self.cost
    }
}

/// Combine two states with unit weights through the ancilla-Hadamard
/// circuit, post-selecting the ancilla on 0. Without amplification the
/// ancilla is sampled until it lands in the accepting block; with it,
/// amplitude amplification boosts the accepting mass first.
pub fn combine2_hadamard(
    a: &PreparedState,
    b: &PreparedState,
    rng: &mut RandomSource,
    use_amplification: bool,
) -> Result<CombineReport> {
    if a.state.dim() != b.state.dim() {
        return Err(CoreError::DimMismatch { left: a.state.dim(), right: b.state.dim() });
    }
    let n = a.state.dim();
    let sum = combination(&[(&a.state, 1.0), (&b.state, 1.0)]);
    let sum_norm = vec_norm(&sum);
    if sum_norm < CANCEL_TOL {
        return Err(CoreError::ZeroSum { node: None });
    }
    let target = StateVector::new(sum)?;
    let success_p = (sum_norm / 2.0) * (sum_norm / 2.0);

    let circuit = TwoStateCircuit {
        ua: PrepUnitary::for_target(a.state.amplitudes())?,
        ub: PrepUnitary::for_target(b.state.amplitudes())?,
        cost: a.prep_cost + b.prep_cost + CostLedger::ops(2),
    };
    let initial = StateVector::basis(2 * n, 0)?;
    let good = GoodSubspace::Prefix(n);

    let prepared = circuit.apply_vec(initial.amplitudes());
    let prepared_state = StateVector::new(prepared)?;
    let observed = good.probability(&prepared_state);
    if (observed - success_p).abs() > 1e-9 {
        return Err(CoreError::NumericalFailure(format!(
            "accepting mass {observed:.6e} deviates from closed form {success_p:.6e}"
        )));
    }

    let mut ledger = CostLedger::ZERO;
    let (attempts, accepted) = if use_amplification {
        let (amplified, _rounds) =
            amplitude_amplify(&circuit, &good, success_p.sqrt(), &initial, &mut ledger)?;
        (1, amplified)
    } else {
        let attempts = run_postselection(success_p, rng)?;
        ledger += circuit.application_cost().scaled(attempts);
        (attempts, prepared_state)
    };
    let (_, output) = postselect(&accepted, 2, 0)?;
    let target_fidelity = output.fidelity(&target)?;

    Ok(CombineReport {
        output,
        target_fidelity,
        attempts,
        ledger,
        tree_trace: Vec::new(),
        success_probability: Some(success_p),
    })
}

fn angles_from_overlap(cos_phi: f64, alpha: f64, beta: f64) -> Result<(f64, f64, f64)> {
    let cos_phi = cos_phi.clamp(-1.0, 1.0);
    let sin_phi = (1.0 - cos_phi * cos_phi).max(0.0).sqrt();
    if sin_phi <= fracpow::COLLINEAR_TOL {
        return Err(CoreError::CollinearStates { sin_angle: sin_phi });
    }
    let norm = (alpha * alpha + beta * beta + 2.0 * alpha * beta * cos_phi).max(0.0).sqrt();
    if norm < CANCEL_TOL {
        return Err(CoreError::ZeroSum { node: None });
    }
    let phi = cos_phi.acos();
    let theta = ((alpha + beta * cos_phi) / norm).clamp(-1.0, 1.0).acos();
    Ok((phi, theta, theta / (2.0 * phi)))
}

/// Angles of the weighted combination alpha a + beta b: the angle phi
/// between the states, the angle theta from a to the combination, and the
/// fraction t = theta / (2 phi) of the double-reflection rotation that
/// reaches it. Weights must already be sign-absorbed.
pub fn weighted_angles(
    a: &StateVector,
    b: &StateVector,
    alpha: f64,
    beta: f64,
) -> Result<(f64, f64, f64)> {
    for s in [a, b] {
        let max_imag = s.max_imag();
        if max_imag > 1e-10 {
            return Err(CoreError::NonRealState { max_imag });
        }
    }
    if alpha < 0.0 || beta < 0.0 {
        return Err(CoreError::InvalidArgument(format!(
            "weights must be sign-absorbed to be nonnegative, got ({alpha}, {beta})"
        )));
    }
    if alpha == 0.0 && beta == 0.0 {
        return Err(CoreError::InvalidArgument("weights must not both be zero".into()));
    }
    angles_from_overlap(a.inner(b)?.re, alpha, beta)
}

fn pe_bits(t: f64, epsilon: f64) -> u32 {
    let raw = (2.0 * PI * t / epsilon).log2().ceil().max(1.0);
    (raw as u32).min(20)
}

struct PairOutcome {
    output: StateVector,
    coeff: f64,
    /// Cost of producing one copy of the combined state.
    per_copy: CostLedger,
    /// Cost paid once regardless of copies (angle estimation).
    one_time: CostLedger,
    phi: f64,
    theta: f64,
}

/// Rotate `a` toward `b` by the weighted-combination angle. Inputs must be
/// sign-absorbed, independent, real, with beta > 0.
fn combine_pair(
    a: &StateVector,
    a_prep: CostLedger,
    b: &StateVector,
    b_prep: CostLedger,
    alpha: f64,
    beta: f64,
    epsilon: f64,
    variant: RotationVariant,
    angles: AngleMode,
    rng: &mut RandomSource,
) -> Result<PairOutcome> {
    let combo = combination(&[(a, alpha), (b, beta)]);
    let coeff = vec_norm(&combo);
    if coeff < CANCEL_TOL {
        return Err(CoreError::ZeroSum { node: None });
    }
    let target = StateVector::new(combo)?;

    let exact_cos = a.inner(b)?.re.clamp(-1.0, 1.0);
    if 1.0 - exact_cos.abs() <= ALIGNED_TOL {
        return Err(CoreError::CollinearStates {
            sin_angle: (1.0 - exact_cos * exact_cos).max(0.0).sqrt(),
        });
    }

    // The double reflection (about b, then a) rotates the plane by the
    // full geometric angle 2 phi; tracking that angle rather than its
    // principal-branch alias keeps obtuse pairs rotating forward.
    let rotation = fracpow::rotation_generator(a, b)?;

    let mut one_time = CostLedger::ZERO;
    let cos_phi = match angles {
        AngleMode::Exact => exact_cos,
        AngleMode::Estimated { epsilon: est_eps, model } => {
            estimate::overlap_signed(a, b, est_eps, rng, &mut one_time, model)?.value
        }
    };
    let (phi, theta, t) = angles_from_overlap(cos_phi, alpha, beta)?;

    let reflection_cost = a_prep.scaled(2) + b_prep.scaled(2) + CostLedger::ops(2);
    let (candidate, reverse, route_cost) = match variant {
        RotationVariant::Eig => {
            let scale = (1.0 / epsilon).ceil() as u64;
            (
                rotation.apply_power(a, t),
                rotation.apply_power(a, -t),
                reflection_cost.scaled(scale),
            )
        }
        RotationVariant::Pe => {
            let bits = pe_bits(t, epsilon);
            let mut quantized = rotation.clone();
            quantized.angle = quantize_phase(rotation.angle, bits);
            (
                quantized.apply_power(a, t),
                quantized.apply_power(a, -t),
                reflection_cost.scaled(1u64 << bits),
            )
        }
        RotationVariant::Iterate => {
            let tol = epsilon.sqrt();
            let max_k = ((8.0 * PI / tol).ceil() as u64).max(64);
            let (k, _err) = fracpow::frac_power_iterate(&rotation, t, tol, max_k)?;
            (
                rotation.apply_power(a, k as f64),
                rotation.apply_power(a, -(k as f64)),
                reflection_cost.scaled(k),
            )
        }
    };

    let fid_forward = candidate.fidelity(&target)?;
    let fid_reverse = reverse.fidelity(&target)?;
    let output = if fid_reverse > fid_forward { reverse } else { candidate };

    Ok(PairOutcome { output, coeff, per_copy: a_prep + route_cost, one_time, phi, theta })
}

/// Combine two states as a planar rotation of `a` toward `b` by the
/// weighted-combination angle, with the fractional power realized by the
/// selected variant. Negative weights are absorbed into the states. The
/// rotation direction is auto-corrected: whichever of the power and its
/// inverse lands closer to the exact combination is returned.
#[allow(clippy::too_many_arguments)]
pub fn combine2_rotation(
    a: &PreparedState,
    b: &PreparedState,
    alpha: f64,
    beta: f64,
    epsilon: f64,
    variant: RotationVariant,
    angles: AngleMode,
    rng: &mut RandomSource,
) -> Result<CombineReport> {
    if a.state.dim() != b.state.dim() {
        return Err(CoreError::DimMismatch { left: a.state.dim(), right: b.state.dim() });
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(CoreError::InvalidArgument(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    let (a_state, alpha) = absorb_sign(&a.state, alpha);
    let (b_state, beta) = absorb_sign(&b.state, beta);
    if alpha == 0.0 && beta == 0.0 {
        return Err(CoreError::InvalidArgument("weights must not both be zero".into()));
    }

    // One-sided weights need no rotation at all.
    if beta == 0.0 || alpha == 0.0 {
        let (output, coeff, prep) = if beta == 0.0 {
            (a_state, alpha, a.prep_cost)
        } else {
            (b_state, beta, b.prep_cost)
        };
        return Ok(CombineReport {
            output,
            target_fidelity: 1.0,
            attempts: 1,
            ledger: prep,
            tree_trace: vec![TreeNodeTrace {
                level: 0,
                index: 0,
                coeff,
                phi: None,
                theta: None,
            }],
            success_probability: None,
        });
    }

    let outcome = combine_pair(
        &a_state,
        a.prep_cost,
        &b_state,
        b.prep_cost,
        alpha,
        beta,
        epsilon,
        variant,
        angles,
        rng,
    )?;
    let target = StateVector::new(combination(&[(&a_state, alpha), (&b_state, beta)]))?;
    let target_fidelity = outcome.output.fidelity(&target)?;

    Ok(CombineReport {
        output: outcome.output,
        target_fidelity,
        attempts: 1,
        ledger: outcome.per_copy + outcome.one_time,
        tree_trace: vec![TreeNodeTrace {
            level: 0,
            index: 0,
            coeff: outcome.coeff,
            phi: Some(outcome.phi),
            theta: Some(outcome.theta),
        }],
        success_probability: None,
    })
}

#[derive(Clone, Copy)]
enum MultiVersion {
    V1,
    V2,
}

/// Select-prepare circuit on (ancilla blocks) x (index) x (system),
/// ancilla-major: an index-register unitary, per-index controlled state
/// preparation, an optional per-index ancilla rotation, and the adjoint
/// index unitary.
struct SelectPrepCircuit {
    index_unitary: PrepUnitary,
    preps: Vec<PrepUnitary>,
    /// (cos, sin) of the accept-ancilla rotation per index.
    rotations: Option<Vec<(f64, f64)>>,
    blocks: usize,
    d: usize,
    cost: CostLedger,
}

impl SelectPrepCircuit {
    fn m(&self) -> usize {
        self.preps.len()
    }

    fn index_stage(&self, v: &mut Array1<C64>, adjoint: bool) {
        let (m, d) = (self.m(), self.d);
        let mut w = Array1::zeros(m);
        for blk in 0..self.blocks {
            for s in 0..d {
                for j in 0..m {
                    w[j] = v[(blk * m + j) * d + s];
                }
                let out = if adjoint {
                    self.index_unitary.apply_adjoint(&w)
                } else {
                    self.index_unitary.apply(&w)
                };
                for j in 0..m {
                    v[(blk * m + j) * d + s] = out[j];
                }
            }
        }
    }

    fn prep_stage(&self, v: &mut Array1<C64>, adjoint: bool) {
        let (m, d) = (self.m(), self.d);
        for blk in 0..self.blocks {
            for j in 0..m {
                let base = (blk * m + j) * d;
                let block = Array1::from_shape_fn(d, |s| v[base + s]);
                let out = if adjoint {
                    self.preps[j].apply_adjoint(&block)
                } else {
                    self.preps[j].apply(&block)
                };
                for s in 0..d {
                    v[base + s] = out[s];
                }
            }
        }
    }

    fn rotation_stage(&self, v: &mut Array1<C64>, adjoint: bool) {
        let Some(rotations) = &self.rotations else { return };
        let (m, d) = (self.m(), self.d);
        for (j, &(c, s_)) in rotations.iter().enumerate() {
            let sgn = if adjoint { -s_ } else { s_ };
            for s in 0..d {
                let i0 = j * d + s;
                let i1 = (m + j) * d + s;
                let (x0, x1) = (v[i0], v[i1]);
                v[i0] = x0 * c - x1 * sgn;
                v[i1] = x0 * sgn + x1 * c;
            }
        }
    }
}

impl LinearUnitary for SelectPrepCircuit {
    fn dim(&self) -> usize {
        self.blocks * self.m() * self.d
    }

    fn apply_vec(&self, v: &Array1<C64>) -> Array1<C64> {
        let mut v = v.clone();
        self.index_stage(&mut v, false);
        self.prep_stage(&mut v, false);
        self.rotation_stage(&mut v, false);
        self.index_stage(&mut v, true);
        v
    }

    fn apply_adjoint_vec(&self, v: &Array1<C64>) -> Array1<C64> {
        let mut v = v.clone();
        self.index_stage(&mut v, false);
        self.rotation_stage(&mut v, true);
        self.prep_stage(&mut v, true);
        self.index_stage(&mut v, true);
        v
    }

    fn application_cost(&self) -> CostLedger {
        self.cost
    }
}

fn multi_combine(
    states: &[PreparedState],
    coeffs: &[f64],
    rng: &mut RandomSource,
    use_amplification: bool,
    version: MultiVersion,
) -> Result<CombineReport> {
    let m = states.len();
    if m < 2 {
        return Err(CoreError::InvalidArgument(format!("need at least two states, got {m}")));
    }
    if coeffs.len() != m {
        return Err(CoreError::InvalidArgument(format!(
            "{m} states but {} coefficients",
            coeffs.len()
        )));
    }
    let d = states[0].state.dim();
    for s in states {
        if s.state.dim() != d {
            return Err(CoreError::DimMismatch { left: d, right: s.state.dim() });
        }
    }
    let absorbed: Vec<(StateVector, f64)> = states
        .iter()
        .zip(coeffs)
        .map(|(s, &c)| absorb_sign(&s.state, c))
        .collect();
    if absorbed.iter().all(|(_, c)| *c == 0.0) {
        return Err(CoreError::InvalidArgument("coefficients must not all be zero".into()));
    }

    let parts: Vec<(&StateVector, f64)> = absorbed.iter().map(|(s, c)| (s, *c)).collect();
    let y = combination(&parts);
    let y_norm = vec_norm(&y);
    if y_norm < CANCEL_TOL {
        return Err(CoreError::ZeroSum { node: None });
    }
    let target = StateVector::new(y)?;

    let preps: Vec<PrepUnitary> = absorbed
        .iter()
        .map(|(s, _)| PrepUnitary::for_target(s.amplitudes()))
        .collect::<Result<_>>()?;
    let prep_total: CostLedger = states.iter().map(|s| s.prep_cost).sum();

    let (blocks, index_target, rotations, stage_ops, success_p) = match version {
        MultiVersion::V1 => {
            let max = absorbed.iter().map(|(_, c)| *c).fold(0.0_f64, f64::max);
            let t = 1.0 / max;
            let rotations: Vec<(f64, f64)> = absorbed
                .iter()
                .map(|(_, c)| {
                    let cos = t * c;
                    (cos, (1.0 - cos * cos).max(0.0).sqrt())
                })
                .collect();
            let uniform: Vec<C64> = vec![C64::new(1.0 / (m as f64).sqrt(), 0.0); m];
            let success = y_norm * y_norm / (max * max * (m * m) as f64);
            (2, uniform, Some(rotations), 3, success)
        }
        MultiVersion::V2 => {
            let s_total: f64 = absorbed.iter().map(|(_, c)| *c).sum();
            let weights: Vec<C64> = absorbed
                .iter()
                .map(|(_, c)| C64::new((c / s_total).sqrt(), 0.0))
                .collect();
            let success = y_norm * y_norm / (s_total * s_total);
            (1, weights, None, 2, success)
        }
    };

    let circuit = SelectPrepCircuit {
        index_unitary: PrepUnitary::for_target(&Array1::from_vec(index_target))?,
        preps,
        rotations,
        blocks,
        d,
        cost: prep_total + CostLedger::ops(stage_ops),
    };
    let initial = StateVector::basis(circuit.dim(), 0)?;
    let good = GoodSubspace::Prefix(d);

    let prepared = circuit.apply_vec(initial.amplitudes());
    let prepared_state = StateVector::new(prepared)?;
    let observed = good.probability(&prepared_state);
    if (observed - success_p).abs() > 1e-9 {
        return Err(CoreError::NumericalFailure(format!(
            "accepting mass {observed:.6e} deviates from closed form {success_p:.6e}"
        )));
    }

    let mut ledger = CostLedger::ZERO;
    let (attempts, accepted) = if use_amplification {
        let (amplified, _rounds) =
            amplitude_amplify(&circuit, &good, success_p.sqrt(), &initial, &mut ledger)?;
        (1, amplified)
    } else {
        let attempts = run_postselection(success_p, rng)?;
        ledger += circuit.application_cost().scaled(attempts);
        (attempts, prepared_state)
    };
    let (_, output) = postselect(&accepted, blocks * m, 0)?;
    let target_fidelity = output.fidelity(&target)?;

    Ok(CombineReport {
        output,
        target_fidelity,
        attempts,
        ledger,
        tree_trace: Vec::new(),
        success_probability: Some(success_p),
    })
}

/// Multi-state combiner with a uniform index register and an acceptance
/// ancilla rotated by t alpha_j per branch, t = 1/max alpha. Accepts with
/// probability ||y||^2 / (max^2 m^2).
pub fn combine_multi_v1(
    states: &[PreparedState],
    coeffs: &[f64],
    rng: &mut RandomSource,
    use_amplification: bool,
) -> Result<CombineReport> {
    multi_combine(states, coeffs, rng, use_amplification, MultiVersion::V1)
}

/// Multi-state combiner whose index register carries sqrt(alpha_j / s)
/// amplitudes, s = sum alpha. Accepts with probability ||y||^2 / s^2,
/// never below the uniform-register version on the same input.
pub fn combine_multi_v2(
    states: &[PreparedState],
    coeffs: &[f64],
    rng: &mut RandomSource,
    use_amplification: bool,
) -> Result<CombineReport> {
    multi_combine(states, coeffs, rng, use_amplification, MultiVersion::V2)
}

struct TreeNode {
    state: StateVector,
    coeff: f64,
    prep: CostLedger,
}

/// Combine m states by a balanced pairwise tree of two-state rotations,
/// each at precision `epsilon0`. Non-power-of-two inputs are padded with
/// zero-coefficient copies; zero-coefficient children pass through.
/// Infidelity grows at most linearly in the leaf count.
pub fn combine_recursive(
    states: &[PreparedState],
    coeffs: &[f64],
    epsilon0: f64,
    variant: RotationVariant,
    angles: AngleMode,
    rng: &mut RandomSource,
) -> Result<CombineReport> {
    let m = states.len();
    if m < 2 {
        return Err(CoreError::InvalidArgument(format!("need at least two states, got {m}")));
    }
    if coeffs.len() != m {
        return Err(CoreError::InvalidArgument(format!(
            "{m} states but {} coefficients",
            coeffs.len()
        )));
    }
    if !(epsilon0 > 0.0 && epsilon0 < 0.5) {
        return Err(CoreError::InvalidArgument(format!(
            "per-node epsilon must lie in (0, 1/2), got {epsilon0}"
        )));
    }
    let d = states[0].state.dim();
    for s in states {
        if s.state.dim() != d {
            return Err(CoreError::DimMismatch { left: d, right: s.state.dim() });
        }
    }

    let mut nodes: Vec<TreeNode> = states
        .iter()
        .zip(coeffs)
        .map(|(s, &c)| {
            let (state, coeff) = absorb_sign(&s.state, c);
            TreeNode { state, coeff, prep: s.prep_cost }
        })
        .collect();
    if nodes.iter().all(|n| n.coeff == 0.0) {
        return Err(CoreError::InvalidArgument("coefficients must not all be zero".into()));
    }

    let parts: Vec<(&StateVector, f64)> = nodes.iter().map(|n| (&n.state, n.coeff)).collect();
    let overall = combination(&parts);
    if vec_norm(&overall) < CANCEL_TOL {
        return Err(CoreError::ZeroSum { node: None });
    }
    let target = StateVector::new(overall)?;

    while !nodes.len().is_power_of_two() {
        nodes.push(TreeNode {
            state: states[0].state.clone(),
            coeff: 0.0,
            prep: states[0].prep_cost,
        });
    }

    let mut trace = Vec::new();
    let mut one_time = CostLedger::ZERO;
    let mut level = 0;
    while nodes.len() > 1 {
        let mut next = Vec::with_capacity(nodes.len() / 2);
        for (index, pair) in nodes.chunks_exact(2).enumerate() {
            let (l, r) = (&pair[0], &pair[1]);
            let parent = if l.coeff == 0.0 && r.coeff == 0.0 {
                trace.push(TreeNodeTrace { level, index, coeff: 0.0, phi: None, theta: None });
                TreeNode { state: l.state.clone(), coeff: 0.0, prep: l.prep }
            } else if r.coeff == 0.0 || l.coeff == 0.0 {
                let live = if r.coeff == 0.0 { l } else { r };
                trace.push(TreeNodeTrace {
                    level,
                    index,
                    coeff: live.coeff,
                    phi: None,
                    theta: None,
                });
                TreeNode { state: live.state.clone(), coeff: live.coeff, prep: live.prep }
            } else {
                let combo = combination(&[(&l.state, l.coeff), (&r.state, r.coeff)]);
                let coeff = vec_norm(&combo);
                if coeff < CANCEL_TOL {
                    return Err(CoreError::ZeroSum { node: Some(format!("L{level}.N{index}")) });
                }
                let cos = l.state.inner(&r.state)?.re.clamp(-1.0, 1.0);
                if 1.0 - cos.abs() <= ALIGNED_TOL {
                    // Aligned children collapse to a single preparation.
                    trace.push(TreeNodeTrace {
                        level,
                        index,
                        coeff,
                        phi: Some(cos.acos()),
                        theta: None,
                    });
                    TreeNode { state: StateVector::new(combo)?, coeff, prep: l.prep }
                } else {
                    let outcome = combine_pair(
                        &l.state, l.prep, &r.state, r.prep, l.coeff, r.coeff, epsilon0,
                        variant, angles, rng,
                    )?;
                    one_time += outcome.one_time;
                    trace.push(TreeNodeTrace {
                        level,
                        index,
                        coeff: outcome.coeff,
                        phi: Some(outcome.phi),
                        theta: Some(outcome.theta),
                    });
                    TreeNode { state: outcome.output, coeff: outcome.coeff, prep: outcome.per_copy }
                }
            };
            next.push(parent);
        }
        nodes = next;
        level += 1;
    }

    let root = &nodes[0];
    let target_fidelity = root.state.fidelity(&target)?;
    Ok(CombineReport {
        output: root.state.clone(),
        target_fidelity,
        attempts: 1,
        ledger: root.prep + one_time,
        tree_trace: trace,
        success_probability: None,
    })
}

/// Coefficient shapes for the benchmark grid.
#[derive(Debug, Clone, Copy, Serialize)]
pub enum CoeffProfile {
    Uniform,
    /// Coefficients spaced geometrically from 1 up to `ratio`.
    Geometric { ratio: f64 },
}

impl CoeffProfile {
    pub fn coeffs(&self, m: usize) -> Vec<f64> {
        match self {
            CoeffProfile::Uniform => vec![1.0; m],
            CoeffProfile::Geometric { ratio } => (0..m)
                .map(|j| ratio.powf(j as f64 / (m as f64 - 1.0)))
                .collect(),
        }
    }
}

impl fmt::Display for CoeffProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoeffProfile::Uniform => f.write_str("uniform"),
            CoeffProfile::Geometric { ratio } => write!(f, "geometric:{ratio:.0e}"),
        }
    }
}

/// Input-state families for the benchmark grid.
#[derive(Debug, Clone, Copy, Serialize)]
pub enum StateFamily {
    RandomReal,
    Orthonormal,
    NearIdentical,
}

impl StateFamily {
    pub fn draw(&self, m: usize, dim: usize, rng: &mut RandomSource) -> Result<Vec<PreparedState>> {
        let states = match self {
            StateFamily::RandomReal => (0..m)
                .map(|_| random_real_state(dim, rng))
                .collect::<Result<Vec<_>>>()?,
            StateFamily::Orthonormal => {
                if m > dim {
                    return Err(CoreError::InvalidArgument(format!(
                        "cannot draw {m} orthonormal states in dimension {dim}"
                    )));
                }
                let mut basis: Vec<StateVector> = Vec::with_capacity(m);
                while basis.len() < m {
                    let mut raw = random_real_state(dim, rng)?.amplitudes().clone();
                    for prev in &basis {
                        let ov: C64 = prev
                            .amplitudes()
                            .iter()
                            .zip(raw.iter())
                            .map(|(x, y)| x.conj() * y)
                            .sum();
                        raw.iter_mut()
                            .zip(prev.amplitudes().iter())
                            .for_each(|(y, x)| *y -= ov * x);
                    }
                    if vec_norm(&raw) > 1e-6 {
                        basis.push(StateVector::new(raw)?);
                    }
                }
                basis
            }
            StateFamily::NearIdentical => {
                let base = random_real_state(dim, rng)?;
                (0..m)
                    .map(|_| {
                        let noise = random_real_state(dim, rng)?;
                        let raw = base.amplitudes() + &noise.amplitudes().mapv(|z| z * 0.01);
                        StateVector::new(raw)
                    })
                    .collect::<Result<Vec<_>>>()?
            }
        };
        Ok(states.into_iter().map(PreparedState::new).collect())
    }
}

impl fmt::Display for StateFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StateFamily::RandomReal => "random-real",
            StateFamily::Orthonormal => "orthonormal",
            StateFamily::NearIdentical => "near-identical",
        })
    }
}

/// One cell of the method-comparison grid.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BenchCell {
    pub m: usize,
    pub dim: usize,
    pub profile: CoeffProfile,
    pub family: StateFamily,
}

/// One method's outcome on one cell.
#[derive(Debug, Clone, Serialize)]
pub struct BenchRecord {
    pub m: usize,
    pub dim: usize,
    pub profile: String,
    pub family: String,
    pub method: String,
    pub attempts: u64,
    pub target_fidelity: f64,
    pub success_probability: Option<f64>,
    pub ledger: CostLedger,
    pub failure: Option<String>,
}

fn bench_record(cell: &BenchCell, method: &str, outcome: Result<CombineReport>) -> BenchRecord {
    let (attempts, fidelity, success, ledger, failure) = match outcome {
        Ok(report) => (
            report.attempts,
            report.target_fidelity,
            report.success_probability,
            report.ledger,
            None,
        ),
        Err(err) => (0, 0.0, None, CostLedger::ZERO, Some(err.kind().to_string())),
    };
    BenchRecord {
        m: cell.m,
        dim: cell.dim,
        profile: cell.profile.to_string(),
        family: cell.family.to_string(),
        method: method.to_string(),
        attempts,
        target_fidelity: fidelity,
        success_probability: success,
        ledger,
        failure,
    }
}

/// Run the two multi-state circuits and the recursive tree on one cell.
/// Callers that fan cells out across threads should hand each cell an
/// rng derived from its grid index to keep the output independent of
/// scheduling.
pub fn table1_bench_cell(
    cell: &BenchCell,
    epsilon0: f64,
    rng: &mut RandomSource,
) -> Result<Vec<BenchRecord>> {
    let states = cell.family.draw(cell.m, cell.dim, rng)?;
    let coeffs = cell.profile.coeffs(cell.m);
    Ok(vec![
        bench_record(cell, "multi-v1", combine_multi_v1(&states, &coeffs, rng, false)),
        bench_record(cell, "multi-v2", combine_multi_v2(&states, &coeffs, rng, false)),
        bench_record(
            cell,
            "recursive",
            combine_recursive(
                &states,
                &coeffs,
                epsilon0,
                RotationVariant::Eig,
                AngleMode::Exact,
                rng,
            ),
        ),
    ])
}

/// Run the two multi-state circuits and the recursive tree over a grid of
/// cells, recording attempts, costs, and fidelities per method.
pub fn table1_bench(
    cells: &[BenchCell],
    epsilon0: f64,
    rng: &mut RandomSource,
) -> Result<Vec<BenchRecord>> {
    let mut records = Vec::with_capacity(cells.len() * 3);
    for (i, cell) in cells.iter().enumerate() {
        let mut cell_rng = rng.derive(i as u64);
        records.extend(table1_bench_cell(cell, epsilon0, &mut cell_rng)?);
    }
    Ok(records)
}
