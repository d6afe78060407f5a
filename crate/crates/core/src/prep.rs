//! Encoding a classical real vector as a quantum state: a dense
//! Householder baseline, an amplitude-rotation circuit whose cost tracks
//! the dynamic range kappa(x), a dyadic-bin decomposition route, and a
//! sign-shift route that trades a two-state combination for kappa(z) <= 2.

use std::fmt;
use std::str::FromStr;

use ndarray::Array1;
use serde::Serialize;

use crate::error::{CoreError, Result};
use crate::lcu::{
    combine2_rotation, combine_multi_v1, combine_multi_v2, run_postselection, AngleMode,
    CombineReport, PreparedState, RotationVariant,
};
use crate::ledger::CostLedger;
use crate::linalg::{C64, PrepUnitary};
use crate::qcore::{
    amplitude_amplify, postselect, GoodSubspace, LinearUnitary, StateVector, UnitaryOp,
};
use crate::random::RandomSource;

/// A real input vector together with its dynamic-range statistics.
#[derive(Debug, Clone)]
pub struct ClassicalVector {
    entries: Array1<f64>,
    max_abs: f64,
    min_abs_nonzero: f64,
    norm: f64,
    zero_entries: usize,
}

impl ClassicalVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(CoreError::InvalidArgument("vector must have at least one entry".into()));
        }
        if let Some(k) = entries.iter().position(|v| !v.is_finite()) {
            return Err(CoreError::InvalidArgument(format!(
                "entry {k} is not finite: {}",
                entries[k]
            )));
        }
        let mut max_abs = 0.0f64;
        let mut min_abs_nonzero = f64::INFINITY;
        let mut norm_sq = 0.0;
        let mut zero_entries = 0usize;
        for &v in &entries {
            let a = v.abs();
            norm_sq += a * a;
            if a == 0.0 {
                zero_entries += 1;
            } else {
                max_abs = max_abs.max(a);
                min_abs_nonzero = min_abs_nonzero.min(a);
            }
        }
        if max_abs == 0.0 {
            return Err(CoreError::ZeroVector { norm: 0.0 });
        }
        Ok(ClassicalVector {
            entries: Array1::from_vec(entries),
            max_abs,
            min_abs_nonzero,
            norm: norm_sq.sqrt(),
            zero_entries,
        })
    }

    pub fn entries(&self) -> &Array1<f64> {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn max_abs(&self) -> f64 {
        self.max_abs
    }

    pub fn min_abs_nonzero(&self) -> f64 {
        self.min_abs_nonzero
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    /// Dynamic range max|x_k| / min nonzero |x_k|, always >= 1.
    pub fn kappa(&self) -> f64 {
        self.max_abs / self.min_abs_nonzero
    }

    pub fn all_nonzero(&self) -> bool {
        self.zero_entries == 0
    }

    pub fn support(&self) -> Vec<usize> {
        self.entries
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0.0)
            .map(|(k, _)| k)
            .collect()
    }

    /// The target state x / ||x|| as a statevector.
    pub fn normalized_state(&self) -> Result<StateVector> {
        let amps: Array1<C64> = self.entries.mapv(|v| C64::new(v / self.norm, 0.0));
        StateVector::new(amps)
    }
}

/// Partition of a vector into dyadic magnitude bins, each with dynamic
/// range at most 2. Bins may be empty when the magnitude profile has
/// gaps; entries are copied bitwise so the bins sum back to x exactly.
#[derive(Debug, Clone)]
pub struct BinDecomposition {
    pub bins: Vec<Array1<f64>>,
    /// Magnitude range [lo, hi) covered by each bin; the last is closed.
    pub bin_intervals: Vec<(f64, f64)>,
    /// ||y_j|| / ||x|| per bin.
    pub lambdas: Vec<f64>,
}

impl BinDecomposition {
    pub fn q(&self) -> usize {
        self.bins.len()
    }

    /// Indices of bins that actually hold entries.
    pub fn occupied(&self) -> Vec<usize> {
        self.lambdas
            .iter()
            .enumerate()
            .filter(|(_, &l)| l > 0.0)
            .map(|(j, _)| j)
            .collect()
    }
}

/// Split x into q = max(1, ceil(log2 kappa)) bins by entry magnitude,
/// bin j covering [2^(j-1) min, 2^j min) with the last bin closed so an
/// exact power-of-two kappa keeps the max entry inside.
pub fn decompose_bins(x: &ClassicalVector) -> BinDecomposition {
    let n = x.len();
    let min = x.min_abs_nonzero();
    let kappa = x.kappa();
    let mut q = 1usize;
    while (2.0f64).powi(q as i32) < kappa {
        q += 1;
    }
    let mut edges = Vec::with_capacity(q + 1);
    let mut e = min;
    for _ in 0..=q {
        edges.push(e);
        e *= 2.0;
    }
    let mut bins = vec![Array1::zeros(n); q];
    for (k, &v) in x.entries().iter().enumerate() {
        if v == 0.0 {
            continue;
        }
        let a = v.abs();
        let mut j = q;
        for cand in 1..q {
            if a < edges[cand] {
                j = cand;
                break;
            }
        }
        bins[j - 1][k] = v;
    }
    let lambdas = bins
        .iter()
        .map(|y| y.iter().map(|v| v * v).sum::<f64>().sqrt() / x.norm())
        .collect();
    let bin_intervals = (0..q).map(|j| (edges[j], edges[j + 1])).collect();
    BinDecomposition { bins, bin_intervals, lambdas }
}

/// Shifted-sign split x = z - y with y = M sign(x), z = x + y, chosen so
/// kappa(z) <= 2 at M = max|x_k|.
#[derive(Debug, Clone)]
pub struct SignShift {
    /// The shift magnitude M.
    pub shift: f64,
    pub y: Array1<f64>,
    pub z: Array1<f64>,
    /// (||z|| / ||x||, ||y|| / ||x||).
    pub coefficients: (f64, f64),
}

fn sign_plus(v: f64) -> f64 {
    if v < 0.0 {
        -1.0
    } else {
        1.0
    }
}

impl SignShift {
    /// Build the split with M = max|x_k| and sign(0) taken as +1.
    pub fn new(x: &ClassicalVector) -> Self {
        let m = x.max_abs();
        let y = x.entries().mapv(|v| m * sign_plus(v));
        let z = x.entries() + &y;
        let ny = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        let nz = z.iter().map(|v| v * v).sum::<f64>().sqrt();
        SignShift { shift: m, y, z, coefficients: (nz / x.norm(), ny / x.norm()) }
    }

    /// The overhead (||y||^2 + ||z||^2) / ||x||^2 the split pays.
    pub fn bound_ratio(&self, x: &ClassicalVector) -> f64 {
        let sy = self.y.iter().map(|v| v * v).sum::<f64>();
        let sz = self.z.iter().map(|v| v * v).sum::<f64>();
        (sy + sz) / (x.norm() * x.norm())
    }

    /// Overhead ceiling 3 kappa^2 + 1, valid for kappa >= 2 with no zero
    /// entries.
    pub fn bound_limit(kappa: f64) -> f64 {
        3.0 * kappa * kappa + 1.0
    }
}

/// Evaluate the sign-shift overhead bound when it applies: Some(pass)
/// for all-nonzero vectors with kappa >= 2, None otherwise.
pub fn verify_shift_bound(x: &ClassicalVector) -> Option<bool> {
    if !x.all_nonzero() || x.kappa() < 2.0 {
        return None;
    }
    let shift = SignShift::new(x);
    Some(shift.bound_ratio(x) <= SignShift::bound_limit(x.kappa()) + 1e-9)
}

/// Dense baseline: complete x/||x|| to a unitary by a Householder
/// reflection; the state is the first column. Charged n^2 elementary
/// operations per application.
pub fn prep_naive(x: &ClassicalVector) -> Result<(UnitaryOp, StateVector)> {
    let target: Array1<C64> = x.normalized_state()?.amplitudes().clone();
    let householder = PrepUnitary::for_target(&target)?;
    let n = x.len();
    let op = UnitaryOp::new(householder.dense())?.with_cost(CostLedger::ops((n * n) as u64));
    let state = StateVector::new(target)?;
    Ok((op, state))
}

const PREP_CHECK_TOL: f64 = 1e-9;

/// Uniform-index circuit with a controlled amplitude rotation: one
/// register holds a uniform superposition over the support, an ancilla
/// is rotated to amplitude x_j / max|x|, and post-selecting the ancilla
/// leaves x / ||x|| exactly.
struct AmplitudePrepCircuit {
    n: usize,
    support: Vec<usize>,
    ratios: Vec<f64>,
    index_prep: PrepUnitary,
    cost: CostLedger,
}

impl AmplitudePrepCircuit {
    fn new(x: &ClassicalVector) -> Result<Self> {
        let n = x.len();
        let support = x.support();
        let m = x.max_abs();
        let ratios: Vec<f64> = support.iter().map(|&k| x.entries()[k] / m).collect();
        let mut target = Array1::zeros(n);
        let amp = C64::new(1.0 / (support.len() as f64).sqrt(), 0.0);
        for &k in &support {
            target[k] = amp;
        }
        Ok(AmplitudePrepCircuit {
            n,
            support,
            ratios,
            index_prep: PrepUnitary::for_target(&target)?,
            cost: CostLedger::ops(2),
        })
    }

    fn rotate(&self, v: &mut Array1<C64>, adjoint: bool) {
        for (&k, &r) in self.support.iter().zip(&self.ratios) {
            let s = (1.0 - r * r).max(0.0).sqrt() * if adjoint { -1.0 } else { 1.0 };
            let a0 = v[k];
            let a1 = v[self.n + k];
            v[k] = r * a0 - s * a1;
            v[self.n + k] = s * a0 + r * a1;
        }
    }

    fn per_block<F: Fn(&Array1<C64>) -> Array1<C64>>(&self, v: &Array1<C64>, f: F) -> Array1<C64> {
        let mut out = Array1::zeros(2 * self.n);
        for c in 0..2 {
            let block: Array1<C64> =
                Array1::from_iter(v.iter().skip(c * self.n).take(self.n).copied());
            let mapped = f(&block);
            for (j, z) in mapped.into_iter().enumerate() {
                out[c * self.n + j] = z;
            }
        }
        out
    }
}

impl LinearUnitary for AmplitudePrepCircuit {
    fn dim(&self) -> usize {
        2 * self.n
    }

    fn apply_vec(&self, v: &Array1<C64>) -> Array1<C64> {
        let mut out = self.per_block(v, |b| self.index_prep.apply(b));
        self.rotate(&mut out, false);
        out
    }

    fn apply_adjoint_vec(&self, v: &Array1<C64>) -> Array1<C64> {
        let mut mid = v.clone();
        self.rotate(&mut mid, true);
        self.per_block(&mid, |b| self.index_prep.apply_adjoint(b))
    }

    fn application_cost(&self) -> CostLedger {
        self.cost
    }
}

fn single_nonzero_report(x: &ClassicalVector) -> Result<Option<CombineReport>> {
    let support = x.support();
    if support.len() != 1 {
        return Ok(None);
    }
    let k = support[0];
    let mut state = StateVector::basis(x.len(), k)?;
    if x.entries()[k] < 0.0 {
        state = state.negated();
    }
    Ok(Some(CombineReport {
        output: state,
        target_fidelity: 1.0,
        attempts: 1,
        ledger: CostLedger::ops(1),
        tree_trace: Vec::new(),
        success_probability: Some(1.0),
    }))
}

fn finish_amplitude_prep(
    x: &ClassicalVector,
    circuit: &AmplitudePrepCircuit,
    success: f64,
    rng: &mut RandomSource,
    use_amplification: bool,
) -> Result<CombineReport> {
    let n = x.len();
    let initial = StateVector::basis(2 * n, 0)?;
    let raw = StateVector::new(circuit.apply_vec(initial.amplitudes()))?;
    let (measured, collapsed) = postselect(&raw, 2, 0)?;
    if (measured - success).abs() > PREP_CHECK_TOL {
        return Err(CoreError::NumericalFailure(format!(
            "amplitude-prep acceptance {measured:.12} drifted from the closed form {success:.12}"
        )));
    }
    let mut ledger = CostLedger::ZERO;
    let (output, attempts) = if use_amplification {
        let amplitude = success.sqrt().min(1.0);
        let (amplified, _rounds) =
            amplitude_amplify(circuit, &GoodSubspace::Prefix(n), amplitude, &initial, &mut ledger)?;
        let (_, state) = postselect(&amplified, 2, 0)?;
        (state, 1)
    } else {
        let attempts = run_postselection(success, rng)?;
        ledger += circuit.application_cost().scaled(attempts);
        (collapsed, attempts)
    };
    let target_fidelity = output.fidelity(&x.normalized_state()?)?.min(1.0);
    if target_fidelity < 1.0 - PREP_CHECK_TOL {
        return Err(CoreError::NumericalFailure(format!(
            "amplitude-prep output fidelity {target_fidelity:.12} below the exact-circuit expectation"
        )));
    }
    Ok(CombineReport {
        output,
        target_fidelity,
        attempts,
        ledger,
        tree_trace: Vec::new(),
        success_probability: Some(success),
    })
}

/// Prepare x / ||x|| with the merged-register amplitude-rotation
/// circuit. Per-attempt success amplitude is ||x|| / (sqrt(n') max|x|)
/// over the n' nonzero entries, at least 1/kappa(x); amplification keeps
/// the round count within ceil(pi/4 kappa).
pub fn prep_uniformish(
    x: &ClassicalVector,
    rng: &mut RandomSource,
    use_amplification: bool,
) -> Result<CombineReport> {
    if let Some(report) = single_nonzero_report(x)? {
        return Ok(report);
    }
    let circuit = AmplitudePrepCircuit::new(x)?;
    let n_prime = circuit.support.len() as f64;
    let amplitude = x.norm() / (n_prime.sqrt() * x.max_abs());
    finish_amplitude_prep(x, &circuit, amplitude * amplitude, rng, use_amplification)
}

/// The literal index-register reading of the same preparation: combine
/// the support basis states with coefficients x_j through the m-state
/// circuit, accepting with probability ||x||^2 / (max^2 n'^2). Provided
/// alongside the merged circuit so the two acceptance rates can be
/// compared directly.
pub fn prep_uniformish_lcu1(
    x: &ClassicalVector,
    rng: &mut RandomSource,
    use_amplification: bool,
) -> Result<CombineReport> {
    if let Some(report) = single_nonzero_report(x)? {
        return Ok(report);
    }
    let n = x.len();
    let support = x.support();
    let states: Vec<PreparedState> = support
        .iter()
        .map(|&k| Ok(PreparedState::new(StateVector::basis(n, k)?)))
        .collect::<Result<_>>()?;
    let coeffs: Vec<f64> = support.iter().map(|&k| x.entries()[k]).collect();
    combine_multi_v1(&states, &coeffs, rng, use_amplification)
}

/// Prepare x by splitting it into dyadic magnitude bins, preparing each
/// bin with the amplitude-rotation circuit (each has kappa <= 2), and
/// combining the bins weighted by their norms. Overall acceptance is
/// (||x|| / sum_j ||y_j||)^2 >= 1/q.
pub fn prep_thm1(x: &ClassicalVector, rng: &mut RandomSource) -> Result<CombineReport> {
    if let Some(report) = single_nonzero_report(x)? {
        return Ok(report);
    }
    let decomposition = decompose_bins(x);
    let occupied = decomposition.occupied();
    if occupied.len() < 2 {
        return prep_uniformish(x, rng, true);
    }
    let mut setup = CostLedger::ZERO;
    let mut states = Vec::with_capacity(occupied.len());
    let mut coeffs = Vec::with_capacity(occupied.len());
    for &j in &occupied {
        let bin = ClassicalVector::new(decomposition.bins[j].to_vec())?;
        let sub = prep_uniformish(&bin, rng, true)?;
        setup += sub.ledger;
        states.push(PreparedState::new(sub.output));
        coeffs.push(decomposition.lambdas[j] * x.norm());
    }
    let mut report = combine_multi_v2(&states, &coeffs, rng, false)?;
    report.ledger += setup;
    report.target_fidelity = report.output.fidelity(&x.normalized_state()?)?.min(1.0);
    if report.target_fidelity < 1.0 - 1e-6 {
        return Err(CoreError::NumericalFailure(format!(
            "bin-combination fidelity {:.12} fell below the exact expectation",
            report.target_fidelity
        )));
    }
    Ok(report)
}

/// Prepare x through the sign-shift split x = z - y: both pieces have
/// dynamic range at most 2, so each is prepared in O(1) attempts and a
/// single two-state rotation combines them. Verifies the overhead bound
/// whenever it applies (kappa >= 2, no zero entries).
pub fn prep_thm2(
    x: &ClassicalVector,
    epsilon: f64,
    variant: RotationVariant,
    rng: &mut RandomSource,
) -> Result<CombineReport> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(CoreError::InvalidArgument(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    if let Some(report) = single_nonzero_report(x)? {
        return Ok(report);
    }
    if verify_shift_bound(x) == Some(false) {
        return Err(CoreError::NumericalFailure(
            "sign-shift overhead exceeded 3 kappa^2 + 1".into(),
        ));
    }
    let shift = SignShift::new(x);
    let y = ClassicalVector::new(shift.y.to_vec())?;
    let z = ClassicalVector::new(shift.z.to_vec())?;
    let y_rep = prep_uniformish(&y, rng, true)?;
    let z_rep = prep_uniformish(&z, rng, true)?;
    let setup = y_rep.ledger + z_rep.ledger;
    let target = x.normalized_state()?;
    let combined = combine2_rotation(
        &PreparedState::new(z_rep.output),
        &PreparedState::new(y_rep.output.clone()),
        z.norm(),
        -y.norm(),
        epsilon,
        variant,
        AngleMode::Exact,
        rng,
    );
    match combined {
        Ok(mut report) => {
            report.ledger += setup;
            report.target_fidelity = report.output.fidelity(&target)?.min(1.0);
            Ok(report)
        }
        Err(CoreError::CollinearStates { .. }) => Ok(CombineReport {
            target_fidelity: y_rep.output.fidelity(&target)?.min(1.0),
            output: y_rep.output,
            attempts: y_rep.attempts,
            ledger: setup,
            tree_trace: Vec::new(),
            success_probability: Some(1.0),
        }),
        Err(e) => Err(e),
    }
}

/// Log-uniform random vector snapped to the dyadic 2^-30 grid, with the
/// first two entries pinned to magnitudes 1 and 2^log2_kappa so the
/// dynamic range is hit exactly. Grid snapping keeps later bin and
/// sign-shift arithmetic exact in double precision.
pub fn random_log_uniform_vector(
    n: usize,
    log2_kappa: f64,
    rng: &mut RandomSource,
) -> Result<ClassicalVector> {
    if n < 2 {
        return Err(CoreError::InvalidArgument("need at least two entries".into()));
    }
    if !(1.0..=20.0).contains(&log2_kappa) {
        return Err(CoreError::InvalidArgument(format!(
            "log2 kappa must lie in [1, 20], got {log2_kappa}"
        )));
    }
    let grid = (1u64 << 30) as f64;
    let snap = |v: f64| (v * grid).round() / grid;
    let mut entries = Vec::with_capacity(n);
    for k in 0..n {
        let magnitude = match k {
            0 => 1.0,
            1 => snap(2.0f64.powf(log2_kappa)),
            _ => snap(2.0f64.powf(rng.gen_f64() * log2_kappa)),
        };
        let sign = if rng.gen_f64() < 0.5 { 1.0 } else { -1.0 };
        entries.push(sign * magnitude);
    }
    ClassicalVector::new(entries)
}

/// Preparation route selector for benchmarks and the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PrepMethod {
    Naive,
    Uniformish,
    Thm1,
    Thm2,
}

impl FromStr for PrepMethod {
    type Err = CoreError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "naive" => Ok(PrepMethod::Naive),
            "uniformish" => Ok(PrepMethod::Uniformish),
            "thm1" => Ok(PrepMethod::Thm1),
            "thm2" => Ok(PrepMethod::Thm2),
            other => Err(CoreError::InvalidArgument(format!(
                "unknown preparation method {other:?}"
            ))),
        }
    }
}

impl fmt::Display for PrepMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PrepMethod::Naive => "naive",
            PrepMethod::Uniformish => "uniformish",
            PrepMethod::Thm1 => "thm1",
            PrepMethod::Thm2 => "thm2",
        })
    }
}

/// One preparation run flattened for reporting.
#[derive(Debug, Clone, Serialize)]
pub struct PrepRecord {
    pub n: usize,
    pub kappa: f64,
    pub q: usize,
    pub method: String,
    pub fidelity: f64,
    pub attempts: u64,
    pub success_probability: Option<f64>,
    /// Sign-shift overhead verdict; None when the bound does not apply
    /// or the method never builds the split.
    pub bound_check: Option<bool>,
    pub ledger: CostLedger,
    pub failure: Option<String>,
}

/// Run one vector through one route with an isolated random stream.
pub fn prep_bench_cell(
    x: &ClassicalVector,
    method: PrepMethod,
    epsilon: f64,
    rng: &mut RandomSource,
) -> PrepRecord {
    let mut record = PrepRecord {
        n: x.len(),
        kappa: x.kappa(),
        q: decompose_bins(x).q(),
        method: method.to_string(),
        fidelity: 0.0,
        attempts: 0,
        success_probability: None,
        bound_check: None,
        ledger: CostLedger::ZERO,
        failure: None,
    };
    let outcome = match method {
        PrepMethod::Naive => prep_naive(x).and_then(|(op, state)| {
            let fidelity = state.fidelity(&x.normalized_state()?)?.min(1.0);
            Ok(CombineReport {
                output: state,
                target_fidelity: fidelity,
                attempts: 1,
                ledger: op.application_cost(),
                tree_trace: Vec::new(),
                success_probability: None,
            })
        }),
        PrepMethod::Uniformish => prep_uniformish(x, rng, true),
        PrepMethod::Thm1 => prep_thm1(x, rng),
        PrepMethod::Thm2 => {
            record.bound_check = verify_shift_bound(x);
            prep_thm2(x, epsilon, RotationVariant::Eig, rng)
        }
    };
    match outcome {
        Ok(report) => {
            record.fidelity = report.target_fidelity;
            record.attempts = report.attempts;
            record.success_probability = report.success_probability;
            record.ledger = report.ledger;
        }
        Err(e) => record.failure = Some(e.kind().to_string()),
    }
    record
}

/// Run a corpus through the selected routes, one record per vector and
/// route, each cell on its own derived random stream.
pub fn prep_bench(
    corpus: &[ClassicalVector],
    methods: &[PrepMethod],
    epsilon: f64,
    rng: &mut RandomSource,
) -> Result<Vec<PrepRecord>> {
    if corpus.is_empty() {
        return Err(CoreError::InvalidArgument("benchmark corpus must be non-empty".into()));
    }
    if methods.is_empty() {
        return Err(CoreError::InvalidArgument("need at least one method".into()));
    }
    let mut records = Vec::with_capacity(corpus.len() * methods.len());
    for (i, x) in corpus.iter().enumerate() {
        for (j, &method) in methods.iter().enumerate() {
            let mut cell_rng = rng.derive(((i as u64) << 8) | j as u64);
            records.push(prep_bench_cell(x, method, epsilon, &mut cell_rng));
        }
    }
    Ok(records)
}
