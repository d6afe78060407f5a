//! The searching problem: a query-counted sign oracle, the standard
//! amplitude-amplification search, and search by combining the uniform
//! state with its oracle image.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use ndarray::{Array1, Array2};
use serde::Serialize;

use crate::error::{CoreError, Result};
use crate::lcu::{
    combine2_hadamard, combine2_rotation, AngleMode, CombineReport, PreparedState,
    RotationVariant,
};
use crate::ledger::CostLedger;
use crate::linalg::{C64, ONE_C, ZERO_C};
use crate::qcore::{measure, StateVector, UnitaryOp};
use crate::random::RandomSource;

/// A search space with a set of marked items and a sign oracle.
///
/// The oracle is applied structurally (sign flips on the marked indices)
/// so instances scale to thousands of items; a dense matrix form is
/// available for small spaces.
#[derive(Debug, Clone)]
pub struct SearchInstance {
    n: usize,
    marked: BTreeSet<usize>,
}

/// Build a search instance over `n` items.
pub fn make_instance(n: usize, marked: &[usize]) -> Result<SearchInstance> {
    if n == 0 {
        return Err(CoreError::InvalidArgument("search space must be non-empty".into()));
    }
    if marked.is_empty() {
        return Err(CoreError::EmptyMarkedSet);
    }
    let marked: BTreeSet<usize> = marked.iter().copied().collect();
    if let Some(&bad) = marked.iter().find(|&&i| i >= n) {
        return Err(CoreError::InvalidArgument(format!(
            "marked index {bad} outside the search space of size {n}"
        )));
    }
    Ok(SearchInstance { n, marked })
}

impl SearchInstance {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn marked(&self) -> &BTreeSet<usize> {
        &self.marked
    }

    pub fn multiplicity(&self) -> usize {
        self.marked.len()
    }

    pub fn uniform(&self) -> Result<StateVector> {
        StateVector::uniform(self.n)
    }

    /// Apply the sign oracle, charging exactly one query.
    pub fn apply_oracle(
        &self,
        state: &StateVector,
        ledger: &mut CostLedger,
    ) -> Result<StateVector> {
        if state.dim() != self.n {
            return Err(CoreError::DimMismatch { left: self.n, right: state.dim() });
        }
        ledger.oracle_queries += 1;
        let mut amps = state.amplitudes().clone();
        for &i in &self.marked {
            amps[i] = -amps[i];
        }
        StateVector::new(amps)
    }

    /// Dense matrix form of the oracle, tagged with a one-query cost.
    /// Intended for small spaces.
    pub fn oracle_dense(&self) -> Result<UnitaryOp> {
        let mut m = Array2::from_elem((self.n, self.n), ZERO_C);
        for i in 0..self.n {
            m[(i, i)] = if self.marked.contains(&i) { -ONE_C } else { ONE_C };
        }
        Ok(UnitaryOp::new(m)?.with_cost(CostLedger::oracle(1)))
    }
}

/// Outcome of one search run.
#[derive(Debug, Clone, Serialize)]
pub struct SearchResult {
    /// Item returned by the single seeded measurement.
    pub found: usize,
    /// Whether the measured item is marked.
    pub success: bool,
    pub queries: u64,
    pub iterations: u64,
    /// Exact pre-measurement probability mass on the marked set.
    pub success_probability: f64,
    /// Whether a marked item is the mode of the measured distribution.
    pub marked_is_modal: bool,
    pub ledger: CostLedger,
}

fn finish_run(
    state: &StateVector,
    inst: &SearchInstance,
    iterations: u64,
    ledger: CostLedger,
    rng: &mut RandomSource,
) -> SearchResult {
    let success_probability: f64 =
        inst.marked.iter().map(|&i| state.probability(i)).sum();
    let argmax = (0..state.dim())
        .max_by(|&i, &j| state.probability(i).total_cmp(&state.probability(j)))
        .unwrap_or(0);
    let found = measure(state, 1, rng)
        .into_keys()
        .next()
        .expect("one shot yields one outcome");
    SearchResult {
        found,
        success: inst.marked.contains(&found),
        queries: ledger.oracle_queries,
        iterations,
        success_probability,
        marked_is_modal: inst.marked.contains(&argmax),
        ledger,
    }
}

/// Run exactly `iterations` rounds of the standard search iterate
/// (sign oracle followed by inversion about the uniform mean).
pub fn grover_with_iterations(
    inst: &SearchInstance,
    iterations: u64,
    rng: &mut RandomSource,
) -> Result<SearchResult> {
    let n = inst.n;
    if inst.multiplicity() >= n {
        return Err(CoreError::InvalidArgument(
            "every item is marked; searching is vacuous".into(),
        ));
    }
    let mut ledger = CostLedger::preps(1);
    let mut v: Array1<C64> = Array1::from_elem(n, C64::new(1.0 / (n as f64).sqrt(), 0.0));
    for _ in 0..iterations {
        ledger.oracle_queries += 1;
        for &i in &inst.marked {
            v[i] = -v[i];
        }
        let mean = v.sum() / n as f64;
        v.mapv_inplace(|z| 2.0 * mean - z);
        ledger += CostLedger::preps(2) + CostLedger::ops(1);
    }
    let state = StateVector::new(v)?;
    Ok(finish_run(&state, inst, iterations, ledger, rng))
}

/// Standard search: k = floor(pi/4 sqrt(N/M)) iterate rounds from the
/// uniform state, one query per round.
pub fn grover_standard(inst: &SearchInstance, rng: &mut RandomSource) -> Result<SearchResult> {
    let ratio = inst.n as f64 / inst.multiplicity() as f64;
    let k = (PI / 4.0 * ratio.sqrt()).floor() as u64;
    grover_with_iterations(inst, k, rng)
}

/// The uniform state and its oracle image, the two states whose
/// combinations drive the derived search methods. Charges two input
/// preparations and one query. Their overlap is (N - 2M)/N exactly.
pub fn search_states(
    inst: &SearchInstance,
    ledger: &mut CostLedger,
) -> Result<(StateVector, StateVector)> {
    let a = inst.uniform()?;
    ledger.input_preps += 2;
    let b = inst.apply_oracle(&a, ledger)?;
    Ok((a, b))
}

/// Search-method selector spanning the standard iterate, the four
/// combination-based methods, and a classical linear-scan baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchMethod {
    Standard,
    Hadamard,
    Eig,
    Pe,
    Iterate,
    Classical,
}

impl FromStr for SearchMethod {
    type Err = CoreError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(SearchMethod::Standard),
            "hadamard" => Ok(SearchMethod::Hadamard),
            "eig" => Ok(SearchMethod::Eig),
            "pe" => Ok(SearchMethod::Pe),
            "iterate" => Ok(SearchMethod::Iterate),
            "classical" => Ok(SearchMethod::Classical),
            other => Err(CoreError::InvalidArgument(format!("unknown search method {other:?}"))),
        }
    }
}

impl fmt::Display for SearchMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SearchMethod::Standard => "standard",
            SearchMethod::Hadamard => "hadamard",
            SearchMethod::Eig => "eig",
            SearchMethod::Pe => "pe",
            SearchMethod::Iterate => "iterate",
            SearchMethod::Classical => "classical",
        })
    }
}

/// Search by combining the uniform state with its oracle image so the
/// combination collapses onto the marked item. Requires exactly one
/// marked item. Oracle usage is charged through the preparation tags:
/// every preparation of the oracle image costs one query.
pub fn search_lcu(
    inst: &SearchInstance,
    method: SearchMethod,
    rng: &mut RandomSource,
) -> Result<SearchResult> {
    let m = inst.multiplicity();
    if m != 1 {
        return Err(CoreError::UnsupportedMultiplicity { count: m });
    }
    let n = inst.n;
    let a = inst.uniform()?;
    let mut scratch = CostLedger::ZERO;
    let b = inst.apply_oracle(&a, &mut scratch)?;
    let a_prepared = PreparedState::with_cost(a, CostLedger::preps(1));
    let b_cost = CostLedger::preps(1) + CostLedger::oracle(1);
    let epsilon = 0.5 / (n as f64).sqrt();

    let report: CombineReport = match method {
        SearchMethod::Hadamard => {
            let negated = PreparedState::with_cost(b.negated(), b_cost);
            combine2_hadamard(&a_prepared, &negated, rng, true)?
        }
        SearchMethod::Eig | SearchMethod::Pe | SearchMethod::Iterate => {
            let variant = match method {
                SearchMethod::Eig => RotationVariant::Eig,
                SearchMethod::Pe => RotationVariant::Pe,
                _ => RotationVariant::Iterate,
            };
            let b_prepared = PreparedState::with_cost(b, b_cost);
            combine2_rotation(
                &a_prepared,
                &b_prepared,
                1.0,
                -1.0,
                epsilon,
                variant,
                AngleMode::Exact,
                rng,
            )?
        }
        SearchMethod::Standard | SearchMethod::Classical => {
            return Err(CoreError::InvalidArgument(format!(
                "{method} is not a combination-based search method"
            )));
        }
    };

    let queries = report.ledger.oracle_queries;
    let iterations = match method {
        SearchMethod::Hadamard => (queries.saturating_sub(1)) / 2,
        _ => queries / 2,
    };
    Ok(finish_run(&report.output, inst, iterations, report.ledger, rng))
}

/// Classical baseline: scan items in order, one query per membership
/// test, stopping at the first marked item.
pub fn classical_search(inst: &SearchInstance, _rng: &mut RandomSource) -> Result<SearchResult> {
    let found = *inst.marked.iter().next().expect("instances are non-empty");
    let queries = found as u64 + 1;
    Ok(SearchResult {
        found,
        success: true,
        queries,
        iterations: queries,
        success_probability: 1.0,
        marked_is_modal: true,
        ledger: CostLedger::oracle(queries),
    })
}

/// Dispatch a search instance to the chosen method.
pub fn run_search(
    inst: &SearchInstance,
    method: SearchMethod,
    rng: &mut RandomSource,
) -> Result<SearchResult> {
    match method {
        SearchMethod::Standard => grover_standard(inst, rng),
        SearchMethod::Classical => classical_search(inst, rng),
        _ => search_lcu(inst, method, rng),
    }
}

/// Least-squares power-law fit y = C x^e over positive points, in log
/// space. Returns the exponent and the r^2 of the log-log regression.
pub fn power_law_fit(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let mean_x = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for &(x, y) in &logs {
        sxx += (x - mean_x) * (x - mean_x);
        syy += (y - mean_y) * (y - mean_y);
        sxy += (x - mean_x) * (y - mean_y);
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    (slope, r2)
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingPoint {
    pub n: usize,
    pub mean_queries: f64,
}

/// Power-law fit of query count against search-space size.
#[derive(Debug, Clone, Serialize)]
pub struct FitRecord {
    pub method: String,
    pub exponent: f64,
    pub r_squared: f64,
    pub points: Vec<ScalingPoint>,
}

/// Measure how a method's query count scales: run it over each size
/// (averaging `seeds` runs with random marked items) and fit a power law.
pub fn scaling_study(
    method: SearchMethod,
    sizes: &[usize],
    seeds: u64,
    rng: &mut RandomSource,
) -> Result<FitRecord> {
    if sizes.len() < 4 {
        return Err(CoreError::InvalidArgument(format!(
            "need at least four sizes for a fit, got {}",
            sizes.len()
        )));
    }
    if let Some(&bad) = sizes.iter().find(|&&n| !n.is_power_of_two()) {
        return Err(CoreError::InvalidArgument(format!("size {bad} is not a power of two")));
    }
    if seeds == 0 {
        return Err(CoreError::InvalidArgument("need at least one seed per size".into()));
    }
    let mut points = Vec::with_capacity(sizes.len());
    for (i, &n) in sizes.iter().enumerate() {
        let mut total = 0u64;
        for s in 0..seeds {
            let mut run_rng = rng.derive(((i as u64) << 32) ^ s);
            let marked = run_rng.gen_range(n);
            let inst = make_instance(n, &[marked])?;
            total += run_search(&inst, method, &mut run_rng)?.queries;
        }
        points.push(ScalingPoint { n, mean_queries: total as f64 / seeds as f64 });
    }
    let raw: Vec<(f64, f64)> =
        points.iter().map(|p| (p.n as f64, p.mean_queries)).collect();
    let (exponent, r_squared) = power_law_fit(&raw);
    Ok(FitRecord { method: method.to_string(), exponent, r_squared, points })
}
