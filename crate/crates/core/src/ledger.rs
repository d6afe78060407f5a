use serde::{Deserialize, Serialize};
use std::iter::Sum;
use std::ops::{Add, AddAssign};

/// Resource counters attached to operators and accumulated per run.
///
/// The four counters are deliberately coarse: oracle calls, input-state
/// preparations, everything gate-like, and estimator shots. Composite
/// operators carry the component-wise sum of their parts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostLedger {
    pub oracle_queries: u64,
    pub input_preps: u64,
    pub elementary_ops: u64,
    pub estimator_samples: u64,
}

impl CostLedger {
    pub const ZERO: CostLedger = CostLedger {
        oracle_queries: 0,
        input_preps: 0,
        elementary_ops: 0,
        estimator_samples: 0,
    };

    pub fn oracle(n: u64) -> Self {
        CostLedger { oracle_queries: n, ..Self::ZERO }
    }

    pub fn preps(n: u64) -> Self {
        CostLedger { input_preps: n, ..Self::ZERO }
    }

    pub fn ops(n: u64) -> Self {
        CostLedger { elementary_ops: n, ..Self::ZERO }
    }

    /// Every counter multiplied by `k`, saturating on overflow.
    pub fn scaled(self, k: u64) -> Self {
        CostLedger {
            oracle_queries: self.oracle_queries.saturating_mul(k),
            input_preps: self.input_preps.saturating_mul(k),
            elementary_ops: self.elementary_ops.saturating_mul(k),
            estimator_samples: self.estimator_samples.saturating_mul(k),
        }
    }

    pub fn is_zero(self) -> bool {
        self == Self::ZERO
    }
}

impl Add for CostLedger {
    type Output = CostLedger;
    fn add(self, rhs: CostLedger) -> CostLedger {
        CostLedger {
            oracle_queries: self.oracle_queries.saturating_add(rhs.oracle_queries),
            input_preps: self.input_preps.saturating_add(rhs.input_preps),
            elementary_ops: self.elementary_ops.saturating_add(rhs.elementary_ops),
            estimator_samples: self.estimator_samples.saturating_add(rhs.estimator_samples),
        }
    }
}

impl AddAssign for CostLedger {
    fn add_assign(&mut self, rhs: CostLedger) {
        *self = *self + rhs;
    }
}

impl Sum for CostLedger {
    fn sum<I: Iterator<Item = CostLedger>>(iter: I) -> CostLedger {
        iter.fold(CostLedger::ZERO, |a, b| a + b)
    }
}

/// How estimator work is charged to the ledger.
///
/// `Sampling` charges the input preparations actually consumed by the
/// simulated shot loop (one pair per shot, so O(1/eps^2) overall).
/// `Paper` charges preparations at the amplitude-estimation rate O(1/eps)
/// instead, for complexity-fit experiments; the recorded shot count stays
/// the number of shots actually drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CostModel {
    Sampling,
    Paper,
}

impl Default for CostModel {
    fn default() -> Self {
        CostModel::Sampling
    }
}

impl std::str::FromStr for CostModel {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "sampling" => Ok(CostModel::Sampling),
            "paper" => Ok(CostModel::Paper),
            other => Err(format!("unknown cost model `{other}` (expected sampling|paper)")),
        }
    }
}

impl std::fmt::Display for CostModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CostModel::Sampling => "sampling",
            CostModel::Paper => "paper",
        })
    }
}
