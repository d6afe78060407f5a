use thiserror::Error;

/// Errors shared across the simulation kernels.
///
/// Every fallible operation in this crate returns one of these variants so
/// callers (and the CLI) can map failures to stable, distinguishable codes.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoreError {
    #[error("zero vector: norm {norm:.3e} is below the representable threshold")]
    ZeroVector { norm: f64 },

    #[error("dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },

    #[error("matrix is not unitary: max |U\u{2020}U - I| = {defect:.3e}")]
    NotUnitary { defect: f64 },

    #[error("matrix is not Hermitian: max |A - A\u{2020}| = {defect:.3e}")]
    NotHermitian { defect: f64 },

    #[error("post-selection branch has probability {prob:.3e}, nothing to condition on")]
    ZeroProbability { prob: f64 },

    #[error("declared amplitude {declared:.6} disagrees with simulated value {observed:.6}")]
    AmplitudeMismatch { declared: f64, observed: f64 },

    #[error("state has non-real amplitudes: max |Im| = {max_imag:.3e}")]
    NonRealState { max_imag: f64 },

    #[error("overlap magnitude {overlap} leaves the angle numerically degenerate")]
    DegenerateAngle { overlap: f64 },

    #[error("eigenphase {phase} sits within {tol:.1e} of the branch cut at pi")]
    BranchAmbiguity { phase: f64, tol: f64 },

    #[error("states are numerically collinear: |sin angle| = {sin_angle:.3e}")]
    CollinearStates { sin_angle: f64 },

    #[error("no iterate count within tolerance: best k = {best_k} leaves error {best_error:.3e}")]
    NoApproximation { best_k: u64, best_error: f64 },

    #[error("combination target vanishes{}", node.as_deref().map(|n| format!(" at node {n}")).unwrap_or_default())]
    ZeroSum { node: Option<String> },

    #[error("marked set is empty")]
    EmptyMarkedSet,

    #[error("method supports exactly one marked item, got {count}")]
    UnsupportedMultiplicity { count: usize },

    #[error("numerical routine failed to converge: {0}")]
    NumericalFailure(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;

impl CoreError {
    /// Stable numeric code for each failure class, used by the CLI exit path.
    pub fn code(&self) -> i32 {
        match self {
            CoreError::ZeroVector { .. } => 10,
            CoreError::DimMismatch { .. } => 11,
            CoreError::NotUnitary { .. } => 12,
            CoreError::NotHermitian { .. } => 13,
            CoreError::ZeroProbability { .. } => 14,
            CoreError::AmplitudeMismatch { .. } => 15,
            CoreError::NonRealState { .. } => 16,
            CoreError::DegenerateAngle { .. } => 17,
            CoreError::BranchAmbiguity { .. } => 18,
            CoreError::CollinearStates { .. } => 19,
            CoreError::NoApproximation { .. } => 20,
            CoreError::ZeroSum { .. } => 21,
            CoreError::EmptyMarkedSet => 22,
            CoreError::UnsupportedMultiplicity { .. } => 23,
            CoreError::NumericalFailure(_) => 24,
            CoreError::InvalidArgument(_) => 25,
        }
    }

    /// Short machine-readable kind tag (mirrors the variant name).
    pub fn kind(&self) -> &'static str {
        match self {
            CoreError::ZeroVector { .. } => "ZeroVector",
            CoreError::DimMismatch { .. } => "DimMismatch",
            CoreError::NotUnitary { .. } => "NotUnitary",
            CoreError::NotHermitian { .. } => "NotHermitian",
            CoreError::ZeroProbability { .. } => "ZeroProbability",
            CoreError::AmplitudeMismatch { .. } => "AmplitudeMismatch",
            CoreError::NonRealState { .. } => "NonRealState",
            CoreError::DegenerateAngle { .. } => "DegenerateAngle",
            CoreError::BranchAmbiguity { .. } => "BranchAmbiguity",
            CoreError::CollinearStates { .. } => "CollinearStates",
            CoreError::NoApproximation { .. } => "NoApproximation",
            CoreError::ZeroSum { .. } => "ZeroSum",
            CoreError::EmptyMarkedSet => "EmptyMarkedSet",
            CoreError::UnsupportedMultiplicity { .. } => "UnsupportedMultiplicity",
            CoreError::NumericalFailure(_) => "NumericalFailure",
            CoreError::InvalidArgument(_) => "InvalidArgument",
        }
    }
}
