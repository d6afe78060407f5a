//! Simulation library for combining quantum states as linear combinations
//! of unitaries, with cost-ledgered circuits, overlap estimation,
//! fractional operator powers, search experiments, and state preparation
//! built on top of a dense statevector core.

pub mod error;
pub mod estimate;
pub mod fracpow;
pub mod grover;
pub mod lcu;
pub mod prep;
pub mod ledger;
pub mod linalg;
pub mod qcore;
pub mod random;


pub use error::{CoreError, Result};
pub use grover::{
    classical_search, grover_standard, grover_with_iterations, make_instance, power_law_fit,
    run_search, scaling_study, search_lcu, search_states, FitRecord, ScalingPoint,
    SearchInstance, SearchMethod, SearchResult,
};
pub use prep::{
    decompose_bins, prep_bench, prep_bench_cell, prep_naive, prep_thm1, prep_thm2,
    prep_uniformish, prep_uniformish_lcu1, random_log_uniform_vector, verify_shift_bound,
    BinDecomposition, ClassicalVector, PrepMethod, PrepRecord, SignShift,
};
pub use lcu::{
    combine2_hadamard, combine2_rotation, combine_multi_v1, combine_multi_v2, combine_recursive,
    table1_bench, table1_bench_cell, weighted_angles, AngleMode, BenchCell, BenchRecord,
    CoeffProfile, CombineReport, PreparedState, RotationVariant, StateFamily, TreeNodeTrace,
};
pub use ledger::{CostLedger, CostModel};
pub use qcore::{
    amplitude_amplify, measure, postselect, reflect_about, GoodSubspace, HermitianOp,
    LinearUnitary, StateVector, UnitaryOp,
};
pub use random::RandomSource;
