//! Single-qubit Clifford compilation with virtual Z, randomized benchmarking
//! and interleaved fidelity.

pub mod clifford;
pub mod rb;

pub use clifford::{clifford_group, rotation, rz, sequence_unitary, trace_overlap, CliffordElement, CliffordGroup, DecompositionTable, Gate};
pub use rb::{
    check_recovery, clifford_fidelity, compile_sequence, fit_rb, fit_rb_curve, interleaved_fidelity, p_from_fidelity, qubit_block, random_sequence, run_rb,
    sequence_seed, sequence_survival, GateSet, InterleavedFidelity, RBResult, RbConfig, RbFit,
};
