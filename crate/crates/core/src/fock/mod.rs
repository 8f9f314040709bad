//! Truncated Fock space: states, Hermitian band matrices, displacement
//! operators, trace norms and fidelities.

mod displacement;
mod hermitian;
mod state;

pub use displacement::{
    buffer_dim, coherent_amplitudes, displacement_block, displacement_matrix,
    displacement_matrix_with_dim, DisplacementAmplitude,
};
pub use hermitian::{trace_distance, trace_norm, DensityMatrix, HermitianMatrix};
pub use state::{fidelity, FockBasis, PureFockState, StateFile};
