//! Exact treatment in a truncated excitation x phonon Fock space.

pub mod basis;
pub mod hamiltonian;
pub mod io;
pub mod momentum;
pub mod operator;
pub mod state;

pub use basis::{build_basis, phonon_dimension, BasisState, FockBasis, Sector, DEFAULT_DIMENSION_CAP};
pub use hamiltonian::{build_hamiltonian, phonon_number_operator};
pub use momentum::{
    ground_state, kappa, momentum_block, momentum_ground_state, project_momentum, translate,
    MomentumBlock,
};
pub use operator::SparseOperator;
pub use state::{expectation, StateVector};

#[cfg(test)]
mod tests;
