//! Dense state vectors, observables, Hamiltonians and exact time evolution.

mod hamiltonian;
mod matrix;
mod observable;
mod state;

pub use hamiltonian::{
    evolve, h_cz_matrix, Hamiltonian, Propagator, Term, COMMUTATOR_TOLERANCE, DENSE_EXPONENTIAL_LIMIT,
};
pub use matrix::CMatrix;
pub use observable::{check_disjoint, expectation, Observable, Pauli, PauliString, Phase, HERMITIAN_TOLERANCE};
pub use state::{apply_cz, global_phase_distance, site_mask, StateVector, NORM_TOLERANCE};

/// Default largest site count for dense state vectors.
pub const DEFAULT_DENSE_CEILING: usize = 14;

/// Environment variable overriding [`DEFAULT_DENSE_CEILING`].
pub const DENSE_CEILING_ENV: &str = "URSELL_DENSE_CEILING";

/// Current dense ceiling: `URSELL_DENSE_CEILING` if set to a valid integer in
/// `1..=30`, otherwise 14.
pub fn dense_ceiling() -> usize {
    std::env::var(DENSE_CEILING_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&v| (1..=30).contains(&v))
        .unwrap_or(DEFAULT_DENSE_CEILING)
}
