//! State vectors, structured Hamiltonians, time evolution, and exact spectra
//! for the interpolating Hamiltonian `H(s) = (1−s)·H_B + s·H_P`.

mod evolve;
mod hamiltonian;
mod spectrum;
mod state;

pub use evolve::{
    evolve, evolve_two_level, Evolution, EvolutionConfig, EvolutionSettings, TwoLevelEvolution, DRIFT_ACCEPT, DRIFT_FAILURE,
    DEFAULT_MAX_DOUBLINGS, MIN_DEFAULT_STEPS,
};
pub use hamiltonian::{energy_expectation, HamiltonianPair, HamiltonianTerm};
pub use spectrum::{easy_grover_gap, exact_spectrum, MAX_DENSE_DIM};
pub use state::{StateVector, NORM_TOLERANCE};
