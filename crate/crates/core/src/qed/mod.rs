//! A discretized-mode model of the charge–solenoid interaction.
//!
//! The photon field lives in a periodic box. Each mode couples to the
//! charge through `g (q/m) p·u e^{ik·r_c}` and to the solenoid through
//! `g Σ I dl·u e^{ik·x}`. From these amplitudes the module provides the
//! second-order cross phase, exact evolution in a truncated Fock space, and
//! the branch-state diagnostics of a charge in a two-path superposition.

mod branches;
mod coupling;
mod hamiltonian;
mod modes;
mod space;

pub use branches::{
    branch_evolution, branch_evolution_along, coherent_log_overlap, reduced_density_matrix, BranchStates,
    EntanglementReport,
};
pub use coupling::{
    analytic_phase, coupling_amplitudes, interaction_energy, perturbative_cross_phase, second_order_phase,
    ModeCoupling, SecondOrderPhase,
};
pub use hamiltonian::{
    build_hamiltonian, evolve_amplitude, exact_cross_phase, hamiltonian_from_couplings, Amplitude, ExactCrossPhase,
    OperatorMatrix, Propagator, QubitEnergies, DIMENSION_CAP,
};
pub use modes::{build_mode_grid, polarizations, Mode, ModeGrid, ModeGridSpec};
pub use space::{qz, TruncatedSpace};
