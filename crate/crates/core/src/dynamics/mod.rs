//! Quantum N-body, Hartree, classical N-body and Vlasov evolution, plus reduced states.

pub mod potential;

pub use potential::TrigPotential;
pub mod classical;
pub mod hartree;
pub mod quantum;

pub use classical::{
    evolve_classical_nbody, evolve_vlasov, push_in_field, stratified_gaussian, ClassicalEnsemble, MeanFieldHistory,
};
pub use hartree::{evolve_hartree, hartree_energy, mean_field, position_density};
pub use quantum::{evolve_nbody_quantum, reduced_state, reduced_state_on, reduced_wigner, Member, QuantumEnsemble};
