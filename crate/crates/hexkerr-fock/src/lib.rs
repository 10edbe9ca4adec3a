//! Exact finite-dimensional checks of the seven-mode Kerr Hamiltonian.
//!
//! The continuum Kerr interaction, expanded over the homogeneous mode and
//! the six hexagonal modes, splits into self-phase modulation, cross-phase
//! modulation and three four-wave-mixing families.  Every one of those
//! pieces conserves the photon-number combination
//! N₋ = N_i + N_{i⊕1} − N_{i⊕3} − N_{i⊕4}, which is why the intensity
//! correlation between opposite spot pairs survives inside the cavity.
//!
//! This crate makes that statement checkable to machine precision: modes
//! are truncated to a finite Fock space, the Hamiltonian pieces become
//! small sparse matrices, and conservation turns into commutators that are
//! identically zero — not small, zero.  Truncation is handled so that it
//! can never fake a conservation law (see [`op`] for the ladder-operator
//! convention).
//!
//! Energies are in units of ħγ and ħ = 1 throughout.

pub mod basis;
pub mod error;
pub mod hamiltonian;
pub mod op;

pub use basis::FockBasis;
pub use error::Error;
pub use hamiltonian::{
    build_free_and_drive, build_interaction, interaction_piece, number_combination,
    InteractionPiece,
};
pub use op::{commutator_norm, SparseOperator};

/// Re-exported so callers can name modes without depending on the core
/// crate directly.
pub use hexkerr_core::ModeIndex;

pub type C64 = num_complex::Complex64;
pub type Result<T> = std::result::Result<T, Error>;
