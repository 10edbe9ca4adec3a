//! Seven-mode model of hexagonal pattern formation in a driven, self-focusing
//! Kerr cavity.
//!
//! The transverse field is restricted to the homogeneous mode plus the six
//! critical modes on a hexagon in wave-vector space.  This crate covers the
//! classical side of that model and the linearized quantum fluctuations on
//! top of it:
//!
//! * [`model`] — parameters, the homogeneous (plane-wave) response curve and
//!   the pattern-formation threshold;
//! * [`classical`] — the seven coupled mode equations, fixed-step integration,
//!   drive sweeps (hysteresis), and extraction of the hexagon amplitude/phase
//!   structure from a converged state;
//! * [`steady`] — the four-variable real Newton solver for the stationary
//!   hexagon, derived from the same mode equations;
//! * [`fluct`] — the 14×14 linearized drift around a hexagon and the three
//!   2×2 quadrature-combination systems (W, Q, X) that decouple from it;
//! * [`spectra`] — output-field correlation matrices, quadrature noise
//!   spectra, best-squeezing angles and Lorentzian fits;
//! * [`csv`] — small deterministic CSV writers for the artifacts above.
//!
//! Everything is expressed in scaled units: time in units of 1/γ (cavity
//! decay), field amplitudes in saturation units, frequencies in units of γ.

pub mod classical;
pub mod csv;
pub mod error;
pub mod fluct;
pub mod model;
pub mod spectra;
pub mod steady;

pub use error::Error;
pub use model::{ModeIndex, ModelParams};

/// Shorthand used throughout the crate.
pub type C64 = num_complex::Complex64;

/// Result alias with the crate error type.
pub type Result<T> = std::result::Result<T, Error>;
