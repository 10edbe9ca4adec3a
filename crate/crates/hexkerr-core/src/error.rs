use thiserror::Error;

/// Which hexagon symmetry condition a state failed to satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symmetry {
    /// |α₁| = … = |α₆|
    Intensity,
    /// φ₁+φ₄ = φ₃+φ₆ = φ₅+φ₂ (mod 2π)
    PhaseSums,
    /// Δφ₁ + Δφ₃ + Δφ₅ = 0 (mod 2π)
    PhaseDifferenceSum,
    /// the six phases cannot be reassembled from (φ, Δφ₁, Δφ₃)
    PhaseReconstruction,
}

impl std::fmt::Display for Symmetry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Symmetry::Intensity => "equal hexagonal-mode intensities",
            Symmetry::PhaseSums => "equal sums of opposite-mode phases",
            Symmetry::PhaseDifferenceSum => "vanishing sum of phase differences",
            Symmetry::PhaseReconstruction => "phase reconstruction from (phi, dphi1, dphi3)",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("no pattern-forming wave number exists for detuning {delta} (requires delta < 2)")]
    NoCriticalWavenumber { delta: f64 },

    #[error("mode index {0} is out of range 0..=6")]
    InvalidModeIndex(usize),

    #[error("operation requires a hexagonal mode index (1..=6), got {0}")]
    NotHexagonal(usize),

    #[error("invalid model parameter: {0}")]
    InvalidParameter(String),

    #[error("integration diverged (non-finite state) at t = {t} (units of 1/gamma)")]
    Divergence { t: f64 },

    #[error("state violates {condition} by {deviation:.3e} (tolerance {tol:.3e})")]
    SymmetryViolation {
        condition: Symmetry,
        deviation: f64,
        tol: f64,
    },

    #[error("Newton iteration did not converge: residual {residual:.3e} after {iterations} iterations")]
    NewtonNoConvergence { residual: f64, iterations: usize },

    #[error("singular Jacobian in Newton iteration; try a different initial guess")]
    SingularJacobian,

    #[error("linearization requires a gauged steady state (dphi1 = dphi3 = 0), got ({dphi1}, {dphi3})")]
    NotGauged { dphi1: f64, dphi3: f64 },

    #[error("drift has a marginal mode at omega = {omega} (units of gamma); correlation matrix is singular there")]
    MarginalMode { omega: f64 },

    #[error("quadrature spectrum has non-negligible imaginary residue {residue:.3e} at omega = {omega}")]
    ImagResidue { residue: f64, omega: f64 },

    #[error("Lorentzian fit needs at least 4 points, got {0}")]
    TooFewPoints(usize),

    #[error("no hexagon steady state found at drive |E_in|^2 = {drive}")]
    NoHexagon { drive: f64 },
}
