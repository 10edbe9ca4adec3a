//! Independent oracle for the seven-mode dynamics.
//!
//! The crate's right-hand side and linearization are hand-expanded coupling
//! tables.  Here the same quantities are assembled from first principles:
//! each mode gets an explicit transverse wave vector, the cubic nonlinearity
//! is the full ordered sum Σ α_l α_m ᾱ_k over momentum-conserving triples
//! projected onto the retained modes, and the Jacobian blocks are the
//! corresponding formal derivatives.  Any transcription slip in the crate's
//! expanded forms shows up as a mismatch against this table.

// Shared between test binaries; not every binary uses every helper.
#![allow(dead_code)]

use hexkerr_core::classical::ModeState;
use hexkerr_core::{C64, ModelParams};

/// Wave vectors in half-units of (k_c·√3/2, k_c/2): mode 0 at the origin,
/// modes 1..=6 at 60° steps around the critical circle.  Integer components
/// make momentum conservation exact.
pub const WAVE: [(i32, i32); 7] = [
    (0, 0),
    (0, 2),
    (1, 1),
    (1, -1),
    (0, -2),
    (-1, -1),
    (-1, 1),
];

/// All ordered triples (l, m, k) with k_l + k_m − k_k = k_target.
#[allow(clippy::needless_range_loop)] // l, m, k are mode indices
pub fn conserving_triples(target: usize) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    let t = WAVE[target];
    for l in 0..7 {
        for m in 0..7 {
            for k in 0..7 {
                let sum = (
                    WAVE[l].0 + WAVE[m].0 - WAVE[k].0,
                    WAVE[l].1 + WAVE[m].1 - WAVE[k].1,
                );
                if sum == t {
                    out.push((l, m, k));
                }
            }
        }
    }
    out
}

fn linear_coefficient(i: usize, params: &ModelParams) -> C64 {
    if i == 0 {
        C64::new(-1.0, -params.delta)
    } else {
        C64::new(-1.0, -params.hex_detuning())
    }
}

/// Right-hand side assembled from the momentum table.
pub fn table_rhs(state: &ModeState, params: &ModelParams) -> [C64; 7] {
    let a = &state.alpha;
    let i_unit = C64::new(0.0, 1.0);
    let mut out = [C64::new(0.0, 0.0); 7];
    for target in 0..7 {
        let mut f = linear_coefficient(target, params) * a[target];
        if target == 0 {
            f += params.e_in;
        }
        let mut cubic = C64::new(0.0, 0.0);
        for (l, m, k) in conserving_triples(target) {
            cubic += a[l] * a[m] * a[k].conj();
        }
        out[target] = f + i_unit * cubic;
    }
    out
}

/// Formal derivative blocks of [`table_rhs`]: `a_block[i][p] = ∂F_i/∂α_p`
/// and `b_block[i][p] = ∂F_i/∂ᾱ_p`.
pub fn table_jacobian(
    state: &ModeState,
    params: &ModelParams,
) -> ([[C64; 7]; 7], [[C64; 7]; 7]) {
    let a = &state.alpha;
    let i_unit = C64::new(0.0, 1.0);
    let mut ab = [[C64::new(0.0, 0.0); 7]; 7];
    let mut bb = [[C64::new(0.0, 0.0); 7]; 7];
    for target in 0..7 {
        ab[target][target] += linear_coefficient(target, params);
        for (l, m, k) in conserving_triples(target) {
            ab[target][l] += i_unit * a[m] * a[k].conj();
            ab[target][m] += i_unit * a[l] * a[k].conj();
            bb[target][k] += i_unit * a[l] * a[m];
        }
    }
    (ab, bb)
}
