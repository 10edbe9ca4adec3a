//! The seven-mode Kerr Hamiltonian as sparse matrices, in units of ħγ.
//!
//! Expanding the continuum Kerr interaction over the homogeneous mode and
//! the six hexagonal modes leaves five normal-ordered families of quartic
//! terms ([`InteractionPiece`]).  Each family separately conserves the
//! photon-number combination N₋ = N_i + N_{i⊕1} − N_{i⊕3} − N_{i⊕4}
//! ([`number_combination`]); none of them conserve a bare opposite-pair
//! difference N_j − N_{j⊕3}, which is what makes N₋ special.
//!
//! Because every retained matrix element describes a genuine transition —
//! truncation only removes elements, never distorts them — the conservation
//! commutators vanish exactly in floating point, not merely to tolerance.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use hexkerr_core::model::hex_add;
use hexkerr_core::ModeIndex;

use crate::op::SparseOperator;
use crate::{C64, Error, FockBasis, Result};

/// Cap on nonzero entries of a built operator (configurable per call).
pub const DEFAULT_ENTRY_CAP: usize = 1_000_000;

/// The five families of quartic terms in the discretized interaction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InteractionPiece {
    /// −(γg/2) Σ_{j=0..6} a_j†² a_j²: each mode's Kerr shift on itself.
    SelfPhaseModulation,
    /// −2γg Σ_{i<j} N_i N_j: Kerr shift between distinct modes.
    CrossPhaseModulation,
    /// −γg Σ_{j=1..3} (a₀² a_j† a_{j⊕3}† + h.c.): two pump photons
    /// scattering into an opposite pair of hexagon spots.
    PumpPairCreation,
    /// −2γg Σ_{i<j≤3} (a_i a_{i⊕3} a_j† a_{j⊕3}† + h.c.): one opposite
    /// pair converting into another.
    PairExchange,
    /// −2γg Σ_{j=1..6} (a₀ a_j a_{j⊕1}† a_{j⊕5}† + h.c.): a pump photon
    /// and a spot photon scattering into the spot's two neighbours.
    PumpNeighborScattering,
}

impl InteractionPiece {
    pub fn all() -> [InteractionPiece; 5] {
        [
            InteractionPiece::SelfPhaseModulation,
            InteractionPiece::CrossPhaseModulation,
            InteractionPiece::PumpPairCreation,
            InteractionPiece::PairExchange,
            InteractionPiece::PumpNeighborScattering,
        ]
    }

    pub fn label(self) -> &'static str {
        match self {
            InteractionPiece::SelfPhaseModulation => "self-phase",
            InteractionPiece::CrossPhaseModulation => "cross-phase",
            InteractionPiece::PumpPairCreation => "pump-pair",
            InteractionPiece::PairExchange => "pair-exchange",
            InteractionPiece::PumpNeighborScattering => "neighbor-scatter",
        }
    }
}

impl fmt::Display for InteractionPiece {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Accumulates normal-ordered monomials c · Πa† Πa into one sparse matrix.
struct Accumulator<'b> {
    basis: &'b Arc<FockBasis>,
    map: BTreeMap<(usize, usize), C64>,
    cap: usize,
}

impl<'b> Accumulator<'b> {
    fn new(basis: &'b Arc<FockBasis>, cap: usize) -> Self {
        Accumulator { basis, map: BTreeMap::new(), cap }
    }

    /// Add `coeff · Π a_m†^p · Π a_m^p` (normal ordered: annihilators act
    /// first).  Transitions that would leave the basis are dropped whole —
    /// the truncated a† loses its top row, nothing else changes.
    fn monomial(
        &mut self,
        coeff: C64,
        create: &[(usize, u32)],
        destroy: &[(usize, u32)],
    ) -> Result<()> {
        'cols: for (col, occ) in self.basis.states().iter().enumerate() {
            let mut n = *occ;
            let mut amp = 1.0f64;
            for &(m, p) in destroy {
                for _ in 0..p {
                    if n[m] == 0 {
                        continue 'cols;
                    }
                    amp *= f64::from(n[m]).sqrt();
                    n[m] -= 1;
                }
            }
            for &(m, p) in create {
                for _ in 0..p {
                    n[m] += 1;
                    amp *= f64::from(n[m]).sqrt();
                }
            }
            let Some(row) = self.basis.index_of(&n) else { continue };
            *self.map.entry((row, col)).or_insert(C64::new(0.0, 0.0)) += coeff * amp;
            if self.map.len() > self.cap {
                return Err(Error::OperatorTooLarge { cap: self.cap });
            }
        }
        Ok(())
    }

    /// A monomial together with its Hermitian conjugate.
    fn hermitian_pair(
        &mut self,
        coeff: C64,
        create: &[(usize, u32)],
        destroy: &[(usize, u32)],
    ) -> Result<()> {
        self.monomial(coeff, create, destroy)?;
        self.monomial(coeff.conj(), destroy, create)
    }

    fn finish(self) -> SparseOperator {
        SparseOperator::from_map(self.basis.clone(), self.map)
    }
}

fn check_couplings(g: f64, gamma: f64) -> Result<()> {
    if !g.is_finite() || !gamma.is_finite() || gamma <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "need g finite and gamma positive, got g = {g}, gamma = {gamma}"
        )));
    }
    Ok(())
}

fn check_pump_cutoff(basis: &FockBasis) -> Result<()> {
    let c0 = basis.cutoffs()[0];
    if c0 < 2 {
        return Err(Error::PumpCutoffTooSmall(c0));
    }
    Ok(())
}

fn piece_into(acc: &mut Accumulator<'_>, piece: InteractionPiece, g: f64, gamma: f64) -> Result<()> {
    let k = C64::new(-gamma * g, 0.0);
    match piece {
        InteractionPiece::SelfPhaseModulation => {
            for j in 0..7 {
                acc.monomial(0.5 * k, &[(j, 2)], &[(j, 2)])?;
            }
        }
        InteractionPiece::CrossPhaseModulation => {
            for i in 0..7 {
                for j in i + 1..7 {
                    acc.monomial(2.0 * k, &[(i, 1), (j, 1)], &[(i, 1), (j, 1)])?;
                }
            }
        }
        InteractionPiece::PumpPairCreation => {
            for j in 1..=3 {
                acc.hermitian_pair(k, &[(j, 1), (hex_add(j, 3), 1)], &[(0, 2)])?;
            }
        }
        InteractionPiece::PairExchange => {
            for i in 1..=3usize {
                for j in i + 1..=3 {
                    acc.hermitian_pair(
                        2.0 * k,
                        &[(j, 1), (hex_add(j, 3), 1)],
                        &[(i, 1), (hex_add(i, 3), 1)],
                    )?;
                }
            }
        }
        InteractionPiece::PumpNeighborScattering => {
            for j in 1..=6 {
                acc.hermitian_pair(
                    2.0 * k,
                    &[(hex_add(j, 1), 1), (hex_add(j, 5), 1)],
                    &[(0, 1), (j, 1)],
                )?;
            }
        }
    }
    Ok(())
}

/// The full interaction H_int, sum of all five [`InteractionPiece`]s.
pub fn build_interaction(g: f64, gamma: f64, basis: &Arc<FockBasis>) -> Result<SparseOperator> {
    build_interaction_with_cap(g, gamma, basis, DEFAULT_ENTRY_CAP)
}

pub fn build_interaction_with_cap(
    g: f64,
    gamma: f64,
    basis: &Arc<FockBasis>,
    entry_cap: usize,
) -> Result<SparseOperator> {
    check_couplings(g, gamma)?;
    check_pump_cutoff(basis)?;
    let mut acc = Accumulator::new(basis, entry_cap);
    for piece in InteractionPiece::all() {
        piece_into(&mut acc, piece, g, gamma)?;
    }
    Ok(acc.finish())
}

/// One family of interaction terms on its own.
pub fn interaction_piece(
    piece: InteractionPiece,
    g: f64,
    gamma: f64,
    basis: &Arc<FockBasis>,
) -> Result<SparseOperator> {
    check_couplings(g, gamma)?;
    check_pump_cutoff(basis)?;
    let mut acc = Accumulator::new(basis, DEFAULT_ENTRY_CAP);
    piece_into(&mut acc, piece, g, gamma)?;
    Ok(acc.finish())
}

/// Detuning and drive: Δ N₀ + 2 Σ_{j=1..6} N_j + i(E_in a₀† − E_in* a₀).
///
/// The hexagonal modes sit at effective detuning Δ + l_D²k_c² = 2, the
/// critical-point tie used throughout the crate family.  The drive is an
/// affine term on mode 0 only.
pub fn build_free_and_drive(
    delta: f64,
    e_in: C64,
    basis: &Arc<FockBasis>,
) -> Result<SparseOperator> {
    if !delta.is_finite() || !e_in.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "delta and e_in must be finite, got delta = {delta}, e_in = {e_in}"
        )));
    }
    let mut acc = Accumulator::new(basis, DEFAULT_ENTRY_CAP);
    acc.monomial(C64::new(delta, 0.0), &[(0, 1)], &[(0, 1)])?;
    for j in 1..=6 {
        acc.monomial(C64::new(2.0, 0.0), &[(j, 1)], &[(j, 1)])?;
    }
    acc.hermitian_pair(C64::new(0.0, 1.0) * e_in, &[(0, 1)], &[])?;
    Ok(acc.finish())
}

/// N₋ anchored at hexagonal mode i: N_i + N_{i⊕1} − N_{i⊕3} − N_{i⊕4}.
///
/// Diagonal in the number basis, with exact small-integer entries.
/// Anchoring at the opposite mode i⊕3 flips the overall sign.
pub fn number_combination(i: ModeIndex, basis: &Arc<FockBasis>) -> Result<SparseOperator> {
    if !i.is_hexagonal() {
        return Err(Error::NotHexagonal(i.index()));
    }
    let j = i.index();
    let plus = [j, hex_add(j, 1)];
    let minus = [hex_add(j, 3), hex_add(j, 4)];
    let mut map = BTreeMap::new();
    for (s, occ) in basis.states().iter().enumerate() {
        let value = f64::from(occ[plus[0]] + occ[plus[1]]) - f64::from(occ[minus[0]] + occ[minus[1]]);
        map.insert((s, s), C64::new(value, 0.0));
    }
    Ok(SparseOperator::from_map(basis.clone(), map))
}
