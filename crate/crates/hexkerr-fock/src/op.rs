//! Sparse operators on the truncated basis.
//!
//! Storage is coordinate triplets `(row, col, value)` sorted by `(row, col)`
//! with exact zeros dropped, so equal operators have byte-equal entry
//! tables and norms are reproducible run to run.
//!
//! Truncation convention: a mode's creation operator simply loses the
//! transitions that would leave the basis (its "top row").  A product like
//! a_j† a_j therefore stays exact on every retained state, while identities
//! such as [a_j, a_j†] = 1 hold only on states strictly below the cutoff
//! shell — tests must restrict themselves to those states, and do.

use std::ops::Range;
use std::sync::Arc;

use hexkerr_core::ModeIndex;

use crate::{C64, Error, FockBasis, Result};

#[derive(Debug, Clone)]
pub struct SparseOperator {
    basis: Arc<FockBasis>,
    entries: Vec<(usize, usize, C64)>,
}

impl SparseOperator {
    /// Collect accumulated entries, dropping exact zeros.  The map's key
    /// order is already the storage order.
    pub(crate) fn from_map(
        basis: Arc<FockBasis>,
        map: std::collections::BTreeMap<(usize, usize), C64>,
    ) -> Self {
        let entries = map
            .into_iter()
            .filter(|&(_, v)| v != C64::new(0.0, 0.0))
            .map(|((r, c), v)| (r, c, v))
            .collect();
        SparseOperator { basis, entries }
    }

    pub fn basis(&self) -> &FockBasis {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Nonzero entries as `(row, col, value)`, sorted by `(row, col)`.
    pub fn entries(&self) -> &[(usize, usize, C64)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        match self.entries.binary_search_by_key(&(row, col), |&(r, c, _)| (r, c)) {
            Ok(i) => self.entries[i].2,
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    /// ⟨bra|O|ket⟩ for occupation vectors, `None` if either is outside the
    /// basis.
    pub fn matrix_element(&self, bra: &[u32; 7], ket: &[u32; 7]) -> Option<C64> {
        let r = self.basis.index_of(bra)?;
        let c = self.basis.index_of(ket)?;
        Some(self.entry(r, c))
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|&(_, _, v)| v.norm()).fold(0.0, f64::max)
    }

    pub fn trace(&self) -> C64 {
        self.entries
            .iter()
            .filter(|&&(r, c, _)| r == c)
            .map(|&(_, _, v)| v)
            .sum()
    }

    /// Largest deviation from entry(i,j) = conj(entry(j,i)).
    pub fn hermiticity_deviation(&self) -> f64 {
        self.entries
            .iter()
            .map(|&(r, c, v)| (v - self.entry(c, r).conj()).norm())
            .fold(0.0, f64::max)
    }

    fn check_same_basis(&self, other: &SparseOperator) -> Result<()> {
        if Arc::ptr_eq(&self.basis, &other.basis) || self.basis == other.basis {
            Ok(())
        } else {
            Err(Error::BasisMismatch)
        }
    }

    pub fn scaled(&self, factor: C64) -> SparseOperator {
        let entries = self
            .entries
            .iter()
            .map(|&(r, c, v)| (r, c, factor * v))
            .collect();
        SparseOperator { basis: self.basis.clone(), entries }
    }

    pub fn add(&self, other: &SparseOperator) -> Result<SparseOperator> {
        self.check_same_basis(other)?;
        let mut map = std::collections::BTreeMap::new();
        for &(r, c, v) in self.entries.iter().chain(&other.entries) {
            *map.entry((r, c)).or_insert(C64::new(0.0, 0.0)) += v;
        }
        Ok(SparseOperator::from_map(self.basis.clone(), map))
    }

    pub fn sub(&self, other: &SparseOperator) -> Result<SparseOperator> {
        self.add(&other.scaled(C64::new(-1.0, 0.0)))
    }

    /// Matrix product `self · other`.
    pub fn product(&self, other: &SparseOperator) -> Result<SparseOperator> {
        self.check_same_basis(other)?;
        let rows = row_table(&other.entries, self.dim());
        let mut map = std::collections::BTreeMap::new();
        for &(i, k, va) in &self.entries {
            for &(_, j, vb) in &other.entries[rows[k].clone()] {
                *map.entry((i, j)).or_insert(C64::new(0.0, 0.0)) += va * vb;
            }
        }
        Ok(SparseOperator::from_map(self.basis.clone(), map))
    }
}

/// Per-row entry ranges of a sorted triplet table.
fn row_table(entries: &[(usize, usize, C64)], dim: usize) -> Vec<Range<usize>> {
    let mut rows = vec![0..0; dim];
    let mut at = 0;
    for (r, slot) in rows.iter_mut().enumerate() {
        let start = at;
        while at < entries.len() && entries[at].0 == r {
            at += 1;
        }
        *slot = start..at;
    }
    rows
}

pub fn commutator(a: &SparseOperator, b: &SparseOperator) -> Result<SparseOperator> {
    a.product(b)?.sub(&b.product(a)?)
}

/// Largest absolute entry of `ab − ba`.
pub fn commutator_norm(a: &SparseOperator, b: &SparseOperator) -> Result<f64> {
    Ok(commutator(a, b)?.max_abs())
}

pub fn identity(basis: &Arc<FockBasis>) -> SparseOperator {
    let entries = (0..basis.len()).map(|i| (i, i, C64::new(1.0, 0.0))).collect();
    SparseOperator { basis: basis.clone(), entries }
}

/// a_mode: ⟨n−1|a|n⟩ = √n.
pub fn annihilation(basis: &Arc<FockBasis>, mode: ModeIndex) -> SparseOperator {
    let m = mode.index();
    let mut map = std::collections::BTreeMap::new();
    for (col, occ) in basis.states().iter().enumerate() {
        if occ[m] == 0 {
            continue;
        }
        let mut target = *occ;
        target[m] -= 1;
        // One photon fewer always satisfies the cutoffs.
        let row = basis
            .index_of(&target)
            .expect("lowered occupation stays inside the basis");
        map.insert((row, col), C64::new(f64::from(occ[m]).sqrt(), 0.0));
    }
    SparseOperator::from_map(basis.clone(), map)
}

/// a_mode†: ⟨n+1|a†|n⟩ = √(n+1), with transitions beyond a cutoff dropped.
pub fn creation(basis: &Arc<FockBasis>, mode: ModeIndex) -> SparseOperator {
    let m = mode.index();
    let mut map = std::collections::BTreeMap::new();
    for (col, occ) in basis.states().iter().enumerate() {
        let mut target = *occ;
        target[m] += 1;
        if let Some(row) = basis.index_of(&target) {
            map.insert((row, col), C64::new(f64::from(target[m]).sqrt(), 0.0));
        }
    }
    SparseOperator::from_map(basis.clone(), map)
}

/// N_mode = a_mode† a_mode, built diagonally (exact integers).
pub fn number(basis: &Arc<FockBasis>, mode: ModeIndex) -> SparseOperator {
    let m = mode.index();
    let mut map = std::collections::BTreeMap::new();
    for (i, occ) in basis.states().iter().enumerate() {
        map.insert((i, i), C64::new(f64::from(occ[m]), 0.0));
    }
    SparseOperator::from_map(basis.clone(), map)
}
