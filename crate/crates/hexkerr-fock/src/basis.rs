//! Enumerated occupation vectors for the seven truncated modes.
//!
//! A basis is fixed by one photon cutoff per mode (inclusive) and an
//! optional cap on the total photon number.  States are enumerated once,
//! in lexicographic order with mode 0 most significant, so indices — and
//! therefore sparse-matrix layouts built on top of them — are reproducible
//! across runs.

use crate::{Error, Result};

/// Enumeration guard: a basis this large would make the sparse operators
/// useless anyway, so refuse early instead of thrashing memory.
pub const DEFAULT_STATE_CAP: usize = 1_000_000;

#[derive(Debug, Clone)]
pub struct FockBasis {
    cutoffs: [u32; 7],
    total: Option<u32>,
    states: Vec<[u32; 7]>,
}

/// Two bases are the same exactly when their cutoffs agree; the state table
/// is a pure function of them.
impl PartialEq for FockBasis {
    fn eq(&self, other: &Self) -> bool {
        self.cutoffs == other.cutoffs && self.total == other.total
    }
}

impl Eq for FockBasis {}

impl FockBasis {
    pub fn new(cutoffs: [u32; 7], total: Option<u32>) -> Result<Self> {
        Self::with_state_cap(cutoffs, total, DEFAULT_STATE_CAP)
    }

    pub fn with_state_cap(cutoffs: [u32; 7], total: Option<u32>, cap: usize) -> Result<Self> {
        // Without a total cap the count is a plain product; reject oversized
        // requests before touching memory.
        if total.is_none() {
            let mut product: u128 = 1;
            for &c in &cutoffs {
                product = product.saturating_mul(c as u128 + 1);
            }
            if product > cap as u128 {
                return Err(Error::BasisTooLarge { cap });
            }
        }
        let mut states = Vec::new();
        let mut occ = [0u32; 7];
        fill(&cutoffs, total, cap, 0, 0, &mut occ, &mut states)?;
        Ok(FockBasis { cutoffs, total, states })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn cutoffs(&self) -> [u32; 7] {
        self.cutoffs
    }

    pub fn total_cutoff(&self) -> Option<u32> {
        self.total
    }

    pub fn states(&self) -> &[[u32; 7]] {
        &self.states
    }

    pub fn state(&self, i: usize) -> [u32; 7] {
        self.states[i]
    }

    /// Position of an occupation vector, or `None` if it violates a cutoff.
    pub fn index_of(&self, occ: &[u32; 7]) -> Option<usize> {
        for (n, c) in occ.iter().zip(self.cutoffs) {
            if *n > c {
                return None;
            }
        }
        if let Some(t) = self.total {
            if occ.iter().sum::<u32>() > t {
                return None;
            }
        }
        // Enumeration order is lexicographic, so the table doubles as a
        // search tree.
        self.states.binary_search(occ).ok()
    }
}

fn fill(
    cutoffs: &[u32; 7],
    total: Option<u32>,
    cap: usize,
    mode: usize,
    used: u32,
    occ: &mut [u32; 7],
    out: &mut Vec<[u32; 7]>,
) -> Result<()> {
    if mode == 7 {
        if out.len() >= cap {
            return Err(Error::BasisTooLarge { cap });
        }
        out.push(*occ);
        return Ok(());
    }
    let room = match total {
        Some(t) => cutoffs[mode].min(t - used),
        None => cutoffs[mode],
    };
    for n in 0..=room {
        occ[mode] = n;
        fill(cutoffs, total, cap, mode + 1, used + n, occ, out)?;
    }
    occ[mode] = 0;
    Ok(())
}
