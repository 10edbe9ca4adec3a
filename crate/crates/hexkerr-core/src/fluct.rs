//! Linearized quantum fluctuations about a hexagonal steady state.
//!
//! In the translation gauge (all six hexagonal amplitudes equal to β) the
//! Langevin equations for the fluctuation operators close into a 14×14 linear
//! system for (δa₀..δa₆, δa₀†..δa₆†) with drift [[A, B], [B*, A*]].  The
//! coefficient blocks depend only on (β₀, β, Δ) and the hexagon geometry:
//! every entry of A is a derivative ∂F_i/∂α_j of the classical right-hand
//! side and every entry of B a derivative ∂F_i/∂α_j*, evaluated at the
//! symmetric state, so the coupling between two hexagonal modes depends only
//! on their index offset.
//!
//! Five real mode combinations — one alternating-sign sum over the whole
//! hexagon and two pairs built on parallelogram sign patterns — decouple from
//! this system exactly: each spans (with its conjugate) a two-dimensional
//! invariant subspace, reducing the dynamics of its quadratures to a real 2×2
//! drift.  [`build_reduced`] constructs those 2×2 systems directly;
//! [`embed_check`] verifies the decoupling against the full 14×14 matrix.

use crate::classical::HexSteadyState;
use crate::{C64, Error, Result};
use nalgebra::linalg::Schur;
use nalgebra::{DMatrix, Matrix2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Per-offset coupling entries between hexagonal modes.
///
/// `a[k]` multiplies δa_{j⊕k} and `b[k]` multiplies δa_{j⊕k}† in the
/// equation for δa_j (offset 0 is the mode itself, offset 3 its opposite).
struct HexCouplings {
    a: [C64; 6],
    b: [C64; 6],
    /// Coupling of a hexagonal mode to (δa₀, δa₀†) and vice versa.
    cross_a: C64,
    cross_b: C64,
}

fn hex_couplings(beta0: C64, beta: C64) -> HexCouplings {
    let i = C64::new(0.0, 1.0);
    let nb = beta.norm_sqr();
    let n0 = beta0.norm_sqr();
    // Nearest-neighbour (±1), next-nearest (±2) and opposite (3) couplings.
    let p = i * (2.0 * beta0 * beta.conj() + 2.0 * beta0.conj() * beta + 4.0 * nb);
    let g = i * 4.0 * nb;
    let k = i * 2.0 * nb;
    let pb = i * 2.0 * beta * beta;
    let gb = i * (2.0 * beta0 * beta + 2.0 * beta * beta);
    let kb = i * (beta0 * beta0 + 6.0 * beta * beta);
    let d = C64::new(-1.0, -2.0) + i * (2.0 * n0 + 12.0 * nb);
    let db = i * beta * beta;
    HexCouplings {
        a: [d, p, g, k, g, p],
        b: [db, pb, gb, kb, gb, pb],
        cross_a: p,
        cross_b: gb,
    }
}

/// The 14×14 fluctuation drift in units of γ.
///
/// Rows/columns 0..=6 are the annihilation components δa₀..δa₆, rows 7..=13
/// the creation components.  The associated Langevin noise enters as
/// √2 δa_in per mode; the factor is folded into the output-correlation
/// formula rather than stored here.
#[derive(Debug, Clone)]
pub struct FullLinearSystem {
    pub drift: DMatrix<C64>,
}

/// Build the full linearized system at a gauged hexagon (Δφ₁ = Δφ₃ = 0).
///
/// The coefficient table is only valid when all six amplitudes literally
/// equal β, so an ungauged state is rejected with [`Error::NotGauged`];
/// translate it first (see [`crate::classical::gauge_translate`]).
pub fn build_full(hex: &HexSteadyState, delta: f64) -> Result<FullLinearSystem> {
    if !hex.is_gauged() {
        return Err(Error::NotGauged { dphi1: hex.dphi1, dphi3: hex.dphi3 });
    }
    let beta0 = hex.beta0;
    let beta = hex.beta();
    let i = C64::new(0.0, 1.0);
    let c = hex_couplings(beta0, beta);

    let mut a = DMatrix::<C64>::zeros(7, 7);
    let mut b = DMatrix::<C64>::zeros(7, 7);
    a[(0, 0)] = C64::new(-1.0, -delta) + i * (2.0 * beta0.norm_sqr() + 12.0 * beta.norm_sqr());
    b[(0, 0)] = i * (beta0 * beta0 + 6.0 * beta * beta);
    for j in 1..=6 {
        a[(0, j)] = c.cross_a;
        b[(0, j)] = c.cross_b;
        a[(j, 0)] = c.cross_a;
        b[(j, 0)] = c.cross_b;
        for off in 0..6 {
            let t = crate::model::hex_add(j, if off == 0 { 6 } else { off });
            a[(j, t)] = c.a[off];
            b[(j, t)] = c.b[off];
        }
    }

    let mut drift = DMatrix::<C64>::zeros(14, 14);
    for r in 0..7 {
        for col in 0..7 {
            drift[(r, col)] = a[(r, col)];
            drift[(r, col + 7)] = b[(r, col)];
            drift[(r + 7, col)] = b[(r, col)].conj();
            drift[(r + 7, col + 7)] = a[(r, col)].conj();
        }
    }
    Ok(FullLinearSystem { drift })
}

impl FullLinearSystem {
    /// All 28 eigenvalues of the real form of the drift.
    ///
    /// Viewing the 14 complex components as 28 real quadratures turns the
    /// drift X + iY into [[X, −Y], [Y, X]], whose spectrum is eig(X + iY)
    /// together with its conjugate — so each value is computed once on the
    /// complex 14×14 and listed with its mirror.  Working at half size also
    /// sidesteps a QR-iteration stall: on the doubled matrix every
    /// eigenvalue has multiplicity two, and nalgebra's unbounded default
    /// Schur loop can fail to deflate such spectra.  Here the iteration
    /// count is capped and, in the unlikely event the cap is hit, the
    /// matrix is re-posed under a seeded unitary similarity (which leaves
    /// eigenvalues untouched) before trying again.
    pub fn eigenvalues(&self) -> Vec<C64> {
        let n = self.drift.nrows();
        let mut m = self.drift.clone();
        for attempt in 0..4 {
            if let Some(schur) = Schur::try_new(m, f64::EPSILON, 50 * n * n) {
                let eig = schur
                    .eigenvalues()
                    .expect("a complex Schur form is fully triangular");
                let mut out = Vec::with_capacity(2 * n);
                for l in eig.iter() {
                    out.push(*l);
                    out.push(l.conj());
                }
                return out;
            }
            let mut rng = ChaCha8Rng::seed_from_u64(0x5EED + attempt);
            let gauss = DMatrix::from_fn(n, n, |_, _| {
                C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            });
            let q = gauss.qr().q();
            m = q.adjoint() * &self.drift * &q;
        }
        panic!("Schur iteration failed to converge on the fluctuation drift");
    }

    /// Largest real part over the spectrum; ≤ 0 (up to the two translational
    /// zero modes) exactly when the hexagon is dynamically stable.
    pub fn max_real_part(&self) -> f64 {
        self.eigenvalues()
            .iter()
            .map(|l| l.re)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Number of eigenvalues with |λ| < `tol`.  A stable hexagon carries two
    /// translational zero modes, counted four times here because of the
    /// doubling in [`FullLinearSystem::eigenvalues`].
    pub fn marginal_count(&self, tol: f64) -> usize {
        self.eigenvalues().iter().filter(|l| l.norm() < tol).count()
    }
}

/// The five decoupling mode combinations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadLabel {
    /// Alternating-sign sum over all six modes, (Σ (−1)^{j+1} a_j)/√6.
    W,
    /// (a_i − a_{i⊕1} + a_{i⊕3} − a_{i⊕4})/2, i = 1 or 2.
    Q(u8),
    /// (a_i + a_{i⊕1} − a_{i⊕3} − a_{i⊕4})/2, i = 1 or 2.
    X(u8),
}

impl QuadLabel {
    pub fn all() -> [QuadLabel; 5] {
        [
            QuadLabel::W,
            QuadLabel::Q(1),
            QuadLabel::Q(2),
            QuadLabel::X(1),
            QuadLabel::X(2),
        ]
    }

    fn validate(&self) -> Result<()> {
        match self {
            QuadLabel::Q(i) | QuadLabel::X(i) if !(1..=2).contains(i) => {
                Err(Error::InvalidParameter(format!(
                    "combination index must be 1 or 2, got {i}"
                )))
            }
            _ => Ok(()),
        }
    }

    /// Normalized sign weights over modes 1..=6.
    pub fn weights(&self) -> [f64; 6] {
        let mut w = [0.0; 6];
        match *self {
            QuadLabel::W => {
                for (j, x) in w.iter_mut().enumerate() {
                    *x = if j % 2 == 0 { 1.0 } else { -1.0 } / 6f64.sqrt();
                }
            }
            QuadLabel::Q(i) => {
                let i = i as usize;
                w[i - 1] = 0.5;
                w[i % 6] = -0.5;
                w[(i + 2) % 6] = 0.5;
                w[(i + 3) % 6] = -0.5;
            }
            QuadLabel::X(i) => {
                let i = i as usize;
                w[i - 1] = 0.5;
                w[i % 6] = 0.5;
                w[(i + 2) % 6] = -0.5;
                w[(i + 3) % 6] = -0.5;
            }
        }
        w
    }

    /// Multipliers (c₁, c₂, c₃) picking up the offset-1/2/3 couplings in the
    /// reduced scalar pair: the sign pattern is an eigenvector of the
    /// offset-circulant coupling structure, with eigenvalue
    /// d + c₁·p + c₂·g + c₃·k.
    fn multipliers(&self) -> (f64, f64, f64) {
        match self {
            QuadLabel::W => (-2.0, 2.0, -1.0),
            QuadLabel::Q(_) => (-1.0, -1.0, 1.0),
            QuadLabel::X(_) => (1.0, -1.0, -1.0),
        }
    }
}

impl std::fmt::Display for QuadLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            QuadLabel::W => write!(f, "W"),
            QuadLabel::Q(i) => write!(f, "Q{i}"),
            QuadLabel::X(i) => write!(f, "X{i}"),
        }
    }
}

/// Real 2×2 drift for the quadratures (c + c†, −i(c − c†)) of a decoupled
/// combination c, in units of γ.
#[derive(Debug, Clone, Copy)]
pub struct ReducedLinearSystem {
    pub label: QuadLabel,
    pub m: Matrix2<f64>,
}

impl ReducedLinearSystem {
    /// Drift expressed in a quadrature frame rotated by `theta`.
    pub fn rotated_drift(&self, theta: f64) -> Matrix2<f64> {
        let r = Matrix2::new(theta.cos(), -theta.sin(), theta.sin(), theta.cos());
        r.transpose() * self.m * r
    }
}

/// Build the reduced 2×2 system for one of the five decoupling combinations.
///
/// With δċ = N δc + M δc† the quadrature drift is
/// [[Re A₊, −Im A₊], [Im A₋, Re A₋]] with A± = N ± M*.
pub fn build_reduced(hex: &HexSteadyState, label: QuadLabel) -> Result<ReducedLinearSystem> {
    label.validate()?;
    if !hex.is_gauged() {
        return Err(Error::NotGauged { dphi1: hex.dphi1, dphi3: hex.dphi3 });
    }
    let c = hex_couplings(hex.beta0, hex.beta());
    let (c1, c2, c3) = label.multipliers();
    let n = c.a[0] + c1 * c.a[1] + c2 * c.a[2] + c3 * c.a[3];
    let m = c.b[0] + c1 * c.b[1] + c2 * c.b[2] + c3 * c.b[3];
    let a_plus = n + m.conj();
    let a_minus = n - m.conj();
    Ok(ReducedLinearSystem {
        label,
        m: Matrix2::new(a_plus.re, -a_plus.im, a_minus.im, a_minus.re),
    })
}

/// How well a combination's quadrature pair decouples inside the full system.
#[derive(Debug, Clone, Copy)]
pub struct EmbedReport {
    /// Largest component of the subspace dynamics leaking outside the
    /// (c+c†, −i(c−c†)) plane; exactly-decoupled combinations give ~1e−15.
    pub out_coupling: f64,
    /// Largest entry-wise difference between the 2×2 drift recovered from
    /// the full matrix and the directly constructed reduced drift.
    pub m_deviation: f64,
}

/// Dynamics of an arbitrary hexagonal-mode combination inside the full
/// system: returns the residual coupling out of its quadrature plane and the
/// 2×2 drift block recovered by projection.
pub fn subspace_coupling(
    full: &FullLinearSystem,
    coeffs: &[C64; 6],
) -> (f64, Matrix2<C64>) {
    let norm: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let mut u = vec![C64::new(0.0, 0.0); 14];
    let mut v = vec![C64::new(0.0, 0.0); 14];
    let i = C64::new(0.0, 1.0);
    for j in 1..=6 {
        let c = coeffs[j - 1] / norm;
        u[j] = c;
        u[j + 7] = c.conj();
        v[j] = -i * c;
        v[j + 7] = i * c.conj();
    }

    // d/dt (u·z) = (Dᵀu)·z for z = (δa, δa†).
    let apply = |w: &[C64]| -> Vec<C64> {
        (0..14)
            .map(|col| (0..14).map(|r| full.drift[(r, col)] * w[r]).sum())
            .collect()
    };
    let ru = apply(&u);
    let rv = apply(&v);

    let dot = |a: &[C64], b: &[C64]| -> C64 { a.iter().zip(b).map(|(x, y)| x.conj() * y).sum() };
    let uu = dot(&u, &u);
    let vv = dot(&v, &v);
    let proj = |r: &[C64]| -> (C64, C64, f64) {
        let cu = dot(&u, r) / uu;
        let cv = dot(&v, r) / vv;
        let leak = r
            .iter()
            .enumerate()
            .map(|(k, x)| (x - cu * u[k] - cv * v[k]).norm())
            .fold(0.0, f64::max);
        (cu, cv, leak)
    };
    let (m11, m12, leak_u) = proj(&ru);
    let (m21, m22, leak_v) = proj(&rv);
    (
        leak_u.max(leak_v),
        Matrix2::new(m11, m12, m21, m22),
    )
}

/// Verify that `reduced` really is the dynamics of its combination inside
/// `full`.
pub fn embed_check(full: &FullLinearSystem, reduced: &ReducedLinearSystem) -> EmbedReport {
    let w = reduced.label.weights();
    let mut coeffs = [C64::new(0.0, 0.0); 6];
    for (c, &x) in coeffs.iter_mut().zip(&w) {
        *c = C64::new(x, 0.0);
    }
    let (out_coupling, m2) = subspace_coupling(full, &coeffs);
    let mut dev = 0.0f64;
    for r in 0..2 {
        for c in 0..2 {
            let got = m2[(r, c)];
            dev = dev.max((got - C64::new(reduced.m[(r, c)], 0.0)).norm());
        }
    }
    EmbedReport { out_coupling, m_deviation: dev }
}
