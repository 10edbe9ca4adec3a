//! Output-field noise spectra of the reduced quadrature systems.
//!
//! A reduced 2×2 drift M (in units of γ) driven by vacuum input noise has
//! the output correlation matrix
//!
//! ```text
//! C_out(ω) = [2(M + iωI)⁻¹ + I] · C_in · [2(M − iωI)⁻¹ + I]ᵀ,
//! C_in     = [[1, i], [−i, 1]],
//! ```
//!
//! from which the noise spectrum of the quadrature at angle ψ is the real
//! scalar S(ψ, ω) = C₁₁cos²ψ + C₂₂sin²ψ + (C₁₂+C₂₁)cosψ sinψ.  Vacuum level
//! is S ≡ 1; S < 1 is squeezing.
//!
//! A hexagonal pattern can be translated freely, so one quadrature
//! combination rides a neutral (Goldstone) direction: its drift is singular
//! and C_out diverges as ω → 0.  [`output_correlation`] reports that as
//! [`Error::MarginalMode`].  The divergence lives in one quadrature
//! direction only, and the spectrum along the orthogonal, decoupled
//! direction stays finite — in fact for a decoupled row with eigenvalue a it
//! is exactly ((2+a)² + ω²)/(a² + ω²).  [`quadrature_spectrum`] and
//! [`best_squeezing`] therefore evaluate marginal frequencies in the limit
//! sense, by stepping a tiny offset off the singular point; the finite
//! directions come out correct to well below 1e−10 and the divergent ones
//! come out huge, as they should.

use crate::fluct::ReducedLinearSystem;
use crate::{C64, Error, Result};
use nalgebra::{Matrix2, Vector2};

/// |det(M + iωI)| below this is treated as a marginal (neutral) mode.
/// Stable reduced systems here have |det| of order 1 away from the Goldstone
/// point, where it collapses to rounding noise (~1e−16).
pub const MARGINAL_DET_TOL: f64 = 1e-8;

/// Frequency offset used to evaluate spectra at a marginal point in the
/// limit sense.  Chosen so that the finite-direction error, of order
/// (offset/2)², stays below 1e−10 while the offset still dominates the
/// rounding noise in the drift entries.
const MARGINAL_SHIFT: f64 = 5e-6;

const IMAG_RESIDUE_TOL: f64 = 1e-10;

/// Vacuum input correlation matrix [[1, i], [−i, 1]].
pub fn input_correlation() -> Matrix2<C64> {
    let i = C64::new(0.0, 1.0);
    Matrix2::new(C64::new(1.0, 0.0), i, -i, C64::new(1.0, 0.0))
}

fn complex_det(m: &Matrix2<f64>, omega: f64) -> C64 {
    let iw = C64::new(0.0, omega);
    let f00 = C64::new(m[(0, 0)], 0.0) + iw;
    let f11 = C64::new(m[(1, 1)], 0.0) + iw;
    f00 * f11 - C64::new(m[(0, 1)] * m[(1, 0)], 0.0)
}

/// Output-field correlation matrix at frequency `omega` (units of γ).
///
/// Errors with [`Error::MarginalMode`] when the drift has an eigenvalue at
/// iω, i.e. when M + iωI is singular and the raw correlation matrix
/// diverges.  For such frequencies use [`quadrature_spectrum`], which takes
/// the limit instead.
pub fn output_correlation(sys: &ReducedLinearSystem, omega: f64) -> Result<Matrix2<C64>> {
    if !omega.is_finite() {
        return Err(Error::InvalidParameter(format!("non-finite frequency {omega}")));
    }
    let det = complex_det(&sys.m, omega);
    if det.norm() < MARGINAL_DET_TOL {
        return Err(Error::MarginalMode { omega });
    }
    let transfer = |w: f64| -> Matrix2<C64> {
        let iw = C64::new(0.0, w);
        let d = complex_det(&sys.m, w);
        // 2 F⁻¹ + I via the adjugate of F = M + iwI.
        let f00 = C64::new(sys.m[(0, 0)], 0.0) + iw;
        let f01 = C64::new(sys.m[(0, 1)], 0.0);
        let f10 = C64::new(sys.m[(1, 0)], 0.0);
        let f11 = C64::new(sys.m[(1, 1)], 0.0) + iw;
        let one = C64::new(1.0, 0.0);
        Matrix2::new(
            2.0 * f11 / d + one,
            -2.0 * f01 / d,
            -2.0 * f10 / d,
            2.0 * f00 / d + one,
        )
    };
    let t_plus = transfer(omega);
    let t_minus = transfer(-omega);
    Ok(t_plus * input_correlation() * t_minus.transpose())
}

/// Numerator of (2 (Mᵀ + iωI)⁻¹ + I) e and the common determinant, kept as
/// a polynomial-over-determinant pair so that near-singular frequencies do
/// not blow up intermediate values.
fn transfer_row(m: &Matrix2<f64>, omega: f64, e: &Vector2<f64>) -> (Vector2<C64>, C64) {
    let iw = C64::new(0.0, omega);
    // F = Mᵀ + iωI.
    let f00 = C64::new(m[(0, 0)], 0.0) + iw;
    let f01 = C64::new(m[(1, 0)], 0.0);
    let f10 = C64::new(m[(0, 1)], 0.0);
    let f11 = C64::new(m[(1, 1)], 0.0) + iw;
    let det = f00 * f11 - f01 * f10;
    let e0 = C64::new(e[0], 0.0);
    let e1 = C64::new(e[1], 0.0);
    let n0 = 2.0 * (f11 * e0 - f01 * e1) + det * e0;
    let n1 = 2.0 * (-f10 * e0 + f00 * e1) + det * e1;
    (Vector2::new(n0, n1), det)
}

fn spectrum_at(sys: &ReducedLinearSystem, psi: f64, omega: f64) -> Result<f64> {
    let e = Vector2::new(psi.cos(), psi.sin());
    let (nu, det_u) = transfer_row(&sys.m, omega, &e);
    let (nv, det_v) = transfer_row(&sys.m, -omega, &e);
    let c = input_correlation();
    let mut s = C64::new(0.0, 0.0);
    for i in 0..2 {
        for j in 0..2 {
            s += nu[i] * c[(i, j)] * nv[j];
        }
    }
    let denom = det_u * det_v; // = |det|² for a real drift
    let s = s / denom;
    if s.im.abs() > IMAG_RESIDUE_TOL * s.re.abs().max(1.0) {
        return Err(Error::ImagResidue { residue: s.im.abs(), omega });
    }
    Ok(s.re)
}

/// Noise spectrum of the quadrature at angle `psi` (radians) and frequency
/// `omega` (units of γ).
///
/// Equivalent to contracting [`output_correlation`] with
/// (cos ψ, sin ψ), but evaluated as a ratio of polynomials in the drift
/// entries so it stays accurate near a marginal frequency; exactly at one,
/// the value is taken in the limit sense via a small frequency offset.
pub fn quadrature_spectrum(sys: &ReducedLinearSystem, psi: f64, omega: f64) -> Result<f64> {
    if !omega.is_finite() || !psi.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "non-finite spectrum arguments psi = {psi}, omega = {omega}"
        )));
    }
    let omega_eff = if complex_det(&sys.m, omega).norm() < MARGINAL_DET_TOL {
        if omega == 0.0 {
            MARGINAL_SHIFT
        } else {
            omega * (1.0 + MARGINAL_SHIFT)
        }
    } else {
        omega
    };
    spectrum_at(sys, psi, omega_eff)
}

/// Minimum of S(ψ, ω) over the quadrature angle.
#[derive(Debug, Clone, Copy)]
pub struct BestSqueezing {
    pub s_min: f64,
    /// Optimal angle, folded into [0, π).
    pub psi_opt: f64,
}

fn fold_half_turn(psi: f64) -> f64 {
    let p = psi.rem_euclid(std::f64::consts::PI);
    if p == std::f64::consts::PI {
        0.0
    } else {
        p
    }
}

/// Best squeezing over all quadrature angles at one frequency.
///
/// S(ψ) = ā + b̄ cos 2ψ + c̄ sin 2ψ, so the minimum is ā − √(b̄² + c̄²) at
/// 2ψ = atan2(−c̄, −b̄); for an angle-independent spectrum the angle is
/// reported as 0.  At a marginal frequency (ω = 0 on the translation
/// combination) the divergent quadrature direction is excluded and the
/// minimum lies along the decoupled row of the drift, which is where it is
/// evaluated.
pub fn best_squeezing(sys: &ReducedLinearSystem, omega: f64) -> Result<BestSqueezing> {
    if !omega.is_finite() {
        return Err(Error::InvalidParameter(format!("non-finite frequency {omega}")));
    }
    let det = complex_det(&sys.m, omega);
    if det.norm() >= MARGINAL_DET_TOL {
        let c = output_correlation(sys, omega)?;
        let c11 = c[(0, 0)];
        let c22 = c[(1, 1)];
        let cross = c[(0, 1)] + c[(1, 0)];
        let residue = c11.im.abs().max(c22.im.abs()).max(cross.im.abs());
        let scale = c11.re.abs().max(c22.re.abs()).max(1.0);
        if residue > IMAG_RESIDUE_TOL * scale {
            return Err(Error::ImagResidue { residue, omega });
        }
        let a = 0.5 * (c11.re + c22.re);
        let b = 0.5 * (c11.re - c22.re);
        let cc = 0.5 * cross.re;
        let amp = b.hypot(cc);
        let psi_opt = if amp < 1e-14 * a.abs().max(1.0) {
            0.0
        } else {
            fold_half_turn(0.5 * (-cc).atan2(-b))
        };
        return Ok(BestSqueezing { s_min: a - amp, psi_opt });
    }

    if omega != 0.0 {
        // A purely oscillatory marginal mode; none of the physical reduced
        // systems produce one, and there is no distinguished real quadrature
        // direction to take a limit along.
        return Err(Error::MarginalMode { omega });
    }

    // Zero-frequency Goldstone: the finite direction is the row space of the
    // (rank-one) drift.  Project onto the dominant row.
    let r0 = sys.m[(0, 0)].hypot(sys.m[(0, 1)]);
    let r1 = sys.m[(1, 0)].hypot(sys.m[(1, 1)]);
    if r0.max(r1) == 0.0 {
        return Err(Error::MarginalMode { omega });
    }
    let psi_opt = if r0 >= r1 {
        fold_half_turn(sys.m[(0, 1)].atan2(sys.m[(0, 0)]))
    } else {
        fold_half_turn(sys.m[(1, 1)].atan2(sys.m[(1, 0)]))
    };
    let s_min = quadrature_spectrum(sys, psi_opt, 0.0)?;
    Ok(BestSqueezing { s_min, psi_opt })
}

/// Intensity-difference noise of an opposite-mode pair, in physical units.
///
/// The photon-number difference N₋ of two opposite hexagonal modes is
/// conserved by the internal dynamics and decays only through the cavity
/// mirror, so its noise spectrum is a pure high-pass on shot noise:
/// V₋(ω) = γ⟨N₊⟩ (1 − 4γ²/(ω² + 4γ²)), with ⟨N₊⟩ the mean total photon
/// number of the pair.
#[derive(Debug, Clone, Copy)]
pub struct AnalyticNumberSpectrum {
    pub gamma: f64,
    pub n_plus_mean: f64,
}

impl AnalyticNumberSpectrum {
    pub fn new(gamma: f64, n_plus_mean: f64) -> Result<Self> {
        if !gamma.is_finite() || gamma <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "decay rate must be positive and finite, got {gamma}"
            )));
        }
        if !n_plus_mean.is_finite() || n_plus_mean < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "mean photon number must be non-negative, got {n_plus_mean}"
            )));
        }
        Ok(AnalyticNumberSpectrum { gamma, n_plus_mean })
    }

    /// V₋ at angular frequency `omega` (same units as γ).
    pub fn evaluate(&self, omega: f64) -> f64 {
        let g2 = 4.0 * self.gamma * self.gamma;
        self.gamma * self.n_plus_mean * omega * omega / (omega * omega + g2)
    }
}

/// Convenience form of [`AnalyticNumberSpectrum::evaluate`].
pub fn analytic_number_spectrum(omega: f64, gamma: f64, n_plus_mean: f64) -> Result<f64> {
    Ok(AnalyticNumberSpectrum::new(gamma, n_plus_mean)?.evaluate(omega))
}

/// Least-squares fit of S(ω) = a − b/(ω² + c).
#[derive(Debug, Clone, Copy)]
pub struct LorentzianFit {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// Coefficient of determination R²; 1 for an exact Lorentzian, markedly
    /// lower when the data has no Lorentzian dip (including the degenerate
    /// c ≤ 0 case, which is reported through a poor fit, not an error).
    pub goodness: f64,
}

fn lorentzian_sse(points: &[(f64, f64)], a: f64, b: f64, c: f64) -> f64 {
    points
        .iter()
        .map(|&(w, s)| {
            let r = a - b / (w * w + c) - s;
            r * r
        })
        .sum()
}

/// For fixed width c, the best (a, b) solve a 2×2 linear system.
fn profile_ab(points: &[(f64, f64)], c: f64) -> Option<(f64, f64)> {
    let n = points.len() as f64;
    let (mut st, mut stt, mut ss, mut sts) = (0.0, 0.0, 0.0, 0.0);
    for &(w, s) in points {
        let t = 1.0 / (w * w + c);
        st += t;
        stt += t * t;
        ss += s;
        sts += t * s;
    }
    let det = n * stt - st * st;
    if det.abs() < 1e-300 {
        return None;
    }
    // minimize Σ (a − b t − s)²
    let a = (stt * ss - st * sts) / det;
    let b = (st * ss - n * sts) / det;
    Some((a, b))
}

/// Fit a Lorentzian dip/peak S(ω) = a − b/(ω² + c) to (ω, S) samples.
///
/// The width c is profiled over a broad logarithmic grid (the problem is
/// linear in a, b at fixed c), then all three parameters are polished by
/// damped Gauss–Newton.  Needs at least four points.
pub fn lorentzian_fit(points: &[(f64, f64)]) -> Result<LorentzianFit> {
    if points.len() < 4 {
        return Err(Error::TooFewPoints(points.len()));
    }
    for &(w, s) in points {
        if !w.is_finite() || !s.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "non-finite fit point ({w}, {s})"
            )));
        }
    }

    let mut best: Option<(f64, f64, f64, f64)> = None; // (sse, a, b, c)
    for k in 0..=240 {
        let c = 10f64.powf(-4.0 + 8.0 * k as f64 / 240.0);
        if let Some((a, b)) = profile_ab(points, c) {
            let sse = lorentzian_sse(points, a, b, c);
            if best.is_none_or(|(s, ..)| sse < s) {
                best = Some((sse, a, b, c));
            }
        }
    }
    let (mut sse, mut a, mut b, mut c) =
        best.ok_or(Error::SingularJacobian)?;

    // Gauss–Newton with step halving; keeps c on the positive side.
    for _ in 0..60 {
        let mut jtj = nalgebra::Matrix3::<f64>::zeros();
        let mut jtr = nalgebra::Vector3::<f64>::zeros();
        for &(w, s) in points {
            let t = 1.0 / (w * w + c);
            let r = a - b * t - s;
            let j = nalgebra::Vector3::new(1.0, -t, b * t * t);
            jtj += j * j.transpose();
            jtr += j * r;
        }
        let step = match jtj.lu().solve(&(-jtr)) {
            Some(s) => s,
            None => break,
        };
        let mut scale = 1.0;
        let mut improved = false;
        for _ in 0..25 {
            let (na, nb, nc) = (a + scale * step[0], b + scale * step[1], c + scale * step[2]);
            if nc > 0.0 {
                let nsse = lorentzian_sse(points, na, nb, nc);
                if nsse < sse {
                    a = na;
                    b = nb;
                    c = nc;
                    sse = nsse;
                    improved = true;
                    break;
                }
            }
            scale *= 0.5;
        }
        if !improved || scale * step.norm() < 1e-13 * (1.0 + a.hypot(b).hypot(c)) {
            break;
        }
    }

    let mean = points.iter().map(|&(_, s)| s).sum::<f64>() / points.len() as f64;
    let sst: f64 = points.iter().map(|&(_, s)| (s - mean) * (s - mean)).sum();
    let goodness = if sst > 0.0 {
        1.0 - sse / sst
    } else if sse <= 1e-30 {
        1.0
    } else {
        0.0
    };
    Ok(LorentzianFit { a, b, c, goodness })
}

/// Standard frequency grid for spectra: 0, then 199 logarithmic points over
/// [1e−3, 1], then 200 linear points up to 100 (units of γ).
pub fn default_grid() -> Vec<f64> {
    let mut grid = Vec::with_capacity(400);
    grid.push(0.0);
    for k in 0..199 {
        grid.push(10f64.powf(-3.0 + 3.0 * k as f64 / 198.0));
    }
    for k in 1..=200 {
        grid.push(1.0 + 99.0 * k as f64 / 200.0);
    }
    grid
}
