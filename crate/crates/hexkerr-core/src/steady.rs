//! Hexagonal steady states.
//!
//! A fully symmetric hexagon (all six transverse amplitudes equal to one β
//! after gauging the translations away) is described by four real variables,
//!
//! ```text
//! β₀ = E_0s (1 + u₀ + i v₀),        β = E_0s/(2√3) (u₁ + i v₁),
//! ```
//!
//! measured relative to the homogeneous solution E_0s of the same drive.  The
//! steady-state conditions are four coupled cubics in (u₀, v₀, u₁, v₁); here
//! they are evaluated by calling the complex seven-mode right-hand side at
//! the symmetric state and scaling back, which keeps this module and the
//! integrator in exact agreement by construction.  (The fully expanded
//! polynomial forms live in the tests as an independent cross-check.)
//!
//! The solver is a damped Newton iteration with a central-difference
//! Jacobian.  Branch tracing walks the hexagon branch in the drive parameter
//! with the previous solution as the next initial guess, stopping at the fold
//! where the branch ceases to exist.
//!
//! Throughout, the detuning is tied to the drive as Δ = |E_in|², which makes
//! the homogeneous solution E_0s = E_in real and pins the pattern threshold
//! to drive 1.

use crate::classical::{self, HexSteadyState, ModeState};
use crate::{C64, Error, ModelParams, Result};
use nalgebra::{Matrix4, Vector4};

/// Hexagon amplitudes relative to the homogeneous reference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealVars {
    pub u0: f64,
    pub v0: f64,
    pub u1: f64,
    pub v1: f64,
}

impl RealVars {
    pub fn zero() -> Self {
        RealVars { u0: 0.0, v0: 0.0, u1: 0.0, v1: 0.0 }
    }

    fn to_array(self) -> [f64; 4] {
        [self.u0, self.v0, self.u1, self.v1]
    }

    fn from_array(x: [f64; 4]) -> Self {
        RealVars { u0: x[0], v0: x[1], u1: x[2], v1: x[3] }
    }

    fn stepped(&self, d: &Vector4<f64>, lam: f64) -> Self {
        RealVars {
            u0: self.u0 + lam * d[0],
            v0: self.v0 + lam * d[1],
            u1: self.u1 + lam * d[2],
            v1: self.v1 + lam * d[3],
        }
    }

    /// Modulus of the hexagonal variable w₁ = u₁ + iv₁ (|β| = E_0s·|w₁|/(2√3)).
    pub fn w1_mag(&self) -> f64 {
        self.u1.hypot(self.v1)
    }
}

/// (β₀, β) for a given homogeneous reference amplitude `e0s` (taken real and
/// positive, which fixes the global phase gauge).
pub fn to_amplitudes(vars: &RealVars, e0s: f64) -> (C64, C64) {
    let beta0 = e0s * C64::new(1.0 + vars.u0, vars.v0);
    let beta = e0s / (2.0 * 3f64.sqrt()) * C64::new(vars.u1, vars.v1);
    (beta0, beta)
}

/// Inverse of [`to_amplitudes`] for a gauged hexagon.
pub fn vars_from_hexagon(hex: &HexSteadyState, e0s: f64) -> RealVars {
    let b0 = hex.beta0 / e0s;
    let w1 = hex.beta() * (2.0 * 3f64.sqrt() / e0s);
    RealVars { u0: b0.re - 1.0, v0: b0.im, u1: w1.re, v1: w1.im }
}

/// The gauged hexagon described by `vars` at reference amplitude `e0s`.
pub fn hexagon_from_vars(vars: &RealVars, e0s: f64) -> HexSteadyState {
    let (beta0, beta) = to_amplitudes(vars, e0s);
    HexSteadyState {
        beta0,
        beta_mag: beta.norm(),
        phi: if beta == C64::new(0.0, 0.0) { 0.0 } else { beta.arg() },
        dphi1: 0.0,
        dphi3: 0.0,
    }
}

/// Steady-state residual (du₀, dv₀, du₁, dv₁)/d(γt) at the symmetric state.
///
/// `e0s_sq` is the homogeneous reference intensity X = |E_0s|² (must be
/// positive); the drive is reconstructed as E_in = E_0s(1 + i(Δ − X)).  The
/// residual vanishes iff the symmetric state is a steady state of the full
/// seven-mode dynamics at that drive.
pub fn residual(vars: &RealVars, e0s_sq: f64, delta: f64) -> [f64; 4] {
    assert!(
        e0s_sq > 0.0 && e0s_sq.is_finite(),
        "homogeneous reference intensity must be positive and finite"
    );
    let s = e0s_sq.sqrt();
    let e_in = C64::new(s, s * (delta - e0s_sq));
    let params = ModelParams::new(1.0, delta, e_in, 2.0 - delta)
        .expect("finite parameters");
    let (beta0, beta) = to_amplitudes(vars, s);
    let mut st = ModeState::homogeneous(beta0);
    for j in 1..=6 {
        st.alpha[j] = beta;
    }
    let r = classical::rhs(&st, &params);
    let c = 2.0 * 3f64.sqrt();
    [
        r.alpha[0].re / s,
        r.alpha[0].im / s,
        c * r.alpha[1].re / s,
        c * r.alpha[1].im / s,
    ]
}

fn norm4(f: &[f64; 4]) -> f64 {
    f.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn numeric_jacobian(vars: &RealVars, e0s_sq: f64, delta: f64) -> Matrix4<f64> {
    let x = vars.to_array();
    let mut j = Matrix4::zeros();
    for col in 0..4 {
        let h = 1e-7 * x[col].abs().max(1.0);
        let mut xp = x;
        let mut xm = x;
        xp[col] += h;
        xm[col] -= h;
        let fp = residual(&RealVars::from_array(xp), e0s_sq, delta);
        let fm = residual(&RealVars::from_array(xm), e0s_sq, delta);
        for row in 0..4 {
            j[(row, col)] = (fp[row] - fm[row]) / (2.0 * h);
        }
    }
    j
}

/// Which solution family a converged Newton run landed on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchTag {
    /// w₁ ≈ 0: the homogeneous solution dressed in hexagon coordinates.
    Homogeneous,
    Hexagon,
}

/// Threshold on |w₁| separating the trivial and patterned solutions.
const HEX_BRANCH_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy)]
pub struct SolverReport {
    pub e0s_sq: f64,
    pub delta: f64,
    pub vars: RealVars,
    pub residual_norm: f64,
    pub iterations: usize,
    pub branch: BranchTag,
}

impl SolverReport {
    pub fn beta_mag(&self) -> f64 {
        self.e0s_sq.sqrt() * self.vars.w1_mag() / (2.0 * 3f64.sqrt())
    }

    pub fn beta0_mag(&self) -> f64 {
        self.e0s_sq.sqrt() * (1.0 + self.vars.u0).hypot(self.vars.v0)
    }

    pub fn amplitudes(&self) -> (C64, C64) {
        to_amplitudes(&self.vars, self.e0s_sq.sqrt())
    }

    pub fn hexagon(&self) -> HexSteadyState {
        hexagon_from_vars(&self.vars, self.e0s_sq.sqrt())
    }
}

/// Damped Newton iteration on the four-variable residual.
///
/// Steps are backtracked until the residual norm strictly decreases; failure
/// to improve (or a singular Jacobian, typical exactly at a fold) is reported
/// as an error rather than returning a half-converged state.
pub fn newton_solve(
    initial: &RealVars,
    e0s_sq: f64,
    delta: f64,
    tol: f64,
    max_iter: usize,
) -> Result<SolverReport> {
    let mut x = *initial;
    let mut f = residual(&x, e0s_sq, delta);
    let mut norm = norm4(&f);
    let mut iterations = 0;
    while norm >= tol {
        if iterations >= max_iter {
            return Err(Error::NewtonNoConvergence { residual: norm, iterations });
        }
        let jac = numeric_jacobian(&x, e0s_sq, delta);
        let step = jac
            .lu()
            .solve(&(-Vector4::from_row_slice(&f)))
            .ok_or(Error::SingularJacobian)?;
        let mut lam = 1.0;
        let mut accepted = false;
        for _ in 0..25 {
            let cand = x.stepped(&step, lam);
            let fc = residual(&cand, e0s_sq, delta);
            let nc = norm4(&fc);
            if nc < norm {
                x = cand;
                f = fc;
                norm = nc;
                accepted = true;
                break;
            }
            lam *= 0.5;
        }
        if !accepted {
            return Err(Error::NewtonNoConvergence { residual: norm, iterations });
        }
        iterations += 1;
    }
    let branch = if x.w1_mag() > HEX_BRANCH_FLOOR {
        BranchTag::Hexagon
    } else {
        BranchTag::Homogeneous
    };
    Ok(SolverReport { e0s_sq, delta, vars: x, residual_norm: norm, iterations, branch })
}

/// One solved point along the hexagon branch (tied detuning, Δ = X).
#[derive(Debug, Clone, Copy)]
pub struct BranchPoint {
    pub e0s_sq: f64,
    pub vars: RealVars,
    pub beta_mag: f64,
    pub beta0_mag: f64,
    pub residual: f64,
}

impl From<&SolverReport> for BranchPoint {
    fn from(r: &SolverReport) -> Self {
        BranchPoint {
            e0s_sq: r.e0s_sq,
            vars: r.vars,
            beta_mag: r.beta_mag(),
            beta0_mag: r.beta0_mag(),
            residual: r.residual_norm,
        }
    }
}

/// Settings for locating and continuing hexagon solutions.
#[derive(Debug, Clone, Copy)]
pub struct HexagonSearch {
    /// Integrator step for the direct (dynamical) attempt.
    pub step: f64,
    /// Maximum settle time for the direct attempt (units of 1/γ).
    pub settle_time: f64,
    pub seed: u64,
    pub seed_amplitude: f64,
    /// Symmetry tolerance when reading the hexagon off the relaxed state.
    pub extract_tol: f64,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    /// Drive used to anchor the branch when the requested drive is bistable
    /// (direct integration then relaxes to the homogeneous state instead).
    pub anchor_drive: f64,
    /// Drive increment for continuation from the anchor.
    pub continuation_step: f64,
}

impl Default for HexagonSearch {
    fn default() -> Self {
        HexagonSearch {
            step: 1e-3,
            settle_time: 3000.0,
            seed: 1,
            seed_amplitude: 1e-6,
            extract_tol: 1e-6,
            newton_tol: 1e-12,
            newton_max_iter: 50,
            anchor_drive: 1.2,
            continuation_step: 0.005,
        }
    }
}

/// Smallest |β| accepted as "a pattern actually formed" after integration.
const DIRECT_PATTERN_FLOOR: f64 = 1e-3;

fn direct_attempt(x: f64, search: &HexagonSearch) -> Result<Option<SolverReport>> {
    let params = ModelParams::at_criticality(1.0, x, C64::new(x.sqrt(), 0.0))?;
    let mut state = ModeState::homogeneous(C64::new(x.sqrt(), 0.0));
    let phases = classical::seed_phases(search.seed);
    for j in 1..=6 {
        state.alpha[j] += C64::from_polar(search.seed_amplitude, phases[j - 1]);
    }
    let out = classical::integrate_until_converged(
        &state,
        &params,
        search.step,
        search.settle_time,
        1e-9,
        100,
    )?;
    if out.state.mean_hex_abs() < DIRECT_PATTERN_FLOOR {
        return Ok(None); // relaxed back to the homogeneous branch
    }
    let hex = classical::extract_hexagon(&out.state, search.extract_tol)?;
    let vars = vars_from_hexagon(&hex, x.sqrt());
    let rep = newton_solve(&vars, x, x, search.newton_tol, search.newton_max_iter)?;
    Ok(if rep.branch == BranchTag::Hexagon { Some(rep) } else { None })
}

/// Find the hexagon solution at drive `e0s_sq` (tied detuning).
///
/// Above threshold the hexagon is reached directly by relaxing the seeded
/// dynamics.  In the bistable window below threshold the homogeneous state is
/// stable, so the branch is instead continued down from `anchor_drive`.
/// Fails with [`Error::NoHexagon`] once the fold is passed.
pub fn find_hexagon(e0s_sq: f64, search: &HexagonSearch) -> Result<SolverReport> {
    if let Some(rep) = direct_attempt(e0s_sq, search)? {
        return Ok(rep);
    }
    let anchor = direct_attempt(search.anchor_drive, search)?
        .ok_or(Error::NoHexagon { drive: search.anchor_drive })?;
    continue_to(&anchor, e0s_sq, search).ok_or(Error::NoHexagon { drive: e0s_sq })
}

fn continue_to(anchor: &SolverReport, target: f64, search: &HexagonSearch) -> Option<SolverReport> {
    let mut x = anchor.e0s_sq;
    let mut rep = *anchor;
    while x != target {
        let dx = (target - x).clamp(-search.continuation_step, search.continuation_step);
        x += dx;
        match newton_solve(&rep.vars, x, x, search.newton_tol, search.newton_max_iter) {
            Ok(r) if r.branch == BranchTag::Hexagon => rep = r,
            _ => return None,
        }
    }
    Some(rep)
}

/// Trace the hexagon branch over `[lo, hi]` (tied detuning), walking both
/// directions from an anchor solution and recording every accepted point.
///
/// The walk down stops at the fold (Newton fails or collapses onto the
/// homogeneous branch), so the lowest returned point approximates the
/// branch's left edge.  Points are returned in ascending drive order with
/// spacing `step_size`.
pub fn trace_branch(
    anchor: &SolverReport,
    lo: f64,
    hi: f64,
    step_size: f64,
    search: &HexagonSearch,
) -> Result<Vec<BranchPoint>> {
    let range_ok = lo.is_finite() && hi.is_finite() && lo < hi;
    let step_ok = step_size.is_finite() && step_size > 0.0;
    if !range_ok || !step_ok {
        return Err(Error::InvalidParameter(
            "branch range needs lo < hi and a positive step".into(),
        ));
    }
    if anchor.branch != BranchTag::Hexagon {
        return Err(Error::NoHexagon { drive: anchor.e0s_sq });
    }

    let walk = |dir: f64, bound: f64| -> Vec<SolverReport> {
        let mut out = Vec::new();
        let mut rep = *anchor;
        loop {
            let remaining = (bound - rep.e0s_sq) * dir;
            if remaining <= 0.0 {
                break;
            }
            let x = rep.e0s_sq + dir * step_size.min(remaining);
            match newton_solve(&rep.vars, x, x, search.newton_tol, search.newton_max_iter) {
                Ok(r) if r.branch == BranchTag::Hexagon => {
                    out.push(r);
                    rep = r;
                }
                _ => break,
            }
        }
        out
    };

    let down = walk(-1.0, lo);
    let up = walk(1.0, hi);
    let mut pts: Vec<BranchPoint> = down.iter().rev().map(BranchPoint::from).collect();
    if (lo..=hi).contains(&anchor.e0s_sq) {
        pts.push(BranchPoint::from(anchor));
    }
    pts.extend(up.iter().map(BranchPoint::from));
    // An anchor outside [lo, hi] walks through drives on its way into the
    // range; keep only what was asked for.
    pts.retain(|p| (lo..=hi).contains(&p.e0s_sq));
    pts.sort_by(|a, b| a.e0s_sq.partial_cmp(&b.e0s_sq).unwrap());
    if pts.is_empty() {
        return Err(Error::NoHexagon { drive: anchor.e0s_sq });
    }
    Ok(pts)
}
