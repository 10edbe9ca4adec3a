//! Classical seven-mode dynamics.
//!
//! In units of the cavity decay time (t in units of 1/γ) the retained modes
//! obey
//!
//! ```text
//! dα₀/dt = E_in − (1+iΔ)α₀ + i[ |α₀|²α₀ + 2α₀ Σ|α_j|² + α₀* Σ α_j α_{j⊕3}
//!                               + 2 Σ α_j* α_{j⊕1} α_{j⊕5} ]
//! dα_j/dt = −(1+2i)α_j + i[ |α_j|²α_j + 2|α₀|²α_j + 2α_j Σ_{k≠j}|α_k|²
//!            + 2α_{j⊕3}*(α_{j⊕4}α_{j⊕1} + α_{j⊕5}α_{j⊕2}) + α₀² α_{j⊕3}*
//!            + 2α₀* α_{j⊕5}α_{j⊕1} + 2α₀(α_{j⊕4}*α_{j⊕5} + α_{j⊕1}α_{j⊕2}*) ]
//! ```
//!
//! (sums over the hexagonal modes j = 1..=6; the −2i in the hexagonal linear
//! term is the effective detuning Δ + l_D²k_c², equal to 2 on the critical
//! hexagon).  Every cubic term conserves transverse momentum: it is of the
//! form α_k*α_lα_m with k_l + k_m − k_k equal to the wave vector of the mode
//! it drives.
//!
//! The integrator is a fixed-step classical Runge–Kutta (RK4) scheme.  Drive
//! sweeps for the hysteresis cycle are staircases: the drive is held at each
//! grid point for a dwell set by the ramp rate, with a deterministic
//! perturbation floor re-applied to the hexagonal modes so the pattern
//! instability is seeded identically on every run.

use crate::model::hex_add;
use crate::{C64, Error, ModelParams, Result};
use crate::error::Symmetry;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

/// Complex amplitudes of the seven modes; index 0 is homogeneous.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeState {
    pub alpha: [C64; 7],
}

impl ModeState {
    pub fn zero() -> Self {
        ModeState { alpha: [C64::new(0.0, 0.0); 7] }
    }

    /// Homogeneous state: mode 0 at `a0`, hexagonal modes empty.
    pub fn homogeneous(a0: C64) -> Self {
        let mut s = Self::zero();
        s.alpha[0] = a0;
        s
    }

    pub fn is_finite(&self) -> bool {
        self.alpha.iter().all(|a| a.is_finite())
    }

    /// Largest modulus over all seven modes.
    pub fn max_abs(&self) -> f64 {
        self.alpha.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    /// Largest modulus over the hexagonal modes only.
    pub fn max_hex_abs(&self) -> f64 {
        self.alpha[1..].iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    /// Mean modulus of the hexagonal modes.
    pub fn mean_hex_abs(&self) -> f64 {
        self.alpha[1..].iter().map(|a| a.norm()).sum::<f64>() / 6.0
    }

    /// Rigid translation of the underlying pattern.  `theta1` and `theta3`
    /// are the phases k₁·Δx and k₃·Δx picked up by modes 1 and 3; the
    /// remaining modes follow from k₂ = k₁+k₃ and k_{j⊕3} = −k_j.  Mode 0 is
    /// unchanged.
    pub fn translated(&self, theta1: f64, theta3: f64) -> ModeState {
        let theta = [theta1, theta1 + theta3, theta3, -theta1, -theta1 - theta3, -theta3];
        let mut out = *self;
        for j in 1..=6 {
            out.alpha[j] *= C64::from_polar(1.0, theta[j - 1]);
        }
        out
    }

    fn add_scaled(&self, other: &ModeState, c: f64) -> ModeState {
        let mut out = *self;
        for i in 0..7 {
            out.alpha[i] += c * other.alpha[i];
        }
        out
    }
}

/// Right-hand side of the seven mode equations, dα/d(γt).
pub fn rhs(state: &ModeState, params: &ModelParams) -> ModeState {
    let a = &state.alpha;
    let i = C64::new(0.0, 1.0);
    let hexdet = params.hex_detuning();

    // Sums shared between the mode-0 equation and the per-mode CPM terms.
    let mut sum_nn = 0.0; // Σ |α_j|²
    let mut sum_pairs = C64::new(0.0, 0.0); // Σ α_j α_{j⊕3}
    let mut sum_trip = C64::new(0.0, 0.0); // Σ α_j* α_{j⊕1} α_{j⊕5}
    for j in 1..=6 {
        sum_nn += a[j].norm_sqr();
        sum_pairs += a[j] * a[hex_add(j, 3)];
        sum_trip += a[j].conj() * a[hex_add(j, 1)] * a[hex_add(j, 5)];
    }

    let mut d = ModeState::zero();
    d.alpha[0] = params.e_in - C64::new(1.0, params.delta) * a[0]
        + i * (a[0].norm_sqr() * a[0]
            + 2.0 * sum_nn * a[0]
            + a[0].conj() * sum_pairs
            + 2.0 * sum_trip);

    let a0sq = a[0] * a[0];
    let n0 = a[0].norm_sqr();
    for j in 1..=6 {
        let (j1, j2, j3, j4, j5) = (
            hex_add(j, 1),
            hex_add(j, 2),
            hex_add(j, 3),
            hex_add(j, 4),
            hex_add(j, 5),
        );
        d.alpha[j] = -C64::new(1.0, hexdet) * a[j]
            + i * (a[j].norm_sqr() * a[j]
                + 2.0 * n0 * a[j]
                + 2.0 * (sum_nn - a[j].norm_sqr()) * a[j]
                + 2.0 * a[j3].conj() * (a[j4] * a[j1] + a[j5] * a[j2])
                + a0sq * a[j3].conj()
                + 2.0 * a[0].conj() * a[j5] * a[j1]
                + 2.0 * a[0] * (a[j4].conj() * a[j5] + a[j1] * a[j2].conj()));
    }
    d
}

/// One classical RK4 step of size `h` (in units of 1/γ), reusing a
/// precomputed `k1 = rhs(state)`.
fn rk4_from_k1(state: &ModeState, k1: &ModeState, params: &ModelParams, h: f64) -> ModeState {
    let k2 = rhs(&state.add_scaled(k1, 0.5 * h), params);
    let k3 = rhs(&state.add_scaled(&k2, 0.5 * h), params);
    let k4 = rhs(&state.add_scaled(&k3, h), params);
    let mut out = *state;
    for i in 0..7 {
        out.alpha[i] += h / 6.0
            * (k1.alpha[i] + 2.0 * k2.alpha[i] + 2.0 * k3.alpha[i] + k4.alpha[i]);
    }
    out
}

/// One RK4 step without a precomputed slope.
pub fn rk4_step(state: &ModeState, params: &ModelParams, h: f64) -> ModeState {
    let k1 = rhs(state, params);
    rk4_from_k1(state, &k1, params, h)
}

/// Linear-in-intensity drive schedule for [`integrate`].
///
/// Between `t0` and `t1` the drive intensity |E_in|² moves linearly from
/// `from_sq` to `to_sq` (constant outside that window); the drive phase is 0.
/// With `tie_delta` the detuning follows Δ = |E_in|² and the transverse modes
/// stay on the critical hexagon.
#[derive(Debug, Clone, Copy)]
pub struct DriveRamp {
    pub t0: f64,
    pub t1: f64,
    pub from_sq: f64,
    pub to_sq: f64,
    pub tie_delta: bool,
}

impl DriveRamp {
    fn params_at(&self, t: f64, base: &ModelParams) -> ModelParams {
        let frac = if self.t1 > self.t0 {
            ((t - self.t0) / (self.t1 - self.t0)).clamp(0.0, 1.0)
        } else {
            1.0
        };
        let drive = self.from_sq + frac * (self.to_sq - self.from_sq);
        let mut p = *base;
        p.e_in = C64::new(drive.max(0.0).sqrt(), 0.0);
        if self.tie_delta {
            p.delta = drive;
            p.ld2kc2 = 2.0 - drive;
        }
        p
    }
}

/// Integrate for a fixed duration; returns the final state.
///
/// Fails with [`Error::Divergence`] if the state stops being finite.
pub fn integrate(
    state0: &ModeState,
    params: &ModelParams,
    step: f64,
    duration: f64,
    ramp: Option<&DriveRamp>,
) -> Result<ModeState> {
    let n = (duration / step).round() as u64;
    let mut s = *state0;
    for k in 0..n {
        let t = k as f64 * step;
        s = match ramp {
            None => rk4_step(&s, params, step),
            Some(r) => {
                // Stage-exact parameters at t, t+h/2, t+h.
                let p1 = r.params_at(t, params);
                let p2 = r.params_at(t + 0.5 * step, params);
                let p3 = r.params_at(t + step, params);
                let k1 = rhs(&s, &p1);
                let k2 = rhs(&s.add_scaled(&k1, 0.5 * step), &p2);
                let k3 = rhs(&s.add_scaled(&k2, 0.5 * step), &p2);
                let k4 = rhs(&s.add_scaled(&k3, step), &p3);
                let mut out = s;
                for i in 0..7 {
                    out.alpha[i] += step / 6.0
                        * (k1.alpha[i] + 2.0 * k2.alpha[i] + 2.0 * k3.alpha[i] + k4.alpha[i]);
                }
                out
            }
        };
        if !s.is_finite() {
            return Err(Error::Divergence { t: t + step });
        }
    }
    Ok(s)
}

/// Integrate while recording every `sample_every`-th step (plus start/end).
pub fn integrate_trajectory(
    state0: &ModeState,
    params: &ModelParams,
    step: f64,
    duration: f64,
    sample_every: usize,
) -> Result<Vec<(f64, ModeState)>> {
    let n = (duration / step).round() as u64;
    let stride = sample_every.max(1) as u64;
    let mut out = Vec::with_capacity((n / stride + 2) as usize);
    let mut s = *state0;
    out.push((0.0, s));
    for k in 0..n {
        s = rk4_step(&s, params, step);
        if !s.is_finite() {
            return Err(Error::Divergence { t: (k + 1) as f64 * step });
        }
        if (k + 1) % stride == 0 || k + 1 == n {
            out.push(((k + 1) as f64 * step, s));
        }
    }
    Ok(out)
}

/// Result of [`integrate_until_converged`].
#[derive(Debug, Clone, Copy)]
pub struct IntegrationOutcome {
    pub state: ModeState,
    /// Whether the convergence detector fired before `max_duration`.
    pub converged: bool,
    /// Time actually integrated (units of 1/γ).
    pub t_final: f64,
}

/// Integrate until `max|dα/dt| < tol` holds for `hold` consecutive steps, or
/// until `max_duration` elapses.
///
/// The residual uses the slope already needed for the RK4 stage, so the
/// detector is free.  RK4 preserves exact fixed points, so near a stable
/// steady state the residual decays geometrically and the detector fires.
pub fn integrate_until_converged(
    state0: &ModeState,
    params: &ModelParams,
    step: f64,
    max_duration: f64,
    tol: f64,
    hold: usize,
) -> Result<IntegrationOutcome> {
    let n = (max_duration / step).round() as u64;
    let mut s = *state0;
    let mut streak = 0usize;
    for k in 0..n {
        let k1 = rhs(&s, params);
        if k1.max_abs() < tol {
            streak += 1;
            if streak >= hold {
                return Ok(IntegrationOutcome { state: s, converged: true, t_final: k as f64 * step });
            }
        } else {
            streak = 0;
        }
        s = rk4_from_k1(&s, &k1, params, step);
        if !s.is_finite() {
            return Err(Error::Divergence { t: (k + 1) as f64 * step });
        }
    }
    Ok(IntegrationOutcome { state: s, converged: false, t_final: max_duration })
}

/// Deterministic seed perturbation: amplitude `amp`, phases drawn once from a
/// counter-based generator keyed by `seed`.  Applied to the six hexagonal
/// modes.
pub fn seed_phases(seed: u64) -> [f64; 6] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = [0.0; 6];
    for p in out.iter_mut() {
        *p = rng.gen_range(-PI..PI);
    }
    out
}

fn apply_seed_floor(state: &mut ModeState, phases: &[f64; 6], amp: f64) {
    for j in 1..=6 {
        if state.alpha[j].norm() < amp {
            state.alpha[j] += C64::from_polar(amp, phases[j - 1]);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepDirection {
    Forward,
    Backward,
}

impl SweepDirection {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepDirection::Forward => "forward",
            SweepDirection::Backward => "backward",
        }
    }
}

/// One recorded point of a drive sweep.
#[derive(Debug, Clone, Copy)]
pub struct SweepPoint {
    pub e_in_sq: f64,
    /// Mean hexagonal-mode modulus at the end of the dwell.
    pub beta_mag: f64,
    pub beta0_mag: f64,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub direction: SweepDirection,
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    /// First drive (in sweep order) at which the hexagonal amplitude crosses
    /// `threshold` upward (forward) or downward (backward).
    ///
    /// A crossing needs two consecutive recorded points on opposite sides of
    /// the threshold, so a sweep that starts already past it (for instance a
    /// backward sweep that never developed a pattern) reports no transition.
    pub fn transition_drive(&self, threshold: f64) -> Option<f64> {
        let crossed: &dyn Fn(f64, f64) -> bool = match self.direction {
            SweepDirection::Forward => &|prev, cur| prev <= threshold && cur > threshold,
            SweepDirection::Backward => &|prev, cur| prev >= threshold && cur < threshold,
        };
        self.points
            .windows(2)
            .find(|w| crossed(w[0].beta_mag, w[1].beta_mag))
            .map(|w| w[1].e_in_sq)
    }
}

/// Sweep configuration.  `ramp_rate` is the drive-intensity change per unit
/// time (γ|E|² units); the dwell per staircase point is `spacing/ramp_rate`,
/// so the whole sweep takes `(hi−lo)/ramp_rate` when no point converges
/// early.
#[derive(Debug, Clone, Copy)]
pub struct SweepSettings {
    pub drive_lo: f64,
    pub drive_hi: f64,
    pub points: usize,
    pub ramp_rate: f64,
    pub step: f64,
    pub seed: u64,
    pub seed_amplitude: f64,
    pub converge_tol: f64,
    pub converge_hold: usize,
    /// Tie the detuning to the drive, Δ = |E_in|² (the homogeneous branch is
    /// then E_0s = E_in and the pattern threshold sits exactly at drive 1).
    pub tie_delta: bool,
    /// Detuning used when `tie_delta` is false.
    pub delta: f64,
    pub gamma: f64,
}

impl Default for SweepSettings {
    fn default() -> Self {
        SweepSettings {
            drive_lo: 0.8,
            drive_hi: 1.3,
            points: 101,
            ramp_rate: 1.25e-5,
            step: 1e-3,
            seed: 1,
            seed_amplitude: 1e-6,
            converge_tol: 1e-9,
            converge_hold: 100,
            tie_delta: true,
            delta: 1.0,
            gamma: 1.0,
        }
    }
}

fn params_for_drive(s: &SweepSettings, drive: f64) -> Result<ModelParams> {
    let delta = if s.tie_delta { drive } else { s.delta };
    ModelParams::at_criticality(s.gamma, delta, C64::new(drive.sqrt(), 0.0))
}

fn homogeneous_start(params: &ModelParams) -> ModeState {
    // Lowest homogeneous root; with Δ = |E_in|² this is simply E_in itself.
    let roots = crate::model::homogeneous_steady_states(params);
    let x = roots.first().copied().unwrap_or(0.0);
    let e0s = params.e_in / C64::new(1.0, params.delta - x);
    ModeState::homogeneous(e0s)
}

/// Staircase drive sweep.  Forward sweeps start on the homogeneous branch at
/// the low end with the hexagonal modes seeded at the perturbation floor;
/// backward sweeps first settle a hexagon at the high end and then track it
/// down.  Each dwell ends early once the state has converged.
pub fn sweep(settings: &SweepSettings, direction: SweepDirection) -> Result<SweepResult> {
    let n = settings.points.max(2);
    let spacing = (settings.drive_hi - settings.drive_lo) / (n - 1) as f64;
    let dwell = spacing / settings.ramp_rate;
    let phases = seed_phases(settings.seed);

    let drives: Vec<f64> = (0..n)
        .map(|k| match direction {
            SweepDirection::Forward => settings.drive_lo + k as f64 * spacing,
            SweepDirection::Backward => settings.drive_hi - k as f64 * spacing,
        })
        .collect();

    let mut state = homogeneous_start(&params_for_drive(settings, drives[0])?);
    if direction == SweepDirection::Backward {
        // Give the pattern time to develop at the high end before descending.
        let params = params_for_drive(settings, drives[0])?;
        apply_seed_floor(&mut state, &phases, settings.seed_amplitude);
        let out = integrate_until_converged(
            &state,
            &params,
            settings.step,
            dwell.max(3000.0),
            settings.converge_tol,
            settings.converge_hold,
        )?;
        state = out.state;
    }

    let mut points = Vec::with_capacity(n);
    for &drive in &drives {
        let params = params_for_drive(settings, drive)?;
        apply_seed_floor(&mut state, &phases, settings.seed_amplitude);
        let out = integrate_until_converged(
            &state,
            &params,
            settings.step,
            dwell,
            settings.converge_tol,
            settings.converge_hold,
        )?;
        state = out.state;
        points.push(SweepPoint {
            e_in_sq: drive,
            beta_mag: state.mean_hex_abs(),
            beta0_mag: state.alpha[0].norm(),
        });
    }
    Ok(SweepResult { direction, points })
}

/// Wrap an angle into (−π, π].
pub fn wrap_angle(x: f64) -> f64 {
    let w = x - 2.0 * PI * (x / (2.0 * PI)).round();
    if w <= -PI { w + 2.0 * PI } else { w }
}

/// Hexagon structure of a steady state.
///
/// The six hexagonal amplitudes share one modulus |β| and their phases are
/// fixed by three numbers: the common phase φ (with φ_j + φ_{j⊕3} = 2φ for
/// every opposite pair) and the two free differences Δφ₁ = φ₁−φ₄ and
/// Δφ₃ = φ₃−φ₆; the third difference is Δφ₅ = −Δφ₁−Δφ₃ by construction.
/// (Δφ₁, Δφ₃) parameterize rigid translations of the pattern and are pure
/// gauge.
#[derive(Debug, Clone, Copy)]
pub struct HexSteadyState {
    pub beta0: C64,
    pub beta_mag: f64,
    pub phi: f64,
    pub dphi1: f64,
    pub dphi3: f64,
}

impl HexSteadyState {
    /// The common hexagonal amplitude β = |β|e^{iφ} of the gauged state.
    pub fn beta(&self) -> C64 {
        C64::from_polar(self.beta_mag, self.phi)
    }

    pub fn dphi5(&self) -> f64 {
        -self.dphi1 - self.dphi3
    }

    /// Reassemble the full seven-mode state.
    pub fn to_mode_state(&self) -> ModeState {
        let d5 = self.dphi5();
        let ph = [
            self.phi + 0.5 * self.dphi1,
            self.phi - 0.5 * d5,
            self.phi + 0.5 * self.dphi3,
            self.phi - 0.5 * self.dphi1,
            self.phi + 0.5 * d5,
            self.phi - 0.5 * self.dphi3,
        ];
        let mut s = ModeState::homogeneous(self.beta0);
        for j in 1..=6 {
            s.alpha[j] = C64::from_polar(self.beta_mag, ph[j - 1]);
        }
        s
    }

    pub fn is_gauged(&self) -> bool {
        self.dphi1 == 0.0 && self.dphi3 == 0.0
    }
}

/// Check the hexagon symmetries of a converged state and extract
/// (β₀, |β|, φ, Δφ₁, Δφ₃).
///
/// `tol` bounds the allowed deviation of the moduli (absolute) and of the
/// wrapped angle relations (radians).  On failure the error names the
/// violated condition and its size.
pub fn extract_hexagon(state: &ModeState, tol: f64) -> Result<HexSteadyState> {
    let a = &state.alpha;

    let mags: Vec<f64> = (1..=6).map(|j| a[j].norm()).collect();
    let mean: f64 = mags.iter().sum::<f64>() / 6.0;
    let int_dev = mags.iter().map(|m| (m - mean).abs()).fold(0.0, f64::max);
    if int_dev > tol {
        return Err(Error::SymmetryViolation {
            condition: Symmetry::Intensity,
            deviation: int_dev,
            tol,
        });
    }

    // Sums of opposite-pair phases, as products α_j α_{j⊕3} (robust mod 2π).
    let p: Vec<C64> = (1..=3).map(|k| a[k] * a[k + 3]).collect();
    let mut sum_dev = 0.0f64;
    for k in 1..3 {
        sum_dev = sum_dev.max(wrap_angle((p[k] * p[0].conj()).arg()).abs());
    }
    if sum_dev > tol {
        return Err(Error::SymmetryViolation {
            condition: Symmetry::PhaseSums,
            deviation: sum_dev,
            tol,
        });
    }

    // Δφ₁ + Δφ₃ + Δφ₅ ≡ 0 (mod 2π).
    let w = a[1] * a[3] * a[5] * (a[4] * a[6] * a[2]).conj();
    let diff_dev = wrap_angle(w.arg()).abs();
    if diff_dev > tol {
        return Err(Error::SymmetryViolation {
            condition: Symmetry::PhaseDifferenceSum,
            deviation: diff_dev,
            tol,
        });
    }

    let dphi1 = wrap_angle((a[1] * a[4].conj()).arg());
    let dphi3 = wrap_angle((a[3] * a[6].conj()).arg());
    let two_phi = (p[0] + p[1] + p[2]).arg();
    let phi0 = 0.5 * two_phi;

    // φ is only determined modulo π by the pair products, and each wrapped
    // Δφ only modulo 2π in the half-angle reconstruction; search the eight
    // representative combinations for the one that reproduces the state.
    let flip = |d: f64| if d >= 0.0 { d - 2.0 * PI } else { d + 2.0 * PI };
    let mut best: Option<(f64, HexSteadyState)> = None;
    for eps in [0.0, PI] {
        for f1 in [false, true] {
            for f3 in [false, true] {
                let cand = HexSteadyState {
                    beta0: a[0],
                    beta_mag: mean,
                    phi: wrap_angle(phi0 + eps),
                    dphi1: if f1 { flip(dphi1) } else { dphi1 },
                    dphi3: if f3 { flip(dphi3) } else { dphi3 },
                };
                let rec = cand.to_mode_state();
                let dev = (1..=6)
                    .map(|j| (rec.alpha[j] - a[j]).norm())
                    .fold(0.0, f64::max);
                if best.is_none_or(|(b, _)| dev < b) {
                    best = Some((dev, cand));
                }
            }
        }
    }
    let (dev, hex) = best.unwrap();
    let guard = 10.0 * tol * mean.max(1.0);
    if dev > guard {
        return Err(Error::SymmetryViolation {
            condition: Symmetry::PhaseReconstruction,
            deviation: dev,
            tol: guard,
        });
    }
    Ok(hex)
}

/// Translate the pattern so that Δφ₁ = Δφ₃ = 0, leaving β₀, |β| and φ fixed.
pub fn gauge_translate(hex: &HexSteadyState) -> HexSteadyState {
    HexSteadyState { dphi1: 0.0, dphi3: 0.0, ..*hex }
}
