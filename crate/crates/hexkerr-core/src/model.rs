//! Model parameters, mode bookkeeping, and the homogeneous response.
//!
//! The plane-wave (homogeneous) steady state of the driven Kerr cavity obeys
//!
//! ```text
//! |E_in|^2 = X [1 + (Δ − X)^2],      X = |E_0s|^2,
//! ```
//!
//! a cubic in the intracavity intensity X.  The homogeneous solution first
//! becomes unstable to a transverse pattern at X = 1, where the critical
//! transverse wave number satisfies l_D² k_c² = 2 − Δ.  The seven-mode model
//! keeps the homogeneous mode (index 0) and six modes on the critical hexagon
//! (indices 1..=6, opposite pairs j and j⊕3).

use crate::{C64, Error, Result};

/// Index addition on the hexagon: `i + j` folded back into 1..=6.
///
/// Mode `j⊕3` is the one opposite to `j` (k_{j⊕3} = −k_j); `j⊕1` and `j⊕5`
/// are its neighbours at ±60°, with k_{j⊕1} + k_{j⊕5} = k_j.
#[inline]
pub fn hex_add(i: usize, j: usize) -> usize {
    debug_assert!((1..=6).contains(&i) && (1..=6).contains(&j));
    (i + j - 1) % 6 + 1
}

/// A mode index: 0 is the homogeneous mode, 1..=6 the hexagonal ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModeIndex(u8);

impl ModeIndex {
    pub fn new(i: usize) -> Result<Self> {
        if i <= 6 {
            Ok(ModeIndex(i as u8))
        } else {
            Err(Error::InvalidModeIndex(i))
        }
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn is_hexagonal(self) -> bool {
        self.0 >= 1
    }

    /// Hexagon addition `self ⊕ j`; errors on the homogeneous mode.
    pub fn hex_add(self, j: ModeIndex) -> Result<ModeIndex> {
        if !self.is_hexagonal() {
            return Err(Error::NotHexagonal(self.index()));
        }
        if !j.is_hexagonal() {
            return Err(Error::NotHexagonal(j.index()));
        }
        Ok(ModeIndex(hex_add(self.index(), j.index()) as u8))
    }
}

impl std::fmt::Display for ModeIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Physical parameters of the seven-mode model, in scaled units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Cavity decay rate γ (sets the time unit; spectra are reported in ω/γ).
    pub gamma: f64,
    /// Cavity detuning Δ.
    pub delta: f64,
    /// Driving field E_in (saturation-scaled).
    pub e_in: C64,
    /// l_D² k_c² for the retained transverse modes.  At criticality this is
    /// 2 − Δ, so the hexagonal modes see an effective detuning of exactly 2.
    pub ld2kc2: f64,
}

impl ModelParams {
    pub fn new(gamma: f64, delta: f64, e_in: C64, ld2kc2: f64) -> Result<Self> {
        if !gamma.is_finite() || gamma <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "gamma must be positive and finite, got {gamma}"
            )));
        }
        if !delta.is_finite() || !ld2kc2.is_finite() || !e_in.is_finite() {
            return Err(Error::InvalidParameter(
                "delta, ld2kc2 and e_in must be finite".into(),
            ));
        }
        Ok(ModelParams { gamma, delta, e_in, ld2kc2 })
    }

    /// Parameters with the transverse modes placed on the critical hexagon,
    /// `ld2kc2 = 2 − delta`.  Fails for `delta >= 2`, where no critical wave
    /// number exists.
    pub fn at_criticality(gamma: f64, delta: f64, e_in: C64) -> Result<Self> {
        let (_, ld2kc2) = critical_point(delta)?;
        Self::new(gamma, delta, e_in, ld2kc2)
    }

    /// Effective detuning of the hexagonal modes, Δ + l_D²k_c² (= 2 at
    /// criticality).
    pub fn hex_detuning(&self) -> f64 {
        self.delta + self.ld2kc2
    }

    pub fn is_critical(&self) -> bool {
        self.delta + self.ld2kc2 == 2.0
    }

    /// Drive intensity |E_in|².
    pub fn drive(&self) -> f64 {
        self.e_in.norm_sqr()
    }
}

/// Intensity threshold and critical wave number of the pattern instability:
/// `(|E_0s|², l_D²k_c²) = (1, 2 − delta)`.
pub fn critical_point(delta: f64) -> Result<(f64, f64)> {
    if delta >= 2.0 {
        return Err(Error::NoCriticalWavenumber { delta });
    }
    Ok((1.0, 2.0 - delta))
}

/// All non-negative real roots X = |E_0s|² of the homogeneous response cubic
/// `X³ − 2ΔX² + (1+Δ²)X − |E_in|² = 0`, sorted ascending.
///
/// The cubic is solved in closed form and each root is polished with a few
/// Newton steps so that the residual is at machine level (≲1e−12 for
/// desk-scale parameters).  One, two (at a fold), or three roots are returned;
/// for Δ ≤ √3 the response is single-valued.
pub fn homogeneous_steady_states(params: &ModelParams) -> Vec<f64> {
    let d = params.delta;
    let p = params.drive();
    // X^3 + a2 X^2 + a1 X + a0
    let a2 = -2.0 * d;
    let a1 = 1.0 + d * d;
    let a0 = -p;
    let mut roots = real_cubic_roots(a2, a1, a0);

    let f = |x: f64| ((x + a2) * x + a1) * x + a0;
    let fp = |x: f64| (3.0 * x + 2.0 * a2) * x + a1;
    for r in roots.iter_mut() {
        for _ in 0..4 {
            let d = fp(*r);
            if d.abs() < 1e-300 {
                break;
            }
            *r -= f(*r) / d;
        }
    }

    roots.retain(|&x| x >= -1e-12);
    for r in roots.iter_mut() {
        if *r < 0.0 {
            *r = 0.0;
        }
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // Collapse numerically coincident roots (double root at a fold).
    roots.dedup_by(|a, b| (*a - *b).abs() < 1e-9 * (1.0 + a.abs()));
    roots
}

/// Real roots of x³ + ax² + bx + c via the trigonometric/Cardano formulas.
fn real_cubic_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    // Depressed form t^3 + pt + q with x = t - a/3.
    let shift = a / 3.0;
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let disc = (q / 2.0) * (q / 2.0) + (p / 3.0) * (p / 3.0) * (p / 3.0);
    if disc > 0.0 {
        // One real root.
        let s = disc.sqrt();
        let u = cbrt(-q / 2.0 + s);
        let v = cbrt(-q / 2.0 - s);
        vec![u + v - shift]
    } else if p == 0.0 && q == 0.0 {
        vec![-shift]
    } else {
        // Three real roots (disc <= 0 requires p < 0).
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        (0..3)
            .map(|k| m * (theta - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos() - shift)
            .collect()
    }
}

fn cbrt(x: f64) -> f64 {
    x.signum() * x.abs().powf(1.0 / 3.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn response(x: f64, delta: f64) -> f64 {
        x * (1.0 + (delta - x) * (delta - x))
    }

    #[test]
    fn hex_add_matches_mod_six_with_one_based_wrap() {
        assert_eq!(hex_add(1, 3), 4);
        assert_eq!(hex_add(4, 3), 1);
        assert_eq!(hex_add(3, 3), 6);
        assert_eq!(hex_add(5, 5), 4);
        assert_eq!(hex_add(6, 6), 6);
    }

    #[test]
    fn hex_indices_form_a_cyclic_group() {
        // 6 acts as the identity and 1 generates the whole cycle.
        for i in 1..=6 {
            assert_eq!(hex_add(i, 6), i);
            assert_eq!(hex_add(6, i), i);
        }
        let mut seen = std::collections::HashSet::new();
        let mut x = 6; // identity
        for _ in 0..6 {
            x = hex_add(x, 1);
            seen.insert(x);
        }
        assert_eq!(seen.len(), 6);
        // opposite of the opposite is the mode itself
        for i in 1..=6 {
            assert_eq!(hex_add(hex_add(i, 3), 3), i);
        }
        // associativity on the full table
        for i in 1..=6 {
            for j in 1..=6 {
                for k in 1..=6 {
                    assert_eq!(hex_add(hex_add(i, j), k), hex_add(i, hex_add(j, k)));
                }
            }
        }
    }

    #[test]
    fn mode_index_bounds() {
        assert!(ModeIndex::new(7).is_err());
        let zero = ModeIndex::new(0).unwrap();
        let one = ModeIndex::new(1).unwrap();
        assert!(!zero.is_hexagonal());
        assert!(zero.hex_add(one).is_err());
        assert_eq!(one.hex_add(ModeIndex::new(3).unwrap()).unwrap().index(), 4);
    }

    #[test]
    fn critical_point_values() {
        assert_eq!(critical_point(1.0).unwrap(), (1.0, 1.0));
        assert_eq!(critical_point(0.0).unwrap(), (1.0, 2.0));
        assert!(matches!(
            critical_point(2.0),
            Err(Error::NoCriticalWavenumber { .. })
        ));
    }

    #[test]
    fn homogeneous_recovers_consistent_drive() {
        // With delta = X0 and |E_in|^2 = X0 the branch passes through X0.
        for &x0 in &[0.3, 1.0, 2.5] {
            let p = ModelParams::new(1.0, x0, C64::new(x0.sqrt(), 0.0), 1.0).unwrap();
            let roots = homogeneous_steady_states(&p);
            assert!(
                roots.iter().any(|&r| (r - x0).abs() < 1e-10),
                "missing root {x0} in {roots:?}"
            );
        }
    }

    #[test]
    fn homogeneous_single_root_cases() {
        let p = ModelParams::new(1.0, 0.0, C64::new(2.0f64.sqrt(), 0.0), 2.0).unwrap();
        let roots = homogeneous_steady_states(&p);
        assert_eq!(roots.len(), 1);
        assert_abs_diff_eq!(roots[0], 1.0, epsilon = 1e-10);

        let p = ModelParams::new(1.0, 1.0, C64::new(1.0, 0.0), 1.0).unwrap();
        let roots = homogeneous_steady_states(&p);
        assert_eq!(roots.len(), 1);
        assert_abs_diff_eq!(roots[0], 1.0, epsilon = 1e-10);
    }

    #[test]
    fn zero_drive_gives_dark_cavity() {
        let p = ModelParams::new(1.0, 1.4, C64::new(0.0, 0.0), 0.6).unwrap();
        let roots = homogeneous_steady_states(&p);
        assert_eq!(roots.len(), 1);
        assert!(roots[0].abs() < 1e-12);
    }

    #[test]
    fn bistable_detuning_has_three_roots() {
        // Classic dispersive bistability needs delta > sqrt(3); for
        // delta = 2.5 the response folds between the turning points at
        // X = (10 ± sqrt(13))/6, i.e. drives in roughly (2.39, 3.26).
        let delta = 2.5;
        let drive = 2.8f64;
        let p = ModelParams::new(1.0, delta, C64::new(drive.sqrt(), 0.0), 0.1).unwrap();
        let roots = homogeneous_steady_states(&p);
        assert_eq!(roots.len(), 3, "roots: {roots:?}");
        for &r in &roots {
            assert_abs_diff_eq!(response(r, delta), drive, epsilon = 1e-9);
        }
    }

    proptest! {
        #[test]
        fn roots_satisfy_the_cubic(delta in -2.0f64..3.0, drive in 0.0f64..10.0) {
            let p = ModelParams::new(1.0, delta, C64::new(drive.sqrt(), 0.0), 1.0).unwrap();
            let roots = homogeneous_steady_states(&p);
            prop_assert!(!roots.is_empty());
            prop_assert!((1..=3).contains(&roots.len()));
            for w in roots.windows(2) {
                prop_assert!(w[0] <= w[1]);
            }
            for &r in &roots {
                prop_assert!(r >= 0.0);
                prop_assert!((response(r, delta) - drive).abs() < 1e-9 * (1.0 + drive));
            }
        }

        #[test]
        fn monotone_branch_below_bistability(delta in -2.0f64..1.0, drive in 0.0f64..10.0) {
            let p = ModelParams::new(1.0, delta, C64::new(drive.sqrt(), 0.0), 1.0).unwrap();
            prop_assert_eq!(homogeneous_steady_states(&p).len(), 1);
        }
    }
}
