//! The integrator against the momentum-table oracle.

mod common;

use hexkerr_core::classical::{self, ModeState};
use hexkerr_core::{C64, ModelParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_state(rng: &mut ChaCha8Rng, scale: f64) -> ModeState {
    let mut s = ModeState::zero();
    for a in &mut s.alpha {
        *a = C64::new(
            scale * rng.gen_range(-1.0..1.0),
            scale * rng.gen_range(-1.0..1.0),
        );
    }
    s
}

#[test]
#[allow(clippy::needless_range_loop)] // i is a mode index
fn rhs_matches_the_momentum_table() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let params = ModelParams::new(
            1.0,
            rng.gen_range(-0.5..1.9),
            C64::new(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)),
            rng.gen_range(-0.5..2.5),
        )
        .unwrap();
        let state = random_state(&mut rng, 1.2);
        let fast = classical::rhs(&state, &params);
        let oracle = common::table_rhs(&state, &params);
        for i in 0..7 {
            let diff = (fast.alpha[i] - oracle[i]).norm();
            assert!(
                diff < 1e-12,
                "mode {i}: rhs {} vs table {} (diff {diff:.2e})",
                fast.alpha[i],
                oracle[i]
            );
        }
    }
}

#[test]
fn seven_mode_truncation_has_no_extra_resonances() {
    // Sanity on the oracle itself: the homogeneous mode collects one triple
    // per conserved combination, e.g. the six opposite pairs feed mode 0.
    let t0 = common::conserving_triples(0);
    // (j, j⊕3, 0) for all six j, twice by ordering, plus (0,0,0), plus
    // (0,j,j) + (j,0,j) per j, plus (j⊕1, j⊕5, j)-type triples.
    assert!(t0.contains(&(1, 4, 0)));
    assert!(t0.contains(&(4, 1, 0)));
    assert!(t0.contains(&(0, 0, 0)));
    assert!(t0.contains(&(2, 6, 1)));
    // Nothing violates momentum conservation.
    for &(l, m, k) in &t0 {
        let sum = (
            common::WAVE[l].0 + common::WAVE[m].0 - common::WAVE[k].0,
            common::WAVE[l].1 + common::WAVE[m].1 - common::WAVE[k].1,
        );
        assert_eq!(sum, (0, 0));
    }
}

#[test]
fn rk4_converges_at_fourth_order() {
    let params = ModelParams::new(1.0, 1.2, C64::new(1.2f64.sqrt(), 0.0), 0.8).unwrap();
    let mut start = ModeState::homogeneous(C64::new(0.9, 0.05));
    for (j, a) in start.alpha.iter_mut().enumerate().skip(1) {
        *a = C64::new(0.1 + 0.02 * j as f64, -0.03 * j as f64);
    }
    let horizon = 0.5;
    let reference = classical::integrate(&start, &params, horizon / 2048.0, horizon, None).unwrap();
    let err = |steps: u32| -> f64 {
        let s = classical::integrate(&start, &params, horizon / steps as f64, horizon, None).unwrap();
        (0..7)
            .map(|i| (s.alpha[i] - reference.alpha[i]).norm())
            .fold(0.0, f64::max)
    };
    let coarse = err(16);
    let fine = err(32);
    let ratio = coarse / fine;
    assert!(
        (11.0..22.0).contains(&ratio),
        "expected ~16x error reduction per halving, got {ratio} ({coarse:.3e} -> {fine:.3e})"
    );
}

#[test]
fn convergence_detector_lands_on_a_fixed_point() {
    let drive = 1.2f64;
    let params = ModelParams::new(1.0, drive, C64::new(drive.sqrt(), 0.0), 2.0 - drive).unwrap();
    let mut start = ModeState::homogeneous(C64::new(drive.sqrt(), 0.0));
    let phases = classical::seed_phases(5);
    for j in 1..7 {
        start.alpha[j] = C64::from_polar(1e-6, phases[j - 1]);
    }
    let out = classical::integrate_until_converged(&start, &params, 1e-3, 3000.0, 1e-9, 100).unwrap();
    assert!(out.converged, "no convergence by t = {}", out.t_final);
    let residual = classical::rhs(&out.state, &params).max_abs();
    assert!(residual < 1e-8, "converged flag but residual {residual:.2e}");
    // The seeded perturbation must have grown into a pattern, not decayed.
    assert!(out.state.mean_hex_abs() > 0.05);
}

#[test]
fn convergence_detector_reports_timeout() {
    let drive = 1.2f64;
    let params = ModelParams::new(1.0, drive, C64::new(drive.sqrt(), 0.0), 2.0 - drive).unwrap();
    let start = ModeState::homogeneous(C64::new(0.1, 0.0));
    let out = classical::integrate_until_converged(&start, &params, 1e-3, 0.05, 1e-12, 50).unwrap();
    assert!(!out.converged);
    assert_eq!(out.t_final, 0.05);
}

#[test]
fn trajectory_sampling_covers_the_run() {
    let params = ModelParams::new(1.0, 1.0, C64::new(0.5, 0.0), 1.0).unwrap();
    let start = ModeState::zero();
    let traj = classical::integrate_trajectory(&start, &params, 1e-2, 1.0, 10).unwrap();
    assert_eq!(traj.first().unwrap().0, 0.0);
    assert!((traj.last().unwrap().0 - 1.0).abs() < 1e-12);
    assert!(traj.windows(2).all(|w| w[1].0 > w[0].0));
    // 100 steps sampled every 10, plus the initial point.
    assert_eq!(traj.len(), 11);
}
