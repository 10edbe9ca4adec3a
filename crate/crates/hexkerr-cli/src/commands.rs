//! The five commands behind the `hexkerr` binary.
//!
//! Each command turns a validated [`RunConfig`] into CSV artifacts in the
//! configured output directory.  All numeric work lives in the library
//! crates; this module wires configuration into library calls and streams
//! the results to disk.  Output is deterministic: the writers print floats
//! with shortest round-trip formatting and parallel sections collect their
//! results in input order, so the same config and seed give byte-identical
//! files.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use hexkerr_core::classical::{self, SweepDirection};
use hexkerr_core::csv::{self, BestSqueezeRow};
use hexkerr_core::fluct::{build_reduced, QuadLabel, ReducedLinearSystem};
use hexkerr_core::spectra::{best_squeezing, quadrature_spectrum};
use hexkerr_core::steady::{self, find_hexagon, trace_branch, BranchPoint};
use hexkerr_core::{C64, Error as CoreError};
use hexkerr_fock::{
    build_free_and_drive, build_interaction, commutator_norm, interaction_piece,
    number_combination, op, FockBasis, InteractionPiece, ModeIndex, SparseOperator,
};
use rayon::prelude::*;

use crate::config::RunConfig;

/// Hexagonal amplitude separating "pattern formed" from "still homogeneous"
/// in sweep summaries.  The perturbation floor sits orders of magnitude
/// below, the hexagon branch well above.
const PATTERN_THRESHOLD: f64 = 0.02;

/// Conservation commutators are exactly zero in the truncated basis; this
/// tolerance is pure slack for the report's pass verdict.
const CONSERVATION_TOL: f64 = 1e-12;

fn write_file<F>(cfg: &RunConfig, name: &str, body: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<File>) -> io::Result<()>,
{
    std::fs::create_dir_all(&cfg.out_dir)
        .with_context(|| format!("cannot create {}", cfg.out_dir.display()))?;
    let path = cfg.out_dir.join(name);
    let file = File::create(&path).with_context(|| format!("cannot write {}", path.display()))?;
    let mut w = BufWriter::new(file);
    body(&mut w).and_then(|()| w.flush())
        .with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

/// Branch commands solve the steady state on the critical tie Δ = |E_in|²;
/// a configured detuning would silently mean something else, so refuse it.
fn ensure_tied(cfg: &RunConfig, command: &str) -> Result<()> {
    if cfg.delta.is_some() {
        bail!(
            "`{command}` pins the detuning to the drive (delta = |E_in|^2); \
             drop the delta setting (it only applies to `hysteresis` and `oracle`)"
        );
    }
    Ok(())
}

/// Forward and backward staircase sweeps plus a jump/drop summary.
pub fn hysteresis(cfg: &RunConfig) -> Result<()> {
    let settings = cfg.sweep_settings();
    let (fwd, bwd) = rayon::join(
        || classical::sweep(&settings, SweepDirection::Forward),
        || classical::sweep(&settings, SweepDirection::Backward),
    );
    let (fwd, bwd) = (fwd?, bwd?);
    write_file(cfg, "forward.csv", |w| csv::write_sweep(w, &fwd))?;
    write_file(cfg, "backward.csv", |w| csv::write_sweep(w, &bwd))?;

    let jump = fwd.transition_drive(PATTERN_THRESHOLD);
    let drop = bwd.transition_drive(PATTERN_THRESHOLD);
    write_file(cfg, "hysteresis_summary.csv", |w| {
        writeln!(
            w,
            "# schema: hysteresis_summary v1; drives dimensionless (|E_in|^2), NaN when the sweep saw no transition"
        )?;
        writeln!(w, "jump_up_drive,drop_down_drive")?;
        writeln!(w, "{},{}", jump.unwrap_or(f64::NAN), drop.unwrap_or(f64::NAN))
    })?;

    let show = |t: Option<f64>| t.map_or("none".to_string(), |x| x.to_string());
    println!(
        "hysteresis: jump up at {}, drop down at {} -> {}",
        show(jump),
        show(drop),
        cfg.out_dir.display()
    );
    Ok(())
}

/// Newton continuation of the stationary hexagon across the drive range.
pub fn steady(cfg: &RunConfig) -> Result<()> {
    ensure_tied(cfg, "steady")?;
    let search = cfg.hexagon_search();
    let anchor = find_hexagon(cfg.drive.clamp(cfg.drive_min, cfg.drive_max), &search)?;
    let pts = trace_branch(&anchor, cfg.drive_min, cfg.drive_max, cfg.drive_step, &search)?;
    write_file(cfg, "branch.csv", |w| csv::write_branch(w, &pts))?;
    println!(
        "steady: {} branch points on [{}, {}] -> {}",
        pts.len(),
        pts.first().map_or(cfg.drive_min, |p| p.e0s_sq),
        pts.last().map_or(cfg.drive_max, |p| p.e0s_sq),
        cfg.out_dir.display()
    );
    Ok(())
}

fn sample_spectrum(sys: &ReducedLinearSystem, psi: f64, grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    grid.iter()
        .map(|&omega| Ok((omega, quadrature_spectrum(sys, psi, omega)?)))
        .collect()
}

/// Noise spectrum of one mode combination at one drive, at the optimal
/// angle and optionally at an explicit one.
pub fn spectrum(cfg: &RunConfig) -> Result<()> {
    ensure_tied(cfg, "spectrum")?;
    let rep = find_hexagon(cfg.drive, &cfg.hexagon_search())?;
    let hex = rep.hexagon();
    let sys = build_reduced(&hex, cfg.observable)?;
    let grid = cfg.frequency_grid();

    let best = best_squeezing(&sys, 0.0)?;
    let at_best = sample_spectrum(&sys, best.psi_opt, &grid)?;
    write_file(cfg, "spectrum.csv", |w| csv::write_spectrum(w, &at_best))?;
    if let Some(angle) = cfg.angle {
        let at_angle = sample_spectrum(&sys, angle, &grid)?;
        write_file(cfg, "spectrum_angle.csv", |w| csv::write_spectrum(w, &at_angle))?;
    }
    // Context of the solved state, so spectrum columns can be tied back to
    // the pattern phase and the optimum without re-solving.
    write_file(cfg, "spectrum_info.csv", |w| {
        writeln!(
            w,
            "# schema: spectrum_info v1; e_in_sq dimensionless, amplitudes in saturation units, angles in radians, s_min relative to shot noise"
        )?;
        writeln!(w, "e_in_sq,observable_label,beta_mag,beta0_mag,phi,psi_opt,s_min")?;
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            rep.e0s_sq,
            cfg.observable,
            hex.beta_mag,
            hex.beta0.norm(),
            hex.phi,
            best.psi_opt,
            best.s_min
        )
    })?;
    println!(
        "spectrum: {} at drive {}, psi_opt = {:.6}, S(psi_opt, 0) = {:.6} -> {}",
        cfg.observable,
        rep.e0s_sq,
        best.psi_opt,
        best.s_min,
        cfg.out_dir.display()
    );
    Ok(())
}

/// Optimal low-frequency squeezing of W, Q and X across the drive range.
///
/// A drive range entirely below the fold is not an error: it produces the
/// header-only CSV that says "no hexagon anywhere here".
pub fn best_squeeze(cfg: &RunConfig) -> Result<()> {
    ensure_tied(cfg, "best-squeeze")?;
    let search = cfg.hexagon_search();
    let anchor_drive = cfg.drive.clamp(cfg.drive_min, cfg.drive_max);
    let pts: Vec<BranchPoint> = match find_hexagon(anchor_drive, &search)
        .and_then(|anchor| trace_branch(&anchor, cfg.drive_min, cfg.drive_max, cfg.drive_step, &search))
    {
        Ok(pts) => pts,
        Err(CoreError::NoHexagon { .. }) => Vec::new(),
        Err(e) => return Err(e.into()),
    };

    let rows: Vec<BestSqueezeRow> = pts
        .par_iter()
        .map(|p| -> hexkerr_core::Result<Vec<BestSqueezeRow>> {
            let hex = steady::hexagon_from_vars(&p.vars, p.e0s_sq.sqrt());
            [QuadLabel::W, QuadLabel::Q(1), QuadLabel::X(1)]
                .into_iter()
                .map(|label| {
                    let best = best_squeezing(&build_reduced(&hex, label)?, 0.0)?;
                    Ok(BestSqueezeRow {
                        e_in_sq: p.e0s_sq,
                        label,
                        psi_opt: best.psi_opt,
                        s_min: best.s_min,
                    })
                })
                .collect()
        })
        .collect::<hexkerr_core::Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();

    write_file(cfg, "best_squeeze.csv", |w| csv::write_best_squeeze(w, &rows))?;
    if pts.is_empty() {
        println!(
            "best-squeeze: no hexagon on [{}, {}] -> {}",
            cfg.drive_min,
            cfg.drive_max,
            cfg.out_dir.display()
        );
    } else {
        println!(
            "best-squeeze: {} drives x 3 observables -> {}",
            pts.len(),
            cfg.out_dir.display()
        );
    }
    Ok(())
}

/// Outcome of the Fock-space conservation report.
#[derive(Debug, Clone, Copy)]
pub struct OracleReport {
    /// Basis dimension the checks ran on.
    pub dim: usize,
    /// Largest commutator norm over all anchors and Hamiltonian terms.
    pub worst_conservation: f64,
    /// ‖[N₁ − N₄, neighbor-scatter]‖ — must be decidedly nonzero, or the
    /// checker itself is broken.
    pub violation: f64,
    /// Floor the violation is held against (scales with the coupling g).
    pub violation_floor: f64,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.worst_conservation < CONSERVATION_TOL && self.violation > self.violation_floor
    }

    pub fn failure_line(&self) -> String {
        format!(
            "conservation check failed: worst commutator norm {:.3e} (tolerance {:.0e}), \
             N1-N4 violation {:.3e} (floor {:.3e})",
            self.worst_conservation, CONSERVATION_TOL, self.violation, self.violation_floor
        )
    }
}

/// Commutator report of every N₋ anchor against every Hamiltonian term.
pub fn oracle(cfg: &RunConfig) -> Result<OracleReport> {
    let basis = Arc::new(FockBasis::new(cfg.cutoffs, cfg.total_cutoff)?);
    let delta = cfg.delta.unwrap_or(cfg.drive);
    let e_in = C64::new(cfg.drive.sqrt(), 0.0);

    let pieces: Vec<(&'static str, SparseOperator)> = InteractionPiece::all()
        .into_iter()
        .map(|p| -> Result<(&'static str, SparseOperator)> {
            Ok((p.label(), interaction_piece(p, cfg.g, 1.0, &basis)?))
        })
        .collect::<Result<_>>()?;
    let free = build_free_and_drive(delta, e_in, &basis)?;
    let total = build_interaction(cfg.g, 1.0, &basis)?.add(&free)?;

    let mut rows: Vec<(String, &'static str, f64)> = Vec::new();
    let mut worst = 0.0f64;
    for i in 1..=6 {
        let anchor = number_combination(ModeIndex::new(i)?, &basis)?;
        let name = format!("N-({i})");
        for (label, piece) in &pieces {
            let norm = commutator_norm(&anchor, piece)?;
            worst = worst.max(norm);
            rows.push((name.clone(), label, norm));
        }
        for (label, term) in [("free-drive", &free), ("total", &total)] {
            let norm = commutator_norm(&anchor, term)?;
            worst = worst.max(norm);
            rows.push((name.clone(), label, norm));
        }
    }

    // Cross-check that the report can see non-conservation at all: the
    // difference of one opposite pair alone is scattered by the
    // pump-neighbor terms.
    let n1 = op::number(&basis, ModeIndex::new(1)?);
    let n4 = op::number(&basis, ModeIndex::new(4)?);
    let scatter = &pieces
        .iter()
        .find(|(label, _)| *label == "neighbor-scatter")
        .expect("piece list covers all five families")
        .1;
    let violation = commutator_norm(&n1.sub(&n4)?, scatter)?;
    rows.push(("N1-N4".to_string(), "neighbor-scatter", violation));

    write_file(cfg, "oracle.csv", |w| {
        writeln!(
            w,
            "# schema: oracle v1; commutator_norm = max absolute entry of [anchor, term] in units of hbar*gamma"
        )?;
        writeln!(w, "anchor,term,commutator_norm")?;
        for (anchor, term, norm) in &rows {
            writeln!(w, "{anchor},{term},{norm}")?;
        }
        Ok(())
    })?;

    Ok(OracleReport {
        dim: basis.len(),
        worst_conservation: worst,
        violation,
        violation_floor: 1e-3 * cfg.g,
    })
}
