//! Deterministic CSV writers for the artifacts this crate produces.
//!
//! Every file starts with a `# schema:` comment naming the columns and their
//! units, followed by a plain header row and the data.  Floats are printed
//! with Rust's shortest round-trip formatting, so writing the same data twice
//! yields byte-identical files and parsing a field back gives exactly the
//! value written.

use crate::classical::{ModeState, SweepResult};
use crate::fluct::QuadLabel;
use crate::steady::BranchPoint;
use crate::C64;
use nalgebra::DMatrix;
use std::io::{self, Write};

/// Time series of the seven complex mode amplitudes.
pub fn write_trajectory<W: Write>(w: &mut W, samples: &[(f64, ModeState)]) -> io::Result<()> {
    writeln!(
        w,
        "# schema: trajectory v1; t in 1/gamma, amplitudes in saturation units"
    )?;
    write!(w, "t")?;
    for j in 0..7 {
        write!(w, ",re_a{j},im_a{j}")?;
    }
    writeln!(w)?;
    for (t, state) in samples {
        write!(w, "{t}")?;
        for a in &state.alpha {
            write!(w, ",{},{}", a.re, a.im)?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// One branch of a hysteresis sweep.
pub fn write_sweep<W: Write>(w: &mut W, sweep: &SweepResult) -> io::Result<()> {
    writeln!(
        w,
        "# schema: sweep v1; e_in_sq dimensionless drive intensity, beta_mag/beta0_mag in saturation units"
    )?;
    writeln!(w, "e_in_sq,beta_mag,beta0_mag,direction")?;
    for p in &sweep.points {
        writeln!(
            w,
            "{},{},{},{}",
            p.e_in_sq,
            p.beta_mag,
            p.beta0_mag,
            sweep.direction.as_str()
        )?;
    }
    Ok(())
}

/// Stationary-hexagon branch from the Newton solver.
pub fn write_branch<W: Write>(w: &mut W, points: &[BranchPoint]) -> io::Result<()> {
    writeln!(
        w,
        "# schema: branch v1; e0s_sq dimensionless drive intensity, u/v dimensionless, amplitudes in saturation units"
    )?;
    writeln!(w, "e0s_sq,u0,v0,u1,v1,beta_mag,beta0_mag,residual")?;
    for p in points {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            p.e0s_sq,
            p.vars.u0,
            p.vars.v0,
            p.vars.u1,
            p.vars.v1,
            p.beta_mag,
            p.beta0_mag,
            p.residual
        )?;
    }
    Ok(())
}

/// Quadrature noise spectrum samples (ω in units of γ, shot noise = 1).
pub fn write_spectrum<W: Write>(w: &mut W, points: &[(f64, f64)]) -> io::Result<()> {
    writeln!(
        w,
        "# schema: spectrum v1; omega_over_gamma dimensionless, s relative to shot noise"
    )?;
    writeln!(w, "omega_over_gamma,s")?;
    for (omega, s) in points {
        writeln!(w, "{omega},{s}")?;
    }
    Ok(())
}

/// One optimally squeezed observable at one drive.
#[derive(Debug, Clone, Copy)]
pub struct BestSqueezeRow {
    pub e_in_sq: f64,
    pub label: QuadLabel,
    pub psi_opt: f64,
    pub s_min: f64,
}

/// Best squeezing against drive, one row per (drive, observable).
pub fn write_best_squeeze<W: Write>(w: &mut W, rows: &[BestSqueezeRow]) -> io::Result<()> {
    writeln!(
        w,
        "# schema: best_squeeze v1; e_in_sq dimensionless drive intensity, psi_opt in radians, s_min relative to shot noise"
    )?;
    writeln!(w, "e_in_sq,observable_label,psi_opt,s_min")?;
    for r in rows {
        writeln!(w, "{},{},{},{}", r.e_in_sq, r.label, r.psi_opt, r.s_min)?;
    }
    Ok(())
}

/// Row-major dump of a complex matrix, for inspecting drift matrices.
pub fn write_matrix_dump<W: Write>(w: &mut W, name: &str, m: &DMatrix<C64>) -> io::Result<()> {
    writeln!(w, "# schema: matrix v1; {name} {}x{}, row-major", m.nrows(), m.ncols())?;
    writeln!(w, "row,col,re,im")?;
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            let z = m[(r, c)];
            writeln!(w, "{r},{c},{},{}", z.re, z.im)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::{SweepDirection, SweepPoint};
    use crate::steady::RealVars;
    use crate::C64;

    fn render<F: Fn(&mut Vec<u8>)>(f: F) -> String {
        let mut buf = Vec::new();
        f(&mut buf);
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn every_writer_starts_with_a_schema_comment() {
        let traj = render(|b| write_trajectory(b, &[]).unwrap());
        let spec = render(|b| write_spectrum(b, &[]).unwrap());
        let bs = render(|b| write_best_squeeze(b, &[]).unwrap());
        let br = render(|b| write_branch(b, &[]).unwrap());
        for text in [&traj, &spec, &bs, &br] {
            assert!(text.starts_with("# schema: "), "{text:?}");
            // Empty data still produces the header row.
            assert_eq!(text.lines().count(), 2);
        }
    }

    #[test]
    fn trajectory_has_fifteen_columns() {
        let state = ModeState::homogeneous(C64::new(0.25, -1.5));
        let text = render(|b| write_trajectory(b, &[(0.0, state), (0.5, state)]).unwrap());
        let mut lines = text.lines().skip(1);
        let header = lines.next().unwrap();
        assert_eq!(header.split(',').count(), 15);
        assert!(header.starts_with("t,re_a0,im_a0"));
        for line in lines {
            assert_eq!(line.split(',').count(), 15);
        }
    }

    #[test]
    fn floats_round_trip_exactly() {
        let pts = [
            (0.1 + 0.2, 1.0 / 3.0),
            (f64::MIN_POSITIVE, -1.2345678912345678e-8),
            (99.99999999999997, 2.220446049250313e-16),
        ];
        let text = render(|b| write_spectrum(b, &pts).unwrap());
        for (line, (w, s)) in text.lines().skip(2).zip(&pts) {
            let mut fields = line.split(',');
            let w_back: f64 = fields.next().unwrap().parse().unwrap();
            let s_back: f64 = fields.next().unwrap().parse().unwrap();
            assert_eq!(w_back.to_bits(), w.to_bits());
            assert_eq!(s_back.to_bits(), s.to_bits());
        }
    }

    #[test]
    fn identical_input_gives_identical_bytes() {
        let sweep = SweepResult {
            direction: SweepDirection::Forward,
            points: vec![
                SweepPoint { e_in_sq: 0.8, beta_mag: 1e-6, beta0_mag: 0.8944271909999159 },
                SweepPoint { e_in_sq: 1.01, beta_mag: 0.11, beta0_mag: 0.95 },
            ],
        };
        let once = render(|b| write_sweep(b, &sweep).unwrap());
        let twice = render(|b| write_sweep(b, &sweep).unwrap());
        assert_eq!(once, twice);
        assert!(once.contains(",forward"));
    }

    #[test]
    fn branch_row_layout() {
        let p = BranchPoint {
            e0s_sq: 1.2,
            vars: RealVars { u0: -0.125, v0: 0.5, u1: 2.25, v1: -3.5 },
            beta_mag: 0.14330625,
            beta0_mag: 0.94,
            residual: 1e-13,
        };
        let text = render(|b| write_branch(b, &[p]).unwrap());
        let data = text.lines().nth(2).unwrap();
        let expect = format!("1.2,-0.125,0.5,2.25,-3.5,0.14330625,0.94,{}", 1e-13_f64);
        assert_eq!(data, expect);
    }

    #[test]
    fn best_squeeze_labels() {
        let rows = [
            BestSqueezeRow { e_in_sq: 1.0, label: QuadLabel::W, psi_opt: 0.5, s_min: 0.06 },
            BestSqueezeRow { e_in_sq: 1.0, label: QuadLabel::X(1), psi_opt: 0.75, s_min: 0.0 },
        ];
        let text = render(|b| write_best_squeeze(b, &rows).unwrap());
        assert!(text.contains("1,W,0.5,0.06"));
        assert!(text.contains("1,X1,0.75,0"));
    }

    #[test]
    fn matrix_dump_is_row_major() {
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(1.0, 0.0),
                C64::new(0.0, -2.0),
                C64::new(3.5, 0.0),
                C64::new(0.0, 0.0),
            ],
        );
        let text = render(|b| write_matrix_dump(b, "drift", &m).unwrap());
        let rows: Vec<&str> = text.lines().skip(2).collect();
        assert_eq!(rows, vec!["0,0,1,0", "0,1,0,-2", "1,0,3.5,0", "1,1,0,0"]);
    }
}
