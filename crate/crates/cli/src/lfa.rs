//! Convergence-factor curves from the Fourier estimate.

use std::io::Write;

use mgrit_advect::fourier::{cfl_grid, rho_estimate};
use mgrit_advect::{InterpDegree, OperatorKind};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LfaRow {
    pub p: usize,
    pub m: usize,
    pub c: f64,
    pub rho: f64,
    pub coarse_kind: OperatorKind,
}

/// One row per `(m, c)`, `m` outermost.
pub fn sweep(
    p: usize,
    ms: &[usize],
    c_start: f64,
    c_end: f64,
    c_step: f64,
    kind: OperatorKind,
) -> mgrit_advect::Result<Vec<LfaRow>> {
    let deg = InterpDegree::new(p)?;
    let cs = cfl_grid(c_start, c_end, c_step);
    Ok(ms
        .iter()
        .flat_map(|&m| {
            cs.iter().map(move |&c| LfaRow {
                p,
                m,
                c,
                rho: rho_estimate(deg, m, c, kind),
                coarse_kind: kind,
            })
        })
        .collect())
}

pub fn write_csv<W: Write>(rows: &[LfaRow], out: W) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["p", "m", "c", "rho", "coarse_kind"])?;
    for r in rows {
        w.write_record([
            r.p.to_string(),
            r.m.to_string(),
            format!("{:.6}", r.c),
            format!("{:.12e}", r.rho),
            r.coarse_kind.name().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_cfl_rows_are_zero() {
        let rows = sweep(1, &[2, 4], 1.0, 1.0, 0.01, OperatorKind::Rediscretized).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|r| r.rho == 0.0));
    }

    #[test]
    fn csv_has_header_and_rows() {
        let rows = sweep(1, &[2], 0.5, 0.52, 0.01, OperatorKind::Corrected).unwrap();
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert!(text.starts_with("p,m,c,rho,coarse_kind\n"));
    }
}
