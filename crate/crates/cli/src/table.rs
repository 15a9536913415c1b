//! Iteration-count sweeps over degree, coarsening factor, wave speed and
//! mesh.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use mgrit_advect::{DeparturePolicy, OperatorKind, WaveSpeedId};
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::run::execute;
use crate::UsageError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TableId {
    TwoLevel1d,
    Multilevel1d,
    Multilevel2d,
}

impl TableId {
    pub const ALL: [TableId; 3] = [
        TableId::TwoLevel1d,
        TableId::Multilevel1d,
        TableId::Multilevel2d,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TableId::TwoLevel1d => "two_level_1d",
            TableId::Multilevel1d => "multilevel_1d",
            TableId::Multilevel2d => "multilevel_2d",
        }
    }

    pub fn dimension(self) -> usize {
        match self {
            TableId::Multilevel2d => 2,
            _ => 1,
        }
    }

    pub fn speeds(self) -> &'static [WaveSpeedId] {
        match self {
            TableId::Multilevel2d => &[WaveSpeedId::C4, WaveSpeedId::C5],
            _ => &[WaveSpeedId::C1, WaveSpeedId::C2, WaveSpeedId::C3],
        }
    }

    /// `(n_x, n_t)` per mesh, coarsest first.
    pub fn meshes(self) -> &'static [(usize, usize)] {
        match self {
            TableId::Multilevel2d => &[(64, 1024), (128, 2048), (256, 4096), (512, 8192)],
            _ => &[(256, 1024), (1024, 4096), (4096, 16384)],
        }
    }

    /// Meshes that also get a rediscretized baseline row.
    fn baseline_meshes(self) -> &'static [(usize, usize)] {
        match self {
            TableId::Multilevel2d => &[(64, 1024), (128, 2048)],
            _ => &[],
        }
    }

    pub fn default_cap(self) -> SizeCap {
        match self {
            TableId::Multilevel2d => SizeCap { n_x: 64, n_t: 1024 },
            _ => SizeCap {
                n_x: 256,
                n_t: 1024,
            },
        }
    }
}

impl fmt::Display for TableId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TableId {
    type Err = UsageError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        Self::ALL
            .into_iter()
            .find(|t| t.name() == key)
            .ok_or_else(|| UsageError(format!("unknown table '{s}'")))
    }
}

/// Largest mesh to run; `n_x` is per axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SizeCap {
    pub n_x: usize,
    pub n_t: usize,
}

impl SizeCap {
    pub fn admits(&self, n_x: usize, n_t: usize) -> bool {
        n_x <= self.n_x && n_t <= self.n_t
    }
}

impl FromStr for SizeCap {
    type Err = UsageError;

    /// `NXxNT`, e.g. `256x1024`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || UsageError(format!("size cap must look like 256x1024, got '{s}'"));
        let (a, b) = s.trim().split_once(['x', 'X']).ok_or_else(bad)?;
        Ok(SizeCap {
            n_x: a.trim().parse().map_err(|_| bad())?,
            n_t: b.trim().parse().map_err(|_| bad())?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cell {
    pub table: String,
    pub dimension: usize,
    pub speed: String,
    pub p: usize,
    pub m: usize,
    pub n_x: usize,
    pub n_t: usize,
    pub operator: String,
    pub departures: String,
}

impl Cell {
    pub fn config(&self, seed: u64) -> ExperimentConfig {
        let multilevel = self.table != TableId::TwoLevel1d.name();
        ExperimentConfig {
            dimension: self.dimension,
            speed: self.speed.clone(),
            p: self.p,
            r: Some(self.p),
            n_x: self.n_x,
            n_t: self.n_t,
            m: vec![self.m],
            max_levels: if multilevel { usize::MAX } else { 2 },
            operator: self.operator.clone(),
            departures: self.departures.clone(),
            gmres: if multilevel { "tolerance" } else { "fixed" }.into(),
            seed: Some(seed),
            ..Default::default()
        }
    }
}

/// Optional restrictions on the sweep.
#[derive(Debug, Clone, Default)]
pub struct CellFilter {
    pub p: Vec<usize>,
    pub m: Vec<usize>,
    pub speeds: Vec<WaveSpeedId>,
    pub skip_baseline: bool,
}

impl CellFilter {
    fn keeps(&self, cell: &Cell, speed: WaveSpeedId) -> bool {
        (self.p.is_empty() || self.p.contains(&cell.p))
            && (self.m.is_empty() || self.m.contains(&cell.m))
            && (self.speeds.is_empty() || self.speeds.contains(&speed))
            && !(self.skip_baseline && cell.operator == OperatorKind::Rediscretized.name())
    }
}

/// All cells of a table in row order: degree, mesh, speed, factor, with
/// baseline rows directly after their corrected counterparts.
pub fn cells(table: TableId, filter: &CellFilter) -> Vec<Cell> {
    let mut out = Vec::new();
    for p in [1, 3, 5] {
        for &(n_x, n_t) in table.meshes() {
            for &speed in table.speeds() {
                for m in [4, 8, 16] {
                    let base = Cell {
                        table: table.name().into(),
                        dimension: table.dimension(),
                        speed: speed.name().into(),
                        p,
                        m,
                        n_x,
                        n_t,
                        operator: OperatorKind::Corrected.name().into(),
                        departures: DeparturePolicy::Backtrack.name().into(),
                    };
                    let baseline = table.baseline_meshes().contains(&(n_x, n_t)).then(|| Cell {
                        operator: OperatorKind::Rediscretized.name().into(),
                        departures: DeparturePolicy::ErkSubsteps.name().into(),
                        ..base.clone()
                    });
                    for c in std::iter::once(base).chain(baseline) {
                        if filter.keeps(&c, speed) {
                            out.push(c);
                        }
                    }
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct TableRow {
    #[serde(flatten)]
    pub cell: Cell,
    pub iterations: usize,
    pub status: String,
    pub final_factor: Option<f64>,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TableReport {
    pub table: String,
    pub cap: SizeCap,
    pub seed: u64,
    pub rows: Vec<TableRow>,
    pub skipped: Vec<Cell>,
}

pub fn run_cell(cell: &Cell, seed: u64) -> anyhow::Result<TableRow> {
    let report = execute(&cell.config(seed))?;
    Ok(TableRow {
        cell: cell.clone(),
        iterations: report.iterations,
        status: report.status,
        final_factor: report.final_factor,
        wall_time_s: report.wall_time_s,
    })
}

/// Runs every admitted cell; `progress` sees each finished row.
pub fn run_table(
    table: TableId,
    cap: SizeCap,
    filter: &CellFilter,
    seed: u64,
    mut progress: impl FnMut(&TableRow),
) -> anyhow::Result<TableReport> {
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for cell in cells(table, filter) {
        if !cap.admits(cell.n_x, cell.n_t) {
            skipped.push(cell);
            continue;
        }
        let row = run_cell(&cell, seed)?;
        progress(&row);
        rows.push(row);
    }
    Ok(TableReport {
        table: table.name().into(),
        cap,
        seed,
        rows,
        skipped,
    })
}

pub const CSV_HEADER: [&str; 12] = [
    "table",
    "dimension",
    "speed",
    "p",
    "r",
    "m",
    "n_x",
    "n_t",
    "operator",
    "departures",
    "iterations",
    "status",
];

/// Data rows only; wall times stay in the JSON report so reruns are
/// byte-identical.
pub fn write_csv<W: Write>(report: &TableReport, out: W) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for row in &report.rows {
        let c = &row.cell;
        w.write_record([
            c.table.clone(),
            c.dimension.to_string(),
            c.speed.clone(),
            c.p.to_string(),
            c.p.to_string(),
            c.m.to_string(),
            c.n_x.to_string(),
            c.n_t.to_string(),
            c.operator.clone(),
            c.departures.clone(),
            row.iterations.to_string(),
            row.status.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_level_cell_count_at_default_cap() {
        let t = TableId::TwoLevel1d;
        let cap = t.default_cap();
        let n = cells(t, &CellFilter::default())
            .iter()
            .filter(|c| cap.admits(c.n_x, c.n_t))
            .count();
        assert_eq!(n, 27);
    }

    #[test]
    fn two_d_table_has_baseline_rows() {
        let t = TableId::Multilevel2d;
        let cap = t.default_cap();
        let admitted: Vec<Cell> = cells(t, &CellFilter::default())
            .into_iter()
            .filter(|c| cap.admits(c.n_x, c.n_t))
            .collect();
        assert_eq!(admitted.len(), 36);
        assert_eq!(
            admitted
                .iter()
                .filter(|c| c.operator == "rediscretized")
                .count(),
            18
        );
    }

    #[test]
    fn cap_parsing() {
        assert_eq!(
            "256x1024".parse::<SizeCap>().unwrap(),
            SizeCap {
                n_x: 256,
                n_t: 1024
            }
        );
        assert!("256".parse::<SizeCap>().is_err());
        assert!("axb".parse::<SizeCap>().is_err());
    }
}
