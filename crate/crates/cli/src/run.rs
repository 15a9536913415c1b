//! Single solves and their reports.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Context;
use mgrit_advect::mgrit::{initial_iterate, solve_from};
use mgrit_advect::{Error, Hierarchy};
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::UsageError;

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub config: ExperimentConfig,
    pub status: String,
    pub iterations: usize,
    pub final_factor: Option<f64>,
    /// Fine-level residual norms, starting with the reference norm.
    pub history: Vec<f64>,
    /// Time points per level, finest first.
    pub levels: Vec<usize>,
    pub wall_time_s: f64,
}

fn classify(e: Error) -> anyhow::Error {
    match e {
        Error::InvalidConfig(_)
        | Error::NonDivisible { .. }
        | Error::UnsupportedDegree(_)
        | Error::UnsupportedErkOrder(_)
        | Error::SubstepCount { .. } => UsageError(e.to_string()).into(),
        other => anyhow::Error::new(other).context("building the time hierarchy"),
    }
}

pub fn execute(cfg: &ExperimentConfig) -> anyhow::Result<RunReport> {
    let solver = cfg.to_solver()?;
    let start = Instant::now();
    let hierarchy = Hierarchy::build(&solver).map_err(classify)?;
    let state = initial_iterate(&solver.grid, solver.time.n_t(), solver.seed);
    let sol = solve_from(&hierarchy, &solver, state);
    let wall = start.elapsed().as_secs_f64();
    Ok(RunReport {
        config: cfg.resolved()?,
        status: sol.report.status.name().into(),
        iterations: sol.report.iterations,
        final_factor: sol.report.final_factor(),
        history: sol.report.history.clone(),
        levels: hierarchy.levels().iter().map(|l| l.n_t()).collect(),
        wall_time_s: wall,
    })
}

/// `iteration,residual,relative` rows.
pub fn write_history_csv<W: Write>(report: &RunReport, out: W) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["iteration", "residual", "relative"])?;
    let r0 = report.history.first().copied().unwrap_or(0.0);
    for (k, r) in report.history.iter().enumerate() {
        let rel = if r0 > 0.0 { r / r0 } else { 0.0 };
        w.write_record([k.to_string(), format!("{r:e}"), format!("{rel:e}")])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `<dir>/<name>.json` and `<dir>/<name>.csv`.
pub fn write_outputs(
    report: &RunReport,
    dir: &Path,
    name: &str,
) -> anyhow::Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let json = dir.join(format!("{name}.json"));
    let csv = dir.join(format!("{name}.csv"));
    let f = std::fs::File::create(&json).with_context(|| format!("creating {}", json.display()))?;
    serde_json::to_writer_pretty(f, report)?;
    let f = std::fs::File::create(&csv).with_context(|| format!("creating {}", csv.display()))?;
    write_history_csv(report, f)?;
    Ok((json, csv))
}
