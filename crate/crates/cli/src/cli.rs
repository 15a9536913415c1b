//! Command-line surface.

use std::io::Write;
use std::path::PathBuf;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use mgrit_advect::{OperatorKind, WaveSpeedId};

use crate::config::{self, ExperimentConfig};
use crate::table::{CellFilter, TableId};
use crate::verify::Suite;
use crate::{lfa, run, table, verify, UsageError};

#[derive(Debug, Parser)]
#[command(
    name = "mgrit-advect",
    version,
    about = "MGRIT experiments for semi-Lagrangian advection"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[allow(clippy::large_enum_variant)]
#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one solve and write a JSON report and a CSV residual history.
    Run(RunArgs),
    /// Sweep an iteration-count table.
    Table(TableArgs),
    /// Fourier convergence-factor estimates over a CFL range.
    Lfa(LfaArgs),
    /// Run a verification battery.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// JSON experiment config; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub dimension: Option<usize>,
    /// Wave speed C1..C5.
    #[arg(long)]
    pub speed: Option<String>,
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long)]
    pub r: Option<usize>,
    #[arg(long)]
    pub n_x: Option<usize>,
    #[arg(long)]
    pub n_t: Option<usize>,
    /// Fine time step (default 0.85 h).
    #[arg(long)]
    pub dt: Option<f64>,
    /// Coarsening factors per level, comma separated; the last repeats.
    #[arg(long, value_delimiter = ',')]
    pub m: Option<Vec<usize>>,
    /// Level count, or `all`.
    #[arg(long)]
    pub max_levels: Option<String>,
    /// rediscretized, corrected, forward_euler or ideal.
    #[arg(long)]
    pub operator: Option<String>,
    /// backtrack, erk_rediscretized or erk_substeps.
    #[arg(long)]
    pub departures: Option<String>,
    /// fixed, tolerance or auto.
    #[arg(long)]
    pub gmres: Option<String>,
    #[arg(long)]
    pub gmres_iters: Option<usize>,
    #[arg(long)]
    pub gmres_tol: Option<f64>,
    /// FCF or F.
    #[arg(long)]
    pub relaxation: Option<String>,
    /// Defaults to MGRIT_ADVECT_SEED, then 0.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub divergence: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, default_value = "run")]
    pub name: String,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    /// two_level_1d, multilevel_1d or multilevel_2d.
    pub table: String,
    /// Largest mesh as NXxNT (NX per axis); defaults per table.
    #[arg(long)]
    pub size_cap: Option<String>,
    #[arg(long, value_delimiter = ',')]
    pub p: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    pub m: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    pub speed: Vec<String>,
    /// Leave out the rediscretized baseline rows.
    #[arg(long)]
    pub no_baseline: bool,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// File stem; defaults to the table id.
    #[arg(long)]
    pub name: Option<String>,
}

#[derive(Debug, Args)]
pub struct LfaArgs {
    #[arg(long, default_value_t = 1)]
    pub p: usize,
    #[arg(long, value_delimiter = ',', default_value = "2,4,8,16,32")]
    pub m: Vec<usize>,
    #[arg(long, default_value_t = 0.5)]
    pub c_start: f64,
    #[arg(long, default_value_t = 1.0)]
    pub c_end: f64,
    #[arg(long, default_value_t = 0.01)]
    pub c_step: f64,
    #[arg(long, default_value = "corrected")]
    pub coarse_kind: String,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// truncation, stability, footnote_equivalence or properties.
    pub suite: String,
    /// Degree for the truncation suite.
    #[arg(long, default_value_t = 1)]
    pub p: usize,
    /// JSON destination; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_levels(s: &str) -> anyhow::Result<usize> {
    if s.eq_ignore_ascii_case("all") {
        return Ok(usize::MAX);
    }
    s.parse()
        .map_err(|_| UsageError(format!("max_levels must be a count or 'all', got '{s}'")).into())
}

impl RunArgs {
    pub fn experiment(&self) -> anyhow::Result<ExperimentConfig> {
        let mut c = config::load(self.config.as_deref())?;
        macro_rules! take {
            ($($f:ident),*) => {$(
                if let Some(v) = self.$f.clone() {
                    c.$f = v;
                }
            )*};
        }
        take!(
            dimension,
            speed,
            p,
            n_x,
            n_t,
            m,
            operator,
            departures,
            gmres,
            gmres_iters,
            gmres_tol
        );
        take!(relaxation, tol, divergence, max_iters);
        if self.r.is_some() {
            c.r = self.r;
        }
        if self.dt.is_some() {
            c.dt = self.dt;
        }
        if self.seed.is_some() {
            c.seed = self.seed;
        }
        if let Some(l) = &self.max_levels {
            c.max_levels = parse_levels(l)?;
        }
        Ok(c)
    }
}

fn resolve_seed(flag: Option<u64>) -> anyhow::Result<u64> {
    ExperimentConfig {
        seed: flag,
        ..Default::default()
    }
    .resolved_seed()
}

fn cmd_run(args: &RunArgs) -> anyhow::Result<()> {
    let cfg = args.experiment()?;
    let report = run::execute(&cfg)?;
    let (json, csv) = run::write_outputs(&report, &args.out, &args.name)?;
    println!(
        "status={} iterations={} final_factor={} wall_time_s={:.3}",
        report.status,
        report.iterations,
        report
            .final_factor
            .map_or("n/a".into(), |f| format!("{f:.4}")),
        report.wall_time_s
    );
    println!("wrote {} and {}", json.display(), csv.display());
    Ok(())
}

fn cmd_table(args: &TableArgs) -> anyhow::Result<()> {
    let id: TableId = args.table.parse()?;
    let cap = match &args.size_cap {
        Some(s) => s.parse()?,
        None => id.default_cap(),
    };
    let speeds = args
        .speed
        .iter()
        .map(|s| {
            s.parse::<WaveSpeedId>()
                .map_err(|e| UsageError(e.to_string()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let filter = CellFilter {
        p: args.p.clone(),
        m: args.m.clone(),
        speeds,
        skip_baseline: args.no_baseline,
    };
    let seed = resolve_seed(args.seed)?;
    let report = table::run_table(id, cap, &filter, seed, |row| {
        let c = &row.cell;
        eprintln!(
            "{} {} p={} m={} {}x{} {}: {} ({})",
            c.table, c.speed, c.p, c.m, c.n_x, c.n_t, c.operator, row.iterations, row.status
        );
    })?;
    for c in &report.skipped {
        eprintln!(
            "skipped {} p={} m={} {}x{} {} (exceeds cap {}x{})",
            c.speed, c.p, c.m, c.n_x, c.n_t, c.operator, cap.n_x, cap.n_t
        );
    }
    let stem = args.name.clone().unwrap_or_else(|| id.name().to_string());
    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    let csv_path = args.out.join(format!("{stem}.csv"));
    let json_path = args.out.join(format!("{stem}.json"));
    table::write_csv(&report, std::fs::File::create(&csv_path)?)?;
    serde_json::to_writer_pretty(std::fs::File::create(&json_path)?, &report)?;
    println!(
        "{} rows, {} skipped; wrote {} and {}",
        report.rows.len(),
        report.skipped.len(),
        csv_path.display(),
        json_path.display()
    );
    Ok(())
}

fn cmd_lfa(args: &LfaArgs) -> anyhow::Result<()> {
    let kind: OperatorKind = args
        .coarse_kind
        .parse()
        .map_err(|e: mgrit_advect::Error| UsageError(e.to_string()))?;
    if args.m.iter().any(|&m| m < 2) {
        return Err(UsageError("coarsening factors must be at least 2".into()).into());
    }
    let rows = lfa::sweep(args.p, &args.m, args.c_start, args.c_end, args.c_step, kind)
        .map_err(|e| UsageError(e.to_string()))?;
    match &args.out {
        Some(path) => lfa::write_csv(&rows, std::fs::File::create(path)?)?,
        None => lfa::write_csv(&rows, std::io::stdout().lock())?,
    }
    Ok(())
}

fn cmd_verify(args: &VerifyArgs) -> anyhow::Result<()> {
    let suite: Suite = args.suite.parse()?;
    if args.p.is_multiple_of(2) || args.p > 5 {
        return Err(UsageError(format!("p must be 1, 3 or 5, got {}", args.p)).into());
    }
    let report = verify::run_suite(suite, args.p)?;
    for c in &report.checks {
        eprintln!(
            "{} {}: {:.6e} (target {:.6e}, tolerance {:.1e}) {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.target,
            c.tolerance,
            c.detail
        );
    }
    let text = serde_json::to_string_pretty(&report)?;
    match &args.out {
        Some(path) => std::fs::write(path, text + "\n")?,
        None => {
            let mut out = std::io::stdout().lock();
            writeln!(out, "{text}")?;
        }
    }
    Ok(())
}

pub fn dispatch(cli: &Cli) -> anyhow::Result<()> {
    match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Table(a) => cmd_table(a),
        Command::Lfa(a) => cmd_lfa(a),
        Command::Verify(a) => cmd_verify(a),
    }
}
