//! Experiment configuration: JSON file plus command-line overrides.

use std::path::Path;

use anyhow::{bail, Context};
use mgrit_advect::grid::{SpatialGrid, TimeGrid};
use mgrit_advect::{
    Coarsening, DeparturePolicy, GmresConfig, OperatorKind, Relaxation, SolverConfig, WaveSpeedId,
};
use serde::{Deserialize, Serialize};

use crate::UsageError;

pub const SEED_ENV: &str = "MGRIT_ADVECT_SEED";

/// One experiment. Enumerated fields are kept as strings so the file format
/// and the echoed report read the same as the command line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dimension: usize,
    pub speed: String,
    pub p: usize,
    /// ERK order; defaults to `p`.
    pub r: Option<usize>,
    pub n_x: usize,
    pub n_t: usize,
    /// Fine time step; defaults to `0.85 h`.
    pub dt: Option<f64>,
    /// Coarsening factors per level; the last one repeats.
    pub m: Vec<usize>,
    pub max_levels: usize,
    pub operator: String,
    pub departures: String,
    /// `fixed`, `tolerance` or `auto` (fixed on two levels, tolerance beyond).
    pub gmres: String,
    pub gmres_iters: usize,
    pub gmres_tol: f64,
    pub relaxation: String,
    pub seed: Option<u64>,
    pub tol: f64,
    pub divergence: f64,
    pub max_iters: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dimension: 1,
            speed: "C1".into(),
            p: 1,
            r: None,
            n_x: 256,
            n_t: 1024,
            dt: None,
            m: vec![4],
            max_levels: 2,
            operator: "corrected".into(),
            departures: "backtrack".into(),
            gmres: "auto".into(),
            gmres_iters: 10,
            gmres_tol: 1e-2,
            relaxation: "FCF".into(),
            seed: None,
            tol: 1e-10,
            divergence: 1e6,
            max_iters: 100,
        }
    }
}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| usage(format!("invalid config {}: {e}", path.display())))
    }

    /// Seed from the config, then the environment, then zero.
    pub fn resolved_seed(&self) -> anyhow::Result<u64> {
        if let Some(s) = self.seed {
            return Ok(s);
        }
        match std::env::var(SEED_ENV) {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|_| usage(format!("{SEED_ENV} is not an unsigned integer: '{v}'"))),
            Err(_) => Ok(0),
        }
    }

    pub fn speed_id(&self) -> anyhow::Result<WaveSpeedId> {
        self.speed.parse().map_err(|e| usage(format!("{e}")))
    }

    /// Copy with the seed, ERK order and time step filled in.
    pub fn resolved(&self) -> anyhow::Result<Self> {
        let mut out = self.clone();
        out.seed = Some(self.resolved_seed()?);
        out.r = Some(self.r.unwrap_or(self.p));
        out.dt = Some(self.dt.unwrap_or(0.85 * 2.0 / self.n_x.max(1) as f64));
        out.gmres = self.gmres_mode()?.into();
        Ok(out)
    }

    fn gmres_mode(&self) -> anyhow::Result<&'static str> {
        match self.gmres.trim().to_ascii_lowercase().as_str() {
            "fixed" => Ok("fixed"),
            "tolerance" | "tol" => Ok("tolerance"),
            "auto" => Ok(if self.max_levels <= 2 {
                "fixed"
            } else {
                "tolerance"
            }),
            other => bail!(usage(format!("unknown GMRES mode '{other}'"))),
        }
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if self.dimension != 1 && self.dimension != 2 {
            bail!(usage(format!(
                "dimension must be 1 or 2, got {}",
                self.dimension
            )));
        }
        let id = self.speed_id()?;
        if id.dim().count() != self.dimension {
            bail!(usage(format!(
                "wave speed {id} is {}D but dimension is {}",
                id.dim().count(),
                self.dimension
            )));
        }
        if self.p.is_multiple_of(2) {
            bail!(usage(format!("p must be odd, got {}", self.p)));
        }
        if self.n_x < 2 || self.n_t < 1 {
            bail!(usage("n_x must be at least 2 and n_t at least 1"));
        }
        if self.m.is_empty() || self.m.iter().any(|&m| m < 2) {
            bail!(usage("coarsening factors must be at least 2"));
        }
        if self.max_levels < 1 {
            bail!(usage("max_levels must be at least 1"));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                bail!(usage(format!("dt must be positive, got {dt}")));
            }
        }
        if !(self.tol > 0.0 && self.divergence > 1.0) {
            bail!(usage("tol must be positive and divergence above 1"));
        }
        Ok(())
    }

    pub fn to_solver(&self) -> anyhow::Result<SolverConfig> {
        self.validate()?;
        let cfg = self.resolved()?;
        let id = cfg.speed_id()?;
        let grid = if cfg.dimension == 1 {
            SpatialGrid::line(cfg.n_x)
        } else {
            SpatialGrid::square(cfg.n_x)
        };
        let r = cfg.r.unwrap_or(cfg.p);
        let mut s = SolverConfig::new(grid, cfg.n_t, id, cfg.p, r, cfg.m[0])
            .map_err(|e| usage(e.to_string()))?;
        s.time = TimeGrid::new(cfg.n_t, cfg.dt.unwrap_or(s.time.dt()))
            .map_err(|e| usage(e.to_string()))?;
        s.coarsening = Coarsening::schedule(cfg.m.clone()).map_err(|e| usage(e.to_string()))?;
        s.max_levels = cfg.max_levels;
        s.operator = cfg
            .operator
            .parse::<OperatorKind>()
            .map_err(|e| usage(e.to_string()))?;
        s.departures = cfg
            .departures
            .parse::<DeparturePolicy>()
            .map_err(|e| usage(e.to_string()))?;
        s.relaxation = cfg
            .relaxation
            .parse::<Relaxation>()
            .map_err(|e| usage(e.to_string()))?;
        s.gmres = match cfg.gmres.as_str() {
            "fixed" => GmresConfig::fixed(cfg.gmres_iters),
            _ => GmresConfig {
                max_iters: cfg.gmres_iters,
                tol: Some(cfg.gmres_tol),
            },
        };
        s.seed = cfg.seed.unwrap_or(0);
        s.tol = cfg.tol;
        s.divergence = cfg.divergence;
        s.max_iters = cfg.max_iters;
        Ok(s)
    }
}

/// Reads an optional config file; a missing path gives the defaults.
pub fn load(path: Option<&Path>) -> anyhow::Result<ExperimentConfig> {
    match path {
        Some(p) => ExperimentConfig::from_file(p).with_context(|| "loading experiment config"),
        None => Ok(ExperimentConfig::default()),
    }
}
