//! Pass/fail batteries over the oracles and invariants.

use std::fmt;
use std::str::FromStr;

use mgrit_advect::backtracking::backtrack_departures;
use mgrit_advect::coarse_correction::{apply_ip_sd, f_eval};
use mgrit_advect::fourier::corrected_symbol;
use mgrit_advect::mgrit::{sequential_solution, solve};
use mgrit_advect::oracle::{fit_order, measure_ideal_gap, GapCorrection};
use mgrit_advect::semi_lagrangian::{interp_weights, DepartureSet as DS};
use mgrit_advect::{
    Dimension, ErkScheme, Field, GridFunction, Hierarchy, InterpDegree, SolverConfig, SpatialGrid,
    Status, WaveSpeed, WaveSpeedId,
};
use serde::Serialize;

use crate::UsageError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Suite {
    Truncation,
    Stability,
    FootnoteEquivalence,
    Properties,
}

impl Suite {
    pub const ALL: [Suite; 4] = [
        Suite::Truncation,
        Suite::Stability,
        Suite::FootnoteEquivalence,
        Suite::Properties,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Truncation => "truncation",
            Suite::Stability => "stability",
            Suite::FootnoteEquivalence => "footnote_equivalence",
            Suite::Properties => "properties",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = UsageError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        Self::ALL
            .into_iter()
            .find(|t| t.name() == key)
            .ok_or_else(|| UsageError(format!("unknown suite '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub target: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl Check {
    /// `|value - target| <= tolerance`.
    fn near(name: String, value: f64, target: f64, tolerance: f64, detail: String) -> Self {
        Self {
            name,
            passed: (value - target).abs() <= tolerance,
            value,
            target,
            tolerance,
            detail,
        }
    }

    /// `value <= bound`.
    fn below(name: impl Into<String>, value: f64, bound: f64, detail: String) -> Self {
        Self {
            name: name.into(),
            passed: value <= bound,
            value,
            target: bound,
            tolerance: 0.0,
            detail,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub suite: String,
    pub all_passed: bool,
    pub checks: Vec<Check>,
}

pub fn run_suite(suite: Suite, p: usize) -> anyhow::Result<VerifyReport> {
    let checks = match suite {
        Suite::Truncation => truncation(p)?,
        Suite::Stability => vec![stability()],
        Suite::FootnoteEquivalence => vec![footnote_equivalence()?],
        Suite::Properties => properties()?,
    };
    Ok(VerifyReport {
        suite: suite.name().into(),
        all_passed: checks.iter().all(|c| c.passed),
        checks,
    })
}

const DEGREES: [usize; 3] = [1, 3, 5];
pub const SLOPE_TOL: f64 = 0.3;

/// Time-step regime of a gap measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepRegime {
    /// `dt = 0.85 h`.
    Proportional,
    /// `dt = 0.85`.
    Fixed,
}

impl StepRegime {
    fn dt(self, h: f64) -> f64 {
        match self {
            StepRegime::Proportional => 0.85 * h,
            StepRegime::Fixed => 0.85,
        }
    }

    fn name(self) -> &'static str {
        match self {
            StepRegime::Proportional => "dt=0.85h",
            StepRegime::Fixed => "dt=0.85",
        }
    }
}

/// Expected decay order of the normalized ideal gap.
pub fn expected_slope(
    p: usize,
    speed: WaveSpeedId,
    corr: GapCorrection,
    regime: StepRegime,
) -> f64 {
    let base = (p + 1) as f64;
    match corr {
        GapCorrection::Identity => base,
        GapCorrection::BackwardEuler => {
            if speed.is_space_independent() || regime == StepRegime::Proportional {
                base + 1.0
            } else {
                base
            }
        }
    }
}

/// Refinement ladder `n_x = 2^5 .. 2^9`, capped at `2^8` for `p = 5`.
pub fn ladder(p: usize) -> Vec<usize> {
    let top = if p >= 5 { 8 } else { 9 };
    (5..=top).map(|e| 1usize << e).collect()
}

pub fn gap_slope(
    p: usize,
    speed: WaveSpeedId,
    corr: GapCorrection,
    regime: StepRegime,
) -> anyhow::Result<(f64, Vec<(f64, f64)>)> {
    let deg = InterpDegree::new(p)?;
    let ws: WaveSpeed = speed.into();
    let pts = ladder(p)
        .into_iter()
        .map(|n| {
            let g = SpatialGrid::line(n);
            let gap = measure_ideal_gap(deg, 4, &g, regime.dt(g.h()), &ws, corr)?;
            Ok((g.h(), gap))
        })
        .collect::<mgrit_advect::Result<Vec<_>>>()?;
    let fit = fit_order(&pts)?;
    Ok((fit.slope, pts))
}

fn pairwise(pts: &[(f64, f64)]) -> String {
    pts.windows(2)
        .map(|w| format!("{:.2}", (w[0].1 / w[1].1).ln() / (w[0].0 / w[1].0).ln()))
        .collect::<Vec<_>>()
        .join(" ")
}

fn truncation(p: usize) -> anyhow::Result<Vec<Check>> {
    let mut out = Vec::new();
    for speed in [WaveSpeedId::C2, WaveSpeedId::C3] {
        for regime in [StepRegime::Proportional, StepRegime::Fixed] {
            for corr in [GapCorrection::Identity, GapCorrection::BackwardEuler] {
                let (slope, pts) = gap_slope(p, speed, corr, regime)?;
                let target = expected_slope(p, speed, corr, regime);
                out.push(Check::near(
                    format!("gap_slope p={p} {speed} {} {}", corr.name(), regime.name()),
                    slope,
                    target,
                    SLOPE_TOL,
                    format!("pairwise slopes {}", pairwise(&pts)),
                ));
            }
        }
    }
    Ok(out)
}

/// Largest `|mu|` of the corrected coarse symbol over `p`, `m`, `c` and
/// 4096 frequencies.
pub fn max_corrected_symbol() -> f64 {
    let n = 4096;
    let mut worst = 0.0f64;
    for p in DEGREES {
        let deg = InterpDegree::new(p).expect("odd degree");
        for m in [2, 4, 8, 16] {
            for ci in 1..=9 {
                let c = ci as f64 * 0.1;
                for k in 0..n {
                    let w = -std::f64::consts::PI + std::f64::consts::TAU * k as f64 / n as f64;
                    worst = worst.max(corrected_symbol(deg, m, c, w).norm());
                }
            }
        }
    }
    worst
}

fn stability() -> Check {
    Check::below(
        "corrected_symbol_magnitude",
        max_corrected_symbol(),
        1.0 + 1e-12,
        "p in {1,3,5}, m in {2,4,8,16}, c in {0.1,...,0.9}, 4096 frequencies".into(),
    )
}

/// Largest difference between backtracked and directly traced coarse
/// displacements at constant speed, 1D and 2D, `m` up to 16.
pub fn footnote_deviation() -> anyhow::Result<f64> {
    let erk = ErkScheme::new(3)?;
    let mut worst = 0.0f64;
    for (g, id) in [
        (SpatialGrid::line(64), WaveSpeedId::C1),
        (SpatialGrid::square(16), WaveSpeedId::C4),
    ] {
        let speed: WaveSpeed = id.into();
        let dt = 0.85 * g.h();
        for m in [2, 4, 8, 16] {
            let kids: Vec<DS<f64>> = (0..m)
                .map(|k| DS::trace_erk(&g, &speed, &erk, k as f64 * dt, dt))
                .collect::<mgrit_advect::Result<_>>()?;
            let refs: Vec<&DS<f64>> = kids.iter().collect();
            let back = backtrack_departures(&g, &refs)?;
            let direct = DS::trace_erk(&g, &speed, &erk, 0.0, m as f64 * dt)?;
            let mut axes = vec![(back.x(), direct.x())];
            if let (Some(a), Some(b)) = (back.y(), direct.y()) {
                axes.push((a, b));
            }
            for (a, b) in axes {
                for (x, y) in a.displacement.iter().zip(&b.displacement) {
                    worst = worst.max((x - y).abs());
                }
            }
        }
    }
    Ok(worst)
}

fn footnote_equivalence() -> anyhow::Result<Check> {
    Ok(Check::below(
        "backtracking_equivalence",
        footnote_deviation()?,
        1e-12,
        "constant speed, C1 on 64 nodes and C4 on 16x16, m in {2,4,8,16}".into(),
    ))
}

fn partition_of_unity() -> Check {
    let mut worst = 0.0f64;
    for p in DEGREES {
        let deg = InterpDegree::new(p).expect("odd degree");
        for k in 0..1000 {
            let eps = k as f64 / 1000.0;
            let s: f64 = interp_weights(deg, eps).as_slice().iter().sum();
            worst = worst.max((s - 1.0).abs());
        }
    }
    Check::below(
        "partition_of_unity",
        worst,
        1e-13,
        "1000 offsets per degree".into(),
    )
}

fn error_polynomial_roots() -> Check {
    let mut at_roots = 0.0f64;
    let mut min_between = f64::INFINITY;
    for p in DEGREES {
        let deg = InterpDegree::new(p).expect("odd degree");
        for z in -(deg.east() as i64)..=(deg.west() as i64) {
            at_roots = at_roots.max(f_eval(deg, z as f64).abs());
            min_between = min_between.min(f_eval(deg, z as f64 + 0.5).abs());
        }
    }
    let mut c = Check::below(
        "error_polynomial_roots",
        at_roots,
        0.0,
        format!("smallest |f| at half-integers {min_between:.3e}"),
    );
    c.passed &= min_between > 0.0;
    c
}

fn stencil_order() -> anyhow::Result<Vec<Check>> {
    use std::f64::consts::PI;
    let mut out = Vec::new();
    for p in DEGREES {
        let deg = InterpDegree::new(p)?;
        let k = (p + 1) as i32;
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        let pts: Vec<(f64, f64)> = (4..9)
            .map(|e| {
                let g = SpatialGrid::line(1 << e);
                let h = g.h();
                let u = GridFunction::from_vec(g.axis().nodes().map(|x| (PI * x).sin()).collect());
                let ones = Field::constant(g.len(), Dimension::One, 1.0);
                let du = apply_ip_sd(&ones, deg, &u)?;
                let err = g
                    .axis()
                    .nodes()
                    .enumerate()
                    .map(|(i, x)| {
                        ((du[i] - u[i]) / h.powi(k) - sign * PI.powi(k) * (PI * x).sin()).abs()
                    })
                    .fold(0.0, f64::max);
                Ok((h, err))
            })
            .collect::<mgrit_advect::Result<_>>()?;
        let fit = fit_order(&pts)?;
        out.push(Check::near(
            format!("stencil_order p={p}"),
            fit.slope,
            2.0,
            0.1,
            format!("pairwise slopes {}", pairwise(&pts)),
        ));
    }
    Ok(out)
}

/// Space-time distance between converged MGRIT and sequential stepping.
pub fn sequential_agreement() -> anyhow::Result<Vec<Check>> {
    let one_d = |p, m| SolverConfig::new(SpatialGrid::line(64), 256, WaveSpeedId::C3, p, p, m);
    let cases = vec![
        ("1d C3 p=3 m=4 two-level", one_d(3, 4)?),
        ("1d C3 p=5 m=8 multilevel", one_d(5, 8)?.multilevel()),
        (
            "2d C5 p=1 m=4 multilevel",
            SolverConfig::new(SpatialGrid::square(16), 256, WaveSpeedId::C5, 1, 1, 4)?.multilevel(),
        ),
    ];
    let mut out = Vec::new();
    for (name, cfg) in cases {
        let sol = solve(&cfg)?;
        let h = Hierarchy::build(&cfg)?;
        let seq = sequential_solution(&h, cfg.time.n_t());
        let dist = sol.state.distance(&seq);
        let mut c = Check::below(
            format!("mgrit_vs_sequential {name}"),
            dist,
            1e-8,
            format!(
                "{} after {} iterations",
                sol.report.status.name(),
                sol.report.iterations
            ),
        );
        c.passed &= sol.report.status == Status::Converged;
        out.push(c);
    }
    Ok(out)
}

fn properties() -> anyhow::Result<Vec<Check>> {
    let mut out = vec![partition_of_unity(), error_polynomial_roots()];
    out.extend(stencil_order()?);
    out.push(stability());
    out.push(footnote_equivalence()?);
    out.extend(sequential_agreement()?);
    Ok(out)
}
