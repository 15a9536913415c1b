//! Linear multigrid-reduction-in-time.
//!
//! Every level solves `u_n = Phi_n u_{n-1} + g_n`, `n = 1..=n_t`, with `u_0`
//! held fixed. A cycle on level `l` does FCF (or F) relaxation, injects the
//! C-point residuals as forcing of the level `l+1` error equation (zero
//! initial error), recurses, adds the coarse error back at the C-points and
//! finishes with an F-relaxation. The coarsest level is solved by sequential
//! stepping.

use rayon::prelude::*;

use crate::backtracking::backtrack_departures;
use crate::coarse_correction::{
    apply_forward_into, phi_vector, sigma_accumulate, solve_into, CorrectionField, GmresConfig,
};
use crate::error::{Error, Result};
use crate::grid::{
    initial_condition, random_state_from, seeded_rng, GridFunction, SpatialGrid, TimeGrid,
    WaveSpeed,
};
use crate::scalar::Real;
use crate::semi_lagrangian::{sl_step_into, DepartureSet, ErkScheme, InterpDegree};

/// Coarse-level time stepper.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OperatorKind {
    /// Plain semi-Lagrangian step with the coarse time step.
    Rediscretized,
    /// Semi-Lagrangian step followed by `(I - diag(sigma) D)^{-1}`.
    Corrected,
    /// Semi-Lagrangian step followed by `I + diag(sigma) D`.
    ForwardEuler,
    /// Product of the `m` child steps.
    Ideal,
}

impl OperatorKind {
    pub const ALL: [OperatorKind; 4] = [
        OperatorKind::Rediscretized,
        OperatorKind::Corrected,
        OperatorKind::ForwardEuler,
        OperatorKind::Ideal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            OperatorKind::Rediscretized => "rediscretized",
            OperatorKind::Corrected => "corrected",
            OperatorKind::ForwardEuler => "forward_euler",
            OperatorKind::Ideal => "ideal",
        }
    }
}

impl std::fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for OperatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        Self::ALL
            .into_iter()
            .find(|k| k.name() == key)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown operator kind '{s}'")))
    }
}

/// How coarse-level departure points are located.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DeparturePolicy {
    /// Interpolate the child level's characteristics.
    Backtrack,
    /// One ERK step with the coarse time step.
    ErkRediscretized,
    /// As many ERK steps of the fine size as the coarse step spans.
    ErkSubsteps,
}

impl DeparturePolicy {
    pub const ALL: [DeparturePolicy; 3] = [
        DeparturePolicy::Backtrack,
        DeparturePolicy::ErkRediscretized,
        DeparturePolicy::ErkSubsteps,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DeparturePolicy::Backtrack => "backtrack",
            DeparturePolicy::ErkRediscretized => "erk_rediscretized",
            DeparturePolicy::ErkSubsteps => "erk_substeps",
        }
    }
}

impl std::fmt::Display for DeparturePolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for DeparturePolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        Self::ALL
            .into_iter()
            .find(|k| k.name() == key)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown departure policy '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Relaxation {
    #[default]
    Fcf,
    F,
}

impl Relaxation {
    pub fn name(self) -> &'static str {
        match self {
            Relaxation::Fcf => "FCF",
            Relaxation::F => "F",
        }
    }
}

impl std::str::FromStr for Relaxation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "FCF" => Ok(Relaxation::Fcf),
            "F" => Ok(Relaxation::F),
            _ => Err(Error::InvalidConfig(format!("unknown relaxation '{s}'"))),
        }
    }
}

/// Coarsening factors, level by level; the last factor repeats.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coarsening(Vec<usize>);

impl Coarsening {
    pub fn uniform(m: usize) -> Self {
        Self(vec![m])
    }

    pub fn schedule(factors: Vec<usize>) -> Result<Self> {
        if factors.is_empty() || factors.iter().any(|&m| m < 2) {
            return Err(Error::InvalidConfig(
                "coarsening factors must be at least 2".into(),
            ));
        }
        Ok(Self(factors))
    }

    /// Factor between level `l` and `l + 1`.
    pub fn factor(&self, l: usize) -> usize {
        self.0[l.min(self.0.len() - 1)]
    }

    pub fn factors(&self) -> &[usize] {
        &self.0
    }

    /// Number of time steps per level under the stopping rule: coarsen while
    /// the factor divides, at least two points remain, and fewer than
    /// `max_levels` levels exist.
    pub fn level_sizes(&self, n_t: usize, max_levels: usize) -> Vec<usize> {
        let mut sizes = vec![n_t];
        while sizes.len() < max_levels {
            let n = *sizes.last().expect("non-empty");
            let m = self.factor(sizes.len() - 1);
            if m < 2 || n % m != 0 || n / m < 2 {
                break;
            }
            sizes.push(n / m);
        }
        sizes
    }
}

/// Everything needed to build a hierarchy and run a solve.
#[derive(Debug, Clone)]
pub struct SolverConfig<T> {
    pub grid: SpatialGrid<T>,
    pub time: TimeGrid<T>,
    pub speed: WaveSpeed<T>,
    pub degree: InterpDegree,
    pub erk: ErkScheme,
    pub coarsening: Coarsening,
    pub max_levels: usize,
    pub operator: OperatorKind,
    pub departures: DeparturePolicy,
    pub gmres: GmresConfig,
    pub relaxation: Relaxation,
    pub seed: u64,
    pub tol: f64,
    pub divergence: f64,
    pub max_iters: usize,
}

impl<T: Real> SolverConfig<T> {
    /// Two-level corrected solver with backtracked departures, FCF
    /// relaxation, fixed ten-iteration GMRES and `dt = 0.85 h`.
    pub fn new(
        grid: SpatialGrid<T>,
        n_t: usize,
        speed: impl Into<WaveSpeed<T>>,
        p: usize,
        r: usize,
        m: usize,
    ) -> Result<Self> {
        let time = TimeGrid::with_default_cfl(n_t, grid.h());
        let speed = speed.into();
        if speed.dim() != grid.dim() {
            return Err(Error::InvalidConfig(format!(
                "wave speed {} does not match a {}D grid",
                speed.name(),
                grid.dim().count()
            )));
        }
        Ok(Self {
            grid,
            time,
            speed,
            degree: InterpDegree::new(p)?,
            erk: ErkScheme::new(r)?,
            coarsening: Coarsening::schedule(vec![m])?,
            max_levels: 2,
            operator: OperatorKind::Corrected,
            departures: DeparturePolicy::Backtrack,
            gmres: GmresConfig::two_level(),
            relaxation: Relaxation::Fcf,
            seed: 0,
            tol: 1e-10,
            divergence: 1e6,
            max_iters: 100,
        })
    }

    /// Switch to a V-cycle over all admissible levels with the tolerance
    /// GMRES mode.
    pub fn multilevel(mut self) -> Self {
        self.max_levels = usize::MAX;
        self.gmres = GmresConfig::multilevel();
        self
    }
}

/// One level of the time hierarchy.
#[derive(Debug, Clone)]
pub struct Level<T> {
    n_t: usize,
    dt: T,
    kind: Option<OperatorKind>,
    departures: Vec<DepartureSet<T>>,
    sigma: Vec<CorrectionField<T>>,
}

impl<T: Real> Level<T> {
    pub fn n_t(&self) -> usize {
        self.n_t
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    /// `None` on the fine level.
    pub fn kind(&self) -> Option<OperatorKind> {
        self.kind
    }

    pub fn departures(&self) -> &[DepartureSet<T>] {
        &self.departures
    }

    pub fn sigma(&self) -> &[CorrectionField<T>] {
        &self.sigma
    }
}

/// Space-time values `u_0, ..., u_{n_t}` stored contiguously.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeState<T> {
    len: usize,
    data: Vec<T>,
}

impl<T: Real> SpaceTimeState<T> {
    pub fn zeros(len: usize, n_t: usize) -> Self {
        Self {
            len,
            data: vec![T::zero(); len * (n_t + 1)],
        }
    }

    pub fn from_points(points: &[GridFunction<T>]) -> Result<Self> {
        let len = points
            .first()
            .map(|p| p.len())
            .ok_or(Error::EmptySequence)?;
        let mut data = Vec::with_capacity(len * points.len());
        for p in points {
            p.check_len(len)?;
            data.extend_from_slice(p);
        }
        Ok(Self { len, data })
    }

    pub fn n_t(&self) -> usize {
        self.data.len() / self.len - 1
    }

    pub fn spatial_len(&self) -> usize {
        self.len
    }

    pub fn point(&self, n: usize) -> &[T] {
        &self.data[n * self.len..(n + 1) * self.len]
    }

    pub fn point_mut(&mut self, n: usize) -> &mut [T] {
        &mut self.data[n * self.len..(n + 1) * self.len]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn to_points(&self) -> Vec<GridFunction<T>> {
        self.data
            .chunks(self.len)
            .map(|c| GridFunction::from_vec(c.to_vec()))
            .collect()
    }

    /// Euclidean norm over all points, summed point by point in order.
    pub fn norm(&self) -> T {
        let parts: Vec<T> = self
            .data
            .par_chunks(self.len)
            .map(|c| c.iter().fold(T::zero(), |a, &v| a + v * v))
            .collect();
        parts.into_iter().fold(T::zero(), |a, b| a + b).sqrt()
    }

    /// Space-time norm of `self - other`.
    pub fn distance(&self, other: &Self) -> T {
        self.data
            .chunks(self.len)
            .zip(other.data.chunks(self.len))
            .map(|(a, b)| {
                a.iter()
                    .zip(b)
                    .fold(T::zero(), |s, (x, y)| s + (*x - *y) * (*x - *y))
            })
            .fold(T::zero(), |a, b| a + b)
            .sqrt()
    }

    /// Max-norm distance to another state.
    pub fn max_diff(&self, other: &Self) -> T {
        self.data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |a, (x, y)| a.max((*x - *y).abs()))
    }
}

/// Level data and time steppers.
#[derive(Debug, Clone)]
pub struct Hierarchy<T> {
    grid: SpatialGrid<T>,
    degree: InterpDegree,
    gmres: GmresConfig,
    factors: Vec<usize>,
    levels: Vec<Level<T>>,
}

impl<T: Real> Hierarchy<T> {
    pub fn build(config: &SolverConfig<T>) -> Result<Self> {
        let grid = config.grid;
        if config.speed.dim() != grid.dim() {
            return Err(Error::InvalidConfig(format!(
                "wave speed {} does not match a {}D grid",
                config.speed.name(),
                grid.dim().count()
            )));
        }
        let n_t = config.time.n_t();
        let sizes = config.coarsening.level_sizes(n_t, config.max_levels.max(1));
        if config.max_levels >= 2 && sizes.len() < 2 {
            return Err(Error::NonDivisible {
                n_t,
                m: config.coarsening.factor(0),
            });
        }
        let dt = config.time.dt();
        let mut levels = Vec::with_capacity(sizes.len());
        let fine: Vec<DepartureSet<T>> = (0..n_t)
            .map(|n| {
                DepartureSet::trace_erk(&grid, &config.speed, &config.erk, config.time.t(n), dt)
            })
            .collect::<Result<_>>()?;
        levels.push(Level {
            n_t,
            dt,
            kind: None,
            departures: fine,
            sigma: Vec::new(),
        });
        let mut factors = Vec::new();
        let mut ratio = 1usize;
        for l in 1..sizes.len() {
            let m = sizes[l - 1] / sizes[l];
            factors.push(m);
            ratio *= m;
            let level_dt = dt * T::from_index(ratio);
            let kind = config.operator;
            let mut departures = Vec::new();
            let mut sigma = Vec::new();
            if kind != OperatorKind::Ideal {
                let child = &levels[l - 1];
                departures = (0..sizes[l])
                    .map(|n| {
                        let t0 = level_dt * T::from_index(n);
                        match config.departures {
                            DeparturePolicy::Backtrack => {
                                let kids: Vec<&DepartureSet<T>> =
                                    child.departures[n * m..(n + 1) * m].iter().collect();
                                backtrack_departures(&grid, &kids)
                            }
                            DeparturePolicy::ErkRediscretized => DepartureSet::trace_erk(
                                &grid,
                                &config.speed,
                                &config.erk,
                                t0,
                                level_dt,
                            ),
                            DeparturePolicy::ErkSubsteps => DepartureSet::trace_erk_substeps(
                                &grid,
                                &config.speed,
                                &config.erk,
                                t0,
                                level_dt,
                                ratio,
                            ),
                        }
                    })
                    .collect::<Result<_>>()?;
                if kind != OperatorKind::Rediscretized {
                    for (n, dep) in departures.iter().enumerate() {
                        let kids: Vec<&DepartureSet<T>> =
                            child.departures[n * m..(n + 1) * m].iter().collect();
                        let phi = phi_vector(&kids, dep, config.degree)?;
                        let s = if l == 1 {
                            phi
                        } else {
                            let ks: Vec<&CorrectionField<T>> =
                                child.sigma[n * m..(n + 1) * m].iter().collect();
                            sigma_accumulate(&ks, &phi)?
                        };
                        sigma.push(s);
                    }
                }
            }
            levels.push(Level {
                n_t: sizes[l],
                dt: level_dt,
                kind: Some(kind),
                departures,
                sigma,
            });
        }
        Ok(Self {
            grid,
            degree: config.degree,
            gmres: config.gmres,
            factors,
            levels,
        })
    }

    pub fn levels(&self) -> &[Level<T>] {
        &self.levels
    }

    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    /// Coarsening factor from level `l` to `l + 1`.
    pub fn factor(&self, l: usize) -> usize {
        self.factors[l]
    }

    pub fn grid(&self) -> &SpatialGrid<T> {
        &self.grid
    }

    pub fn degree(&self) -> InterpDegree {
        self.degree
    }

    /// `out = Phi u` for step `n` (from `t_n` to `t_{n+1}`) on `level`.
    pub fn step_into(&self, level: usize, n: usize, u: &[T], out: &mut [T]) {
        let lvl = &self.levels[level];
        match lvl.kind {
            None | Some(OperatorKind::Rediscretized) => {
                sl_step_into(&lvl.departures[n], self.degree, u, out);
            }
            Some(OperatorKind::Corrected) => {
                let mut s = vec![T::zero(); u.len()];
                sl_step_into(&lvl.departures[n], self.degree, u, &mut s);
                solve_into(&lvl.sigma[n], self.degree, &s, self.gmres, out);
            }
            Some(OperatorKind::ForwardEuler) => {
                let mut s = vec![T::zero(); u.len()];
                sl_step_into(&lvl.departures[n], self.degree, u, &mut s);
                apply_forward_into(&lvl.sigma[n], self.degree, &s, out);
            }
            Some(OperatorKind::Ideal) => {
                let m = self.factors[level - 1];
                let mut cur = u.to_vec();
                for k in 0..m {
                    self.step_into(level - 1, n * m + k, &cur, out);
                    if k + 1 < m {
                        cur.copy_from_slice(out);
                    }
                }
            }
        }
    }

    pub fn step(&self, level: usize, n: usize, u: &GridFunction<T>) -> Result<GridFunction<T>> {
        u.check_len(self.grid.len())?;
        let mut out = GridFunction::zeros(u.len());
        self.step_into(level, n, u, &mut out);
        Ok(out)
    }

    /// Makes every F-point residual zero, C-points untouched.
    pub fn f_relax(
        &self,
        level: usize,
        state: &mut SpaceTimeState<T>,
        forcing: &SpaceTimeState<T>,
    ) {
        let m = self.interval(level);
        let len = state.len;
        state
            .data
            .par_chunks_mut(m * len)
            .enumerate()
            .for_each(|(i, chunk)| {
                let base = i * m;
                let points = chunk.len() / len;
                for k in 1..points {
                    let (prev, rest) = chunk.split_at_mut(k * len);
                    let out = &mut rest[..len];
                    self.step_into(level, base + k - 1, &prev[(k - 1) * len..], out);
                    for (o, g) in out.iter_mut().zip(forcing.point(base + k)) {
                        *o += *g;
                    }
                }
            });
    }

    /// Makes every C-point residual (except at `t_0`) zero from the point
    /// immediately before it.
    pub fn c_relax(
        &self,
        level: usize,
        state: &mut SpaceTimeState<T>,
        forcing: &SpaceTimeState<T>,
    ) {
        let m = self.interval(level);
        let len = state.len;
        let n_t = state.n_t();
        let updates: Vec<(usize, Vec<T>)> = (1..=n_t / m)
            .into_par_iter()
            .map(|i| {
                let c = i * m;
                let mut out = vec![T::zero(); len];
                self.step_into(level, c - 1, state.point(c - 1), &mut out);
                for (o, g) in out.iter_mut().zip(forcing.point(c)) {
                    *o += *g;
                }
                (c, out)
            })
            .collect();
        for (c, v) in updates {
            state.point_mut(c).copy_from_slice(&v);
        }
    }

    /// `r_n = g_n + Phi u_{n-1} - u_n`, `r_0 = 0`.
    pub fn residual(
        &self,
        level: usize,
        state: &SpaceTimeState<T>,
        forcing: &SpaceTimeState<T>,
    ) -> SpaceTimeState<T> {
        let len = state.len;
        let mut r = SpaceTimeState::zeros(len, state.n_t());
        r.data[len..]
            .par_chunks_mut(len)
            .enumerate()
            .for_each(|(k, out)| {
                let n = k + 1;
                self.step_into(level, n - 1, state.point(n - 1), out);
                for ((o, g), u) in out.iter_mut().zip(forcing.point(n)).zip(state.point(n)) {
                    *o += *g - *u;
                }
            });
        r
    }

    /// Sequential time stepping across the whole level.
    pub fn sequential(
        &self,
        level: usize,
        state: &mut SpaceTimeState<T>,
        forcing: &SpaceTimeState<T>,
    ) {
        let len = state.len;
        for n in 1..=state.n_t() {
            let (prev, rest) = state.data.split_at_mut(n * len);
            let out = &mut rest[..len];
            self.step_into(level, n - 1, &prev[(n - 1) * len..], out);
            for (o, g) in out.iter_mut().zip(forcing.point(n)) {
                *o += *g;
            }
        }
    }

    /// Pre-relaxation sweep: F, or F then C then F.
    pub fn relax(
        &self,
        level: usize,
        relaxation: Relaxation,
        state: &mut SpaceTimeState<T>,
        forcing: &SpaceTimeState<T>,
    ) {
        self.f_relax(level, state, forcing);
        if relaxation == Relaxation::Fcf {
            self.c_relax(level, state, forcing);
            self.f_relax(level, state, forcing);
        }
    }

    /// Coarse-grid correction from the residual `r` of the relaxed state,
    /// followed by F-relaxation.
    pub fn correct(
        &self,
        level: usize,
        relaxation: Relaxation,
        state: &mut SpaceTimeState<T>,
        forcing: &SpaceTimeState<T>,
        r: &SpaceTimeState<T>,
    ) {
        let m = self.factors[level];
        let len = state.len;
        let n_c = state.n_t() / m;
        let mut coarse_forcing = SpaceTimeState::zeros(len, n_c);
        for i in 1..=n_c {
            coarse_forcing.point_mut(i).copy_from_slice(r.point(i * m));
        }
        let mut err = SpaceTimeState::zeros(len, n_c);
        self.cycle(level + 1, relaxation, &mut err, &coarse_forcing);
        for i in 1..=n_c {
            for (u, e) in state.point_mut(i * m).iter_mut().zip(err.point(i)) {
                *u += *e;
            }
        }
        self.f_relax(level, state, forcing);
    }

    /// One cycle on `level`; the coarsest level is solved directly.
    pub fn cycle(
        &self,
        level: usize,
        relaxation: Relaxation,
        state: &mut SpaceTimeState<T>,
        forcing: &SpaceTimeState<T>,
    ) {
        if level + 1 >= self.levels.len() {
            self.sequential(level, state, forcing);
            return;
        }
        self.relax(level, relaxation, state, forcing);
        let r = self.residual(level, state, forcing);
        self.correct(level, relaxation, state, forcing, &r);
    }

    fn interval(&self, level: usize) -> usize {
        self.factors
            .get(level)
            .copied()
            .unwrap_or(self.levels[level].n_t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    Converged,
    Diverged,
    MaxIters,
}

impl Status {
    pub fn name(self) -> &'static str {
        match self {
            Status::Converged => "converged",
            Status::Diverged => "diverged",
            Status::MaxIters => "max_iters",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport<T> {
    /// Fine-level residual norms, starting with the initial one.
    pub history: Vec<T>,
    pub iterations: usize,
    pub status: Status,
}

impl<T: Real> ConvergenceReport<T> {
    /// `||r_k|| / ||r_{k-1}||` on the final iteration.
    pub fn final_factor(&self) -> Option<T> {
        let k = self.history.len();
        if k < 2 || self.history[k - 2] == T::zero() {
            return None;
        }
        Some(self.history[k - 1] / self.history[k - 2])
    }
}

#[derive(Debug, Clone)]
pub struct Solution<T> {
    pub report: ConvergenceReport<T>,
    pub state: SpaceTimeState<T>,
}

/// Initial iterate: `u_0` from the initial condition, the rest uniform in
/// `[0, 1)` from the seeded generator.
pub fn initial_iterate<T: Real>(grid: &SpatialGrid<T>, n_t: usize, seed: u64) -> SpaceTimeState<T> {
    let len = grid.len();
    let mut state = SpaceTimeState::zeros(len, n_t);
    state.point_mut(0).copy_from_slice(&initial_condition(grid));
    let mut rng = seeded_rng(seed);
    for n in 1..=n_t {
        let v: GridFunction<T> = random_state_from(len, &mut rng);
        state.point_mut(n).copy_from_slice(&v);
    }
    state
}

/// Builds the hierarchy and iterates cycles to the configured tolerance.
pub fn solve<T: Real>(config: &SolverConfig<T>) -> Result<Solution<T>> {
    let hierarchy = Hierarchy::build(config)?;
    let state = initial_iterate(&config.grid, config.time.n_t(), config.seed);
    Ok(solve_from(&hierarchy, config, state))
}

/// Iterates from a given state on a prebuilt hierarchy.
///
/// The residual is measured after each fine-level pre-relaxation, so the
/// reference norm `||r_0||` is that of the relaxed initial iterate and
/// `||r_k||` follows `k` complete cycles.
pub fn solve_from<T: Real>(
    hierarchy: &Hierarchy<T>,
    config: &SolverConfig<T>,
    mut state: SpaceTimeState<T>,
) -> Solution<T> {
    let len = state.len;
    let forcing = SpaceTimeState::zeros(len, state.n_t());
    let tol = T::lit(config.tol);
    let blowup = T::lit(config.divergence);
    let single = hierarchy.num_levels() < 2;
    let mut history = Vec::new();
    let mut r0 = T::zero();
    let mut status = Status::MaxIters;
    let mut iterations = 0;
    for k in 0..=config.max_iters {
        if single {
            hierarchy.sequential(0, &mut state, &forcing);
        } else {
            hierarchy.relax(0, config.relaxation, &mut state, &forcing);
        }
        let r = hierarchy.residual(0, &state, &forcing);
        let norm = r.norm();
        history.push(norm);
        iterations = k;
        if k == 0 {
            r0 = norm;
            if !norm.is_finite() {
                status = Status::Diverged;
                break;
            }
            if norm == T::zero() {
                status = Status::Converged;
                break;
            }
        } else {
            if !norm.is_finite() || norm >= blowup * r0 {
                status = Status::Diverged;
                break;
            }
            if norm <= tol * r0 {
                status = Status::Converged;
                break;
            }
        }
        if k == config.max_iters {
            break;
        }
        if !single {
            hierarchy.correct(0, config.relaxation, &mut state, &forcing, &r);
        }
    }
    Solution {
        report: ConvergenceReport {
            history,
            iterations,
            status,
        },
        state,
    }
}

/// Sequential fine-level solution from the initial condition.
pub fn sequential_solution<T: Real>(hierarchy: &Hierarchy<T>, n_t: usize) -> SpaceTimeState<T> {
    let grid = hierarchy.grid();
    let len = grid.len();
    let mut state = SpaceTimeState::zeros(len, n_t);
    state.point_mut(0).copy_from_slice(&initial_condition(grid));
    let forcing = SpaceTimeState::zeros(len, n_t);
    hierarchy.sequential(0, &mut state, &forcing);
    state
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::WaveSpeedId;

    fn config(n_x: usize, n_t: usize, speed: WaveSpeedId, p: usize, m: usize) -> SolverConfig<f64> {
        SolverConfig::new(SpatialGrid::line(n_x), n_t, speed, p, p, m).unwrap()
    }

    #[test]
    fn level_sizes_follow_stopping_rule() {
        assert_eq!(
            Coarsening::uniform(4).level_sizes(1024, usize::MAX),
            vec![1024, 256, 64, 16, 4]
        );
        assert_eq!(Coarsening::uniform(4).level_sizes(1024, 2), vec![1024, 256]);
        assert_eq!(
            Coarsening::schedule(vec![16, 4])
                .unwrap()
                .level_sizes(1 << 14, usize::MAX),
            vec![16384, 1024, 256, 64, 16, 4]
        );
        assert_eq!(
            Coarsening::uniform(16).level_sizes(1024, usize::MAX),
            vec![1024, 64, 4]
        );
    }

    #[test]
    fn f_relax_zeroes_f_residuals() {
        let cfg = config(32, 16, WaveSpeedId::C3, 3, 4);
        let h = Hierarchy::build(&cfg).unwrap();
        let mut state = initial_iterate(&cfg.grid, 16, 7);
        let forcing = SpaceTimeState::zeros(32, 16);
        h.f_relax(0, &mut state, &forcing);
        let r = h.residual(0, &state, &forcing);
        for n in 1..=16 {
            let max = r.point(n).iter().fold(0.0f64, |a, v| a.max(v.abs()));
            if n % 4 == 0 {
                assert!(max > 1e-6);
            } else {
                assert!(max < 1e-12, "n={n} max={max}");
            }
        }
        h.c_relax(0, &mut state, &forcing);
        let r = h.residual(0, &state, &forcing);
        for n in (4..=16).step_by(4) {
            assert!(r.point(n).iter().all(|v| v.abs() < 1e-12));
        }
    }

    #[test]
    fn residual_is_deterministic_and_zero_on_exact() {
        let cfg = config(16, 8, WaveSpeedId::C2, 1, 2);
        let h = Hierarchy::build(&cfg).unwrap();
        let forcing = SpaceTimeState::zeros(16, 8);
        let state = initial_iterate(&cfg.grid, 8, 3);
        assert_eq!(
            h.residual(0, &state, &forcing),
            h.residual(0, &state, &forcing)
        );
        let exact = sequential_solution(&h, 8);
        assert_eq!(h.residual(0, &exact, &forcing).norm(), 0.0);
    }

    #[test]
    fn ideal_two_level_converges_in_one() {
        let mut cfg = config(64, 256, WaveSpeedId::C3, 3, 4);
        cfg.operator = OperatorKind::Ideal;
        let sol = solve(&cfg).unwrap();
        assert_eq!(sol.report.status, Status::Converged);
        assert_eq!(sol.report.iterations, 1);
    }

    #[test]
    fn corrected_converges_to_sequential() {
        let cfg = config(32, 64, WaveSpeedId::C3, 1, 4).multilevel();
        let sol = solve(&cfg).unwrap();
        assert_eq!(sol.report.status, Status::Converged);
        let h = Hierarchy::build(&cfg).unwrap();
        let seq = sequential_solution(&h, 64);
        assert!(sol.state.max_diff(&seq) < 1e-8);
        assert_eq!(sol.report.history.len(), sol.report.iterations + 1);
    }

    #[test]
    fn parses_kinds() {
        assert_eq!(
            "corrected".parse::<OperatorKind>().unwrap(),
            OperatorKind::Corrected
        );
        assert_eq!(
            "forward-euler".parse::<OperatorKind>().unwrap(),
            OperatorKind::ForwardEuler
        );
        assert_eq!(
            "erk_substeps".parse::<DeparturePolicy>().unwrap(),
            DeparturePolicy::ErkSubsteps
        );
        assert_eq!("fcf".parse::<Relaxation>().unwrap(), Relaxation::Fcf);
        assert!("bogus".parse::<OperatorKind>().is_err());
    }
}
