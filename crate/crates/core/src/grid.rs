//! Periodic space and time grids, grid functions, the wave-speed catalog and
//! seeded state initialization.
//!
//! Node indices are 0-based: node `i` of a 1D grid sits at `x_lo + i*h`, and
//! the node `x_lo + n*h` is identified with node 0. 2D grids are the tensor
//! product of two identical axes, stored row-major with `x` fastest, so node
//! `(i, j)` lives at `j*n + i`.

use std::fmt;
use std::ops::{Deref, DerefMut};
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Spatial dimension of a problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dimension {
    One,
    Two,
}

impl Dimension {
    pub fn count(self) -> usize {
        match self {
            Dimension::One => 1,
            Dimension::Two => 2,
        }
    }
}

/// Equispaced periodic 1D grid with `n` nodes and no duplicated endpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialGrid1D<T> {
    n: usize,
    h: T,
    x_lo: T,
}

impl<T: Real> SpatialGrid1D<T> {
    /// Grid on the default domain `(-1, 1)`, so `h = 2/n`.
    pub fn new(n: usize) -> Self {
        Self::with_domain(n, T::lit(-1.0), T::lit(2.0)).expect("n > 0")
    }

    pub fn with_domain(n: usize, x_lo: T, length: T) -> Result<Self> {
        if n == 0 || length.is_nan() || length <= T::zero() {
            return Err(Error::InvalidConfig(format!(
                "grid needs n > 0 and positive length (n = {n}, length = {length})"
            )));
        }
        Ok(Self {
            n,
            h: length / T::from_index(n),
            x_lo,
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn h(&self) -> T {
        self.h
    }

    #[inline]
    pub fn x_lo(&self) -> T {
        self.x_lo
    }

    /// Length of one period, `n*h`.
    #[inline]
    pub fn period(&self) -> T {
        T::from_index(self.n) * self.h
    }

    #[inline]
    pub fn node(&self, i: usize) -> T {
        self.x_lo + T::from_index(i) * self.h
    }

    /// Maps any integer offset onto `0..n`.
    #[inline]
    pub fn wrap(&self, i: i64) -> usize {
        i.rem_euclid(self.n as i64) as usize
    }

    pub fn nodes(&self) -> impl Iterator<Item = T> + '_ {
        (0..self.n).map(move |i| self.node(i))
    }
}

/// Periodic spatial grid in one or two dimensions. In 2D both axes are
/// identical copies of `axis`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialGrid<T> {
    axis: SpatialGrid1D<T>,
    dim: Dimension,
}

impl<T: Real> SpatialGrid<T> {
    pub fn line(n: usize) -> Self {
        Self {
            axis: SpatialGrid1D::new(n),
            dim: Dimension::One,
        }
    }

    pub fn square(n: usize) -> Self {
        Self {
            axis: SpatialGrid1D::new(n),
            dim: Dimension::Two,
        }
    }

    pub fn new(n: usize, dim: Dimension) -> Self {
        Self {
            axis: SpatialGrid1D::new(n),
            dim,
        }
    }

    pub fn from_axis(axis: SpatialGrid1D<T>, dim: Dimension) -> Self {
        Self { axis, dim }
    }

    #[inline]
    pub fn axis(&self) -> &SpatialGrid1D<T> {
        &self.axis
    }

    #[inline]
    pub fn dim(&self) -> Dimension {
        self.dim
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.axis.n
    }

    #[inline]
    pub fn h(&self) -> T {
        self.axis.h
    }

    /// Number of unknowns: `n` in 1D, `n^2` in 2D.
    #[inline]
    pub fn len(&self) -> usize {
        match self.dim {
            Dimension::One => self.axis.n,
            Dimension::Two => self.axis.n * self.axis.n,
        }
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Row-major 2D index, `x` fastest.
    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.axis.n + i
    }

    /// Inverse of [`SpatialGrid::index`].
    #[inline]
    pub fn coords(&self, idx: usize) -> (usize, usize) {
        (idx % self.axis.n, idx / self.axis.n)
    }
}

/// Uniform time grid `t_n = n*dt`, `n = 0..=n_t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid<T> {
    n_t: usize,
    dt: T,
}

impl<T: Real> TimeGrid<T> {
    pub fn new(n_t: usize, dt: T) -> Result<Self> {
        if n_t == 0 || dt.is_nan() || dt <= T::zero() {
            return Err(Error::InvalidConfig(format!(
                "time grid needs n_t >= 1 and dt > 0 (n_t = {n_t}, dt = {dt})"
            )));
        }
        Ok(Self { n_t, dt })
    }

    /// `dt = 0.85 h`, the default fine time step.
    pub fn with_default_cfl(n_t: usize, h: T) -> Self {
        Self::new(n_t, T::lit(0.85) * h).expect("positive spacing")
    }

    #[inline]
    pub fn n_t(&self) -> usize {
        self.n_t
    }

    #[inline]
    pub fn dt(&self) -> T {
        self.dt
    }

    #[inline]
    pub fn t(&self, n: usize) -> T {
        T::from_index(n) * self.dt
    }

    pub fn final_time(&self) -> T {
        self.t(self.n_t)
    }
}

/// Named wave speeds used throughout the experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WaveSpeedId {
    /// `alpha = 1`
    C1,
    /// `alpha = cos(2 pi t)`
    C2,
    /// `alpha = cos(2 pi t) cos(2 pi x)`
    C3,
    /// `(alpha, beta) = (1, 1)`
    C4,
    /// `(sin^2(pi y) cos(2 pi t / 3.4), -cos^2(pi x) cos(2 pi t / 3.4))`
    C5,
}

impl WaveSpeedId {
    pub const ALL: [WaveSpeedId; 5] = [Self::C1, Self::C2, Self::C3, Self::C4, Self::C5];

    pub fn dim(self) -> Dimension {
        match self {
            Self::C1 | Self::C2 | Self::C3 => Dimension::One,
            Self::C4 | Self::C5 => Dimension::Two,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::C1 => "C1",
            Self::C2 => "C2",
            Self::C3 => "C3",
            Self::C4 => "C4-2D",
            Self::C5 => "C5-2D",
        }
    }

    pub fn is_space_independent(self) -> bool {
        matches!(self, Self::C1 | Self::C2 | Self::C4)
    }

    pub fn is_constant(self) -> bool {
        matches!(self, Self::C1 | Self::C4)
    }
}

impl fmt::Display for WaveSpeedId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for WaveSpeedId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "C1" => Ok(Self::C1),
            "C2" => Ok(Self::C2),
            "C3" => Ok(Self::C3),
            "C4" | "C4-2D" | "C4_2D" => Ok(Self::C4),
            "C5" | "C5-2D" | "C5_2D" => Ok(Self::C5),
            other => Err(Error::InvalidConfig(format!(
                "unknown wave speed '{other}'"
            ))),
        }
    }
}

type Field1D<T> = Arc<dyn Fn(T, T) -> T + Send + Sync>;
type Field2D<T> = Arc<dyn Fn(T, T, T) -> (T, T) + Send + Sync>;

/// Velocity field of the advection problem: `alpha(x, t)` in 1D or
/// `(alpha, beta)(x, y, t)` in 2D.
#[derive(Clone)]
pub enum WaveSpeed<T> {
    Catalog(WaveSpeedId),
    Custom1D {
        name: String,
        field: Field1D<T>,
        space_independent: bool,
    },
    Custom2D {
        name: String,
        field: Field2D<T>,
        space_independent: bool,
    },
}

impl<T: Real> WaveSpeed<T> {
    pub fn custom_1d(
        name: impl Into<String>,
        space_independent: bool,
        field: impl Fn(T, T) -> T + Send + Sync + 'static,
    ) -> Self {
        Self::Custom1D {
            name: name.into(),
            field: Arc::new(field),
            space_independent,
        }
    }

    pub fn custom_2d(
        name: impl Into<String>,
        space_independent: bool,
        field: impl Fn(T, T, T) -> (T, T) + Send + Sync + 'static,
    ) -> Self {
        Self::Custom2D {
            name: name.into(),
            field: Arc::new(field),
            space_independent,
        }
    }

    pub fn dim(&self) -> Dimension {
        match self {
            Self::Catalog(id) => id.dim(),
            Self::Custom1D { .. } => Dimension::One,
            Self::Custom2D { .. } => Dimension::Two,
        }
    }

    pub fn name(&self) -> &str {
        match self {
            Self::Catalog(id) => id.name(),
            Self::Custom1D { name, .. } | Self::Custom2D { name, .. } => name,
        }
    }

    pub fn is_space_independent(&self) -> bool {
        match self {
            Self::Catalog(id) => id.is_space_independent(),
            Self::Custom1D {
                space_independent, ..
            }
            | Self::Custom2D {
                space_independent, ..
            } => *space_independent,
        }
    }

    /// `alpha(x, t)`. Panics if called on a 2D field.
    #[inline]
    pub fn velocity_1d(&self, x: T, t: T) -> T {
        let two_pi = T::TAU();
        match self {
            Self::Catalog(WaveSpeedId::C1) => T::one(),
            Self::Catalog(WaveSpeedId::C2) => (two_pi * t).cos(),
            Self::Catalog(WaveSpeedId::C3) => (two_pi * t).cos() * (two_pi * x).cos(),
            Self::Custom1D { field, .. } => field(x, t),
            _ => panic!("velocity_1d called on 2D wave speed {}", self.name()),
        }
    }

    /// `(alpha, beta)(x, y, t)`. Panics if called on a 1D field.
    #[inline]
    pub fn velocity_2d(&self, x: T, y: T, t: T) -> (T, T) {
        match self {
            Self::Catalog(WaveSpeedId::C4) => (T::one(), T::one()),
            Self::Catalog(WaveSpeedId::C5) => {
                let pi = T::PI();
                let time = (T::TAU() * t / T::lit(3.4)).cos();
                let sy = (pi * y).sin();
                let cx = (pi * x).cos();
                (sy * sy * time, -(cx * cx) * time)
            }
            Self::Custom2D { field, .. } => field(x, y, t),
            _ => panic!("velocity_2d called on 1D wave speed {}", self.name()),
        }
    }
}

impl<T> From<WaveSpeedId> for WaveSpeed<T> {
    fn from(id: WaveSpeedId) -> Self {
        Self::Catalog(id)
    }
}

impl<T> fmt::Debug for WaveSpeed<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Self::Catalog(id) => id.name(),
            Self::Custom1D { name, .. } | Self::Custom2D { name, .. } => name,
        };
        f.debug_tuple("WaveSpeed").field(&name).finish()
    }
}

/// Real-valued state on a spatial grid.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GridFunction<T> {
    values: Vec<T>,
}

impl<T: Real> GridFunction<T> {
    pub fn zeros(len: usize) -> Self {
        Self {
            values: vec![T::zero(); len],
        }
    }

    pub fn constant(len: usize, c: T) -> Self {
        Self {
            values: vec![c; len],
        }
    }

    pub fn from_vec(values: Vec<T>) -> Self {
        Self { values }
    }

    pub fn into_vec(self) -> Vec<T> {
        self.values
    }

    pub fn as_slice(&self) -> &[T] {
        &self.values
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn sum_of_squares(&self) -> T {
        self.values.iter().fold(T::zero(), |acc, &v| acc + v * v)
    }

    pub fn norm2(&self) -> T {
        self.sum_of_squares().sqrt()
    }

    pub fn norm_inf(&self) -> T {
        self.values
            .iter()
            .fold(T::zero(), |acc, &v| acc.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Checked length match against a grid.
    pub fn check_len(&self, expected: usize) -> Result<()> {
        if self.values.len() == expected {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected,
                found: self.values.len(),
            })
        }
    }
}

impl<T> Deref for GridFunction<T> {
    type Target = [T];

    fn deref(&self) -> &[T] {
        &self.values
    }
}

impl<T> DerefMut for GridFunction<T> {
    fn deref_mut(&mut self) -> &mut [T] {
        &mut self.values
    }
}

impl<T> From<Vec<T>> for GridFunction<T> {
    fn from(values: Vec<T>) -> Self {
        Self { values }
    }
}

/// `sin^4(pi x)` in 1D; `sin^2(pi (x-1)/2) sin^2(pi (y-1)/2)` in 2D.
pub fn initial_condition<T: Real>(grid: &SpatialGrid<T>) -> GridFunction<T> {
    let axis = grid.axis();
    let pi = T::PI();
    match grid.dim() {
        Dimension::One => axis
            .nodes()
            .map(|x| (pi * x).sin().powi(4))
            .collect::<Vec<_>>()
            .into(),
        Dimension::Two => {
            let half = T::lit(0.5);
            let profile: Vec<T> = axis
                .nodes()
                .map(|x| (pi * half * (x - T::one())).sin().powi(2))
                .collect();
            let n = axis.n();
            let mut values = Vec::with_capacity(n * n);
            for j in 0..n {
                for i in 0..n {
                    values.push(profile[i] * profile[j]);
                }
            }
            values.into()
        }
    }
}

/// l2 norm over every entry of every state, summed in sequence order.
pub fn space_time_norm<T: Real>(states: &[GridFunction<T>]) -> Result<T> {
    if states.is_empty() {
        return Err(Error::EmptySequence);
    }
    let len = states[0].len();
    let mut acc = T::zero();
    for s in states {
        s.check_len(len)?;
        acc += s.sum_of_squares();
    }
    Ok(acc.sqrt())
}

/// Seeded random number generator for initial iterates.
///
/// ChaCha8 with a `u64` seed expanded by `seed_from_u64`; its output stream
/// is specified independently of platform and word size, so iteration
/// counts reproduce across machines.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Draws a state with entries uniform in `[0, 1)` from an existing stream.
pub fn random_state_from<T: Real, R: Rng + ?Sized>(len: usize, rng: &mut R) -> GridFunction<T> {
    (0..len)
        .map(|_| T::lit(rng.gen::<f64>()))
        .collect::<Vec<_>>()
        .into()
}

/// State with entries uniform in `[0, 1)`, deterministic in `seed`.
pub fn random_state<T: Real>(grid: &SpatialGrid<T>, seed: u64) -> GridFunction<T> {
    let mut rng = seeded_rng(seed);
    random_state_from(grid.len(), &mut rng)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn initial_condition_values() {
        let grid = SpatialGrid::<f64>::line(8);
        let u0 = initial_condition(&grid);
        // nodes are -1, -0.75, ..., 0.75
        assert!(u0[4].abs() < 1e-15); // x = 0
        assert!((u0[6] - 1.0).abs() < 1e-15); // x = 0.5
        let sq = SpatialGrid::<f64>::square(4);
        let v = initial_condition(&sq);
        // (x, y) = (0, 0) is node (2, 2)
        assert!((v[sq.index(2, 2)] - 1.0).abs() < 1e-15);
        // (x, y) = (-1, y) vanishes
        assert!(v[sq.index(0, 3)].abs() < 1e-15);
    }

    #[test]
    fn space_time_norm_examples() {
        assert_eq!(space_time_norm::<f64>(&[]), Err(Error::EmptySequence));
        let zeros = vec![GridFunction::<f64>::zeros(5); 3];
        assert_eq!(space_time_norm(&zeros).unwrap(), 0.0);
        let mut e1 = GridFunction::<f64>::zeros(5);
        e1[0] = 1.0;
        assert_eq!(space_time_norm(&[e1]).unwrap(), 1.0);
        let ones = vec![GridFunction::<f64>::constant(4, 1.0); 2];
        assert!((space_time_norm(&ones).unwrap() - 8f64.sqrt()).abs() < 1e-15);
        let bad = vec![GridFunction::<f64>::zeros(4), GridFunction::zeros(3)];
        assert!(matches!(
            space_time_norm(&bad),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn random_state_contract() {
        let grid = SpatialGrid::<f64>::line(1000);
        let a = random_state(&grid, 7);
        let b = random_state(&grid, 7);
        let c = random_state(&grid, 8);
        assert_eq!(a, b);
        assert_ne!(a, c);
        let mut rng = seeded_rng(3);
        let big: GridFunction<f64> = random_state_from(1_000_000, &mut rng);
        assert!(big.iter().all(|&v| (0.0..1.0).contains(&v)));
    }

    #[test]
    fn grid_geometry() {
        let g = SpatialGrid1D::<f64>::new(16);
        assert_eq!(g.h(), 0.125);
        for i in 0..15 {
            assert_eq!(g.node(i + 1) - g.node(i), g.h());
        }
        assert_eq!(g.wrap(-1), 15);
        assert_eq!(g.wrap(16), 0);
        assert_eq!(g.wrap(-33), 15);
        let sq = SpatialGrid::<f64>::square(16);
        assert_eq!(sq.index(3, 2), 35);
        assert_eq!(sq.coords(35), (3, 2));
        assert_eq!(sq.len(), 256);
    }

    #[test]
    fn wave_speed_catalog() {
        let c2: WaveSpeed<f64> = WaveSpeedId::C2.into();
        assert!((c2.velocity_1d(0.3, 0.5) + 1.0).abs() < 1e-15);
        let c5: WaveSpeed<f64> = WaveSpeedId::C5.into();
        let (a, b) = c5.velocity_2d(0.0, 0.5, 0.0);
        assert!((a - 1.0).abs() < 1e-15 && (b + 1.0).abs() < 1e-15);
        assert_eq!("c4-2d".parse::<WaveSpeedId>().unwrap(), WaveSpeedId::C4);
        assert!("C9".parse::<WaveSpeedId>().is_err());
        assert_eq!(TimeGrid::with_default_cfl(4, 0.5f64).dt(), 0.425);
    }

    #[test]
    fn f32_grid_functions() {
        let grid = SpatialGrid::<f32>::line(4);
        let u = initial_condition(&grid);
        assert_eq!(u.len(), 4);
        assert!(u.is_finite());
    }
}
