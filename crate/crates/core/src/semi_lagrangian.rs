//! Fine-grid semi-Lagrangian time stepping.
//!
//! A step traces the characteristic through each arrival node backwards to
//! its departure point, splits the departure point into the node immediately
//! east of it plus a normalized offset `eps in [0, 1)`, and interpolates the
//! previous state there with a degree-`p` Lagrange polynomial through nodes
//! `E - (p+1)/2 ..= E + (p-1)/2`. In 2D the same split is applied per axis
//! (the north-east neighbor and offsets `eps`, `nu`) and the interpolant is
//! the tensor product of the 1D ones.
//!
//! Departure points are located with a single explicit Runge-Kutta step of
//! negative size applied to `dx/dt = alpha(x, t)`. The tableaux are:
//!
//! * order 1: forward Euler;
//! * order 3: Kutta's third-order method, `c = (0, 1/2, 1)`,
//!   `b = (1/6, 2/3, 1/6)`;
//! * order 5: the six-stage Fehlberg scheme (fifth-order weights of RKF45).

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{Dimension, GridFunction, SpatialGrid, SpatialGrid1D, WaveSpeed};
use crate::scalar::Real;

/// Odd interpolation degree `p in {1, 3, 5}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct InterpDegree(usize);

impl InterpDegree {
    pub const MAX_WIDTH: usize = 6;

    pub fn new(p: usize) -> Result<Self> {
        match p {
            1 | 3 | 5 => Ok(Self(p)),
            _ => Err(Error::UnsupportedDegree(p)),
        }
    }

    #[inline]
    pub fn p(self) -> usize {
        self.0
    }

    /// West extent `(p+1)/2`.
    #[inline]
    pub fn west(self) -> usize {
        self.0.div_ceil(2)
    }

    /// East extent `(p-1)/2`.
    #[inline]
    pub fn east(self) -> usize {
        (self.0 - 1) / 2
    }

    /// Number of interpolation nodes, `p + 1`.
    #[inline]
    pub fn width(self) -> usize {
        self.0 + 1
    }
}

/// Interpolation weights for offsets `-west ..= east` relative to the east
/// neighbor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Weights<T> {
    w: [T; InterpDegree::MAX_WIDTH],
    len: usize,
}

impl<T: Real> Weights<T> {
    #[inline]
    pub fn as_slice(&self) -> &[T] {
        &self.w[..self.len]
    }
}

/// Lagrange basis over nodes `-west ..= east` evaluated at `-eps`.
#[inline]
pub fn interp_weights<T: Real>(deg: InterpDegree, eps: T) -> Weights<T> {
    let mut w = [T::zero(); InterpDegree::MAX_WIDTH];
    match deg.width() {
        2 => w[..2].copy_from_slice(&lagrange::<T, 2>(eps)),
        4 => w[..4].copy_from_slice(&lagrange::<T, 4>(eps)),
        _ => w.copy_from_slice(&lagrange::<T, 6>(eps)),
    }
    Weights {
        w,
        len: deg.width(),
    }
}

#[inline]
fn inv_den(width: usize, a: usize) -> f64 {
    const FACT: [f64; 6] = [1.0, 1.0, 2.0, 6.0, 24.0, 120.0];
    let rest = width - 1 - a;
    let sign = if rest.is_multiple_of(2) { 1.0 } else { -1.0 };
    sign / (FACT[a] * FACT[rest])
}

/// Lagrange weights for `W` nodes by prefix/suffix products.
#[inline(always)]
fn lagrange<T: Real, const W: usize>(eps: T) -> [T; W] {
    let west = W / 2;
    // d[b] = -eps - q_b with q_b = b - west
    let mut d = [T::zero(); W];
    for (b, db) in d.iter_mut().enumerate() {
        *db = T::lit(west as f64 - b as f64) - eps;
    }
    let mut prefix = [T::one(); W];
    for b in 1..W {
        prefix[b] = prefix[b - 1] * d[b - 1];
    }
    let mut w = [T::zero(); W];
    let mut suffix = T::one();
    for a in (0..W).rev() {
        w[a] = prefix[a] * suffix * T::lit(inv_den(W, a));
        suffix *= d[a];
    }
    w
}

/// Splits a position `s` measured in grid units into `(ceil(s), ceil(s) - s)`
/// with the offset guaranteed in `[0, 1)`.
///
/// Offsets within a few ulps of 0 or 1 are snapped so node-coincident
/// positions produce `eps = 0` exactly.
#[inline]
pub fn east_split<T: Real>(s: T) -> (i64, T) {
    let mut east = s.ceil();
    let mut eps = east - s;
    let snap = T::lit(64.0) * T::epsilon() * (T::one() + s.abs());
    if eps < snap {
        eps = T::zero();
    } else if T::one() - eps <= snap {
        east -= T::one();
        eps = T::zero();
    }
    if eps < T::zero() {
        eps = T::zero();
    }
    if eps >= T::one() {
        eps -= T::one();
        east -= T::one();
    }
    (east.to_i64().expect("finite departure coordinate"), eps)
}

/// East neighbor index and offset of a (possibly unwrapped) coordinate.
#[inline]
pub fn decompose<T: Real>(axis: &SpatialGrid1D<T>, coord: T) -> (usize, T) {
    let (east, eps) = east_split((coord - axis.x_lo()) / axis.h());
    (axis.wrap(east), eps)
}

/// Explicit Runge-Kutta tableau used for backward characteristic tracing.
#[derive(Debug, Clone, PartialEq)]
pub struct ErkScheme {
    order: usize,
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    c: Vec<f64>,
}

impl ErkScheme {
    pub fn new(order: usize) -> Result<Self> {
        let (a, b, c) = match order {
            1 => (vec![vec![]], vec![1.0], vec![0.0]),
            3 => (
                vec![vec![], vec![0.5], vec![-1.0, 2.0]],
                vec![1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0],
                vec![0.0, 0.5, 1.0],
            ),
            5 => (
                vec![
                    vec![],
                    vec![1.0 / 4.0],
                    vec![3.0 / 32.0, 9.0 / 32.0],
                    vec![1932.0 / 2197.0, -7200.0 / 2197.0, 7296.0 / 2197.0],
                    vec![439.0 / 216.0, -8.0, 3680.0 / 513.0, -845.0 / 4104.0],
                    vec![
                        -8.0 / 27.0,
                        2.0,
                        -3544.0 / 2565.0,
                        1859.0 / 4104.0,
                        -11.0 / 40.0,
                    ],
                ],
                vec![
                    16.0 / 135.0,
                    0.0,
                    6656.0 / 12825.0,
                    28561.0 / 56430.0,
                    -9.0 / 50.0,
                    2.0 / 55.0,
                ],
                vec![0.0, 0.25, 0.375, 12.0 / 13.0, 1.0, 0.5],
            ),
            other => return Err(Error::UnsupportedErkOrder(other)),
        };
        Ok(Self { order, a, b, c })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn stages(&self) -> usize {
        self.b.len()
    }

    pub fn a(&self) -> &[Vec<f64>] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    /// Foot at `t_start` of the 1D characteristic through `arrival` at
    /// `t_start + span`, from one step of size `-span`.
    pub fn trace_back_1d<T: Real>(
        &self,
        speed: &WaveSpeed<T>,
        arrival: T,
        t_start: T,
        span: T,
    ) -> T {
        let t_end = t_start + span;
        let step = -span;
        let mut k = [T::zero(); 6];
        for s in 0..self.stages() {
            let mut x = arrival;
            for (j, &a) in self.a[s].iter().enumerate() {
                x += step * T::lit(a) * k[j];
            }
            k[s] = speed.velocity_1d(x, t_end + step * T::lit(self.c[s]));
        }
        let mut incr = T::zero();
        for (s, &b) in self.b.iter().enumerate() {
            incr += T::lit(b) * k[s];
        }
        arrival + step * incr
    }

    /// 2D counterpart of [`ErkScheme::trace_back_1d`] for the coupled system.
    pub fn trace_back_2d<T: Real>(
        &self,
        speed: &WaveSpeed<T>,
        arrival: (T, T),
        t_start: T,
        span: T,
    ) -> (T, T) {
        let t_end = t_start + span;
        let step = -span;
        let mut kx = [T::zero(); 6];
        let mut ky = [T::zero(); 6];
        for s in 0..self.stages() {
            let (mut x, mut y) = arrival;
            for (j, &a) in self.a[s].iter().enumerate() {
                x += step * T::lit(a) * kx[j];
                y += step * T::lit(a) * ky[j];
            }
            let (vx, vy) = speed.velocity_2d(x, y, t_end + step * T::lit(self.c[s]));
            kx[s] = vx;
            ky[s] = vy;
        }
        let (mut ix, mut iy) = (T::zero(), T::zero());
        for (s, &b) in self.b.iter().enumerate() {
            ix += T::lit(b) * kx[s];
            iy += T::lit(b) * ky[s];
        }
        (arrival.0 + step * ix, arrival.1 + step * iy)
    }
}

/// Per-axis departure data: east neighbor, offset and signed displacement
/// `arrival - departure` (physical units, not wrapped).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AxisDepartures<T> {
    pub east: Vec<u32>,
    pub offset: Vec<T>,
    pub displacement: Vec<T>,
}

impl<T: Real> AxisDepartures<T> {
    fn with_capacity(n: usize) -> Self {
        Self {
            east: Vec::with_capacity(n),
            offset: Vec::with_capacity(n),
            displacement: Vec::with_capacity(n),
        }
    }

    fn push(&mut self, axis: &SpatialGrid1D<T>, arrival: T, displacement: T) {
        let (e, eps) = decompose(axis, arrival - displacement);
        self.east.push(e as u32);
        self.offset.push(eps);
        self.displacement.push(displacement);
    }

    pub fn len(&self) -> usize {
        self.east.len()
    }

    pub fn is_empty(&self) -> bool {
        self.east.is_empty()
    }
}

/// Departure data for every arrival node of one time step `[t_start,
/// t_start + span]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DepartureSet<T> {
    t_start: T,
    span: T,
    x: AxisDepartures<T>,
    y: Option<AxisDepartures<T>>,
}

impl<T: Real> DepartureSet<T> {
    /// Builds from displacements `d = arrival - departure`; `dy` must be
    /// given exactly when the grid is 2D.
    pub fn from_displacements(
        grid: &SpatialGrid<T>,
        t_start: T,
        span: T,
        dx: &[T],
        dy: Option<&[T]>,
    ) -> Result<Self> {
        let len = grid.len();
        if dx.len() != len {
            return Err(Error::DimensionMismatch {
                expected: len,
                found: dx.len(),
            });
        }
        let axis = grid.axis();
        match (grid.dim(), dy) {
            (Dimension::One, None) => {
                let mut x = AxisDepartures::with_capacity(len);
                for (i, &d) in dx.iter().enumerate() {
                    x.push(axis, axis.node(i), d);
                }
                Ok(Self {
                    t_start,
                    span,
                    x,
                    y: None,
                })
            }
            (Dimension::Two, Some(dy)) => {
                if dy.len() != len {
                    return Err(Error::DimensionMismatch {
                        expected: len,
                        found: dy.len(),
                    });
                }
                let mut x = AxisDepartures::with_capacity(len);
                let mut y = AxisDepartures::with_capacity(len);
                for idx in 0..len {
                    let (i, j) = grid.coords(idx);
                    x.push(axis, axis.node(i), dx[idx]);
                    y.push(axis, axis.node(j), dy[idx]);
                }
                Ok(Self {
                    t_start,
                    span,
                    x,
                    y: Some(y),
                })
            }
            (Dimension::One, Some(_)) => Err(Error::InvalidConfig(
                "y displacements given for a 1D grid".into(),
            )),
            (Dimension::Two, None) => Err(Error::InvalidConfig(
                "missing y displacements for a 2D grid".into(),
            )),
        }
    }

    /// Builds from per-node departure coordinates produced by `foot`, which
    /// receives the arrival coordinates (`y` ignored in 1D) and returns the
    /// departure coordinates.
    pub fn from_feet<F>(grid: &SpatialGrid<T>, t_start: T, span: T, foot: F) -> Result<Self>
    where
        F: Fn(T, T) -> (T, T) + Sync,
    {
        let axis = grid.axis();
        let pairs: Vec<(T, T)> = (0..grid.len())
            .into_par_iter()
            .map(|idx| match grid.dim() {
                Dimension::One => {
                    let x = axis.node(idx);
                    let (fx, _) = foot(x, T::zero());
                    (x - fx, T::zero())
                }
                Dimension::Two => {
                    let (i, j) = grid.coords(idx);
                    let (x, y) = (axis.node(i), axis.node(j));
                    let (fx, fy) = foot(x, y);
                    (x - fx, y - fy)
                }
            })
            .collect();
        let dx: Vec<T> = pairs.iter().map(|p| p.0).collect();
        match grid.dim() {
            Dimension::One => Self::from_displacements(grid, t_start, span, &dx, None),
            Dimension::Two => {
                let dy: Vec<T> = pairs.iter().map(|p| p.1).collect();
                Self::from_displacements(grid, t_start, span, &dx, Some(&dy))
            }
        }
    }

    /// Departure points from one ERK step per arrival node.
    pub fn trace_erk(
        grid: &SpatialGrid<T>,
        speed: &WaveSpeed<T>,
        scheme: &ErkScheme,
        t_start: T,
        span: T,
    ) -> Result<Self> {
        check_speed_dim(grid, speed)?;
        match grid.dim() {
            Dimension::One => Self::from_feet(grid, t_start, span, |x, _| {
                (scheme.trace_back_1d(speed, x, t_start, span), T::zero())
            }),
            Dimension::Two => Self::from_feet(grid, t_start, span, |x, y| {
                scheme.trace_back_2d(speed, (x, y), t_start, span)
            }),
        }
    }

    /// Departure points from `substeps` consecutive ERK steps of size
    /// `span / substeps`.
    pub fn trace_erk_substeps(
        grid: &SpatialGrid<T>,
        speed: &WaveSpeed<T>,
        scheme: &ErkScheme,
        t_start: T,
        span: T,
        substeps: usize,
    ) -> Result<Self> {
        check_speed_dim(grid, speed)?;
        let substeps = substeps.max(1);
        let small = span / T::from_index(substeps);
        match grid.dim() {
            Dimension::One => Self::from_feet(grid, t_start, span, |x, _| {
                let mut pos = x;
                for s in (0..substeps).rev() {
                    pos =
                        scheme.trace_back_1d(speed, pos, t_start + T::from_index(s) * small, small);
                }
                (pos, T::zero())
            }),
            Dimension::Two => Self::from_feet(grid, t_start, span, |x, y| {
                let mut pos = (x, y);
                for s in (0..substeps).rev() {
                    pos =
                        scheme.trace_back_2d(speed, pos, t_start + T::from_index(s) * small, small);
                }
                pos
            }),
        }
    }

    #[inline]
    pub fn t_start(&self) -> T {
        self.t_start
    }

    #[inline]
    pub fn span(&self) -> T {
        self.span
    }

    #[inline]
    pub fn x(&self) -> &AxisDepartures<T> {
        &self.x
    }

    #[inline]
    pub fn y(&self) -> Option<&AxisDepartures<T>> {
        self.y.as_ref()
    }

    pub fn dim(&self) -> Dimension {
        if self.y.is_some() {
            Dimension::Two
        } else {
            Dimension::One
        }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

fn check_speed_dim<T: Real>(grid: &SpatialGrid<T>, speed: &WaveSpeed<T>) -> Result<()> {
    if grid.dim() != speed.dim() {
        return Err(Error::InvalidConfig(format!(
            "wave speed {} is {}D but the grid is {}D",
            speed.name(),
            speed.dim().count(),
            grid.dim().count()
        )));
    }
    Ok(())
}

/// One semi-Lagrangian step `S u` for the given departures.
pub fn sl_step<T: Real>(
    departures: &DepartureSet<T>,
    deg: InterpDegree,
    u: &GridFunction<T>,
) -> Result<GridFunction<T>> {
    u.check_len(departures.len())?;
    let mut out = GridFunction::zeros(u.len());
    sl_step_into(departures, deg, u, &mut out);
    Ok(out)
}

/// Unchecked form of [`sl_step`] writing into `out`.
pub fn sl_step_into<T: Real>(
    departures: &DepartureSet<T>,
    deg: InterpDegree,
    u: &[T],
    out: &mut [T],
) {
    match (deg.width(), &departures.y) {
        (2, None) => step_1d::<T, 2>(&departures.x, u, out),
        (4, None) => step_1d::<T, 4>(&departures.x, u, out),
        (_, None) => step_1d::<T, 6>(&departures.x, u, out),
        (2, Some(y)) => step_2d::<T, 2>(&departures.x, y, u, out),
        (4, Some(y)) => step_2d::<T, 4>(&departures.x, y, u, out),
        (_, Some(y)) => step_2d::<T, 6>(&departures.x, y, u, out),
    }
}

fn step_1d<T: Real, const W: usize>(x: &AxisDepartures<T>, u: &[T], out: &mut [T]) {
    let n = u.len();
    let west = W / 2;
    for (i, o) in out.iter_mut().enumerate() {
        let w = lagrange::<T, W>(x.offset[i]);
        let start = wrap_once(x.east[i] as usize + n - west, n);
        let mut acc = T::zero();
        if start + W <= n {
            for (wk, &v) in w.iter().zip(&u[start..start + W]) {
                acc += *wk * v;
            }
        } else {
            for (k, wk) in w.iter().enumerate() {
                acc += *wk * u[(start + k) % n];
            }
        }
        *o = acc;
    }
}

fn step_2d<T: Real, const W: usize>(
    x: &AxisDepartures<T>,
    y: &AxisDepartures<T>,
    u: &[T],
    out: &mut [T],
) {
    let n = departures_axis_len(u.len());
    let west = W / 2;
    for (idx, o) in out.iter_mut().enumerate() {
        let wx = lagrange::<T, W>(x.offset[idx]);
        let wy = lagrange::<T, W>(y.offset[idx]);
        let sx = wrap_once(x.east[idx] as usize + n - west, n);
        let sy = wrap_once(y.east[idx] as usize + n - west, n);
        let mut acc = T::zero();
        if sx + W <= n && sy + W <= n {
            for (b, wb) in wy.iter().enumerate() {
                let r = (sy + b) * n + sx;
                let mut line = T::zero();
                for (wa, &v) in wx.iter().zip(&u[r..r + W]) {
                    line += *wa * v;
                }
                acc += *wb * line;
            }
        } else {
            let mut cols = [0usize; W];
            for (k, c) in cols.iter_mut().enumerate() {
                *c = (sx + k) % n;
            }
            for (b, wb) in wy.iter().enumerate() {
                let r = ((sy + b) % n) * n;
                let mut line = T::zero();
                for (wa, &c) in wx.iter().zip(&cols) {
                    line += *wa * u[r + c];
                }
                acc += *wb * line;
            }
        }
        *o = acc;
    }
}

#[inline]
fn wrap_once(i: usize, n: usize) -> usize {
    if i >= n {
        i - n
    } else {
        i
    }
}

#[inline]
fn departures_axis_len(len: usize) -> usize {
    let n = (len as f64).sqrt().round() as usize;
    debug_assert_eq!(n * n, len);
    n
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::WaveSpeedId;

    fn deg(p: usize) -> InterpDegree {
        InterpDegree::new(p).unwrap()
    }

    #[test]
    fn degree_extents() {
        for p in [1, 3, 5] {
            let d = deg(p);
            assert_eq!(d.west() + d.east() + 1, p + 1);
            assert_eq!(d.west(), d.east() + 1);
        }
        for p in [0, 2, 4, 6, 7] {
            assert_eq!(InterpDegree::new(p), Err(Error::UnsupportedDegree(p)));
        }
        assert!(Error::UnsupportedDegree(2)
            .to_string()
            .contains("unsupported interpolation degree"));
    }

    #[test]
    fn weights_examples() {
        let w = interp_weights(deg(1), 0.5f64);
        assert_eq!(w.as_slice(), &[0.5, 0.5]);
        let w = interp_weights(deg(1), 0.0f64);
        assert_eq!(w.as_slice(), &[0.0, 1.0]);
        let w = interp_weights(deg(3), 0.0f64);
        assert_eq!(w.as_slice(), &[0.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn weights_reproduce_monomials() {
        for p in [1usize, 3, 5] {
            let d = deg(p);
            for &eps in &[0.0, 0.1, 0.37, 0.5, 0.99] {
                let w = interp_weights(d, eps);
                for q in 0..=p as i32 {
                    let interp: f64 = w
                        .as_slice()
                        .iter()
                        .enumerate()
                        .map(|(k, wk)| wk * ((k as f64) - d.west() as f64).powi(q))
                        .sum();
                    assert!(
                        (interp - (-eps).powi(q)).abs() < 1e-12,
                        "p={p} q={q} eps={eps}"
                    );
                }
            }
        }
    }

    #[test]
    fn decompose_examples() {
        let axis = SpatialGrid1D::<f64>::new(8);
        let h = axis.h();
        assert_eq!(decompose(&axis, axis.node(3)), (3, 0.0));
        let (e, eps) = decompose(&axis, axis.node(3) - 0.5 * h);
        assert_eq!(e, 3);
        assert!((eps - 0.5).abs() < 1e-14);
        let (e, eps) = decompose(&axis, axis.node(0) - 0.25 * h);
        assert_eq!(e, 0);
        assert!((eps - 0.25).abs() < 1e-14);
        let (e, eps) = decompose(&axis, axis.node(0) - 1.25 * h);
        assert_eq!(e, 7);
        assert!((eps - 0.25).abs() < 1e-14);
        // several periods away
        let (e, eps) = decompose(&axis, axis.node(5) + 3.0 * axis.period() - 0.75 * h);
        assert_eq!(e, 5);
        assert!((eps - 0.75).abs() < 1e-12);
    }

    #[test]
    fn erk_examples() {
        let c1: WaveSpeed<f64> = WaveSpeedId::C1.into();
        let c2: WaveSpeed<f64> = WaveSpeedId::C2.into();
        for r in [1, 3, 5] {
            let s = ErkScheme::new(r).unwrap();
            assert!((s.trace_back_1d(&c1, 0.0, 0.3, 0.1) + 0.1).abs() < 1e-15);
            let sum: f64 = s.b().iter().sum();
            assert!((sum - 1.0).abs() < 1e-14);
            for (row, &c) in s.a().iter().zip(s.c()) {
                let rs: f64 = row.iter().sum();
                assert!((rs - c).abs() < 1e-14);
            }
        }
        let euler = ErkScheme::new(1).unwrap();
        let d = euler.trace_back_1d(&c2, 0.0, 0.0, 0.1);
        assert!((d + 0.080_901_699_437_494_74).abs() < 1e-12);
        let c4: WaveSpeed<f64> = WaveSpeedId::C4.into();
        let (x, y) = ErkScheme::new(3)
            .unwrap()
            .trace_back_2d(&c4, (0.0, 0.0), 0.0, 0.2);
        assert!((x + 0.2).abs() < 1e-15 && (y + 0.2).abs() < 1e-15);
        assert_eq!(ErkScheme::new(2), Err(Error::UnsupportedErkOrder(2)));
    }

    #[test]
    fn identity_and_constants() {
        let grid = SpatialGrid::<f64>::line(16);
        let zero = vec![0.0; 16];
        let deps = DepartureSet::from_displacements(&grid, 0.0, 0.1, &zero, None).unwrap();
        let u: GridFunction<f64> = (0..16).map(|i| (i as f64).sin()).collect::<Vec<_>>().into();
        for p in [1, 3, 5] {
            assert_eq!(sl_step(&deps, deg(p), &u).unwrap(), u);
        }
        let disp: Vec<f64> = (0..16).map(|i| 0.013 * (i as f64) + 0.05).collect();
        let deps = DepartureSet::from_displacements(&grid, 0.0, 0.1, &disp, None).unwrap();
        let c = GridFunction::constant(16, 2.5);
        for p in [1, 3, 5] {
            let out = sl_step(&deps, deg(p), &c).unwrap();
            assert!(out.iter().all(|v| (v - 2.5).abs() < 1e-13));
        }
        let short = GridFunction::<f64>::zeros(8);
        assert!(matches!(
            sl_step(&deps, deg(1), &short),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn integer_cfl_is_pure_shift() {
        let n = 32;
        let grid = SpatialGrid::<f64>::line(n);
        let speed: WaveSpeed<f64> = WaveSpeedId::C1.into();
        let scheme = ErkScheme::new(3).unwrap();
        let k = 3;
        let dt = k as f64 * grid.h();
        let deps = DepartureSet::trace_erk(&grid, &speed, &scheme, 0.0, dt).unwrap();
        let u: GridFunction<f64> = (0..n)
            .map(|i| ((i * i) % 7) as f64)
            .collect::<Vec<_>>()
            .into();
        for p in [1, 3, 5] {
            let out = sl_step(&deps, deg(p), &u).unwrap();
            for i in 0..n {
                assert!((out[i] - u[(i + n - k) % n]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn two_d_constant_shift() {
        let n = 8;
        let grid = SpatialGrid::<f64>::square(n);
        let h = grid.h();
        let dx = vec![2.0 * h; n * n];
        let dy = vec![h; n * n];
        let deps = DepartureSet::from_displacements(&grid, 0.0, 0.1, &dx, Some(&dy)).unwrap();
        let u: GridFunction<f64> = (0..n * n).map(|k| k as f64).collect::<Vec<_>>().into();
        let out = sl_step(&deps, deg(3), &u).unwrap();
        for j in 0..n {
            for i in 0..n {
                let src = grid.index((i + n - 2) % n, (j + n - 1) % n);
                assert!((out[grid.index(i, j)] - u[src]).abs() < 1e-12);
            }
        }
    }
}
