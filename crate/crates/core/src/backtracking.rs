//! Coarse departure points from stored child-level characteristics.
//!
//! Starting from the child departure of the last sub-interval, the coarse
//! characteristic is walked back one child step at a time, each time
//! interpolating the child displacements (linear in 1D, bilinear in 2D)
//! between the mesh neighbors of the current position. One coarse estimate
//! costs `m - 1` interpolation updates on every level.
//!
//! Interpolation acts on displacements `arrival - departure` rather than on
//! departure coordinates, which keeps the interpolant continuous across the
//! periodic seam.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{Dimension, SpatialGrid};
use crate::scalar::Real;
use crate::semi_lagrangian::{decompose, DepartureSet};

/// Positions `c^{(k)}` (and `d^{(k)}` in 2D) of one approximate coarse
/// characteristic, stored in order `k = m-1, ..., 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct CharacteristicTrace<T> {
    pub x: Vec<T>,
    pub y: Option<Vec<T>>,
}

impl<T: Real> CharacteristicTrace<T> {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Number of interpolation updates performed.
    pub fn updates(&self) -> usize {
        self.x.len().saturating_sub(1)
    }

    /// Final position `c^{(0)}` (x, and y in 2D or zero).
    pub fn departure(&self) -> (T, T) {
        let x = *self.x.last().expect("non-empty trace");
        let y = self
            .y
            .as_ref()
            .and_then(|y| y.last().copied())
            .unwrap_or_else(T::zero);
        (x, y)
    }
}

fn check_children<T: Real>(grid: &SpatialGrid<T>, children: &[&DepartureSet<T>]) -> Result<()> {
    if children.is_empty() {
        return Err(Error::SubstepCount {
            expected: 1,
            found: 0,
        });
    }
    for c in children {
        if c.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                found: c.len(),
            });
        }
        if c.dim() != grid.dim() {
            return Err(Error::InvalidConfig(
                "child departures do not match the grid dimension".into(),
            ));
        }
    }
    Ok(())
}

fn trace_1d<T: Real>(
    grid: &SpatialGrid<T>,
    children: &[&DepartureSet<T>],
    arrival: usize,
    keep: bool,
) -> (T, Vec<T>) {
    let axis = grid.axis();
    let n = axis.n();
    let m = children.len();
    let mut pos = axis.node(arrival) - children[m - 1].x().displacement[arrival];
    let mut path = Vec::new();
    if keep {
        path.push(pos);
    }
    for child in children[..m - 1].iter().rev() {
        let (e, eps) = decompose(axis, pos);
        let w = (e + n - 1) % n;
        let d = &child.x().displacement;
        pos -= (T::one() - eps) * d[e] + eps * d[w];
        if keep {
            path.push(pos);
        }
    }
    (pos, path)
}

fn trace_2d<T: Real>(
    grid: &SpatialGrid<T>,
    children: &[&DepartureSet<T>],
    arrival: usize,
    keep: bool,
) -> ((T, T), Vec<(T, T)>) {
    let axis = grid.axis();
    let n = axis.n();
    let m = children.len();
    let (i, j) = grid.coords(arrival);
    let last = children[m - 1];
    let mut px = axis.node(i) - last.x().displacement[arrival];
    let mut py = axis.node(j) - last.y().expect("2D child").displacement[arrival];
    let mut path = Vec::new();
    if keep {
        path.push((px, py));
    }
    for child in children[..m - 1].iter().rev() {
        let (ex, eps) = decompose(axis, px);
        let (ey, nu) = decompose(axis, py);
        let wx = (ex + n - 1) % n;
        let sy = (ey + n - 1) % n;
        let ne = grid.index(ex, ey);
        let nw = grid.index(wx, ey);
        let se = grid.index(ex, sy);
        let sw = grid.index(wx, sy);
        let one = T::one();
        let (a_ne, a_nw, a_se, a_sw) = (
            (one - eps) * (one - nu),
            eps * (one - nu),
            (one - eps) * nu,
            eps * nu,
        );
        let bilinear = |d: &[T]| a_ne * d[ne] + a_nw * d[nw] + a_se * d[se] + a_sw * d[sw];
        let dx = bilinear(&child.x().displacement);
        let dy = bilinear(&child.y().expect("2D child").displacement);
        px -= dx;
        py -= dy;
        if keep {
            path.push((px, py));
        }
    }
    ((px, py), path)
}

/// Coarse departure coordinate (unwrapped) for a 1D arrival node; children
/// ordered `k = 0, ..., m-1` across the coarse step.
pub fn backtrack_1d<T: Real>(
    grid: &SpatialGrid<T>,
    children: &[&DepartureSet<T>],
    arrival: usize,
) -> Result<T> {
    check_children(grid, children)?;
    if grid.dim() != Dimension::One {
        return Err(Error::InvalidConfig("backtrack_1d needs a 1D grid".into()));
    }
    Ok(trace_1d(grid, children, arrival, false).0)
}

/// 2D counterpart of [`backtrack_1d`]; `arrival` is the flat node index.
pub fn backtrack_2d<T: Real>(
    grid: &SpatialGrid<T>,
    children: &[&DepartureSet<T>],
    arrival: usize,
) -> Result<(T, T)> {
    check_children(grid, children)?;
    if grid.dim() != Dimension::Two {
        return Err(Error::InvalidConfig("backtrack_2d needs a 2D grid".into()));
    }
    Ok(trace_2d(grid, children, arrival, false).0)
}

/// Full approximate characteristic for one arrival node.
pub fn backtrack_trace<T: Real>(
    grid: &SpatialGrid<T>,
    children: &[&DepartureSet<T>],
    arrival: usize,
) -> Result<CharacteristicTrace<T>> {
    check_children(grid, children)?;
    Ok(match grid.dim() {
        Dimension::One => CharacteristicTrace {
            x: trace_1d(grid, children, arrival, true).1,
            y: None,
        },
        Dimension::Two => {
            let path = trace_2d(grid, children, arrival, true).1;
            CharacteristicTrace {
                x: path.iter().map(|p| p.0).collect(),
                y: Some(path.iter().map(|p| p.1).collect()),
            }
        }
    })
}

/// Coarse departure set covering the union of the child steps.
pub fn backtrack_departures<T: Real>(
    grid: &SpatialGrid<T>,
    children: &[&DepartureSet<T>],
) -> Result<DepartureSet<T>> {
    check_children(grid, children)?;
    let t_start = children[0].t_start();
    let span = children.iter().fold(T::zero(), |acc, c| acc + c.span());
    let axis = grid.axis();
    match grid.dim() {
        Dimension::One => {
            let dx: Vec<T> = (0..grid.len())
                .into_par_iter()
                .map(|i| axis.node(i) - trace_1d(grid, children, i, false).0)
                .collect();
            DepartureSet::from_displacements(grid, t_start, span, &dx, None)
        }
        Dimension::Two => {
            let d: Vec<(T, T)> = (0..grid.len())
                .into_par_iter()
                .map(|idx| {
                    let (i, j) = grid.coords(idx);
                    let (px, py) = trace_2d(grid, children, idx, false).0;
                    (axis.node(i) - px, axis.node(j) - py)
                })
                .collect();
            let dx: Vec<T> = d.iter().map(|p| p.0).collect();
            let dy: Vec<T> = d.iter().map(|p| p.1).collect();
            DepartureSet::from_displacements(grid, t_start, span, &dx, Some(&dy))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{WaveSpeed, WaveSpeedId};
    use crate::semi_lagrangian::ErkScheme;

    fn children_for(
        grid: &SpatialGrid<f64>,
        speed: &WaveSpeed<f64>,
        m: usize,
        dt: f64,
    ) -> Vec<DepartureSet<f64>> {
        let scheme = ErkScheme::new(3).unwrap();
        (0..m)
            .map(|k| DepartureSet::trace_erk(grid, speed, &scheme, k as f64 * dt, dt).unwrap())
            .collect()
    }

    #[test]
    fn single_child_is_identity() {
        let grid = SpatialGrid::<f64>::line(32);
        let speed: WaveSpeed<f64> = WaveSpeedId::C3.into();
        let kids = children_for(&grid, &speed, 1, 0.05);
        let refs: Vec<_> = kids.iter().collect();
        let coarse = backtrack_departures(&grid, &refs).unwrap();
        assert_eq!(coarse.x().displacement, kids[0].x().displacement);
        let trace = backtrack_trace(&grid, &refs, 3).unwrap();
        assert_eq!(trace.updates(), 0);
    }

    #[test]
    fn constant_speed_composes() {
        let grid = SpatialGrid::<f64>::line(64);
        let speed: WaveSpeed<f64> = WaveSpeedId::C2.into();
        let dt = 0.85 * grid.h();
        let m = 8;
        let kids = children_for(&grid, &speed, m, dt);
        let refs: Vec<_> = kids.iter().collect();
        let total: f64 = kids.iter().map(|k| k.x().displacement[0]).sum();
        for i in [0, 17, 63] {
            let c = backtrack_1d(&grid, &refs, i).unwrap();
            assert!((grid.axis().node(i) - total - c).abs() < 1e-12);
            assert_eq!(backtrack_trace(&grid, &refs, i).unwrap().updates(), m - 1);
        }
    }

    #[test]
    fn constant_speed_composes_2d() {
        let grid = SpatialGrid::<f64>::square(16);
        let speed: WaveSpeed<f64> = WaveSpeedId::C4.into();
        let dt = 0.85 * grid.h();
        let kids = children_for(&grid, &speed, 4, dt);
        let refs: Vec<_> = kids.iter().collect();
        let (x, y) = backtrack_2d(&grid, &refs, grid.index(5, 9)).unwrap();
        let ax = grid.axis();
        assert!((x - (ax.node(5) - 4.0 * dt)).abs() < 1e-12);
        assert!((y - (ax.node(9) - 4.0 * dt)).abs() < 1e-12);
    }

    #[test]
    fn rejects_empty_children() {
        let grid = SpatialGrid::<f64>::line(8);
        assert!(matches!(
            backtrack_1d(&grid, &[], 0),
            Err(Error::SubstepCount { .. })
        ));
    }
}
