//! Independent references: near-exact characteristic tracing, the ideal
//! coarse step, the ideal-gap measurement and log-log order fits.

use crate::coarse_correction::{gmres_solve, phi_vector, CorrectionField, GmresConfig};
use crate::error::{Error, Result};
use crate::grid::{initial_condition, Dimension, GridFunction, SpatialGrid, WaveSpeed};
use crate::scalar::Real;
use crate::semi_lagrangian::{sl_step_into, DepartureSet, InterpDegree};

const BASE_SUBSTEPS: usize = 1 << 12;
const MAX_SUBSTEPS: usize = 1 << 18;
const AGREE_TOL: f64 = 1e-12;

fn rk4_back_1d<T: Real>(
    speed: &WaveSpeed<T>,
    arrival: T,
    t_start: T,
    span: T,
    substeps: usize,
) -> T {
    let h = span / T::from_index(substeps);
    let half = h / T::lit(2.0);
    let sixth = T::lit(1.0 / 6.0);
    let two = T::lit(2.0);
    let mut x = arrival;
    for s in (0..substeps).rev() {
        let t = t_start + T::from_index(s + 1) * h;
        let k1 = speed.velocity_1d(x, t);
        let k2 = speed.velocity_1d(x - half * k1, t - half);
        let k3 = speed.velocity_1d(x - half * k2, t - half);
        let k4 = speed.velocity_1d(x - h * k3, t - h);
        x -= h * sixth * (k1 + two * k2 + two * k3 + k4);
    }
    x
}

fn rk4_back_2d<T: Real>(
    speed: &WaveSpeed<T>,
    arrival: (T, T),
    t_start: T,
    span: T,
    substeps: usize,
) -> (T, T) {
    let h = span / T::from_index(substeps);
    let half = h / T::lit(2.0);
    let sixth = T::lit(1.0 / 6.0);
    let two = T::lit(2.0);
    let (mut x, mut y) = arrival;
    for s in (0..substeps).rev() {
        let t = t_start + T::from_index(s + 1) * h;
        let (a1, b1) = speed.velocity_2d(x, y, t);
        let (a2, b2) = speed.velocity_2d(x - half * a1, y - half * b1, t - half);
        let (a3, b3) = speed.velocity_2d(x - half * a2, y - half * b2, t - half);
        let (a4, b4) = speed.velocity_2d(x - h * a3, y - h * b3, t - h);
        x -= h * sixth * (a1 + two * a2 + two * a3 + a4);
        y -= h * sixth * (b1 + two * b2 + two * b3 + b4);
    }
    (x, y)
}

/// Foot at `t_start` of the 1D characteristic through `arrival` at
/// `t_start + span`, by classical RK4 with at least 4096 substeps, doubled
/// until successive results agree to `1e-12`.
pub fn trace_back_exact<T: Real>(speed: &WaveSpeed<T>, arrival: T, t_start: T, span: T) -> T {
    let mut n = BASE_SUBSTEPS;
    let mut prev = rk4_back_1d(speed, arrival, t_start, span, n);
    while n < MAX_SUBSTEPS {
        n *= 2;
        let next = rk4_back_1d(speed, arrival, t_start, span, n);
        if (next - prev).abs() < T::lit(AGREE_TOL) {
            return next;
        }
        prev = next;
    }
    prev
}

/// 2D counterpart of [`trace_back_exact`].
pub fn trace_back_exact_2d<T: Real>(
    speed: &WaveSpeed<T>,
    arrival: (T, T),
    t_start: T,
    span: T,
) -> (T, T) {
    let mut n = BASE_SUBSTEPS;
    let mut prev = rk4_back_2d(speed, arrival, t_start, span, n);
    while n < MAX_SUBSTEPS {
        n *= 2;
        let next = rk4_back_2d(speed, arrival, t_start, span, n);
        let diff = (next.0 - prev.0).abs().max((next.1 - prev.1).abs());
        if diff < T::lit(AGREE_TOL) {
            return next;
        }
        prev = next;
    }
    prev
}

/// Departure set from near-exact tracing.
pub fn exact_departures<T: Real>(
    grid: &SpatialGrid<T>,
    speed: &WaveSpeed<T>,
    t_start: T,
    span: T,
) -> Result<DepartureSet<T>> {
    match grid.dim() {
        Dimension::One => DepartureSet::from_feet(grid, t_start, span, |x, _| {
            (trace_back_exact(speed, x, t_start, span), T::zero())
        }),
        Dimension::Two => DepartureSet::from_feet(grid, t_start, span, |x, y| {
            trace_back_exact_2d(speed, (x, y), t_start, span)
        }),
    }
}

/// Product of the fine steps, applied in order.
pub fn ideal_coarse_step<T: Real>(
    fine: &[&DepartureSet<T>],
    deg: InterpDegree,
    u: &GridFunction<T>,
) -> Result<GridFunction<T>> {
    let first = fine.first().ok_or(Error::EmptySequence)?;
    u.check_len(first.len())?;
    let mut cur = u.clone();
    let mut next = GridFunction::zeros(u.len());
    for dep in fine {
        sl_step_into(dep, deg, &cur, &mut next);
        std::mem::swap(&mut cur, &mut next);
    }
    Ok(cur)
}

/// Correction applied after the coarse step in [`measure_ideal_gap`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GapCorrection {
    Identity,
    BackwardEuler,
}

impl GapCorrection {
    pub fn name(self) -> &'static str {
        match self {
            GapCorrection::Identity => "identity",
            GapCorrection::BackwardEuler => "backward_euler",
        }
    }
}

/// `||prod S_fine u - C S_coarse u||_inf / ||phi||_inf` over the first
/// coarse interval, with exactly traced departures and `u` the initial
/// condition.
pub fn measure_ideal_gap<T: Real>(
    deg: InterpDegree,
    m: usize,
    grid: &SpatialGrid<T>,
    dt: T,
    speed: &WaveSpeed<T>,
    correction: GapCorrection,
) -> Result<T> {
    if m == 0 {
        return Err(Error::SubstepCount {
            expected: 1,
            found: 0,
        });
    }
    let fine: Vec<DepartureSet<T>> = (0..m)
        .map(|k| exact_departures(grid, speed, dt * T::from_index(k), dt))
        .collect::<Result<_>>()?;
    let coarse = exact_departures(grid, speed, T::zero(), dt * T::from_index(m))?;
    let refs: Vec<&DepartureSet<T>> = fine.iter().collect();
    let phi = phi_vector(&refs, &coarse, deg)?;
    let scale = phi.norm_inf();
    if scale == T::zero() {
        return Err(Error::GapDegenerate);
    }
    let u = initial_condition(grid);
    let ideal = ideal_coarse_step(&refs, deg, &u)?;
    let mut s = vec![T::zero(); u.len()];
    sl_step_into(&coarse, deg, &u, &mut s);
    let approx = match correction {
        GapCorrection::Identity => s,
        GapCorrection::BackwardEuler => exact_backward_euler(&phi, deg, &s)?,
    };
    let gap = ideal
        .iter()
        .zip(&approx)
        .fold(T::zero(), |a, (x, y)| a.max((*x - *y).abs()));
    Ok(gap / scale)
}

fn exact_backward_euler<T: Real>(
    field: &CorrectionField<T>,
    deg: InterpDegree,
    rhs: &[T],
) -> Result<Vec<T>> {
    let cfg = GmresConfig {
        max_iters: rhs.len(),
        tol: Some(1e-15),
    };
    let f = GridFunction::from_vec(rhs.to_vec());
    let out = gmres_solve(field, deg, &f, cfg)?;
    Ok(out.solution)
}

/// Least-squares slope of `log(gap)` against `log(h)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderFit {
    pub points: Vec<(f64, f64)>,
    pub slope: f64,
    /// Root-mean-square residual of the log-log fit.
    pub residual: f64,
}

pub fn fit_order(points: &[(f64, f64)]) -> Result<OrderFit> {
    if points.len() < 3 {
        return Err(Error::OrderFit(format!(
            "need at least 3 points, got {}",
            points.len()
        )));
    }
    if let Some(bad) = points.iter().find(|(h, g)| !(*h > 0.0 && *g > 0.0)) {
        return Err(Error::OrderFit(format!(
            "non-positive entry (h = {}, gap = {})",
            bad.0, bad.1
        )));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::OrderFit("all h values coincide".into()));
    }
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let rss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - icpt - slope * x).powi(2))
        .sum();
    Ok(OrderFit {
        points: points.to_vec(),
        slope,
        residual: (rss / n).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::WaveSpeedId;
    use crate::semi_lagrangian::ErkScheme;

    #[test]
    fn exact_trace_examples() {
        let c1: WaveSpeed<f64> = WaveSpeedId::C1.into();
        assert!((trace_back_exact(&c1, 0.3, 0.0, 0.2) - 0.1).abs() < 1e-13);
        let c2: WaveSpeed<f64> = WaveSpeedId::C2.into();
        let x = trace_back_exact(&c2, 0.0, 0.0, 0.25);
        assert!((x + 1.0 / (2.0 * std::f64::consts::PI)).abs() < 1e-12);
    }

    #[test]
    fn erk_converges_to_exact() {
        let c3: WaveSpeed<f64> = WaveSpeedId::C3.into();
        for r in [1usize, 3] {
            let s = ErkScheme::new(r).unwrap();
            let pts: Vec<(f64, f64)> = [0.01, 0.005, 0.0025, 0.00125]
                .iter()
                .map(|&d| {
                    let e = (s.trace_back_1d(&c3, 0.3, 0.1, d)
                        - trace_back_exact(&c3, 0.3, 0.1, d))
                    .abs();
                    (d, e)
                })
                .collect();
            let fit = fit_order(&pts).unwrap();
            assert!(
                (fit.slope - (r + 1) as f64).abs() < 0.3,
                "r={r} slope={}",
                fit.slope
            );
        }
    }

    #[test]
    fn fit_examples() {
        let pts: Vec<(f64, f64)> = [0.1, 0.05, 0.025]
            .iter()
            .map(|&h| (h, 3.0 * h * h))
            .collect();
        assert!((fit_order(&pts).unwrap().slope - 2.0).abs() < 1e-10);
        assert!(fit_order(&pts[..2]).is_err());
        assert!(fit_order(&[(0.1, 1.0), (0.2, 0.0), (0.3, 1.0)]).is_err());
    }

    #[test]
    fn gap_degenerate_at_integer_cfl() {
        let grid = SpatialGrid::<f64>::line(16);
        let c1: WaveSpeed<f64> = WaveSpeedId::C1.into();
        let deg = InterpDegree::new(1).unwrap();
        assert_eq!(
            measure_ideal_gap(deg, 4, &grid, grid.h(), &c1, GapCorrection::Identity),
            Err(Error::GapDegenerate)
        );
    }
}
