//! Fourier symbols for constant wave speed and the two-level convergence
//! estimate
//!
//! `rho(c) = max_omega |lambda|^m |lambda^m - mu| / (1 - |mu|)`,
//!
//! where `lambda` and `mu` are the fine and coarse step symbols at CFL
//! number `c` and `omega` runs over 512 equispaced points in `[-pi, pi)`.

use num_complex::Complex;

use crate::coarse_correction::{f_eval, stencil_symbol};
use crate::mgrit::OperatorKind;
use crate::scalar::Real;
use crate::semi_lagrangian::{east_split, interp_weights, InterpDegree};

pub const LFA_SAMPLES: usize = 512;
pub const SKIP_TOL: f64 = 1e-13;

/// Symbol of a semi-Lagrangian step moving data `shift` cells to the right.
pub fn sl_symbol<T: Real>(deg: InterpDegree, shift: T, omega: T) -> Complex<T> {
    let (e0, eps) = east_split(-shift);
    let w = interp_weights(deg, eps);
    let west = deg.west() as i64;
    let mut acc = Complex::new(T::zero(), T::zero());
    for (k, &wk) in w.as_slice().iter().enumerate() {
        let j = k as i64 - west;
        acc += Complex::from_polar(wk, T::lit((e0 + j) as f64) * omega);
    }
    acc
}

/// Constant correction coefficient for CFL number `c` and factor `m`.
pub fn phi_scalar<T: Real>(deg: InterpDegree, m: usize, c: T) -> T {
    let (_, eps_c) = east_split(-(c * T::from_index(m)));
    let (_, eps_f) = east_split(-c);
    let sign = if deg.width().is_multiple_of(2) {
        T::one()
    } else {
        -T::one()
    };
    sign * (f_eval(deg, eps_c) - T::from_index(m) * f_eval(deg, eps_f))
}

/// `mu = sl_symbol(m c) / (1 - phi d(omega))`.
pub fn corrected_symbol<T: Real>(deg: InterpDegree, m: usize, c: T, omega: T) -> Complex<T> {
    let phi = phi_scalar(deg, m, c);
    sl_symbol(deg, c * T::from_index(m), omega) / (T::one() - phi * stencil_symbol(deg, omega))
}

/// Coarse symbol for any operator kind.
pub fn coarse_symbol<T: Real>(
    deg: InterpDegree,
    m: usize,
    c: T,
    omega: T,
    kind: OperatorKind,
) -> Complex<T> {
    let coarse = sl_symbol(deg, c * T::from_index(m), omega);
    match kind {
        OperatorKind::Rediscretized => coarse,
        OperatorKind::Corrected => corrected_symbol(deg, m, c, omega),
        OperatorKind::ForwardEuler => {
            coarse * (T::one() + phi_scalar(deg, m, c) * stencil_symbol(deg, omega))
        }
        OperatorKind::Ideal => sl_symbol(deg, c, omega).powu(m as u32),
    }
}

/// Fine and coarse symbols at one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolSample<T> {
    pub omega: T,
    pub lambda: Complex<T>,
    pub mu: Complex<T>,
}

/// The LFA frequencies `-pi + 2 pi k / 512`.
pub fn frequencies<T: Real>() -> impl Iterator<Item = T> {
    (0..LFA_SAMPLES).map(|k| -T::PI() + T::TAU() * T::from_index(k) / T::from_index(LFA_SAMPLES))
}

pub fn symbol_samples<T: Real>(
    deg: InterpDegree,
    m: usize,
    c: T,
    kind: OperatorKind,
) -> Vec<SymbolSample<T>> {
    frequencies()
        .map(|omega| SymbolSample {
            omega,
            lambda: sl_symbol(deg, c, omega),
            mu: coarse_symbol(deg, m, c, omega, kind),
        })
        .collect()
}

/// Two-level convergence estimate; samples with `|1 - |mu|| < 1e-13` are
/// skipped and an empty maximum is 0.
pub fn rho_estimate<T: Real>(deg: InterpDegree, m: usize, c: T, kind: OperatorKind) -> T {
    let skip = T::lit(SKIP_TOL);
    let mut rho = T::zero();
    for s in symbol_samples(deg, m, c, kind) {
        let amu = s.mu.norm();
        let denom = T::one() - amu;
        if denom.abs() < skip {
            continue;
        }
        let lm = s.lambda.powu(m as u32);
        let val = s.lambda.norm().powi(m as i32) * (lm - s.mu).norm() / denom;
        if val > rho {
            rho = val;
        }
    }
    rho
}

/// CFL numbers `start, start + step, ...` up to `end` inclusive, built from
/// integer multiples to avoid drift.
pub fn cfl_grid(start: f64, end: f64, step: f64) -> Vec<f64> {
    if step <= 0.0 || end < start {
        return vec![start];
    }
    let count = ((end - start) / step + 1e-9).floor() as usize;
    (0..=count).map(|k| start + k as f64 * step).collect()
}
