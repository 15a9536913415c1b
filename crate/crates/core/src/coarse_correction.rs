//! Truncation-error-corrected coarse time stepping.
//!
//! The coarse semi-Lagrangian step misses the ideal product of `m` fine steps
//! by a leading-order term `diag(phi) D u`, where `D` is the minimal centered
//! stencil for `h^{p+1} d^{p+1}/dx^{p+1}` and `phi` compares the error
//! polynomial `f_{p+1}` at the coarse and fine offsets. The corrected
//! operator applies the implicit factor `(I - diag(sigma) D)^{-1}` after the
//! coarse step; on multilevel hierarchies `sigma` accumulates the child
//! coefficients so each level targets the fine-grid error.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::grid::{Dimension, GridFunction};
use crate::scalar::Real;
use crate::semi_lagrangian::{sl_step_into, DepartureSet, InterpDegree};

/// `f_{p+1}(z) = prod_{q=-west}^{east} (q + z) / (p+1)!`.
pub fn f_eval<T: Real>(deg: InterpDegree, z: T) -> T {
    let west = deg.west() as i64;
    let east = deg.east() as i64;
    let mut prod = T::one();
    for q in -west..=east {
        prod *= T::lit(q as f64) + z;
    }
    let mut fact = 1.0;
    for k in 2..=deg.width() {
        fact *= k as f64;
    }
    prod / T::lit(fact)
}

/// Coefficients of `D_{p+1}` at offsets `-(p+1)/2 ..= (p+1)/2`: the
/// alternating binomial row `(-1)^{j + k/2} C(k, j + k/2)`, `k = p + 1`.
pub fn derivative_stencil(deg: InterpDegree) -> Vec<f64> {
    let k = deg.width();
    let mut row = vec![1.0f64; k + 1];
    for j in 1..k {
        row[j] = row[j - 1] * (k - j + 1) as f64 / j as f64;
    }
    row.iter()
        .enumerate()
        .map(|(idx, &c)| if idx % 2 == 0 { c } else { -c })
        .collect()
}

/// Symbol `(-4 sin^2(omega/2))^{(p+1)/2}` of `D_{p+1}`; real and of sign
/// `(-1)^{(p+1)/2}`.
pub fn stencil_symbol<T: Real>(deg: InterpDegree, omega: T) -> T {
    let s = (omega / T::lit(2.0)).sin();
    let base = -T::lit(4.0) * s * s;
    base.powi((deg.width() / 2) as i32)
}

/// Complex symbol by direct summation, for cross-checks.
pub fn stencil_symbol_direct<T: Real>(deg: InterpDegree, omega: T) -> Complex<T> {
    let coeffs = derivative_stencil(deg);
    let half = (coeffs.len() / 2) as i64;
    coeffs
        .iter()
        .enumerate()
        .map(|(j, &c)| Complex::from_polar(T::lit(c), T::lit((j as i64 - half) as f64) * omega))
        .fold(Complex::new(T::zero(), T::zero()), |a, b| a + b)
}

/// Per-node coefficients of the correction term; `y` is present in 2D.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrectionField<T> {
    pub x: Vec<T>,
    pub y: Option<Vec<T>>,
}

impl<T: Real> CorrectionField<T> {
    pub fn zeros(len: usize, dim: Dimension) -> Self {
        Self {
            x: vec![T::zero(); len],
            y: match dim {
                Dimension::One => None,
                Dimension::Two => Some(vec![T::zero(); len]),
            },
        }
    }

    pub fn constant(len: usize, dim: Dimension, c: T) -> Self {
        Self {
            x: vec![c; len],
            y: match dim {
                Dimension::One => None,
                Dimension::Two => Some(vec![c; len]),
            },
        }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn dim(&self) -> Dimension {
        if self.y.is_some() {
            Dimension::Two
        } else {
            Dimension::One
        }
    }

    pub fn norm_inf(&self) -> T {
        let mut m = T::zero();
        for v in self.x.iter().chain(self.y.iter().flatten()) {
            m = m.max(v.abs());
        }
        m
    }

    pub fn is_zero(&self) -> bool {
        self.norm_inf() == T::zero()
    }

    fn add_assign(&mut self, other: &Self) {
        for (a, b) in self.x.iter_mut().zip(&other.x) {
            *a += *b;
        }
        if let (Some(a), Some(b)) = (self.y.as_mut(), other.y.as_ref()) {
            for (a, b) in a.iter_mut().zip(b) {
                *a += *b;
            }
        }
    }
}

/// `phi_i = (-1)^{p+1} [f(eps_coarse_i) - sum_k f(eps_fine_k_i)]`, per axis.
pub fn phi_vector<T: Real>(
    fine: &[&DepartureSet<T>],
    coarse: &DepartureSet<T>,
    deg: InterpDegree,
) -> Result<CorrectionField<T>> {
    if fine.is_empty() {
        return Err(Error::SubstepCount {
            expected: 1,
            found: 0,
        });
    }
    let len = coarse.len();
    for f in fine {
        if f.len() != len || f.dim() != coarse.dim() {
            return Err(Error::DimensionMismatch {
                expected: len,
                found: f.len(),
            });
        }
    }
    // (-1)^{p+1} = 1 for odd p
    let sign = if deg.width().is_multiple_of(2) {
        T::one()
    } else {
        -T::one()
    };
    let axis_phi = |c: &[T], fs: Vec<&[T]>| -> Vec<T> {
        (0..len)
            .map(|i| {
                let mut acc = f_eval(deg, c[i]);
                for f in &fs {
                    acc -= f_eval(deg, f[i]);
                }
                sign * acc
            })
            .collect()
    };
    let x = axis_phi(
        &coarse.x().offset,
        fine.iter().map(|f| f.x().offset.as_slice()).collect(),
    );
    let y = coarse.y().map(|cy| {
        axis_phi(
            &cy.offset,
            fine.iter()
                .map(|f| f.y().expect("checked dimension").offset.as_slice())
                .collect(),
        )
    });
    Ok(CorrectionField { x, y })
}

/// `sigma = sum(children) + phi`; with no children `sigma = phi`.
pub fn sigma_accumulate<T: Real>(
    children: &[&CorrectionField<T>],
    phi: &CorrectionField<T>,
) -> Result<CorrectionField<T>> {
    let mut sigma = phi.clone();
    for c in children {
        if c.len() != phi.len() || c.dim() != phi.dim() {
            return Err(Error::DimensionMismatch {
                expected: phi.len(),
                found: c.len(),
            });
        }
        sigma.add_assign(c);
    }
    Ok(sigma)
}

/// Periodic application of `D_{p+1}` along one axis: `lines` lines of `n`
/// points, line `l` starting at `l * line_step` with element stride
/// `stride`. Adds `scale * field * (D v)` into `out`.
#[allow(clippy::too_many_arguments)]
fn apply_stencil_axis<T: Real, const K: usize>(
    v: &[T],
    n: usize,
    lines: usize,
    line_step: usize,
    stride: usize,
    field: &[T],
    scale: T,
    out: &mut [T],
) {
    let half = K / 2;
    let coeffs: [T; K] = {
        let c = BINOMIAL_ROWS[half - 1];
        let mut a = [T::zero(); K];
        for (k, ak) in a.iter_mut().enumerate() {
            *ak = T::lit(c[k]);
        }
        a
    };
    for l in 0..lines {
        let base = l * line_step;
        for i in 0..n {
            let idx = base + i * stride;
            let f = field[idx];
            if f == T::zero() {
                continue;
            }
            let mut acc = T::zero();
            if i >= half && i + half < n {
                let start = base + (i - half) * stride;
                for (k, &c) in coeffs.iter().enumerate() {
                    acc += c * v[start + k * stride];
                }
            } else {
                for (k, &c) in coeffs.iter().enumerate() {
                    let j = (i + k + n - half) % n;
                    acc += c * v[base + j * stride];
                }
            }
            out[idx] += scale * f * acc;
        }
    }
}

const BINOMIAL_ROWS: [[f64; 7]; 3] = [
    [1.0, -2.0, 1.0, 0.0, 0.0, 0.0, 0.0],
    [1.0, -4.0, 6.0, -4.0, 1.0, 0.0, 0.0],
    [1.0, -6.0, 15.0, -20.0, 15.0, -6.0, 1.0],
];

#[allow(clippy::too_many_arguments)]
fn apply_axis<T: Real>(
    deg: InterpDegree,
    v: &[T],
    n: usize,
    lines: usize,
    line_step: usize,
    stride: usize,
    field: &[T],
    scale: T,
    out: &mut [T],
) {
    match deg.width() {
        2 => apply_stencil_axis::<T, 3>(v, n, lines, line_step, stride, field, scale, out),
        4 => apply_stencil_axis::<T, 5>(v, n, lines, line_step, stride, field, scale, out),
        _ => apply_stencil_axis::<T, 7>(v, n, lines, line_step, stride, field, scale, out),
    }
}

/// `out = v + sign * [diag(fx) Dx v + diag(fy) Dy v]`.
fn apply_shifted<T: Real>(
    field: &CorrectionField<T>,
    deg: InterpDegree,
    sign: T,
    v: &[T],
    out: &mut [T],
) {
    out.copy_from_slice(v);
    match &field.y {
        None => {
            let n = v.len();
            apply_axis(deg, v, n, 1, 0, 1, &field.x, sign, out);
        }
        Some(fy) => {
            let n = (v.len() as f64).sqrt().round() as usize;
            apply_axis(deg, v, n, n, n, 1, &field.x, sign, out);
            apply_axis(deg, v, n, n, 1, n, fy, sign, out);
        }
    }
}

/// `(I - diag(field) D) v`.
pub fn apply_im_sd<T: Real>(
    field: &CorrectionField<T>,
    deg: InterpDegree,
    v: &GridFunction<T>,
) -> Result<GridFunction<T>> {
    v.check_len(field.len())?;
    let mut out = GridFunction::zeros(v.len());
    apply_shifted(field, deg, -T::one(), v, &mut out);
    Ok(out)
}

/// `(I + diag(field) D) v`.
pub fn apply_ip_sd<T: Real>(
    field: &CorrectionField<T>,
    deg: InterpDegree,
    v: &GridFunction<T>,
) -> Result<GridFunction<T>> {
    v.check_len(field.len())?;
    let mut out = GridFunction::zeros(v.len());
    apply_shifted(field, deg, T::one(), v, &mut out);
    Ok(out)
}

/// GMRES stopping rule: a fixed iteration budget, optionally cut short once
/// the relative residual drops to `tol`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmresConfig {
    pub max_iters: usize,
    pub tol: Option<f64>,
}

impl GmresConfig {
    /// Ten iterations, no tolerance.
    pub const fn fixed(max_iters: usize) -> Self {
        Self {
            max_iters,
            tol: None,
        }
    }

    pub const fn two_level() -> Self {
        Self::fixed(10)
    }

    /// Relative tolerance `1e-2`, at most ten iterations.
    pub const fn multilevel() -> Self {
        Self {
            max_iters: 10,
            tol: Some(1e-2),
        }
    }
}

impl Default for GmresConfig {
    fn default() -> Self {
        Self::two_level()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GmresOutcome<T> {
    pub solution: Vec<T>,
    pub iterations: usize,
    /// Residual norms, starting with `||rhs||`.
    pub residuals: Vec<T>,
    pub breakdown: bool,
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    let mut s = T::zero();
    for (x, y) in a.iter().zip(b) {
        s += *x * *y;
    }
    s
}

/// Non-restarted GMRES with modified Gram-Schmidt and Givens rotations,
/// zero initial guess.
pub fn gmres<T, A>(apply: A, rhs: &[T], cfg: GmresConfig) -> Result<GmresOutcome<T>>
where
    T: Real,
    A: Fn(&[T], &mut [T]),
{
    let n = rhs.len();
    if rhs.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let beta = dot(rhs, rhs).sqrt();
    let mut residuals = vec![beta];
    if beta == T::zero() || cfg.max_iters == 0 {
        return Ok(GmresOutcome {
            solution: vec![T::zero(); n],
            iterations: 0,
            residuals,
            breakdown: false,
        });
    }
    let k_max = cfg.max_iters;
    let mut basis: Vec<Vec<T>> = Vec::with_capacity(k_max + 1);
    basis.push(rhs.iter().map(|&v| v / beta).collect());
    // column-major Hessenberg, h[k] has k + 2 entries
    let mut hess: Vec<Vec<T>> = Vec::with_capacity(k_max);
    let mut cs: Vec<T> = Vec::with_capacity(k_max);
    let mut sn: Vec<T> = Vec::with_capacity(k_max);
    let mut g = vec![T::zero(); k_max + 1];
    g[0] = beta;
    let tiny = T::epsilon() * T::lit(16.0) * beta;
    let mut w = vec![T::zero(); n];
    let mut iters = 0;
    let mut breakdown = false;

    for k in 0..k_max {
        apply(&basis[k], &mut w);
        let mut col = vec![T::zero(); k + 2];
        for (j, vj) in basis.iter().enumerate().take(k + 1) {
            let hj = dot(&w, vj);
            col[j] = hj;
            for (wi, &vi) in w.iter_mut().zip(vj) {
                *wi -= hj * vi;
            }
        }
        let wnorm = dot(&w, &w).sqrt();
        col[k + 1] = wnorm;
        for j in 0..k {
            let (a, b) = (col[j], col[j + 1]);
            col[j] = cs[j] * a + sn[j] * b;
            col[j + 1] = -sn[j] * a + cs[j] * b;
        }
        let (a, b) = (col[k], col[k + 1]);
        let r = a.hypot(b);
        let (c, s) = if r == T::zero() {
            (T::one(), T::zero())
        } else {
            (a / r, b / r)
        };
        col[k] = r;
        col[k + 1] = T::zero();
        cs.push(c);
        sn.push(s);
        g[k + 1] = -s * g[k];
        g[k] = c * g[k];
        hess.push(col);
        iters = k + 1;
        let res = g[k + 1].abs();
        residuals.push(res);
        if wnorm <= tiny {
            breakdown = res > tiny;
            break;
        }
        if let Some(tol) = cfg.tol {
            if res <= T::lit(tol) * beta {
                break;
            }
        }
        if k + 1 < k_max {
            basis.push(w.iter().map(|&v| v / wnorm).collect());
        }
    }

    let mut y = vec![T::zero(); iters];
    for i in (0..iters).rev() {
        let mut acc = g[i];
        for j in i + 1..iters {
            acc -= hess[j][i] * y[j];
        }
        let diag = hess[i][i];
        y[i] = if diag == T::zero() {
            T::zero()
        } else {
            acc / diag
        };
    }
    let mut x = vec![T::zero(); n];
    for (j, &yj) in y.iter().enumerate() {
        for (xi, &vi) in x.iter_mut().zip(&basis[j]) {
            *xi += yj * vi;
        }
    }
    Ok(GmresOutcome {
        solution: x,
        iterations: iters,
        residuals,
        breakdown,
    })
}

/// Approximately solves `(I - diag(field) D) x = rhs`.
pub fn gmres_solve<T: Real>(
    field: &CorrectionField<T>,
    deg: InterpDegree,
    rhs: &GridFunction<T>,
    cfg: GmresConfig,
) -> Result<GmresOutcome<T>> {
    rhs.check_len(field.len())?;
    gmres(
        |v, out| apply_shifted(field, deg, -T::one(), v, out),
        rhs,
        cfg,
    )
}

/// Unchecked solve of `(I - diag(field) D) x = rhs` into `out`.
pub(crate) fn solve_into<T: Real>(
    field: &CorrectionField<T>,
    deg: InterpDegree,
    rhs: &[T],
    cfg: GmresConfig,
    out: &mut [T],
) {
    if field.is_zero() {
        out.copy_from_slice(rhs);
        return;
    }
    match gmres(|v, o| apply_shifted(field, deg, -T::one(), v, o), rhs, cfg) {
        Ok(sol) => out.copy_from_slice(&sol.solution),
        // non-finite input: propagate it so the caller's divergence check fires
        Err(_) => out.copy_from_slice(rhs),
    }
}

/// Coarse step `(I - diag(sigma) D)^{-1} S u` with the inverse applied by
/// GMRES.
pub fn corrected_coarse_step<T: Real>(
    departures: &DepartureSet<T>,
    sigma: &CorrectionField<T>,
    deg: InterpDegree,
    cfg: GmresConfig,
    u: &GridFunction<T>,
) -> Result<GridFunction<T>> {
    u.check_len(departures.len())?;
    sigma_shape(sigma, departures)?;
    let mut s = vec![T::zero(); u.len()];
    sl_step_into(departures, deg, u, &mut s);
    let mut out = GridFunction::zeros(u.len());
    solve_into(sigma, deg, &s, cfg, &mut out);
    Ok(out)
}

/// Coarse step `(I + diag(phi) D) S u`.
pub fn forward_euler_coarse_step<T: Real>(
    departures: &DepartureSet<T>,
    phi: &CorrectionField<T>,
    deg: InterpDegree,
    u: &GridFunction<T>,
) -> Result<GridFunction<T>> {
    u.check_len(departures.len())?;
    sigma_shape(phi, departures)?;
    let mut s = vec![T::zero(); u.len()];
    sl_step_into(departures, deg, u, &mut s);
    let mut out = GridFunction::zeros(u.len());
    apply_shifted(phi, deg, T::one(), &s, &mut out);
    Ok(out)
}

pub(crate) fn apply_forward_into<T: Real>(
    field: &CorrectionField<T>,
    deg: InterpDegree,
    v: &[T],
    out: &mut [T],
) {
    apply_shifted(field, deg, T::one(), v, out);
}

fn sigma_shape<T: Real>(field: &CorrectionField<T>, departures: &DepartureSet<T>) -> Result<()> {
    if field.len() != departures.len() || field.dim() != departures.dim() {
        return Err(Error::DimensionMismatch {
            expected: departures.len(),
            found: field.len(),
        });
    }
    Ok(())
}
