//! Continuum-normalized Fourier transforms on uniform grids and the Cauchy
//! boundary operators `C±` on the real line.
//!
//! With `f̂(ξ) = (2π)^{-1/2} ∫ f(z) e^{−iξz} dz`, the boundary values of the
//! Cauchy integral are Fourier multipliers: `C⁺` keeps the frequencies
//! `ξ ≥ 0` and `C⁻` is minus the projection onto `ξ < 0`. Frequencies are
//! laid out on the symmetric dual grid `ξ_j = (j − (n−1)/2)·2π/(n·step)`;
//! for even `n` no bin sits at `ξ = 0`, and when one does (odd `n`) it is
//! assigned to `C⁺` in full.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::error::{NlsError, Result};
use crate::grid::{SampledFn, SampledMatrixFn, UniformGrid, C64, DEFAULT_DECAY_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Plus,
    Minus,
}

/// Symmetric dual grid of `grid` under the continuum transform.
pub fn dual_grid(grid: &UniformGrid) -> UniformGrid {
    let n = grid.n;
    let step = 2.0 * PI / (n as f64 * grid.step);
    UniformGrid { min: -step * (n as f64 - 1.0) / 2.0, step, n }
}

fn plans(n: usize) -> (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>) {
    let mut planner = FftPlanner::new();
    (planner.plan_fft_forward(n), planner.plan_fft_inverse(n))
}

/// Continuum-normalized transform of `f`.
///
/// `Forward` maps onto the symmetric dual grid of `f`'s grid; `Inverse`
/// maps onto the symmetric grid whose dual is `f`'s grid, so a forward/inverse
/// pair reproduces the input exactly for symmetric grids. Use
/// [`inverse_onto`] to land on an arbitrary grid.
pub fn fourier_pair(f: &SampledFn, direction: Direction) -> Result<SampledFn> {
    let src = *f.grid();
    if src.n < 2 {
        return Err(NlsError::GridTooSmall { n: src.n, min: 2 });
    }
    let dst = dual_grid(&src);
    transform(f.values(), &src, &dst, direction)
}

/// Inverse transform of `fhat` onto `target`, whose step must be
/// `2π/(n·fhat.step)`.
pub fn inverse_onto(fhat: &SampledFn, target: &UniformGrid) -> Result<SampledFn> {
    let src = *fhat.grid();
    let expected = 2.0 * PI / (src.n as f64 * src.step);
    if target.n != src.n || (target.step - expected).abs() > 1e-12 * expected {
        return Err(NlsError::GridMismatch(format!(
            "target grid (n = {}, step = {}) is not dual to n = {}, step = {}",
            target.n, target.step, src.n, expected
        )));
    }
    transform(fhat.values(), &src, target, Direction::Inverse)
}

// out_j = c · e^{s·i·y_j·x_0} Σ_k in_k e^{s·i·y_0·k·dx} e^{s·2πi·jk/n}, s = ∓1.
fn transform(values: &[C64], src: &UniformGrid, dst: &UniformGrid, direction: Direction) -> Result<SampledFn> {
    let n = src.n;
    let sign = match direction {
        Direction::Forward => -1.0,
        Direction::Inverse => 1.0,
    };
    let (fwd, inv) = plans(n);
    let mut buf: Vec<C64> = values
        .iter()
        .enumerate()
        .map(|(k, &v)| v * C64::from_polar(1.0, sign * dst.min * k as f64 * src.step))
        .collect();
    match direction {
        Direction::Forward => fwd.process(&mut buf),
        Direction::Inverse => inv.process(&mut buf),
    }
    let scale = src.step / (2.0 * PI).sqrt();
    let out = buf
        .into_iter()
        .enumerate()
        .map(|(j, v)| v * C64::from_polar(scale, sign * dst.point(j) * src.min))
        .collect();
    SampledFn::new(*dst, out)
}

/// Reusable spectral projector implementing `C±` for a fixed grid size.
#[derive(Clone)]
pub struct CauchyProjector {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    modulation: Vec<C64>,
    first_plus_bin: usize,
}

impl std::fmt::Debug for CauchyProjector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CauchyProjector").field("n", &self.n).finish()
    }
}

impl CauchyProjector {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(NlsError::GridTooSmall { n, min: 2 });
        }
        let (fwd, inv) = plans(n);
        // ξ_0·step = −π(n−1)/n on the symmetric dual grid.
        let shift = PI * (n as f64 - 1.0) / n as f64;
        let modulation = (0..n).map(|k| C64::from_polar(1.0, shift * k as f64)).collect();
        // ξ_j ≥ 0 ⇔ j ≥ (n−1)/2.
        Ok(Self { n, fwd, inv, modulation, first_plus_bin: n / 2 })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Applies `C⁺` (or `C⁻`) to `values` in place.
    pub fn apply_in_place(&self, values: &mut [C64], side: Side) {
        assert_eq!(values.len(), self.n, "projector size mismatch");
        for (v, m) in values.iter_mut().zip(&self.modulation) {
            *v *= m;
        }
        self.fwd.process(values);
        let split = self.first_plus_bin;
        match side {
            Side::Plus => values[..split].iter_mut().for_each(|v| *v = C64::new(0.0, 0.0)),
            Side::Minus => {
                values[split..].iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
                values[..split].iter_mut().for_each(|v| *v = -*v);
            }
        }
        self.inv.process(values);
        let inv_n = 1.0 / self.n as f64;
        for (v, m) in values.iter_mut().zip(&self.modulation) {
            *v *= m.conj() * inv_n;
        }
    }

    pub fn apply(&self, values: &[C64], side: Side) -> Vec<C64> {
        let mut out = values.to_vec();
        self.apply_in_place(&mut out, side);
        out
    }

    /// Entrywise `C±` of a matrix function.
    pub fn apply_matrix(&self, h: &SampledMatrixFn, side: Side) -> SampledMatrixFn {
        let mut out = h.clone();
        for ch in out.channels_mut().iter_mut() {
            self.apply_in_place(ch, side);
        }
        out
    }
}

/// `C±h` with the default endpoint-decay tolerance.
pub fn cauchy_boundary(h: &SampledFn, side: Side) -> Result<SampledFn> {
    cauchy_boundary_with(h, side, DEFAULT_DECAY_TOL)
}

/// `C±h`, failing with a warning-level error when `|h|` at the grid ends
/// exceeds `decay_tol·max|h|`.
pub fn cauchy_boundary_with(h: &SampledFn, side: Side, decay_tol: f64) -> Result<SampledFn> {
    h.check_endpoint_decay(decay_tol)?;
    let proj = CauchyProjector::new(h.len())?;
    SampledFn::new(*h.grid(), proj.apply(h.values(), side))
}

/// Both boundary values `(C⁺h, C⁻h)` without the decay check.
pub fn cauchy_pair_unchecked(h: &SampledFn) -> Result<(SampledFn, SampledFn)> {
    let proj = CauchyProjector::new(h.len())?;
    let plus = proj.apply(h.values(), Side::Plus);
    let minus: Vec<C64> = plus.iter().zip(h.values()).map(|(p, v)| p - v).collect();
    Ok((SampledFn::new(*h.grid(), plus)?, SampledFn::new(*h.grid(), minus)?))
}

/// Hilbert transform `Hh = ∫ h(s)/(z−s) ds/(iπ) = −(C⁺ + C⁻)h`.
pub fn hilbert(h: &SampledFn) -> Result<SampledFn> {
    hilbert_with(h, DEFAULT_DECAY_TOL)
}

pub fn hilbert_with(h: &SampledFn, decay_tol: f64) -> Result<SampledFn> {
    let plus = cauchy_boundary_with(h, Side::Plus, decay_tol)?;
    // C⁻ = C⁺ − 1, so −(C⁺ + C⁻)h = h − 2C⁺h.
    let values = h.values().iter().zip(plus.values()).map(|(v, p)| v - 2.0 * p).collect();
    SampledFn::new(*h.grid(), values)
}

/// `∫ ds / (s²(s − z))` antiderivative, `1/(zs) + log(1 − z/s)/z²`.
fn tail_antiderivative(s: f64, z: C64) -> C64 {
    let w = z / s;
    if w.norm() < 0.1 {
        // −Σ_{k≥2} z^{k−2}/(k s^k)
        let mut sum = C64::new(0.0, 0.0);
        let mut wp = C64::new(1.0, 0.0);
        for k in 2..40 {
            sum -= wp / (k as f64);
            wp *= w;
            if wp.norm() < 1e-18 {
                break;
            }
        }
        sum / (s * s)
    } else {
        C64::new(1.0, 0.0) / (z * s) + (C64::new(1.0, 0.0) - w).ln() / (z * z)
    }
}

/// `(Ch)(z) = (2πi)^{-1} ∫ h(s)/(s − z) ds` for `Im z ≠ 0`, by the
/// rectangle rule on the grid cells plus an `s^{-2}` tail model beyond
/// each end of the grid.
pub fn cauchy_offcontour(h: &SampledFn, z: C64) -> Result<C64> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(NlsError::Domain(format!("evaluation point {z} is not finite")));
    }
    if z.im == 0.0 {
        return Err(NlsError::Domain(format!("Cauchy integral evaluated on the contour at z = {}", z.re)));
    }
    let g = h.grid();
    let mut sum = C64::new(0.0, 0.0);
    for (k, &v) in h.values().iter().enumerate() {
        sum += v / (g.point(k) - z);
    }
    sum *= g.step;
    let (lo, hi) = g.extent();
    if lo < 0.0 && hi > 0.0 {
        let vals = h.values();
        let (s_l, s_r) = (g.point(0), g.max());
        sum += vals[vals.len() - 1] * s_r * s_r * (-tail_antiderivative(hi, z));
        sum += vals[0] * s_l * s_l * tail_antiderivative(lo, z);
    }
    Ok(sum / C64::new(0.0, 2.0 * PI))
}
