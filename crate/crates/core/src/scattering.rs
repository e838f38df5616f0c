//! Jost solutions of the Zakharov–Shabat system `∂ₓψ = (izσ + Q)ψ` and the
//! scattering data `a`, `b`, `r`.
//!
//! The potential is read as a staircase: sample `q_k` holds on the cell
//! `[x_k − h/2, x_k + h/2]`. On one cell the coefficient matrix
//! `G = [[iz/2, q], [q̄, −iz/2]]` satisfies `G² = (|q|² − z²/4)·I`, so the
//! cell propagator `exp(hG)` has a closed form and the march is exact for
//! the staircase. For smooth potentials this is the exponential midpoint
//! rule and converges at second order in `h`.

use rayon::prelude::*;

use crate::error::{NlsError, Result};
use crate::grid::{l2_norm, Mat2, SampledFn, SampledMatrixFn, UniformGrid, C64, DEFAULT_DECAY_TOL};
use crate::pauli::PauliOps;

/// Relative tolerance for the agreement of `a`, `b` computed at the two ends.
pub const MATCHING_TOL: f64 = 1e-6;

/// Sampled potential `q(x)` decaying at the ends of its grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    samples: SampledFn,
    norm_l2: f64,
    norm_h11: f64,
}

impl Potential {
    pub fn new(samples: SampledFn) -> Result<Self> {
        Self::with_decay_tol(samples, DEFAULT_DECAY_TOL)
    }

    pub fn with_decay_tol(samples: SampledFn, decay_tol: f64) -> Result<Self> {
        samples.check_endpoint_decay(decay_tol)?;
        let norm_l2 = samples.l2_norm();
        let norm_h11 = h11_norm(&samples);
        Ok(Self { samples, norm_l2, norm_h11 })
    }

    /// `amplitude·exp(−((x − center)/width)²)`.
    pub fn gaussian(grid: UniformGrid, amplitude: C64, center: f64, width: f64) -> Result<Self> {
        Self::new(SampledFn::from_fn(grid, |x| {
            let u = (x - center) / width;
            amplitude * (-u * u).exp()
        })?)
    }

    /// `amplitude·sech(x)`.
    pub fn sech(grid: UniformGrid, amplitude: f64) -> Result<Self> {
        Self::new(SampledFn::from_real_fn(grid, |x| amplitude / x.cosh())?)
    }

    /// `amplitude` on `[lo, hi]` and zero elsewhere, sampled by cell averages so
    /// that partially covered cells carry the covered fraction.
    pub fn boxed(grid: UniformGrid, amplitude: C64, lo: f64, hi: f64) -> Result<Self> {
        if !(hi > lo) {
            return Err(NlsError::Domain(format!("empty box [{lo}, {hi}]")));
        }
        let h = grid.step;
        Self::new(SampledFn::from_fn(grid, |x| {
            let overlap = ((x + 0.5 * h).min(hi) - (x - 0.5 * h).max(lo)).max(0.0);
            amplitude * (overlap / h)
        })?)
    }

    pub fn samples(&self) -> &SampledFn {
        &self.samples
    }

    pub fn grid(&self) -> &UniformGrid {
        self.samples.grid()
    }

    pub fn norm_l2(&self) -> f64 {
        self.norm_l2
    }

    pub fn norm_h11(&self) -> f64 {
        self.norm_h11
    }
}

fn derivative(values: &[C64], step: f64) -> Vec<C64> {
    let n = values.len();
    (0..n)
        .map(|k| {
            let lo = if k == 0 { values[0] } else { values[k - 1] };
            let hi = if k + 1 == n { values[n - 1] } else { values[k + 1] };
            let span = if k == 0 || k + 1 == n { step } else { 2.0 * step };
            (hi - lo) / span
        })
        .collect()
}

fn weighted(f: &SampledFn) -> Vec<C64> {
    f.values().iter().enumerate().map(|(k, v)| v * f.grid().point(k)).collect()
}

/// `(‖f‖² + ‖f′‖²)^{1/2}`.
fn h10_norm(f: &SampledFn) -> f64 {
    let step = f.grid().step;
    let d = l2_norm(&derivative(f.values(), step), step);
    (f.l2_norm().powi(2) + d * d).sqrt()
}

/// `(‖f‖² + ‖f′‖² + ‖x·f‖²)^{1/2}`.
fn h11_norm(f: &SampledFn) -> f64 {
    let w = l2_norm(&weighted(f), f.grid().step);
    (h10_norm(f).powi(2) + w * w).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JostSide {
    /// Normalized at `−∞`.
    Minus,
    /// Normalized at `+∞`.
    Plus,
}

/// `m^{(±)}(x, z)` sampled at the x-grid points.
#[derive(Debug, Clone)]
pub struct JostSolution {
    pub direction: JostSide,
    pub z: f64,
    pub m: SampledMatrixFn,
}

/// `exp(hG)` for `G = [[iz/2, q], [q̄, −iz/2]]`.
fn cell_propagator(q: C64, z: f64, h: f64) -> Mat2 {
    let d = q.norm_sqr() - 0.25 * z * z;
    let y2 = d * h * h;
    let (c, s) = if y2.abs() < 1e-6 {
        (
            1.0 + y2 / 2.0 + y2 * y2 / 24.0 + y2 * y2 * y2 / 720.0,
            h * (1.0 + y2 / 6.0 + y2 * y2 / 120.0 + y2 * y2 * y2 / 5040.0),
        )
    } else if d > 0.0 {
        let k = d.sqrt();
        ((h * k).cosh(), (h * k).sinh() / k)
    } else {
        let w = (-d).sqrt();
        ((h * w).cos(), (h * w).sin() / w)
    };
    let iz2 = C64::new(0.0, 0.5 * z);
    Mat2::new(c + s * iz2, q * s, q.conj() * s, c - s * iz2)
}

/// `e^{ixzσ}`.
fn free_solution(x: f64, z: f64) -> Mat2 {
    PauliOps::exp_sigma(C64::new(0.0, x * z))
}

fn check_z(z: f64) -> Result<()> {
    if z.is_finite() {
        Ok(())
    } else {
        Err(NlsError::Domain(format!("spectral parameter {z} is not finite")))
    }
}

/// Jost solution by the cell-exact exponential march from the normalization end.
pub fn solve_jost(q: &Potential, z: f64, direction: JostSide) -> Result<JostSolution> {
    check_z(z)?;
    let grid = *q.grid();
    let h = grid.step;
    let (x_left, x_right) = grid.extent();
    let vals = q.samples().values();
    let mut mats = vec![Mat2::IDENTITY; grid.n];

    let start = match direction {
        JostSide::Minus => x_left,
        JostSide::Plus => x_right,
    };
    let mut psi = free_solution(start, z);
    let residual = (psi * free_solution(-start, z) - Mat2::IDENTITY).max_abs();
    if residual > 1e-10 {
        return Err(NlsError::Normalization(residual));
    }

    let mut record = |k: usize, psi_mid: Mat2| mats[k] = psi_mid * free_solution(-grid.point(k), z);
    match direction {
        JostSide::Minus => {
            for (k, &qk) in vals.iter().enumerate() {
                let half = cell_propagator(qk, z, 0.5 * h);
                let mid = half * psi;
                record(k, mid);
                psi = half * mid;
            }
        }
        JostSide::Plus => {
            for (k, &qk) in vals.iter().enumerate().rev() {
                let half = cell_propagator(qk, z, -0.5 * h);
                let mid = half * psi;
                record(k, mid);
                psi = half * mid;
            }
        }
    }
    Ok(JostSolution { direction, z, m: SampledMatrixFn::from_matrices(grid, &mats)? })
}

/// `(a(z), b(z))` from both matching ends; fails if they disagree.
pub fn scattering_at(q: &Potential, z: f64) -> Result<(C64, C64)> {
    check_z(z)?;
    let grid = q.grid();
    let h = grid.step;
    let (x_left, x_right) = grid.extent();
    let vals = q.samples().values();

    let mut forward = free_solution(x_left, z);
    for &qk in vals {
        forward = cell_propagator(qk, z, h) * forward;
    }
    let m_minus = forward * free_solution(-x_right, z);

    let mut backward = free_solution(x_right, z);
    for &qk in vals.iter().rev() {
        backward = cell_propagator(qk, z, -h) * backward;
    }
    let m_plus = backward * free_solution(-x_left, z);

    let a_right = m_minus.get(1, 1);
    let b_right = -C64::from_polar(1.0, x_right * z) * m_minus.get(1, 0);
    let a_left = m_plus.get(0, 0);
    let b_left = C64::from_polar(1.0, x_left * z) * m_plus.get(1, 0);

    let discrepancy = (a_right - a_left).norm() + (b_right - b_left).norm();
    if discrepancy > MATCHING_TOL * a_right.norm().max(1.0) {
        return Err(NlsError::MatchingPoint { z, discrepancy });
    }
    Ok((0.5 * (a_right + a_left), 0.5 * (b_right + b_left)))
}

/// Sampled `a`, `b`, `r` on a z-grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringData {
    pub a: SampledFn,
    pub b: SampledFn,
    pub r: SampledFn,
    /// `sup|r|`
    pub rho: f64,
    /// H^{1,0} norm of `r`
    pub lambda: f64,
    /// H^{1,1} norm of `r`
    pub eta: f64,
}

impl ScatteringData {
    /// Assembles the data from `a` and `b`, filling `r` and the norms.
    pub fn from_ab(a: SampledFn, b: SampledFn) -> Result<Self> {
        if !a.grid().same_as(b.grid()) {
            return Err(NlsError::GridMismatch("a and b live on different grids".into()));
        }
        let r = reflection_from(&a, &b)?;
        let rho = r.max_abs();
        let lambda = h10_norm(&r);
        let eta = h11_norm(&r);
        Ok(Self { a, b, r, rho, lambda, eta })
    }

    pub fn grid(&self) -> &UniformGrid {
        self.a.grid()
    }

    /// Transmission coefficient `1/a`.
    pub fn transmission(&self) -> SampledFn {
        let vals = self.a.values().iter().map(|a| a.inv()).collect();
        SampledFn::new(*self.a.grid(), vals).expect("|a| >= 1 keeps 1/a finite")
    }
}

/// `a`, `b`, `r` on `zgrid`, one independent march per grid point.
pub fn scattering_coefficients(q: &Potential, zgrid: &UniformGrid) -> Result<ScatteringData> {
    let pairs: Vec<(C64, C64)> = (0..zgrid.n)
        .into_par_iter()
        .map(|k| {
            let z = zgrid.point(k);
            let (a, b) = scattering_at(q, z)?;
            if a.norm() < 1.0 - MATCHING_TOL {
                return Err(NlsError::ScatteringBreakdown { z, abs_a: a.norm() });
            }
            Ok((a, b))
        })
        .collect::<Result<_>>()?;
    let (a, b): (Vec<C64>, Vec<C64>) = pairs.into_iter().unzip();
    ScatteringData::from_ab(SampledFn::new(*zgrid, a)?, SampledFn::new(*zgrid, b)?)
}

fn reflection_from(a: &SampledFn, b: &SampledFn) -> Result<SampledFn> {
    let grid = *a.grid();
    let mut vals = Vec::with_capacity(grid.n);
    for (k, (a, b)) in a.values().iter().zip(b.values()).enumerate() {
        let r = -b.conj() / a.conj();
        if !(r.norm() < 1.0) {
            return Err(NlsError::ReflectionBound { rho: r.norm(), z: grid.point(k) });
        }
        vals.push(r);
    }
    SampledFn::new(grid, vals)
}

/// `r = −b̄/ā`; fails at the first `z` with `|r| ≥ 1`.
pub fn reflection(sd: &ScatteringData) -> Result<SampledFn> {
    reflection_from(&sd.a, &sd.b)
}

/// `−(1/2π)∫ log(1 − |r|²) dz`.
pub fn trace_integral(r: &SampledFn) -> Result<f64> {
    let rho = r.max_abs();
    if rho >= 1.0 {
        return Err(NlsError::Domain(format!("sup|r| = {rho} is not below 1")));
    }
    let sum: f64 = r.values().iter().map(|v| -(-v.norm_sqr()).ln_1p()).sum();
    Ok(sum * r.grid().step / (2.0 * std::f64::consts::PI))
}
