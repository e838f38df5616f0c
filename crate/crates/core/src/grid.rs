//! Uniform grids and sampled scalar / 2×2-matrix functions on them.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{NlsError, Result};

pub type C64 = Complex64;

/// Default relative endpoint-decay tolerance for functions on a truncated line.
pub const DEFAULT_DECAY_TOL: f64 = 1e-6;

/// `n` equally spaced points `min + k·step`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformGrid {
    pub min: f64,
    pub step: f64,
    pub n: usize,
}

impl UniformGrid {
    pub fn new(min: f64, step: f64, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(NlsError::GridTooSmall { n, min: 2 });
        }
        if !(step.is_finite() && step > 0.0) || !min.is_finite() {
            return Err(NlsError::InvalidGrid(format!(
                "need finite min and step > 0, got min = {min}, step = {step}"
            )));
        }
        Ok(Self { min, step, n })
    }

    /// Grid of `n` cells tiling `[-half_width, half_width]`; samples sit at
    /// the cell centres, so the grid is symmetric about 0.
    pub fn symmetric(half_width: f64, n: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(NlsError::InvalidGrid(format!(
                "half-width must be positive, got {half_width}"
            )));
        }
        let step = 2.0 * half_width / n.max(1) as f64;
        Self::new(-step * (n as f64 - 1.0) / 2.0, step, n)
    }

    /// Grid whose cells tile `[lo, hi]`.
    pub fn cells(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if !(hi > lo) {
            return Err(NlsError::InvalidGrid(format!("empty interval [{lo}, {hi}]")));
        }
        let step = (hi - lo) / n.max(1) as f64;
        Self::new(lo + 0.5 * step, step, n)
    }

    #[inline]
    pub fn point(&self, k: usize) -> f64 {
        self.min + k as f64 * self.step
    }

    pub fn max(&self) -> f64 {
        self.point(self.n - 1)
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.point(k)).collect()
    }

    /// Total length covered by the cells, `n·step`.
    pub fn period(&self) -> f64 {
        self.n as f64 * self.step
    }

    /// Left and right cell boundaries.
    pub fn extent(&self) -> (f64, f64) {
        (self.min - 0.5 * self.step, self.max() + 0.5 * self.step)
    }

    pub fn is_symmetric(&self) -> bool {
        (self.min + self.max()).abs() <= 1e-12 * self.step.max(self.max().abs())
    }

    pub fn same_as(&self, other: &UniformGrid) -> bool {
        self.n == other.n
            && (self.min - other.min).abs() <= 1e-12 * (1.0 + self.min.abs())
            && (self.step - other.step).abs() <= 1e-12 * self.step
    }

    /// Continuous index of `x`: `(x - min)/step`.
    pub fn locate(&self, x: f64) -> f64 {
        (x - self.min) / self.step
    }
}

fn check_finite(values: &[C64], what: &'static str) -> Result<()> {
    match values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
        Some(index) => Err(NlsError::NonFinite { what, index }),
        None => Ok(()),
    }
}

/// Complex samples of a scalar function, one per grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFn {
    grid: UniformGrid,
    values: Vec<C64>,
}

impl SampledFn {
    pub fn new(grid: UniformGrid, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.n {
            return Err(NlsError::GridMismatch(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.n
            )));
        }
        check_finite(&values, "sampled function")?;
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: UniformGrid) -> Self {
        Self { grid, values: vec![C64::new(0.0, 0.0); grid.n] }
    }

    pub fn from_fn(grid: UniformGrid, f: impl Fn(f64) -> C64) -> Result<Self> {
        let values = (0..grid.n).map(|k| f(grid.point(k))).collect();
        Self::new(grid, values)
    }

    pub fn from_real_fn(grid: UniformGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::from_fn(grid, |x| C64::new(f(x), 0.0))
    }

    pub fn grid(&self) -> &UniformGrid {
        &self.grid
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// New function on the same grid with values `f(x_k, v_k)`.
    pub fn map(&self, f: impl Fn(f64, C64) -> C64) -> Result<Self> {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(k, &v)| f(self.grid.point(k), v))
            .collect();
        Self::new(self.grid, values)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    /// Index and value of the largest modulus.
    pub fn argmax_abs(&self) -> (usize, f64) {
        self.values
            .iter()
            .enumerate()
            .fold((0, 0.0), |(i, m), (k, v)| if v.norm() > m { (k, v.norm()) } else { (i, m) })
    }

    pub fn endpoint_magnitude(&self) -> f64 {
        self.values[0].norm().max(self.values[self.values.len() - 1].norm())
    }

    /// Fails unless both endpoint magnitudes are at most `rel_tol·max|f|`.
    pub fn check_endpoint_decay(&self, rel_tol: f64) -> Result<()> {
        let magnitude = self.endpoint_magnitude();
        let threshold = rel_tol * self.max_abs();
        if magnitude > threshold {
            return Err(NlsError::EndpointDecay { magnitude, threshold });
        }
        Ok(())
    }

    /// Discrete L² norm, `(Σ |f_k|² step)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        l2_norm(&self.values, self.grid.step)
    }

    /// `Σ f_k step`.
    pub fn integral(&self) -> C64 {
        self.values.iter().sum::<C64>() * self.grid.step
    }
}

pub(crate) fn l2_norm(values: &[C64], step: f64) -> f64 {
    (values.iter().map(|v| v.norm_sqr()).sum::<f64>() * step).sqrt()
}

/// A 2×2 complex matrix in row-major order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [C64; 4]);

impl Mat2 {
    pub const ZERO: Mat2 = Mat2([C64::new(0.0, 0.0); 4]);
    pub const IDENTITY: Mat2 = Mat2([
        C64::new(1.0, 0.0),
        C64::new(0.0, 0.0),
        C64::new(0.0, 0.0),
        C64::new(1.0, 0.0),
    ]);

    pub fn new(a11: C64, a12: C64, a21: C64, a22: C64) -> Self {
        Mat2([a11, a12, a21, a22])
    }

    pub fn diag(d1: C64, d2: C64) -> Self {
        Mat2::new(d1, C64::new(0.0, 0.0), C64::new(0.0, 0.0), d2)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[2 * i + j]
    }

    pub fn det(&self) -> C64 {
        self.0[0] * self.0[3] - self.0[1] * self.0[2]
    }

    /// Inverse of a matrix with unit determinant (adjugate).
    pub fn inv_unimodular(&self) -> Self {
        Mat2::new(self.0[3], -self.0[1], -self.0[2], self.0[0])
    }

    pub fn inv(&self) -> Self {
        let d = self.det();
        let adj = self.inv_unimodular();
        Mat2(adj.0.map(|v| v / d))
    }

    pub fn scale(&self, s: C64) -> Self {
        Mat2(self.0.map(|v| v * s))
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.0.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.norm()))
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    #[inline]
    fn mul(self, b: Mat2) -> Mat2 {
        let a = self.0;
        let b = b.0;
        Mat2([
            a[0] * b[0] + a[1] * b[2],
            a[0] * b[1] + a[1] * b[3],
            a[2] * b[0] + a[3] * b[2],
            a[2] * b[1] + a[3] * b[3],
        ])
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, b: Mat2) -> Mat2 {
        Mat2([self.0[0] + b.0[0], self.0[1] + b.0[1], self.0[2] + b.0[2], self.0[3] + b.0[3]])
    }
}

impl AddAssign for Mat2 {
    fn add_assign(&mut self, b: Mat2) {
        *self = *self + b;
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, b: Mat2) -> Mat2 {
        Mat2([self.0[0] - b.0[0], self.0[1] - b.0[1], self.0[2] - b.0[2], self.0[3] - b.0[3]])
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        Mat2(self.0.map(|v| -v))
    }
}

/// Channel index of entry `(i, j)` in a [`SampledMatrixFn`].
pub const fn channel(i: usize, j: usize) -> usize {
    2 * i + j
}

/// 2×2 matrix samples stored as four scalar channels (11, 12, 21, 22).
#[derive(Debug, Clone, PartialEq)]
pub struct SampledMatrixFn {
    grid: UniformGrid,
    channels: [Vec<C64>; 4],
}

impl SampledMatrixFn {
    pub fn from_channels(grid: UniformGrid, channels: [Vec<C64>; 4]) -> Result<Self> {
        for ch in &channels {
            if ch.len() != grid.n {
                return Err(NlsError::GridMismatch(format!(
                    "matrix channel of length {} on a grid of {} points",
                    ch.len(),
                    grid.n
                )));
            }
            check_finite(ch, "sampled matrix function")?;
        }
        Ok(Self { grid, channels })
    }

    pub fn constant(grid: UniformGrid, m: Mat2) -> Self {
        let channels = [0, 1, 2, 3].map(|c| vec![m.0[c]; grid.n]);
        Self { grid, channels }
    }

    pub fn zeros(grid: UniformGrid) -> Self {
        Self::constant(grid, Mat2::ZERO)
    }

    pub fn from_matrices(grid: UniformGrid, mats: &[Mat2]) -> Result<Self> {
        let channels = [0, 1, 2, 3].map(|c| mats.iter().map(|m| m.0[c]).collect::<Vec<_>>());
        Self::from_channels(grid, channels)
    }

    pub fn grid(&self) -> &UniformGrid {
        &self.grid
    }

    pub fn channel(&self, i: usize, j: usize) -> &[C64] {
        &self.channels[channel(i, j)]
    }

    pub fn channels(&self) -> &[Vec<C64>; 4] {
        &self.channels
    }

    pub(crate) fn channels_mut(&mut self) -> &mut [Vec<C64>; 4] {
        &mut self.channels
    }

    pub fn into_channels(self) -> [Vec<C64>; 4] {
        self.channels
    }

    pub fn len(&self) -> usize {
        self.grid.n
    }

    pub fn is_empty(&self) -> bool {
        self.grid.n == 0
    }

    #[inline]
    pub fn at(&self, k: usize) -> Mat2 {
        Mat2([self.channels[0][k], self.channels[1][k], self.channels[2][k], self.channels[3][k]])
    }

    pub fn matrices(&self) -> Vec<Mat2> {
        (0..self.grid.n).map(|k| self.at(k)).collect()
    }

    /// Discrete L² norm with the Frobenius norm pointwise.
    pub fn l2_norm(&self) -> f64 {
        let s: f64 = self.channels.iter().flatten().map(|v| v.norm_sqr()).sum();
        (s * self.grid.step).sqrt()
    }

    pub fn sup_norm(&self) -> f64 {
        (0..self.grid.n).fold(0.0, |m, k| m.max(self.at(k).norm()))
    }
}
