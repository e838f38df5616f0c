//! Local four-point Lagrange interpolation on uniform grids.

use crate::grid::{SampledFn, UniformGrid, C64};

/// Cubic interpolant of `values` at `x`; linear on the outermost cells and
/// constant extrapolation outside the grid.
pub fn cubic_at(grid: &UniformGrid, values: &[C64], x: f64) -> C64 {
    let n = grid.n;
    let u = grid.locate(x);
    if u <= 0.0 {
        return values[0];
    }
    if u >= (n - 1) as f64 {
        return values[n - 1];
    }
    let i = (u.floor() as usize).min(n - 2);
    let t = u - i as f64;
    if i == 0 || i + 2 >= n {
        return values[i] * (1.0 - t) + values[i + 1] * t;
    }
    let (p0, p1, p2, p3) = (values[i - 1], values[i], values[i + 1], values[i + 2]);
    // Nodes at −1, 0, 1, 2.
    let w0 = -t * (t - 1.0) * (t - 2.0) / 6.0;
    let w1 = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
    let w2 = -(t + 1.0) * t * (t - 2.0) / 2.0;
    let w3 = (t + 1.0) * t * (t - 1.0) / 6.0;
    p0 * w0 + p1 * w1 + p2 * w2 + p3 * w3
}

/// Real-valued counterpart of [`cubic_at`].
pub fn cubic_at_real(grid: &UniformGrid, values: &[f64], x: f64) -> f64 {
    let n = grid.n;
    let u = grid.locate(x);
    if u <= 0.0 {
        return values[0];
    }
    if u >= (n - 1) as f64 {
        return values[n - 1];
    }
    let i = (u.floor() as usize).min(n - 2);
    let t = u - i as f64;
    if i == 0 || i + 2 >= n {
        return values[i] * (1.0 - t) + values[i + 1] * t;
    }
    let w0 = -t * (t - 1.0) * (t - 2.0) / 6.0;
    let w1 = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
    let w2 = -(t + 1.0) * t * (t - 2.0) / 2.0;
    let w3 = (t + 1.0) * t * (t - 1.0) / 6.0;
    values[i - 1] * w0 + values[i] * w1 + values[i + 1] * w2 + values[i + 2] * w3
}

impl SampledFn {
    /// Cubic interpolation of the samples at `x`.
    pub fn interpolate(&self, x: f64) -> C64 {
        cubic_at(self.grid(), self.values(), x)
    }
}
