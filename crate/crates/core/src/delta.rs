//! The scalar function `δ(z) = exp((2πi)^{-1} ∫_{−∞}^{z₀} log(1 − |r(s)|²)/(s − z) ds)`
//! solving the scalar jump problem `δ₊ = δ₋(1 − |r|²)` on `(−∞, z₀)`.
//!
//! The density `φ = log(1 − |r|²)` is replaced by its piecewise-linear
//! interpolant on the grid nodes left of `z₀` plus `z₀` itself, and the
//! Cauchy integral of that interpolant is evaluated in closed form. The
//! jump relation then holds exactly for the interpolant, and the
//! logarithmic endpoint singularity at `z₀` needs no special treatment.

use std::f64::consts::PI;

use crate::error::{NlsError, Result};
use crate::grid::{SampledFn, C64, DEFAULT_DECAY_TOL};
use crate::interp::cubic_at_real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeltaSide {
    Plus,
    Minus,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaEval {
    pub z: C64,
    pub value: C64,
    pub side: DeltaSide,
}

/// `log(1 − |r|²)` at every sample.
pub(crate) fn log_gap(r: &SampledFn) -> Vec<f64> {
    r.values().iter().map(|v| (-v.norm_sqr()).ln_1p()).collect()
}

pub(crate) fn check_reflection(r: &SampledFn) -> Result<f64> {
    let (k, rho) = r.argmax_abs();
    if rho >= 1.0 {
        return Err(NlsError::ReflectionBound { rho, z: r.grid().point(k) });
    }
    Ok(rho)
}

/// Fails unless `r` has decayed at the left end of its grid.
pub(crate) fn check_left_decay(r: &SampledFn) -> Result<()> {
    let magnitude = r.values()[0].norm();
    let threshold = DEFAULT_DECAY_TOL * r.max_abs();
    if magnitude > threshold {
        return Err(NlsError::EndpointDecay { magnitude, threshold });
    }
    Ok(())
}

/// `δ` for a fixed reflection coefficient and stationary point.
#[derive(Debug, Clone)]
pub struct DeltaFunction {
    z0: f64,
    rho: f64,
    nodes: Vec<f64>,
    phi: Vec<f64>,
}

impl DeltaFunction {
    pub fn new(r: &SampledFn, z0: f64) -> Result<Self> {
        if !z0.is_finite() {
            return Err(NlsError::Domain(format!("stationary point {z0} is not finite")));
        }
        let rho = check_reflection(r)?;
        let grid = *r.grid();
        let phi_samples = log_gap(r);
        let mut nodes = Vec::new();
        let mut phi = Vec::new();
        if grid.min < z0 {
            check_left_decay(r)?;
            for (k, &p) in phi_samples.iter().enumerate() {
                let s = grid.point(k);
                if s < z0 - 1e-9 * grid.step {
                    nodes.push(s);
                    phi.push(p);
                }
            }
            nodes.push(z0);
            phi.push(cubic_at_real(&grid, &phi_samples, z0));
        }
        Ok(Self { z0, rho, nodes, phi })
    }

    pub fn z0(&self) -> f64 {
        self.z0
    }

    /// `sup|r|`
    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Value of the linear piece on segment `i` continued to `z`.
    fn piece(&self, i: usize, z: C64) -> C64 {
        let (a, b) = (self.nodes[i], self.nodes[i + 1]);
        let slope = (self.phi[i + 1] - self.phi[i]) / (b - a);
        self.phi[i] + slope * (z - a)
    }

    /// `∫ φ̃(s)/(s − z) ds` with `log(s − z)` supplied per node.
    fn cauchy_sum(&self, z: C64, log_at: impl Fn(f64) -> Option<C64>) -> C64 {
        let m = self.nodes.len();
        if m < 2 {
            return C64::new(0.0, 0.0);
        }
        let mut acc = C64::new(0.0, 0.0);
        let mut prev = C64::new(0.0, 0.0);
        for i in 0..m {
            let next = if i + 1 < m { self.piece(i, z) } else { C64::new(0.0, 0.0) };
            if let Some(l) = log_at(self.nodes[i]) {
                acc += (prev - next) * l;
            }
            prev = next;
        }
        acc + (self.phi[m - 1] - self.phi[0])
    }

    fn exponent(&self, z: C64, side: DeltaSide) -> Result<C64> {
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(NlsError::Domain(format!("evaluation point {z} is not finite")));
        }
        let on_line = z.im == 0.0;
        if !on_line && side != DeltaSide::Off {
            return Err(NlsError::Domain(format!("boundary value requested off the real line at {z}")));
        }
        let x = z.re;
        let has_cut = self.nodes.len() >= 2;
        if on_line && has_cut && x == self.z0 {
            return Err(NlsError::Domain(format!("δ is singular at the stationary point {x}")));
        }
        if on_line && side == DeltaSide::Off && has_cut && x < self.z0 && x > self.nodes[0] {
            return Err(NlsError::Domain(format!("z = {x} lies on the cut; request a boundary value")));
        }
        let integral = if on_line {
            // log(s − x ∓ i0) = log|s − x| ∓ iπ for s < x.
            let below = match side {
                DeltaSide::Minus => PI,
                _ => -PI,
            };
            self.cauchy_sum(z, |s| {
                let d = s - x;
                if d == 0.0 {
                    None
                } else if d > 0.0 {
                    Some(C64::new(d.ln(), 0.0))
                } else {
                    Some(C64::new((-d).ln(), below))
                }
            })
        } else {
            self.cauchy_sum(z, |s| Some((C64::new(s, 0.0) - z).ln()))
        };
        Ok(integral / C64::new(0.0, 2.0 * PI))
    }

    pub fn eval(&self, z: C64, side: DeltaSide) -> Result<DeltaEval> {
        let value = self.exponent(z, side)?.exp();
        Ok(DeltaEval { z, value, side })
    }

    /// `Δ = δ₊δ₋` on the real line (`δ²` right of `z₀`).
    pub fn product(&self, x: f64) -> Result<C64> {
        let z = C64::new(x, 0.0);
        Ok((self.exponent(z, DeltaSide::Plus)? + self.exponent(z, DeltaSide::Minus)?).exp())
    }
}

/// One-off evaluation of `δ`.
pub fn delta(r: &SampledFn, z0: f64, z: C64, side: DeltaSide) -> Result<DeltaEval> {
    DeltaFunction::new(r, z0)?.eval(z, side)
}
