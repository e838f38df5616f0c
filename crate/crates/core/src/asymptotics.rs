//! Leading-order long-time behaviour `q ~ t^{-1/2} α(z₀) e^{ix²/(4t) − iν(z₀) log 2t}`
//! and the oscillatory-integral probe.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::delta::{check_left_decay, check_reflection, log_gap, DeltaFunction};
use crate::error::{NlsError, Result};
use crate::gamma::arg_gamma_imaginary;
use crate::grid::{SampledFn, UniformGrid, C64, DEFAULT_DECAY_TOL};
use crate::interp::{cubic_at, cubic_at_real};
use crate::quadrature::{gauss_legendre_8, integrate};

/// `z₀ = x/(2t)`.
pub fn stationary_point(x: f64, t: f64) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() || !x.is_finite() {
        return Err(NlsError::Domain(format!("stationary point needs finite x and t > 0, got x = {x}, t = {t}")));
    }
    Ok(x / (2.0 * t))
}

fn reflection_at(r: &SampledFn, z0: f64) -> Result<C64> {
    let v = cubic_at(r.grid(), r.values(), z0);
    if v.norm() >= 1.0 {
        return Err(NlsError::ReflectionBound { rho: v.norm(), z: z0 });
    }
    Ok(v)
}

fn nu_of(r0: C64) -> f64 {
    -(-r0.norm_sqr()).ln_1p() / (2.0 * PI)
}

/// `ν(z₀) = −(1/2π) log(1 − |r(z₀)|²)` with `r` interpolated by cubics.
pub fn nu(r: &SampledFn, z0: f64) -> Result<f64> {
    Ok(nu_of(reflection_at(r, z0)?))
}

/// The three summands of `arg α`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArgBreakdown {
    /// `(1/π)∫_{−∞}^{z₀} log(z₀ − s) d log(1 − |r(s)|²)`
    pub integral: f64,
    /// `π/4 + arg Γ(iν)`
    pub gamma: f64,
    /// `arg r(z₀)`
    pub reflection: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticParams {
    pub z0: f64,
    pub nu: f64,
    pub alpha: C64,
    pub arg_breakdown: ArgBreakdown,
}

/// `∫_{−∞}^{z₀} log(z₀ − s) dφ(s)` for `φ = log(1 − |r|²)`, as
/// `∫_{−∞}^{z₀−1} φ/(z₀ − s) ds + ∫_{z₀−1}^{z₀} (φ(s) − φ(z₀))/(z₀ − s) ds`.
pub fn log_weighted_integral(r: &SampledFn, z0: f64) -> Result<f64> {
    let grid = *r.grid();
    if grid.min >= z0 {
        return Ok(0.0);
    }
    check_left_decay(r)?;
    let phi = log_gap(r);
    let phi_at = |s: f64| cubic_at_real(&grid, &phi, s);
    let phi0 = phi_at(z0);
    let (lo, _) = grid.extent();
    let split = z0 - 1.0;

    // Far part, one panel per grid cell.
    let mut far = 0.0;
    if lo < split {
        let cells = ((split - lo) / grid.step).ceil().max(1.0) as usize;
        let h = (split - lo) / cells as f64;
        for c in 0..cells {
            let a = lo + c as f64 * h;
            far += integrate(a, a + h, |s| phi_at(s) / (z0 - s));
        }
    }
    // Near part, subtracted integrand is smooth up to z₀.
    let start = split.max(lo);
    let cells = ((z0 - start) / grid.step).ceil().max(1.0) as usize;
    let h = (z0 - start) / cells as f64;
    let mut near = 0.0;
    for c in 0..cells {
        let a = start + c as f64 * h;
        near += integrate(a, a + h, |s| (phi_at(s) - phi0) / (z0 - s));
    }
    // Boundary term at the left grid end, where φ ≈ 0.
    if start > split {
        near += phi0 * (z0 - start).ln();
    }
    Ok(far + near)
}

pub fn asymptotic_params(r: &SampledFn, z0: f64) -> Result<AsymptoticParams> {
    if !z0.is_finite() {
        return Err(NlsError::Domain(format!("stationary point {z0} is not finite")));
    }
    let r0 = reflection_at(r, z0)?;
    let nu = nu_of(r0);
    if nu == 0.0 {
        let arg_breakdown = ArgBreakdown { integral: 0.0, gamma: 0.0, reflection: 0.0 };
        return Ok(AsymptoticParams { z0, nu, alpha: C64::new(0.0, 0.0), arg_breakdown });
    }
    let integral = log_weighted_integral(r, z0)? / PI;
    let gamma = 0.25 * PI + arg_gamma_imaginary(nu);
    let reflection = r0.arg();
    let alpha = C64::from_polar((nu / 2.0).sqrt(), integral + gamma + reflection);
    Ok(AsymptoticParams { z0, nu, alpha, arg_breakdown: ArgBreakdown { integral, gamma, reflection } })
}

pub fn alpha(r: &SampledFn, z0: f64) -> Result<C64> {
    Ok(asymptotic_params(r, z0)?.alpha)
}

/// `t^{-1/2} α(z₀) e^{ix²/(4t) − iν(z₀) log 2t}` with `z₀ = x/(2t)`.
pub fn q_asymptotic(r: &SampledFn, x: f64, t: f64) -> Result<C64> {
    let z0 = stationary_point(x, t)?;
    let p = asymptotic_params(r, z0)?;
    let phase = x * x / (4.0 * t) - p.nu * (2.0 * t).ln();
    Ok(p.alpha * C64::from_polar(t.powf(-0.5), phase))
}

/// [`q_asymptotic`] at every point of `xgrid`.
pub fn q_asymptotic_on(r: &SampledFn, xgrid: &UniformGrid, t: f64) -> Result<SampledFn> {
    check_reflection(r)?;
    let vals = (0..xgrid.n)
        .into_par_iter()
        .map(|k| q_asymptotic(r, xgrid.point(k), t))
        .collect::<Result<Vec<_>>>()?;
    SampledFn::new(*xgrid, vals)
}

/// Cubic through four equally spaced samples at offsets −1, 0, 1, 2, evaluated at `u`.
fn cubic4(p: [C64; 4], u: f64) -> C64 {
    let w0 = -u * (u - 1.0) * (u - 2.0) / 6.0;
    let w1 = (u + 1.0) * (u - 1.0) * (u - 2.0) / 2.0;
    let w2 = -(u + 1.0) * u * (u - 2.0) / 2.0;
    let w3 = (u + 1.0) * u * (u - 1.0) / 6.0;
    p[0] * w0 + p[1] * w1 + p[2] * w2 + p[3] * w3
}

/// `∫_a^b g(z) e^{−i s t z²} dz` with Gauss–Legendre panels of at most one
/// radian of chirp phase.
fn chirp_integral(a: f64, b: f64, t: f64, sign: f64, mut g: impl FnMut(f64) -> C64) -> C64 {
    let span = (t * (b * b - a * a)).abs() + t * (b - a) * (b - a);
    let panels = span.ceil().max(1.0) as usize;
    let h = (b - a) / panels as f64;
    let mut acc = C64::new(0.0, 0.0);
    for p in 0..panels {
        let lo = a + p as f64 * h;
        for (z, w) in gauss_legendre_8(lo, lo + h) {
            acc += g(z) * C64::from_polar(w, -sign * t * z * z);
        }
    }
    acc
}

/// `∫ f Δ^{±1} e^{∓itz²} dz` with `Δ = δ₊δ₋` for the stationary point `z₀ = 0`.
///
/// Nodes form a uniform grid through 0 with the spacing of `f`'s grid; the
/// product `fΔ^{±1}` is interpolated by local cubics on each cell, and the
/// two cells touching 0, where `Δ` has a logarithmic phase singularity, are
/// refined geometrically towards 0 with `Δ` evaluated directly.
pub fn oscillatory_decay_probe(f: &SampledFn, r: &SampledFn, t: f64, sign: i32) -> Result<C64> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(NlsError::Domain(format!("probe time must be positive, got {t}")));
    }
    if sign != 1 && sign != -1 {
        return Err(NlsError::Domain(format!("sign must be ±1, got {sign}")));
    }
    f.check_endpoint_decay(DEFAULT_DECAY_TOL)?;
    if f.max_abs() == 0.0 {
        return Ok(C64::new(0.0, 0.0));
    }
    let delta = DeltaFunction::new(r, 0.0)?;
    let s = sign as f64;
    let h = f.grid().step;
    let (lo, hi) = f.grid().extent();
    let half = (lo.abs().max(hi.abs()) / h).ceil() as i64;
    let power = |x: f64| -> Result<C64> {
        let d = delta.product(x)?;
        Ok(if sign == 1 { d } else { d.inv() })
    };

    // g at nodes k·h, k ≠ 0.
    let ks: Vec<i64> = (-half..=half).filter(|&k| k != 0).collect();
    let values: Vec<C64> = ks
        .par_iter()
        .map(|&k| {
            let x = k as f64 * h;
            Ok(f.interpolate(x) * power(x)?)
        })
        .collect::<Result<_>>()?;
    let g_at = |k: i64| -> C64 {
        let idx = if k < 0 { k + half } else { k + half - 1 };
        values[idx as usize]
    };

    // Cells whose stencil is below round-off of the peak contribute nothing measurable.
    let negligible = 1e-17 * values.iter().fold(0.0f64, |m, v| m.max(v.norm()));
    let total: C64 = (-half..half)
        .into_par_iter()
        .filter(|&k| k != -1 && k != 0)
        .map(|k| {
            // Cell [k, k+1]: four-point stencil on the same side of 0, inside the node range.
            let (first, last) = if k > 0 { (1, half) } else { (-half, -1) };
            let start = (k - 1).clamp(first, last - 3);
            let p = [g_at(start), g_at(start + 1), g_at(start + 2), g_at(start + 3)];
            if p.iter().all(|v| v.norm() <= negligible) {
                return C64::new(0.0, 0.0);
            }
            let a = k as f64 * h;
            let offset = (k - start - 1) as f64;
            chirp_integral(a, a + h, t, s, |z| cubic4(p, (z - a) / h + offset))
        })
        .sum();

    // Cells touching 0, split into [h 2^{−j−1}, h 2^{−j}] on each side.
    let mut near = C64::new(0.0, 0.0);
    for j in 0..48 {
        let (b, a) = (h * 0.5f64.powi(j), h * 0.5f64.powi(j + 1));
        for side in [1.0, -1.0] {
            let (x0, x1) = if side > 0.0 { (a, b) } else { (-b, -a) };
            let mut err = None;
            let v = chirp_integral(x0, x1, t, s, |z| match power(z) {
                Ok(d) => f.interpolate(z) * d,
                Err(e) => {
                    err = Some(e);
                    C64::new(0.0, 0.0)
                }
            });
            if let Some(e) = err {
                return Err(e);
            }
            near += v;
        }
    }
    Ok(total + near)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zgrid() -> UniformGrid {
        UniformGrid::symmetric(20.0, 4096).unwrap()
    }

    #[test]
    fn stationary_points() {
        assert_eq!(stationary_point(0.0, 5.0).unwrap(), 0.0);
        assert_eq!(stationary_point(4.0, 1.0).unwrap(), 2.0);
        assert_eq!(stationary_point(-6.0, 3.0).unwrap(), -1.0);
        assert!(stationary_point(1.0, 0.0).is_err());
        assert!(stationary_point(1.0, -2.0).is_err());
    }

    #[test]
    fn nu_values() {
        let g = UniformGrid::new(-1.0, 1.0, 3).unwrap();
        let zero = SampledFn::zeros(g);
        assert_eq!(nu(&zero, 0.0).unwrap(), 0.0);
        let m = (1.0 - (-2.0 * PI).exp()).sqrt();
        let r = SampledFn::from_real_fn(g, |_| m).unwrap();
        assert!((nu(&r, 0.2).unwrap() - 1.0).abs() < 1e-12);
        let half = SampledFn::from_real_fn(g, |_| 0.5).unwrap();
        // −ln(0.75)/(2π), evaluated independently.
        assert!((nu(&half, 0.0).unwrap() - 0.045_786_023_869_621_7).abs() < 1e-15);
        let bad = SampledFn::from_real_fn(g, |_| 1.0).unwrap();
        assert!(nu(&bad, 0.0).is_err());
    }

    #[test]
    fn alpha_modulus_and_zero() {
        let g = zgrid();
        assert_eq!(alpha(&SampledFn::zeros(g), 0.3).unwrap(), C64::new(0.0, 0.0));
        let r = SampledFn::from_fn(g, |z| C64::from_polar(0.7 * (-z * z).exp(), z)).unwrap();
        for z0 in [-1.0, 0.0, 0.4] {
            let p = asymptotic_params(&r, z0).unwrap();
            assert!((p.alpha.norm_sqr() - p.nu / 2.0).abs() < 1e-15);
        }
    }

    /// `∫_{−∞}^0 log(−s) φ′(s) ds` for `r = 0.5 e^{−s²}` by the substitution
    /// `s = −u²` and a 10⁶-interval composite Simpson rule on `[0, 4]`.
    fn simpson_oracle() -> f64 {
        let integrand = |u: f64| {
            if u == 0.0 {
                return 0.0;
            }
            let e = (-2.0 * u.powi(4)).exp();
            -4.0 * u.powi(3) * u.ln() * e / (1.0 - 0.25 * e)
        };
        let n = 1_000_000;
        let h = 4.0 / n as f64;
        let mut acc = integrand(0.0) + integrand(4.0);
        for k in 1..n {
            acc += integrand(k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
        }
        acc * h / 3.0
    }

    #[test]
    fn log_weighted_integral_matches_quadrature_oracle() {
        let r = SampledFn::from_real_fn(zgrid(), |z| 0.5 * (-z * z).exp()).unwrap();
        let got = log_weighted_integral(&r, 0.0).unwrap();
        let expect = simpson_oracle();
        assert!((got - expect).abs() < 1e-6, "{got} vs {expect}");
    }

    #[test]
    fn asymptotic_modulus() {
        let r = SampledFn::from_fn(zgrid(), |z| C64::from_polar(0.4 * (-z * z / 2.0).exp(), -z)).unwrap();
        for (x, t) in [(0.0, 10.0), (3.0, 7.0), (-20.0, 100.0)] {
            let q = q_asymptotic(&r, x, t).unwrap();
            let n = nu(&r, x / (2.0 * t)).unwrap();
            assert!((q.norm() - (n / 2.0).sqrt() / t.sqrt()).abs() < 1e-14);
        }
        assert_eq!(q_asymptotic(&SampledFn::zeros(zgrid()), 1.0, 2.0).unwrap(), C64::new(0.0, 0.0));
    }

    #[test]
    fn probe_without_reflection_is_a_fresnel_gaussian() {
        let g = UniformGrid::symmetric(10.0, 4096).unwrap();
        let f = SampledFn::from_real_fn(g, |z| (-z * z).exp()).unwrap();
        let zero = SampledFn::zeros(g);
        for t in [0.5, 3.0, 40.0] {
            for sign in [1, -1] {
                let got = oscillatory_decay_probe(&f, &zero, t, sign).unwrap();
                let expect = (C64::new(PI, 0.0) / C64::new(1.0, sign as f64 * t)).sqrt();
                assert!((got - expect).norm() < 1e-8, "t = {t}: {got} vs {expect}");
            }
        }
        assert_eq!(oscillatory_decay_probe(&zero, &zero, 5.0, 1).unwrap(), C64::new(0.0, 0.0));
    }

    #[test]
    fn delta_product_is_unimodular() {
        let r = SampledFn::from_real_fn(zgrid(), |z| 0.6 * (-z * z).exp()).unwrap();
        let d = DeltaFunction::new(&r, 0.0).unwrap();
        for x in [-3.0, -0.5, -1e-9, 1e-9, 0.7, 5.0] {
            assert!((d.product(x).unwrap().norm() - 1.0).abs() < 1e-8);
        }
    }
}
