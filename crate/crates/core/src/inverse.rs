//! Time-dependent jump data, the singular integral equation
//! `(1 − C_w)μ = I`, and reconstruction of `q(x, t)` from `μ`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{NlsError, Result};
use crate::grid::{Mat2, SampledFn, SampledMatrixFn, UniformGrid, C64};
use crate::pauli::PauliOps;
use crate::spectral::{CauchyProjector, Side};

/// Default relative tolerance on `‖(1 − C_w)μ − I‖`.
pub const DEFAULT_MU_TOL: f64 = 1e-10;
/// Above this `sup|r|` the automatic solver switches to GMRES.
pub const KRYLOV_THRESHOLD: f64 = 0.7;

fn check_time(t: f64) -> Result<()> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(NlsError::Domain(format!("time must be finite and non-negative, got {t}")))
    }
}

fn check_subunitary(r: &SampledFn) -> Result<f64> {
    let (k, rho) = r.argmax_abs();
    if rho >= 1.0 {
        return Err(NlsError::ReflectionBound { rho, z: r.grid().point(k) });
    }
    Ok(rho)
}

/// `r(z, t) = e^{−iz²t} r(z)`.
pub fn evolve_reflection(r0: &SampledFn, t: f64) -> Result<SampledFn> {
    check_time(t)?;
    r0.map(|z, r| r * C64::from_polar(1.0, -z * z * t))
}

/// Jump factors `w⁻ = [[0, r e^{iθ}], [0, 0]]`, `w⁺ = [[0, 0], [−r̄ e^{−iθ}, 0]]`
/// with `θ = xz − tz²`.
#[derive(Debug, Clone)]
pub struct JumpData {
    pub r: SampledFn,
    pub x: f64,
    pub t: f64,
    pub theta: SampledFn,
    pub w_minus: SampledMatrixFn,
    pub w_plus: SampledMatrixFn,
    rho: f64,
}

pub fn build_jump(r: &SampledFn, x: f64, t: f64) -> Result<JumpData> {
    check_time(t)?;
    if !x.is_finite() {
        return Err(NlsError::Domain(format!("position {x} is not finite")));
    }
    let rho = check_subunitary(r)?;
    let grid = *r.grid();
    let theta = SampledFn::from_real_fn(grid, |z| x * z - t * z * z)?;
    let zero = vec![C64::new(0.0, 0.0); grid.n];
    let w12: Vec<C64> = r.values().iter().zip(theta.values()).map(|(r, th)| r * C64::from_polar(1.0, th.re)).collect();
    let w21: Vec<C64> = w12.iter().map(|w| -w.conj()).collect();
    let w_minus = SampledMatrixFn::from_channels(grid, [zero.clone(), w12, zero.clone(), zero.clone()])?;
    let w_plus = SampledMatrixFn::from_channels(grid, [zero.clone(), zero.clone(), w21, zero])?;
    Ok(JumpData { r: r.clone(), x, t, theta, w_minus, w_plus, rho })
}

impl JumpData {
    pub fn grid(&self) -> &UniformGrid {
        self.r.grid()
    }

    /// `sup|r|`
    pub fn rho(&self) -> f64 {
        self.rho
    }

    fn w12(&self) -> &[C64] {
        self.w_minus.channel(0, 1)
    }

    fn w21(&self) -> &[C64] {
        self.w_plus.channel(1, 0)
    }

    /// `v = (I − w⁻)⁻¹(I + w⁺)` at grid point `k`.
    pub fn jump_at(&self, k: usize) -> Mat2 {
        let one = C64::new(1.0, 0.0);
        let (a, b) = (self.w12()[k], self.w21()[k]);
        Mat2::new(one + a * b, a, b, one)
    }
}

/// `C_w` on the four flattened channels of a matrix function.
struct SingularOperator<'a> {
    proj: CauchyProjector,
    w12: &'a [C64],
    w21: &'a [C64],
    n: usize,
}

impl<'a> SingularOperator<'a> {
    fn new(jd: &'a JumpData) -> Result<Self> {
        let n = jd.grid().n;
        Ok(Self { proj: CauchyProjector::new(n)?, w12: jd.w12(), w21: jd.w21(), n })
    }

    /// Row `(u, v) ↦ (C⁻(v·w₂₁), C⁺(u·w₁₂))` for both rows.
    fn apply(&self, x: &[C64], out: &mut [C64]) {
        let n = self.n;
        for row in 0..2 {
            let (u, v) = (&x[2 * row * n..(2 * row + 1) * n], &x[(2 * row + 1) * n..(2 * row + 2) * n]);
            let (o1, o2) = out[2 * row * n..(2 * row + 2) * n].split_at_mut(n);
            for k in 0..n {
                o1[k] = v[k] * self.w21[k];
                o2[k] = u[k] * self.w12[k];
            }
            self.proj.apply_in_place(o1, Side::Minus);
            self.proj.apply_in_place(o2, Side::Plus);
        }
    }

    /// Adjoint `(a, b) ↦ (w̄₁₂·C⁺b, w̄₂₁·C⁻a)`.
    fn apply_adjoint(&self, x: &[C64], out: &mut [C64]) {
        let n = self.n;
        for row in 0..2 {
            let (a, b) = (&x[2 * row * n..(2 * row + 1) * n], &x[(2 * row + 1) * n..(2 * row + 2) * n]);
            let mut cb = b.to_vec();
            let mut ca = a.to_vec();
            self.proj.apply_in_place(&mut cb, Side::Plus);
            self.proj.apply_in_place(&mut ca, Side::Minus);
            let (o1, o2) = out[2 * row * n..(2 * row + 2) * n].split_at_mut(n);
            for k in 0..n {
                o1[k] = self.w12[k].conj() * cb[k];
                o2[k] = self.w21[k].conj() * ca[k];
            }
        }
    }
}

fn flatten(h: &SampledMatrixFn) -> Vec<C64> {
    h.channels().iter().flatten().copied().collect()
}

fn unflatten(grid: UniformGrid, x: Vec<C64>) -> Result<SampledMatrixFn> {
    let n = grid.n;
    let mut it = x.chunks(n).map(|c| c.to_vec());
    let channels = [0; 4].map(|_| it.next().expect("four channels"));
    SampledMatrixFn::from_channels(grid, channels)
}

fn norm(x: &[C64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

fn identity_flat(n: usize) -> Vec<C64> {
    let mut x = vec![C64::new(0.0, 0.0); 4 * n];
    x[..n].iter_mut().for_each(|v| *v = C64::new(1.0, 0.0));
    x[3 * n..].iter_mut().for_each(|v| *v = C64::new(1.0, 0.0));
    x
}

/// `C_w h = C⁺(h·w⁻) + C⁻(h·w⁺)`.
pub fn apply_cw(h: &SampledMatrixFn, jd: &JumpData) -> Result<SampledMatrixFn> {
    if !h.grid().same_as(jd.grid()) {
        return Err(NlsError::GridMismatch("matrix function and jump data grids differ".into()));
    }
    let op = SingularOperator::new(jd)?;
    let x = flatten(h);
    let mut out = vec![C64::new(0.0, 0.0); x.len()];
    op.apply(&x, &mut out);
    unflatten(*h.grid(), out)
}

/// Power-iteration estimate of `‖C_w‖` on `L²`.
pub fn cw_norm_estimate(jd: &JumpData, iterations: usize, seed: u64) -> Result<f64> {
    let op = SingularOperator::new(jd)?;
    let len = 4 * jd.grid().n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x: Vec<C64> = (0..len).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let mut y = vec![C64::new(0.0, 0.0); len];
    let mut estimate = 0.0;
    for _ in 0..iterations {
        let nx = norm(&x);
        if nx == 0.0 {
            return Ok(0.0);
        }
        x.iter_mut().for_each(|v| *v /= nx);
        op.apply(&x, &mut y);
        estimate = norm(&y);
        op.apply_adjoint(&y, &mut x);
    }
    Ok(estimate)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverMethod {
    /// Neumann series up to `sup|r| = 0.7`, GMRES above.
    Auto,
    Neumann,
    Krylov,
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub method: SolverMethod,
    pub restart: usize,
    pub boundary_values: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol: DEFAULT_MU_TOL, max_iter: 2000, method: SolverMethod::Auto, restart: 50, boundary_values: false }
    }
}

/// Solution of `(1 − C_w)μ = I`.
#[derive(Debug, Clone)]
pub struct MuSolution {
    pub mu: SampledMatrixFn,
    /// `‖(1 − C_w)μ − I‖₂ / ‖C_w I‖₂`
    pub residual: f64,
    pub iterations: usize,
    /// Successive residual ratios.
    pub ratios: Vec<f64>,
    pub method: SolverMethod,
    pub m_plus: Option<SampledMatrixFn>,
    pub m_minus: Option<SampledMatrixFn>,
}

pub fn solve_mu(jd: &JumpData, opts: &SolverOptions) -> Result<MuSolution> {
    if !(opts.tol > 0.0) {
        return Err(NlsError::Domain(format!("tolerance must be positive, got {}", opts.tol)));
    }
    if jd.rho >= 1.0 {
        return Err(NlsError::ReflectionBound { rho: jd.rho, z: f64::NAN });
    }
    let grid = *jd.grid();
    let n = grid.n;
    let op = SingularOperator::new(jd)?;
    let identity = identity_flat(n);
    let mut rhs = vec![C64::new(0.0, 0.0); 4 * n];
    op.apply(&identity, &mut rhs);
    let scale = norm(&rhs);

    let method = match opts.method {
        SolverMethod::Auto if jd.rho > KRYLOV_THRESHOLD => SolverMethod::Krylov,
        SolverMethod::Auto => SolverMethod::Neumann,
        m => m,
    };

    let (nu, iterations, ratios) = if scale == 0.0 {
        (vec![C64::new(0.0, 0.0); 4 * n], 1, Vec::new())
    } else {
        match method {
            SolverMethod::Krylov => gmres(&op, &rhs, opts.tol * scale, opts.restart.max(1), opts.max_iter)?,
            _ => neumann(&op, &rhs, opts.tol * scale, opts.max_iter)?,
        }
    };

    // True residual of (1 − C_w)ν = C_w I.
    let mut cw_nu = vec![C64::new(0.0, 0.0); 4 * n];
    op.apply(&nu, &mut cw_nu);
    let res: Vec<C64> = nu.iter().zip(&cw_nu).zip(&rhs).map(|((v, c), b)| v - c - b).collect();
    let residual = if scale == 0.0 { 0.0 } else { norm(&res) / scale };

    let mu_flat: Vec<C64> = nu.iter().zip(&identity).map(|(v, i)| v + i).collect();
    let mu = unflatten(grid, mu_flat)?;
    let (m_plus, m_minus) = if opts.boundary_values {
        let (p, m) = boundary_values(&mu, jd)?;
        (Some(p), Some(m))
    } else {
        (None, None)
    };
    Ok(MuSolution { mu, residual, iterations, ratios, method, m_plus, m_minus })
}

fn neumann(op: &SingularOperator, rhs: &[C64], tol: f64, max_iter: usize) -> Result<(Vec<C64>, usize, Vec<f64>)> {
    // ν_{k+1} = C_w I + C_w ν_k, residual ‖ν_{k+1} − ν_k‖.
    let mut nu = rhs.to_vec();
    let mut next = vec![C64::new(0.0, 0.0); rhs.len()];
    let mut ratios = Vec::new();
    let mut last = norm(rhs);
    for it in 1..=max_iter {
        op.apply(&nu, &mut next);
        let mut diff = 0.0;
        for ((nx, b), v) in next.iter_mut().zip(rhs).zip(&nu) {
            *nx += b;
            diff += (*nx - v).norm_sqr();
        }
        let diff = diff.sqrt();
        std::mem::swap(&mut nu, &mut next);
        if last > 0.0 {
            ratios.push(diff / last);
        }
        last = diff;
        if diff <= tol {
            return Ok((nu, it, ratios));
        }
    }
    Err(NlsError::NoConvergence { iterations: max_iter, residual: last, ratios })
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Restarted GMRES for `(1 − C_w)ν = rhs`.
fn gmres(op: &SingularOperator, rhs: &[C64], tol: f64, restart: usize, max_iter: usize) -> Result<(Vec<C64>, usize, Vec<f64>)> {
    let len = rhs.len();
    let zero = C64::new(0.0, 0.0);
    let apply = |x: &[C64], out: &mut [C64]| {
        op.apply(x, out);
        for (o, v) in out.iter_mut().zip(x) {
            *o = v - *o;
        }
    };
    let mut x = vec![zero; len];
    let mut ratios = Vec::new();
    let mut total = 0;
    let mut last = norm(rhs);
    let mut tmp = vec![zero; len];

    while total < max_iter {
        apply(&x, &mut tmp);
        let r: Vec<C64> = rhs.iter().zip(&tmp).map(|(b, ax)| b - ax).collect();
        let beta = norm(&r);
        if beta <= tol {
            return Ok((x, total.max(1), ratios));
        }
        let mut basis: Vec<Vec<C64>> = vec![r.iter().map(|v| v / beta).collect()];
        let mut hess: Vec<Vec<C64>> = Vec::new();
        let mut rot: Vec<(f64, C64)> = Vec::new();
        let mut g = vec![C64::new(beta, 0.0)];
        let mut converged = false;

        for j in 0..restart {
            if total >= max_iter {
                break;
            }
            total += 1;
            let mut w = vec![zero; len];
            apply(&basis[j], &mut w);
            let mut col = vec![zero; j + 2];
            for (i, v) in basis.iter().enumerate() {
                let hij = dot(v, &w);
                col[i] = hij;
                w.iter_mut().zip(v).for_each(|(wk, vk)| *wk -= hij * vk);
            }
            let h_next = norm(&w);
            col[j + 1] = C64::new(h_next, 0.0);
            for (i, &(c, s)) in rot.iter().enumerate() {
                let (a, b) = (col[i], col[i + 1]);
                col[i] = c * a + s * b;
                col[i + 1] = -s.conj() * a + c * b;
            }
            let (a, b) = (col[j], col[j + 1]);
            let denom = (a.norm_sqr() + b.norm_sqr()).sqrt();
            let (c, s) = if a.norm() == 0.0 { (0.0, C64::new(1.0, 0.0)) } else { (a.norm() / denom, (a / a.norm()) * b.conj() / denom) };
            col[j] = c * a + s * b;
            col[j + 1] = zero;
            rot.push((c, s));
            let gj = g[j];
            g[j] = c * gj;
            g.push(-s.conj() * gj);
            hess.push(col);

            let res = g[j + 1].norm();
            ratios.push(res / last);
            last = res;
            if res <= tol || h_next == 0.0 {
                converged = true;
                break;
            }
            basis.push(w.iter().map(|v| v / h_next).collect());
        }

        // Back substitution on the triangular factor.
        let m = hess.len();
        let mut y = vec![zero; m];
        for i in (0..m).rev() {
            let mut s = g[i];
            for k in i + 1..m {
                s -= hess[k][i] * y[k];
            }
            y[i] = s / hess[i][i];
        }
        for (yi, v) in y.iter().zip(&basis) {
            x.iter_mut().zip(v).for_each(|(xk, vk)| *xk += yi * vk);
        }
        if converged {
            apply(&x, &mut tmp);
            let true_res = norm(&rhs.iter().zip(&tmp).map(|(b, ax)| b - ax).collect::<Vec<_>>());
            if true_res <= tol {
                return Ok((x, total, ratios));
            }
            last = true_res;
        }
    }
    Err(NlsError::NoConvergence { iterations: total, residual: last, ratios })
}

/// `m± = I + C±(μ(w⁺ + w⁻))`.
pub fn boundary_values(mu: &SampledMatrixFn, jd: &JumpData) -> Result<(SampledMatrixFn, SampledMatrixFn)> {
    let grid = *jd.grid();
    let n = grid.n;
    let proj = CauchyProjector::new(n)?;
    let (w12, w21) = (jd.w12(), jd.w21());
    // μ(w⁺ + w⁻) = [[μ₁₂w₂₁, μ₁₁w₁₂], [μ₂₂w₂₁, μ₂₁w₁₂]]
    let prod = [
        (0..n).map(|k| mu.channel(0, 1)[k] * w21[k]).collect::<Vec<_>>(),
        (0..n).map(|k| mu.channel(0, 0)[k] * w12[k]).collect(),
        (0..n).map(|k| mu.channel(1, 1)[k] * w21[k]).collect(),
        (0..n).map(|k| mu.channel(1, 0)[k] * w12[k]).collect(),
    ];
    let build = |side: Side| {
        let mut chans = prod.clone();
        for (c, ch) in chans.iter_mut().enumerate() {
            proj.apply_in_place(ch, side);
            if c == 0 || c == 3 {
                ch.iter_mut().for_each(|v| *v += 1.0);
            }
        }
        SampledMatrixFn::from_channels(grid, chans)
    };
    Ok((build(Side::Plus)?, build(Side::Minus)?))
}

/// Reconstructed `q(x, t)` at the requested positions.
#[derive(Debug, Clone)]
pub struct ReconstructionResult {
    pub t: f64,
    pub xs: Vec<f64>,
    pub q: Vec<C64>,
    /// Residue `m₁` at each `x`.
    pub m1: Vec<Mat2>,
    /// `Q = (ad σ/2π)∫μ(w⁺ + w⁻)dz` at each `x`.
    pub q_matrix: Vec<Mat2>,
    pub iterations: Vec<usize>,
}

impl ReconstructionResult {
    /// The samples as a function on a uniform grid, when `xs` is one.
    pub fn as_sampled(&self) -> Option<SampledFn> {
        let grid = uniform_grid_of(&self.xs)?;
        SampledFn::new(grid, self.q.clone()).ok()
    }
}

pub(crate) fn uniform_grid_of(xs: &[f64]) -> Option<UniformGrid> {
    if xs.len() < 2 {
        return None;
    }
    let step = (xs[xs.len() - 1] - xs[0]) / (xs.len() - 1) as f64;
    let grid = UniformGrid::new(xs[0], step, xs.len()).ok()?;
    xs.iter()
        .enumerate()
        .all(|(k, &x)| (x - grid.point(k)).abs() <= 1e-9 * step)
        .then_some(grid)
}

fn reconstruct_at(r: &SampledFn, x: f64, t: f64, opts: &SolverOptions) -> Result<(C64, Mat2, Mat2, usize)> {
    let jd = build_jump(r, x, t)?;
    let sol = solve_mu(&jd, &SolverOptions { boundary_values: false, ..*opts })?;
    let mu = &sol.mu;
    let (w12, w21) = (jd.w12(), jd.w21());
    let dz = jd.grid().step;
    let mut integral = Mat2::ZERO;
    for k in 0..jd.grid().n {
        let m = mu.at(k);
        integral += Mat2::new(m.get(0, 1) * w21[k], m.get(0, 0) * w12[k], m.get(1, 1) * w21[k], m.get(1, 0) * w12[k]);
    }
    integral = integral.scale(C64::new(dz, 0.0));
    let m1 = integral.scale(-1.0 / C64::new(0.0, 2.0 * PI));
    let q_matrix = PauliOps::ad_sigma(&integral).scale(C64::new(1.0 / (2.0 * PI), 0.0));
    let q_residue = C64::new(0.0, -1.0) * m1.get(0, 1);
    let discrepancy = (q_residue - q_matrix.get(0, 1)).norm();
    if discrepancy > 1e-12 * (1.0 + q_residue.norm()) {
        return Err(NlsError::Domain(format!("residue and commutator routes disagree by {discrepancy:.3e} at x = {x}")));
    }
    Ok((q_residue, m1, q_matrix, sol.iterations))
}

/// `q(x, t) = −i(m₁)₁₂` for each `x` in `xs`, solved independently in parallel.
pub fn reconstruct_potential(r: &SampledFn, xs: &[f64], t: f64, opts: &SolverOptions) -> Result<ReconstructionResult> {
    check_time(t)?;
    check_subunitary(r)?;
    let rows: Vec<_> = xs.par_iter().map(|&x| reconstruct_at(r, x, t, opts)).collect::<Result<_>>()?;
    let mut out = ReconstructionResult { t, xs: xs.to_vec(), q: Vec::new(), m1: Vec::new(), q_matrix: Vec::new(), iterations: Vec::new() };
    for (q, m1, qm, it) in rows {
        out.q.push(q);
        out.m1.push(m1);
        out.q_matrix.push(qm);
        out.iterations.push(it);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zgrid(n: usize) -> UniformGrid {
        UniformGrid::symmetric(40.0, n).unwrap()
    }

    fn gaussian_r(grid: UniformGrid, rho: f64) -> SampledFn {
        SampledFn::from_fn(grid, |z| C64::from_polar(rho * (-z * z).exp(), 0.3 * z)).unwrap()
    }

    #[test]
    fn evolution_is_a_phase() {
        let g = zgrid(256);
        let r0 = gaussian_r(g, 0.5);
        assert_eq!(evolve_reflection(&r0, 0.0).unwrap(), r0);
        let rt = evolve_reflection(&r0, 3.7).unwrap();
        for (a, b) in rt.values().iter().zip(r0.values()) {
            assert!((a.norm() - b.norm()).abs() < 1e-15);
        }
        let g1 = UniformGrid::new(-1.0, 1.0, 3).unwrap();
        let r = SampledFn::from_real_fn(g1, |z| (-z * z).exp()).unwrap();
        let v = evolve_reflection(&r, 1.0).unwrap().values()[2];
        assert!((v - C64::from_polar((-1f64).exp(), -1.0)).norm() < 1e-15);
        assert!(evolve_reflection(&r, -1.0).is_err());
    }

    #[test]
    fn jump_structure() {
        let g = zgrid(512);
        let jd = build_jump(&gaussian_r(g, 0.5), 3.0, 7.0).unwrap();
        for k in 0..g.n {
            assert!((jd.jump_at(k).det() - C64::new(1.0, 0.0)).norm() < 1e-12);
        }
        let jd0 = build_jump(&gaussian_r(g, 0.5), 1.5, 0.0).unwrap();
        for k in 0..g.n {
            let z = g.point(k);
            let expect = jd0.r.values()[k] * C64::from_polar(1.0, 1.5 * z);
            assert!((jd0.w_minus.channel(0, 1)[k] - expect).norm() < 1e-15);
        }
        let jz = build_jump(&SampledFn::zeros(g), 1.0, 1.0).unwrap();
        assert_eq!(jz.w_minus.sup_norm() + jz.w_plus.sup_norm(), 0.0);
        assert!((0..g.n).all(|k| jz.jump_at(k) == Mat2::IDENTITY));
        let bad = SampledFn::from_real_fn(g, |_| 1.0).unwrap();
        assert!(matches!(build_jump(&bad, 0.0, 0.0), Err(NlsError::ReflectionBound { .. })));
    }

    /// `(2πi)^{-1} PV∫ f(s)/(s − z_k) ds ± f_k/2` by the staggered trapezoid
    /// rule (odd offsets only, step `2h`) with the periodized Cauchy kernel
    /// `(π/L)/sin(π(s − z)/L)`, `L = n·h`.
    fn staggered_cauchy(g: &UniformGrid, f: &[C64], plus: bool) -> Vec<C64> {
        let n = g.n;
        let period = g.period();
        (0..n)
            .map(|k| {
                let mut pv = C64::new(0.0, 0.0);
                for (m, v) in f.iter().enumerate() {
                    if (k as i64 - m as i64).rem_euclid(2) == 1 {
                        let u = g.point(m) - g.point(k);
                        pv += v * 2.0 * g.step * (PI / period) / (PI * u / period).sin();
                    }
                }
                let half = if plus { 0.5 } else { -0.5 };
                f[k] * half + pv / C64::new(0.0, 2.0 * PI)
            })
            .collect()
    }

    #[test]
    fn cw_of_identity_matches_staggered_quadrature() {
        let g = UniformGrid::symmetric(4.0, 8).unwrap();
        let jd = build_jump(&gaussian_r(g, 0.4), 0.5, 0.2).unwrap();
        let out = apply_cw(&SampledMatrixFn::constant(g, Mat2::IDENTITY), &jd).unwrap();
        let zero = vec![C64::new(0.0, 0.0); g.n];
        let expect = [
            zero.clone(),
            staggered_cauchy(&g, jd.w_minus.channel(0, 1), true),
            staggered_cauchy(&g, jd.w_plus.channel(1, 0), false),
            zero,
        ];
        for (got, want) in out.channels().iter().zip(&expect) {
            for (a, b) in got.iter().zip(want) {
                assert!((a - b).norm() < 1e-6);
            }
        }
    }

    #[test]
    fn zero_reflection_gives_identity() {
        let g = zgrid(256);
        let jd = build_jump(&SampledFn::zeros(g), 2.0, 1.0).unwrap();
        let sol = solve_mu(&jd, &SolverOptions { boundary_values: true, ..Default::default() }).unwrap();
        assert_eq!(sol.iterations, 1);
        assert!((0..g.n).all(|k| sol.mu.at(k) == Mat2::IDENTITY));
        assert_eq!(apply_cw(&sol.mu, &jd).unwrap().sup_norm(), 0.0);
        let rec = reconstruct_potential(&SampledFn::zeros(g), &[-1.0, 0.0, 4.0], 7.0, &SolverOptions::default()).unwrap();
        assert!(rec.q.iter().all(|q| q.norm() == 0.0));
    }

    #[test]
    fn neumann_ratios_bounded_by_rho() {
        let g = zgrid(2048);
        let jd = build_jump(&gaussian_r(g, 0.5), 0.7, 0.0).unwrap();
        let sol = solve_mu(&jd, &SolverOptions { method: SolverMethod::Neumann, ..Default::default() }).unwrap();
        assert!(sol.residual <= DEFAULT_MU_TOL);
        assert!(sol.ratios.iter().all(|&q| q <= 0.51), "{:?}", sol.ratios);
    }

    /// `(‖μ − I − C_w I‖₂, ‖C_w I‖₂)`
    fn neumann_remainder(rho: f64) -> (f64, f64) {
        let g = zgrid(2048);
        let jd = build_jump(&gaussian_r(g, rho), -0.4, 0.0).unwrap();
        let sol = solve_mu(&jd, &SolverOptions::default()).unwrap();
        let cw_i = apply_cw(&SampledMatrixFn::constant(g, Mat2::IDENTITY), &jd).unwrap();
        let mut rem = 0.0;
        for k in 0..g.n {
            rem += (sol.mu.at(k) - Mat2::IDENTITY - cw_i.at(k)).norm().powi(2);
        }
        ((rem * g.step).sqrt(), cw_i.l2_norm())
    }

    #[test]
    fn second_order_neumann_remainder() {
        // Σ_{k≥2} C_wᵏI is bounded by ρ‖C_w I‖/(1 − ρ) and scales like ρ².
        let rho = 0.01;
        let (rem, cw_i) = neumann_remainder(rho);
        assert!(rem <= rho * cw_i / (1.0 - rho));
        let (rem2, _) = neumann_remainder(2.0 * rho);
        assert!((rem2 / rem - 4.0).abs() < 0.1, "{}", rem2 / rem);
    }

    #[test]
    fn krylov_and_neumann_agree() {
        let g = zgrid(1024);
        let jd = build_jump(&gaussian_r(g, 0.8), 1.0, 0.5).unwrap();
        let a = solve_mu(&jd, &SolverOptions { method: SolverMethod::Neumann, ..Default::default() }).unwrap();
        let b = solve_mu(&jd, &SolverOptions::default()).unwrap();
        assert_eq!(b.method, SolverMethod::Krylov);
        assert!(b.residual <= DEFAULT_MU_TOL);
        assert!(b.iterations < a.iterations);
        for k in 0..g.n {
            assert!((a.mu.at(k) - b.mu.at(k)).max_abs() < 1e-8);
        }
    }

    fn det_defect(half_width: f64, n: usize) -> f64 {
        let g = UniformGrid::symmetric(half_width, n).unwrap();
        let jd = build_jump(&gaussian_r(g, 0.6), -1.0, 0.3).unwrap();
        let sol = solve_mu(&jd, &SolverOptions { boundary_values: true, ..Default::default() }).unwrap();
        let (mp, mm) = (sol.m_plus.unwrap(), sol.m_minus.unwrap());
        (0..g.n)
            .map(|k| (mp.at(k).det() - C64::new(1.0, 0.0)).norm().max((mm.at(k).det() - C64::new(1.0, 0.0)).norm()))
            .fold(0.0, f64::max)
    }

    #[test]
    fn unimodular_boundary_values() {
        // μ − I decays like 1/z, so truncating the line costs O(Z⁻²) in det m±.
        let (d40, d80) = (det_defect(40.0, 2048), det_defect(80.0, 4096));
        assert!(d40 / d80 > 3.5, "{d40} {d80}");
        assert!(det_defect(320.0, 16384) < 1e-6);
    }

    #[test]
    fn boundary_values_satisfy_jump() {
        let g = zgrid(2048);
        let jd = build_jump(&gaussian_r(g, 0.6), -1.0, 0.3).unwrap();
        let sol = solve_mu(&jd, &SolverOptions { boundary_values: true, ..Default::default() }).unwrap();
        let (mp, mm) = (sol.m_plus.unwrap(), sol.m_minus.unwrap());
        for k in 0..g.n {
            assert!((mp.at(k) - mm.at(k) * jd.jump_at(k)).max_abs() < 1e-8);
        }
    }

    #[test]
    fn budget_exhaustion_reports_history() {
        let g = zgrid(512);
        let jd = build_jump(&gaussian_r(g, 0.9), 0.0, 0.0).unwrap();
        let opts = SolverOptions { method: SolverMethod::Neumann, max_iter: 3, ..Default::default() };
        match solve_mu(&jd, &opts) {
            Err(NlsError::NoConvergence { iterations, ratios, .. }) => {
                assert_eq!(iterations, 3);
                assert_eq!(ratios.len(), 3);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn reconstruction_structure() {
        let g = zgrid(2048);
        let rec = reconstruct_potential(&gaussian_r(g, 0.6), &[-2.0, 0.0, 1.5], 0.5, &SolverOptions::default()).unwrap();
        for qm in &rec.q_matrix {
            assert_eq!(qm.get(0, 0), C64::new(0.0, 0.0));
            assert_eq!(qm.get(1, 1), C64::new(0.0, 0.0));
            assert!((qm.get(1, 0) - qm.get(0, 1).conj()).norm() < 1e-10);
        }
        assert!(reconstruct_potential(&gaussian_r(g, 0.6), &[0.0], -1.0, &SolverOptions::default()).is_err());
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(16))]
        #[test]
        fn cw_is_a_contraction(rho in 0.05f64..0.95, x in -5.0f64..5.0, t in 0.0f64..2.0, seed in 0u64..1000) {
            let g = zgrid(512);
            let jd = build_jump(&gaussian_r(g, rho), x, t).unwrap();
            let est = cw_norm_estimate(&jd, 30, seed).unwrap();
            proptest::prop_assert!(est <= rho + 1e-12);
        }
    }

    #[test]
    fn smooth_potential_round_trip() {
        use crate::scattering::{scattering_coefficients, Potential};
        let xg = UniformGrid::symmetric(20.0, 2048).unwrap();
        let q0 = Potential::new(SampledFn::from_fn(xg, |x| C64::from_polar(0.4 * (-x * x).exp(), 0.3 * x)).unwrap()).unwrap();
        let r = scattering_coefficients(&q0, &zgrid(4096)).unwrap().r;
        let ks: Vec<usize> = (0..xg.n).step_by(16).filter(|&k| xg.point(k).abs() < 4.0).collect();
        let xs: Vec<f64> = ks.iter().map(|&k| xg.point(k)).collect();
        let rec = reconstruct_potential(&r, &xs, 0.0, &SolverOptions::default()).unwrap();
        let err = ks.iter().zip(&rec.q).map(|(&k, q)| (q - q0.samples().values()[k]).norm()).fold(0.0, f64::max);
        assert!(err < 1e-4, "{err}");
    }
}
