//! Direct integration of `iq_t + q_xx − 2|q|²q = 0` on a periodic grid by
//! Strang splitting, and the comparison harness against the asymptotic formula.

use std::f64::consts::PI;

use rustfft::FftPlanner;

use crate::asymptotics::q_asymptotic;
use crate::error::{NlsError, Result};
use crate::fit::fit_slope;
use crate::grid::{SampledFn, UniformGrid, C64};
use crate::scattering::{scattering_coefficients, Potential};
use crate::spectral::{fourier_pair, Direction};

/// Relative spectral tail above which the grid is considered under-resolved.
pub const RESOLUTION_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub q: SampledFn,
    pub t: f64,
}

impl FieldState {
    pub fn new(q: SampledFn, t: f64) -> Self {
        Self { q, t }
    }

    pub fn grid(&self) -> &UniformGrid {
        self.q.grid()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct StepperConfig {
    pub dt: f64,
    /// Tolerance for the spectral-tail check on the final state; `None` disables it.
    pub resolution_tol: Option<f64>,
    /// Relative endpoint-magnitude tolerance on the final state; `None` disables it.
    pub endpoint_tol: Option<f64>,
}

impl StepperConfig {
    pub fn new(dt: f64) -> Self {
        Self { dt, resolution_tol: Some(RESOLUTION_TOL), endpoint_tol: None }
    }
}

/// Largest Fourier magnitude in the outer fifth of the spectrum relative to the peak.
pub fn spectral_tail(values: &[C64]) -> f64 {
    let n = values.len();
    let mut buf = values.to_vec();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let peak = buf.iter().fold(0.0f64, |m, v| m.max(v.norm()));
    if peak == 0.0 {
        return 0.0;
    }
    let cutoff = (2 * n) / 5;
    let tail = buf
        .iter()
        .enumerate()
        .filter(|(k, _)| k.min(&(n - k)) >= &cutoff)
        .fold(0.0f64, |m, (_, v)| m.max(v.norm()));
    tail / peak
}

struct Stepper {
    fwd: std::sync::Arc<dyn rustfft::Fft<f64>>,
    inv: std::sync::Arc<dyn rustfft::Fft<f64>>,
    free: Vec<C64>,
}

impl Stepper {
    fn new(grid: &UniformGrid, dt: f64) -> Self {
        let n = grid.n;
        let mut planner = FftPlanner::new();
        let dxi = 2.0 * PI / (n as f64 * grid.step);
        let inv_n = 1.0 / n as f64;
        let free = (0..n)
            .map(|k| {
                let m = if k < n.div_ceil(2) { k as f64 } else { k as f64 - n as f64 };
                let xi = m * dxi;
                C64::from_polar(inv_n, -xi * xi * dt)
            })
            .collect();
        Self { fwd: planner.plan_fft_forward(n), inv: planner.plan_fft_inverse(n), free }
    }

    fn nonlinear(q: &mut [C64], dt: f64) {
        for v in q.iter_mut() {
            *v *= C64::from_polar(1.0, -2.0 * v.norm_sqr() * dt);
        }
    }

    fn linear(&self, q: &mut [C64]) {
        self.fwd.process(q);
        for (v, m) in q.iter_mut().zip(&self.free) {
            *v *= m;
        }
        self.inv.process(q);
    }

    /// `steps` Strang steps `N(dt/2) L(dt) N(dt/2)` with the inner half steps merged.
    fn run(&self, q: &mut [C64], dt: f64, steps: usize) {
        if steps == 0 {
            return;
        }
        Self::nonlinear(q, 0.5 * dt);
        for s in 0..steps {
            self.linear(q);
            Self::nonlinear(q, if s + 1 == steps { 0.5 * dt } else { dt });
        }
    }
}

/// Evolves `q0` to `t_final`; the step is shrunk so that it divides the interval.
pub fn split_step_evolve(q0: &FieldState, t_final: f64, cfg: &StepperConfig) -> Result<FieldState> {
    if !(cfg.dt > 0.0 && cfg.dt.is_finite()) {
        return Err(NlsError::Domain(format!("time step must be positive, got {}", cfg.dt)));
    }
    if !(t_final >= q0.t) || !t_final.is_finite() {
        return Err(NlsError::Domain(format!("final time {t_final} precedes the initial time {}", q0.t)));
    }
    let span = t_final - q0.t;
    let steps = (span / cfg.dt).ceil() as usize;
    let mut values = q0.q.values().to_vec();
    if steps > 0 {
        let dt = span / steps as f64;
        Stepper::new(q0.grid(), dt).run(&mut values, dt, steps);
    }
    let q = SampledFn::new(*q0.grid(), values)?;
    if let Some(tol) = cfg.endpoint_tol {
        q.check_endpoint_decay(tol)?;
    }
    if let Some(tol) = cfg.resolution_tol {
        let tail = spectral_tail(q.values());
        if tail > tol {
            return Err(NlsError::Resolution { tail, threshold: tol });
        }
    }
    Ok(FieldState::new(q, t_final))
}

/// Settings for [`compare_asymptotics`].
#[derive(Debug, Clone, Copy)]
pub struct ComparisonOptions {
    /// z-grid for the reflection coefficient.
    pub zgrid: UniformGrid,
    pub dt: f64,
    /// Fourier modes of `q₀` below this fraction of the peak may wrap around the periodic domain.
    pub wrap_tol: f64,
    /// Modes below this fraction of the peak may be left unresolved.
    pub resolve_tol: f64,
}

impl Default for ComparisonOptions {
    fn default() -> Self {
        Self {
            zgrid: UniformGrid::symmetric(40.0, 4096).expect("valid default grid"),
            dt: 0.02,
            wrap_tol: 1e-6,
            resolve_tol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayTable {
    /// `(t, sup_{|x| ≤ √t} |q_oracle − q_as|)`
    pub rows: Vec<(f64, f64)>,
    /// Least-squares slope of log error against log t; `None` when every error is zero.
    pub slope: Option<f64>,
    /// Half-width and size of the periodic grid used by the oracle.
    pub domain: UniformGrid,
}

/// Largest `|ξ|` at which the transform of `q` still exceeds `tol` of its peak.
fn spectral_extent(q: &SampledFn, tol: f64) -> Result<f64> {
    let fhat = fourier_pair(q, Direction::Forward)?;
    let peak = fhat.max_abs();
    Ok(fhat
        .values()
        .iter()
        .enumerate()
        .filter(|(_, v)| v.norm() > tol * peak)
        .fold(0.0f64, |m, (k, _)| m.max(fhat.grid().point(k).abs())))
}

/// Periodic grid wide enough that modes above `wrap_tol` stay off the seam up
/// to `t_max`, fine enough to resolve modes above `resolve_tol`.
pub fn oracle_domain(q0: &Potential, t_max: f64, window: f64, opts: &ComparisonOptions) -> Result<UniformGrid> {
    let xi_wrap = spectral_extent(q0.samples(), opts.wrap_tol)?;
    let xi_res = spectral_extent(q0.samples(), opts.resolve_tol)?.max(1.0);
    let (lo, hi) = q0.grid().extent();
    let support = lo.abs().max(hi.abs()).min(window.max(10.0));
    let half_width = window + support + 2.0 * xi_wrap * t_max;
    // Nyquist at 1.5·ξ_res leaves room for nonlinear broadening.
    let step_max = PI / (1.5 * xi_res);
    let n = ((2.0 * half_width / step_max).ceil() as usize).next_power_of_two().max(64);
    UniformGrid::symmetric(half_width, n)
}

/// Oracle-versus-asymptotics sup errors over `|x| ≤ √t` at each of `times`.
pub fn compare_asymptotics(q0: &Potential, times: &[f64], opts: &ComparisonOptions) -> Result<DecayTable> {
    if times.is_empty() || times[0] < 10.0 || times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(NlsError::Domain("times must be increasing and start at t ≥ 10".into()));
    }
    let t_max = *times.last().expect("non-empty");
    let domain = oracle_domain(q0, t_max, t_max.sqrt(), opts)?;

    if q0.samples().max_abs() == 0.0 {
        return Ok(DecayTable { rows: times.iter().map(|&t| (t, 0.0)).collect(), slope: None, domain });
    }

    let r = scattering_coefficients(q0, &opts.zgrid)?.r;
    let start = SampledFn::from_fn(domain, |x| {
        let (lo, hi) = q0.grid().extent();
        if x < lo || x > hi {
            C64::new(0.0, 0.0)
        } else {
            q0.samples().interpolate(x)
        }
    })?;
    let mut state = FieldState::new(start, 0.0);
    let cfg = StepperConfig { dt: opts.dt, resolution_tol: Some(RESOLUTION_TOL), endpoint_tol: None };
    let mut rows = Vec::with_capacity(times.len());
    for &t in times {
        state = split_step_evolve(&state, t, &cfg)?;
        let window = t.sqrt();
        let mut err = 0.0f64;
        for (k, v) in state.q.values().iter().enumerate() {
            let x = domain.point(k);
            if x.abs() <= window {
                err = err.max((v - q_asymptotic(&r, x, t)?).norm());
            }
        }
        rows.push((t, err));
    }
    let slope = if rows.iter().all(|&(_, e)| e == 0.0) { None } else { Some(fit_slope(&rows)?) };
    Ok(DecayTable { rows, slope, domain })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian_state(n: usize) -> FieldState {
        let g = UniformGrid::symmetric(30.0, n).unwrap();
        FieldState::new(SampledFn::from_fn(g, |x| C64::from_polar(0.8 * (-x * x / 2.0).exp(), 0.5 * x)).unwrap(), 0.0)
    }

    #[test]
    fn zero_stays_zero() {
        let g = UniformGrid::symmetric(10.0, 64).unwrap();
        let s = split_step_evolve(&FieldState::new(SampledFn::zeros(g), 0.0), 3.0, &StepperConfig::new(0.01)).unwrap();
        assert_eq!(s.q.max_abs(), 0.0);
        assert_eq!(s.t, 3.0);
    }

    #[test]
    fn constant_solution_rotates() {
        let g = UniformGrid::symmetric(10.0, 64).unwrap();
        let c = C64::new(0.6, -0.3);
        let s0 = FieldState::new(SampledFn::from_fn(g, |_| c).unwrap(), 0.0);
        let s = split_step_evolve(&s0, 1.0, &StepperConfig::new(1e-3)).unwrap();
        let expect = c * C64::from_polar(1.0, -2.0 * c.norm_sqr());
        assert!(s.q.values().iter().all(|v| (v - expect).norm() < 1e-8));
    }

    #[test]
    fn free_gaussian_matches_exact_dispersion() {
        // With q small the flow is linear: e^{−x²/2} ↦ (1 + 2it)^{-1/2} e^{−x²/(2(1+2it))}.
        let g = UniformGrid::symmetric(40.0, 1024).unwrap();
        let eps = 1e-6;
        let s0 = FieldState::new(SampledFn::from_real_fn(g, |x| eps * (-x * x / 2.0).exp()).unwrap(), 0.0);
        let s = split_step_evolve(&s0, 2.0, &StepperConfig::new(0.01)).unwrap();
        let d = C64::new(1.0, 4.0);
        for (k, v) in s.q.values().iter().enumerate() {
            let x = g.point(k);
            let expect = eps * (-x * x / (2.0 * d)).exp() / d.sqrt();
            assert!((v - expect).norm() < 1e-9 * eps);
        }
    }

    #[test]
    fn norm_is_conserved() {
        let s0 = gaussian_state(512);
        let s = split_step_evolve(&s0, 20.0, &StepperConfig { dt: 0.01, resolution_tol: None, endpoint_tol: None }).unwrap();
        assert!((s.q.l2_norm() - s0.q.l2_norm()).abs() <= 1e-12 * s0.q.l2_norm());
    }

    #[test]
    fn second_order_in_time() {
        let s0 = gaussian_state(512);
        let run = |dt: f64| split_step_evolve(&s0, 1.0, &StepperConfig::new(dt)).unwrap().q;
        let reference = run(0.1 / 8.0);
        let err = |q: &SampledFn| q.values().iter().zip(reference.values()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        let (e1, e2) = (err(&run(0.1)), err(&run(0.05)));
        assert!(e1 / e2 >= 3.5, "{e1} {e2}");
    }

    #[test]
    fn under_resolved_grid_is_flagged() {
        let g = UniformGrid::symmetric(10.0, 64).unwrap();
        let s0 = FieldState::new(SampledFn::from_real_fn(g, |x| if x.abs() < 1.0 { 1.0 } else { 0.0 }).unwrap(), 0.0);
        let err = split_step_evolve(&s0, 0.1, &StepperConfig::new(0.01)).unwrap_err();
        assert!(err.is_warning());
        assert!(split_step_evolve(&s0, -1.0, &StepperConfig::new(0.01)).is_err());
    }

    #[test]
    fn zero_potential_gives_exact_match_sentinel() {
        let q0 = Potential::new(SampledFn::zeros(UniformGrid::symmetric(10.0, 128).unwrap())).unwrap();
        let table = compare_asymptotics(&q0, &[10.0, 20.0, 40.0], &ComparisonOptions::default()).unwrap();
        assert!(table.rows.iter().all(|&(_, e)| e == 0.0));
        assert!(table.slope.is_none());
        assert!(compare_asymptotics(&q0, &[5.0, 20.0], &ComparisonOptions::default()).is_err());
        assert!(compare_asymptotics(&q0, &[20.0, 10.0], &ComparisonOptions::default()).is_err());
    }
}
