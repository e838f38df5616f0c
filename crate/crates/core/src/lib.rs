//! Numerical inverse scattering for the defocusing nonlinear Schrödinger
//! equation `iq_t + q_xx − 2|q|²q = 0` on the line.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod delta;
pub mod error;
pub mod fit;
pub mod gamma;
pub mod grid;
pub mod interp;
pub mod io;
pub mod inverse;
pub mod oracle;
pub mod pauli;
pub mod quadrature;
pub mod scattering;
pub mod spectral;
pub mod verify;

pub use asymptotics::{alpha, asymptotic_params, nu, oscillatory_decay_probe, q_asymptotic, q_asymptotic_on, stationary_point};
pub use delta::{delta, DeltaFunction, DeltaSide};
pub use error::{NlsError, Result};
pub use fit::fit_slope;
pub use grid::{Mat2, SampledFn, SampledMatrixFn, UniformGrid, C64};
pub use inverse::{build_jump, reconstruct_potential, solve_mu, ReconstructionResult, SolverMethod, SolverOptions};
pub use io::Json;
pub use oracle::{compare_asymptotics, split_step_evolve, FieldState, StepperConfig};
pub use scattering::{reflection, scattering_coefficients, trace_integral, Potential, ScatteringData};
pub use spectral::{cauchy_boundary, fourier_pair, hilbert, CauchyProjector, Direction, Side};
pub use verify::{verify_suite, VerifyReport};
