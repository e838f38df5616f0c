//! The matrices σ = diag(1/2, −1/2), σ₃ = diag(1, −1) and the adjoint action of σ.

use crate::grid::{Mat2, C64};

#[derive(Debug, Clone, Copy)]
pub struct PauliOps;

impl PauliOps {
    pub fn sigma() -> Mat2 {
        Mat2::diag(C64::new(0.5, 0.0), C64::new(-0.5, 0.0))
    }

    pub fn sigma3() -> Mat2 {
        Mat2::diag(C64::new(1.0, 0.0), C64::new(-1.0, 0.0))
    }

    /// `[σ, A]`: zero diagonal, off-diagonal `(b, c) ↦ (b, −c)`.
    pub fn ad_sigma(a: &Mat2) -> Mat2 {
        let zero = C64::new(0.0, 0.0);
        Mat2::new(zero, a.get(0, 1), -a.get(1, 0), zero)
    }

    /// `e^{θ ad σ} A = e^{θσ} A e^{−θσ}` for complex θ.
    pub fn exp_ad_sigma(theta: C64, a: &Mat2) -> Mat2 {
        let e = theta.exp();
        Mat2::new(a.get(0, 0), a.get(0, 1) * e, a.get(1, 0) / e, a.get(1, 1))
    }

    /// `e^{θσ}` for complex θ.
    pub fn exp_sigma(theta: C64) -> Mat2 {
        let h = (theta * 0.5).exp();
        Mat2::diag(h, C64::new(1.0, 0.0) / h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(vals: [f64; 8]) -> Mat2 {
        Mat2::new(
            C64::new(vals[0], vals[1]),
            C64::new(vals[2], vals[3]),
            C64::new(vals[4], vals[5]),
            C64::new(vals[6], vals[7]),
        )
    }

    #[test]
    fn ad_sigma_is_commutator() {
        let a = m([1.0, 2.0, -0.5, 0.3, 4.0, -1.0, 0.2, 0.7]);
        let s = PauliOps::sigma();
        let comm = s * a - a * s;
        assert!((PauliOps::ad_sigma(&a) - comm).max_abs() < 1e-15);
    }

    #[test]
    fn exp_ad_matches_conjugation() {
        let a = m([1.0, 2.0, -0.5, 0.3, 4.0, -1.0, 0.2, 0.7]);
        let theta = C64::new(0.4, -1.3);
        let conj = PauliOps::exp_sigma(theta) * a * PauliOps::exp_sigma(-theta);
        assert!((PauliOps::exp_ad_sigma(theta, &a) - conj).max_abs() < 1e-13);
        assert_eq!(PauliOps::sigma3(), PauliOps::sigma().scale(C64::new(2.0, 0.0)));
    }

    proptest::proptest! {
        #[test]
        fn exp_ad_inverse_roundtrip(v in proptest::array::uniform8(-5.0f64..5.0), th in -3.0f64..3.0, ph in -3.0f64..3.0) {
            let a = m(v);
            let theta = C64::new(th, ph);
            let back = PauliOps::exp_ad_sigma(theta, &PauliOps::exp_ad_sigma(-theta, &a));
            proptest::prop_assert!((back - a).max_abs() <= 1e-12 * (1.0 + a.max_abs()));
        }
    }
}
