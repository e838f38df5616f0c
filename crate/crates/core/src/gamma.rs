//! Complex log-gamma via the Lanczos approximation (g = 7, nine terms).

use std::f64::consts::PI;

use crate::grid::C64;

const G: f64 = 7.0;
const COEFFS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Γ(z)`. For `Re z ≥ 1/2` the imaginary part is the branch continuous
/// from the positive real axis; left of that line the reflection formula
/// is used with principal logarithms.
pub fn ln_gamma(z: C64) -> C64 {
    if z.re < 0.5 {
        let pi = C64::new(PI, 0.0);
        return pi.ln() - (pi * z).sin().ln() - ln_gamma(C64::new(1.0, 0.0) - z);
    }
    let z = z - 1.0;
    let mut series = C64::new(COEFFS[0], 0.0);
    for (k, &c) in COEFFS.iter().enumerate().skip(1) {
        series += c / (z + k as f64);
    }
    let t = z + G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + series.ln()
}

/// `arg Γ(iν)` for `ν > 0`, continuous in `ν` and tending to `−π/2` as `ν → 0`.
pub fn arg_gamma_imaginary(nu: f64) -> f64 {
    // Γ(iν) = Γ(1 + iν)/(iν)
    ln_gamma(C64::new(1.0, nu)).im - 0.5 * PI
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Stirling series after shifting the argument up by `shift`.
    fn stirling(z: C64, shift: usize) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        let mut w = z;
        for _ in 0..shift {
            acc -= w.ln();
            w += 1.0;
        }
        let inv = 1.0 / w;
        let inv2 = inv * inv;
        // Bernoulli terms B_{2k}/(2k(2k−1) w^{2k−1}), k = 1..6.
        let coeffs = [1.0 / 12.0, -1.0 / 360.0, 1.0 / 1260.0, -1.0 / 1680.0, 1.0 / 1188.0, -691.0 / 360360.0];
        let mut corr = C64::new(0.0, 0.0);
        let mut p = inv;
        for c in coeffs {
            corr += c * p;
            p *= inv2;
        }
        acc + (w - 0.5) * w.ln() - w + 0.5 * (2.0 * PI).ln() + corr
    }

    #[test]
    fn real_values() {
        assert!((ln_gamma(C64::new(5.0, 0.0)).re - 24f64.ln()).abs() < 1e-13);
        assert!((ln_gamma(C64::new(0.5, 0.0)).re - 0.5 * PI.ln()).abs() < 1e-13);
        assert!(ln_gamma(C64::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn agrees_with_shifted_stirling() {
        for nu in [1e-6, 0.01, 0.3, 1.0, 2.5, 5.0] {
            for re in [0.5, 1.0, 3.3] {
                let z = C64::new(re, nu);
                let d = ln_gamma(z) - stirling(z, 20);
                assert!(d.norm() < 1e-12, "z = {z}: {d}");
            }
        }
    }

    #[test]
    fn modulus_on_imaginary_axis() {
        for nu in [0.05, 0.4, 1.0, 3.0, 5.0] {
            let g = (ln_gamma(C64::new(1.0, nu)) - C64::new(0.0, nu).ln()).exp();
            let expect = PI / (nu * (PI * nu).sinh());
            assert!((g.norm_sqr() - expect).abs() < 1e-12 * expect);
        }
    }

    #[test]
    fn arg_near_zero_follows_euler_gamma() {
        const EULER: f64 = 0.577_215_664_901_532_9;
        let nu = 1e-4;
        assert!((arg_gamma_imaginary(nu) - (-0.5 * PI - EULER * nu)).abs() < 1e-10);
    }

    #[test]
    fn reflection_branch() {
        let z = C64::new(-0.3, 0.7);
        let lhs = (ln_gamma(z) + ln_gamma(1.0 - z)).exp();
        let rhs = PI / (PI * z).sin();
        assert!((lhs - rhs).norm() < 1e-12 * rhs.norm());
    }
}
