//! Gauss–Legendre rules.

/// Eight-point nodes on `[-1, 1]` (positive half) and weights.
const GL8_X: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_2,
];
const GL8_W: [f64; 4] = [
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// Eight-point Gauss–Legendre nodes and weights mapped to `[a, b]`.
pub fn gauss_legendre_8(a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> {
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    (0..8).map(move |i| {
        let (x, w) = (GL8_X[i % 4], GL8_W[i % 4]);
        let x = if i < 4 { -x } else { x };
        (mid + half * x, half * w)
    })
}

pub fn integrate<T>(a: f64, b: f64, f: impl Fn(f64) -> T) -> T
where
    T: std::ops::Mul<f64, Output = T> + std::iter::Sum,
{
    gauss_legendre_8(a, b).map(|(x, w)| f(x) * w).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_for_degree_fifteen() {
        let v = integrate(-0.5, 2.0, |x| x.powi(15) - 3.0 * x.powi(4) + 1.0);
        let exact = (2f64.powi(16) - 0.5f64.powi(16)) / 16.0 - 3.0 * (2f64.powi(5) + 0.5f64.powi(5)) / 5.0 + 2.5;
        assert!((v - exact).abs() < 1e-11 * exact.abs());
    }
}
