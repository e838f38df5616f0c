use crate::error::{NlsError, Result};

/// Ordinary least-squares slope of `log err` against `log t`.
pub fn fit_slope(rows: &[(f64, f64)]) -> Result<f64> {
    if rows.len() < 3 {
        return Err(NlsError::InsufficientData(format!("need at least 3 rows, got {}", rows.len())));
    }
    if let Some(&(t, e)) = rows.iter().find(|&&(t, e)| !(e > 0.0) || !(t > 0.0) || !e.is_finite() || !t.is_finite()) {
        return Err(NlsError::InsufficientData(format!("row (t = {t}, err = {e}) is not positive")));
    }
    if rows.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return Err(NlsError::InsufficientData("t must be strictly increasing".into()));
    }
    let n = rows.len() as f64;
    let (xs, ys): (Vec<f64>, Vec<f64>) = rows.iter().map(|&(t, e)| (t.ln(), e.ln())).unzip();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_laws() {
        assert!((fit_slope(&[(1.0, 1.0), (10.0, 0.1), (100.0, 0.01)]).unwrap() + 1.0).abs() < 1e-12);
        assert!((fit_slope(&[(1.0, 1.0), (4.0, 0.5), (16.0, 0.25)]).unwrap() + 0.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_tables() {
        assert!(fit_slope(&[(1.0, 1.0), (2.0, 0.0), (3.0, 0.1)]).is_err());
        assert!(fit_slope(&[(1.0, 1.0), (2.0, 0.5)]).is_err());
        assert!(fit_slope(&[(2.0, 1.0), (1.0, 0.5), (3.0, 0.1)]).is_err());
    }

    proptest::proptest! {
        #[test]
        fn recovers_exact_exponent(p in -3.0f64..3.0, c in 0.01f64..100.0) {
            let rows: Vec<_> = [1.0, 3.0, 10.0, 30.0].iter().map(|&t: &f64| (t, c * t.powf(p))).collect();
            proptest::prop_assert!((fit_slope(&rows).unwrap() - p).abs() < 1e-10);
        }
    }
}
