use num_complex::Complex64;

#[derive(Clone, Copy, Debug)]
pub struct Extrapolation {
    pub value: Complex64,
    /// Difference between the two highest-order tableau entries.
    pub error: f64,
}

/// Polynomial (Neville) extrapolation of samples `(x_j, y_j)` to `x = 0`.
pub fn neville_to_zero(xs: &[f64], ys: &[Complex64]) -> Extrapolation {
    assert_eq!(xs.len(), ys.len());
    assert!(!xs.is_empty());
    let n = xs.len();
    let mut p = ys.to_vec();
    let mut prev_best = p[n - 1];
    let mut best = p[n - 1];
    for level in 1..n {
        for i in 0..n - level {
            let (xa, xb) = (xs[i], xs[i + level]);
            p[i] = (p[i + 1] * xa - p[i] * xb) / (xa - xb);
        }
        prev_best = best;
        best = p[0];
    }
    Extrapolation { value: best, error: (best - prev_best).norm() }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_polynomial_intercept() {
        let xs = [0.4, 0.2, 0.1, 0.05];
        let ys: Vec<Complex64> = xs.iter().map(|&x| Complex64::new(1.5 - 2.0 * x + x * x * x, 0.5 * x)).collect();
        let e = neville_to_zero(&xs, &ys);
        assert!((e.value - Complex64::new(1.5, 0.0)).norm() < 1e-13);
    }
}
