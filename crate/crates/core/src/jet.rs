//! Truncated Taylor series ("jets") for exact derivatives of the built-in
//! potential families. A jet of order `k` stores `f^(j)(x0) / j!` for
//! `j = 0..=k`.

use std::ops::{Add, Mul, Neg, Sub};

#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    pub coeffs: Vec<f64>,
}

impl Jet {
    pub fn constant(value: f64, order: usize) -> Self {
        let mut coeffs = vec![0.0; order + 1];
        coeffs[0] = value;
        Jet { coeffs }
    }

    /// The identity function expanded around `x0`.
    pub fn variable(x0: f64, order: usize) -> Self {
        let mut jet = Jet::constant(x0, order);
        if order > 0 {
            jet.coeffs[1] = 1.0;
        }
        jet
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// `f^(j)(x0)` for `j = 0..=order`.
    pub fn derivatives(&self) -> Vec<f64> {
        let mut fact = 1.0;
        self.coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| {
                if j > 0 {
                    fact *= j as f64;
                }
                c * fact
            })
            .collect()
    }

    pub fn scale(&self, s: f64) -> Self {
        Jet { coeffs: self.coeffs.iter().map(|c| c * s).collect() }
    }

    pub fn add_scalar(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.coeffs[0] += s;
        out
    }

    pub fn exp(&self) -> Self {
        // g' = g u'  =>  k g_k = sum_j j u_j g_{k-j}
        let n = self.coeffs.len();
        let u = &self.coeffs;
        let mut g = vec![0.0; n];
        g[0] = u[0].exp();
        for k in 1..n {
            let s: f64 = (1..=k).map(|j| j as f64 * u[j] * g[k - j]).sum();
            g[k] = s / k as f64;
        }
        Jet { coeffs: g }
    }

    pub fn tanh(&self) -> Self {
        // g' = (1 - g^2) u'
        let n = self.coeffs.len();
        let u = &self.coeffs;
        let mut g = vec![0.0; n];
        let mut h = vec![0.0; n];
        g[0] = u[0].tanh();
        h[0] = 1.0 - g[0] * g[0];
        for k in 1..n {
            let s: f64 = (1..=k).map(|j| j as f64 * u[j] * h[k - j]).sum();
            g[k] = s / k as f64;
            let sq: f64 = (0..=k).map(|j| g[j] * g[k - j]).sum();
            h[k] = -sq;
        }
        Jet { coeffs: g }
    }
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        Jet { coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect() }
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        Jet { coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a - b).collect() }
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        let n = self.coeffs.len().min(rhs.coeffs.len());
        let mut out = vec![0.0; n];
        for (k, o) in out.iter_mut().enumerate() {
            *o = (0..=k).map(|j| self.coeffs[j] * rhs.coeffs[k - j]).sum();
        }
        Jet { coeffs: out }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_of_square_matches_hermite_pattern() {
        // d^j/dx^j e^{-x^2} at x = 0.3
        let x = Jet::variable(0.3, 4);
        let f = (&x * &x).scale(-1.0).exp();
        let d = f.derivatives();
        let e = (-0.09f64).exp();
        let expected = [
            e,
            -0.6 * e,
            (4.0 * 0.09 - 2.0) * e,
            (-8.0 * 0.027 + 12.0 * 0.3) * e,
            (16.0 * 0.0081 - 48.0 * 0.09 + 12.0) * e,
        ];
        for (a, b) in d.iter().zip(expected.iter()) {
            assert!((a - b).abs() < 1e-13, "{a} vs {b}");
        }
    }

    #[test]
    fn tanh_derivatives_match_sech_identities() {
        let x0 = 0.7f64;
        let t = Jet::variable(x0, 3).tanh().derivatives();
        let th = x0.tanh();
        let s2 = 1.0 - th * th;
        assert!((t[1] - s2).abs() < 1e-14);
        assert!((t[2] + 2.0 * th * s2).abs() < 1e-14);
        assert!((t[3] - (-2.0 * s2 * s2 + 4.0 * th * th * s2)).abs() < 1e-14);
    }
}
