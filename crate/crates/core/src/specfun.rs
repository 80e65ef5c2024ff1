//! Special functions: generalized Laguerre polynomials, the radial Landau
//! eigenfunctions, Gauss rules and spherical Bessel functions.

use crate::error::{Error, Result};
use crate::linalg::{symmetric_tridiagonal_eigen, Scalar};
use nalgebra::DMatrix;
use std::sync::OnceLock;

const LN_FACT_TABLE: usize = 1 << 15;

/// `ln(n!)`, tabulated up to `2^15` and from Stirling's series beyond.
pub fn ln_factorial(n: usize) -> f64 {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut t = Vec::with_capacity(LN_FACT_TABLE);
        let mut acc = 0.0f64;
        t.push(0.0);
        for i in 1..LN_FACT_TABLE {
            acc += (i as f64).ln();
            t.push(acc);
        }
        t
    });
    if n < LN_FACT_TABLE {
        return table[n];
    }
    let x = n as f64 + 1.0;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    (x - 0.5) * x.ln() - x
        + 0.5 * (2.0 * std::f64::consts::PI).ln()
        + inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 / 1260.0))
}

/// `L_n^(alpha)(s)` by the three-term recurrence.
pub fn laguerre_alpha(n: usize, alpha: f64, s: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 1.0 + alpha - s;
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + alpha + 1.0 - s) * cur - (kf + alpha) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// `L_q^(m)(s)` for integer order `m`, including `m < 0` where `q >= -m`
/// is required and `L_q^(-k)(s) = (-s)^k (q-k)!/q! L_{q-k}^(k)(s)`.
pub fn laguerre(q: usize, m: i64, s: f64) -> Result<f64> {
    if m >= 0 {
        return Ok(laguerre_alpha(q, m as f64, s));
    }
    let k = m.unsigned_abs() as usize;
    if q < k {
        return Err(Error::domain(format!("L_q^(m) needs q >= m_-, got q = {q}, m = {m}")));
    }
    let ratio = (ln_factorial(q - k) - ln_factorial(q)).exp();
    Ok((-s).powi(k as i32) * ratio * laguerre_alpha(q - k, k as f64, s))
}

/// `L_0 .. L_{n_max}` at one point.
pub fn laguerre_all(n_max: usize, alpha: f64, s: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(1.0);
    if n_max == 0 {
        return out;
    }
    out.push(1.0 + alpha - s);
    for k in 1..n_max {
        let kf = k as f64;
        let next = ((2.0 * kf + alpha + 1.0 - s) * out[k] - (kf + alpha) * out[k - 1]) / (kf + 1.0);
        out.push(next);
    }
    out
}

/// `L_n^(alpha)(s)` from the explicit finite sum
/// `sum_k (-1)^k binom(n + alpha, n - k) s^k / k!`. Slower than the
/// recurrence and kept as an independent check; valid for any real alpha.
pub fn laguerre_series(n: usize, alpha: f64, s: f64) -> f64 {
    let mut total = 0.0;
    for k in 0..=n {
        let mut binom = 1.0;
        for i in 1..=(n - k) {
            binom *= (alpha + k as f64 + i as f64) / i as f64;
        }
        let mut term = binom;
        for i in 1..=k {
            term *= s / i as f64;
        }
        if k % 2 == 1 {
            term = -term;
        }
        total += term;
    }
    total
}

/// Smallest admissible Landau index in sector `m`: `max(-m, 0)`.
pub fn m_minus(m: i64) -> usize {
    if m < 0 {
        (-m) as usize
    } else {
        0
    }
}

/// Radial Landau eigenfunction `phi_{q,m}(rho)`, normalized with respect
/// to `rho d rho` and positive near the origin:
///
/// `phi = c s^{|m|/2} L_n^{(|m|)}(s) e^{-s/2}`, `s = b rho^2 / 2`,
/// `n = q - m_-`, `c = sqrt(b n! / (n + |m|)!)`.
pub fn landau_radial(q: usize, m: i64, b: f64, rho: f64) -> Result<f64> {
    if !(b > 0.0) {
        return Err(Error::domain("field strength must be positive"));
    }
    let mm = m_minus(m);
    if q < mm {
        return Err(Error::domain(format!("q = {q} below m_- = {mm} for m = {m}")));
    }
    if rho < 0.0 {
        return Err(Error::domain("rho must be non-negative"));
    }
    let am = m.unsigned_abs() as usize;
    let n = q - mm;
    let s = 0.5 * b * rho * rho;
    let lag = laguerre_alpha(n, am as f64, s);
    if s == 0.0 {
        return Ok(if am == 0 { (b).sqrt() * lag } else { 0.0 });
    }
    let log_mag = 0.5 * (b.ln() + ln_factorial(n) - ln_factorial(n + am)) + 0.5 * am as f64 * s.ln() - 0.5 * s;
    Ok(log_mag.exp() * lag)
}

/// Landau quantum numbers in one angular-momentum sector.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RadialMode {
    pub b: f64,
    pub m: i64,
    pub q: usize,
}

impl RadialMode {
    pub fn new(b: f64, m: i64, q: usize) -> Result<Self> {
        if !(b > 0.0) || !b.is_finite() {
            return Err(Error::domain("field strength must be positive"));
        }
        if q < m_minus(m) {
            return Err(Error::domain(format!("q = {q} below m_- = {} for m = {m}", m_minus(m))));
        }
        Ok(RadialMode { b, m, q })
    }

    /// Landau level `2 b q`.
    pub fn level(&self) -> f64 {
        2.0 * self.b * self.q as f64
    }
}

pub fn radial_eigenfunction(mode: &RadialMode, rho: f64) -> Result<f64> {
    landau_radial(mode.q, mode.m, mode.b, rho)
}

/// Generalized Gauss-Laguerre rule for the probability measure
/// `s^alpha e^{-s} ds / Gamma(alpha + 1)` by Golub-Welsch.
pub fn gauss_laguerre(n: usize, alpha: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 || alpha <= -1.0 {
        return Err(Error::domain("Gauss-Laguerre needs n > 0 and alpha > -1"));
    }
    let diag: Vec<f64> = (0..n).map(|i| 2.0 * i as f64 + alpha + 1.0).collect();
    let off: Vec<f64> = (1..n).map(|i| (i as f64 * (i as f64 + alpha)).sqrt()).collect();
    let te = symmetric_tridiagonal_eigen(&diag, &off)?;
    let weights = te.first_components.iter().map(|z| z * z).collect();
    Ok((te.values, weights))
}

/// Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 0 {
                1.0
            } else if n == 1 {
                x
            } else {
                p1
            };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Quadrature for radial integrals in a fixed angular-momentum sector,
/// in the variable `s = b rho^2 / 2` with weight `s^|m| e^{-s} / |m|!`.
///
/// With `tilt = g > 0` the rule is built for `e^{-(1+g)s}` so that
/// integrands carrying an extra factor `e^{-g s}` are integrated exactly
/// up to polynomial degree `2N - 1`.
#[derive(Clone, Debug)]
pub struct RadialQuadrature {
    pub b: f64,
    pub abs_m: usize,
    pub tilt: f64,
    pub nodes_s: Vec<f64>,
    pub nodes_rho: Vec<f64>,
    pub weights: Vec<f64>,
    pub exact_degree: usize,
}

impl RadialQuadrature {
    pub fn new(b: f64, abs_m: usize, n_nodes: usize, tilt: f64) -> Result<Self> {
        if !(b > 0.0) || !(tilt >= 0.0) || !tilt.is_finite() {
            return Err(Error::domain("radial quadrature needs b > 0 and a finite tilt >= 0"));
        }
        let alpha = abs_m as f64;
        let (t, w) = gauss_laguerre(n_nodes, alpha)?;
        let scale = 1.0 + tilt;
        let mut nodes_s = Vec::with_capacity(n_nodes);
        let mut weights = Vec::with_capacity(n_nodes);
        for (ti, wi) in t.iter().zip(&w) {
            let s = ti / scale;
            nodes_s.push(s);
            weights.push((wi.ln() - (alpha + 1.0) * scale.ln() + tilt * s).exp());
        }
        let nodes_rho = nodes_s.iter().map(|s| (2.0 * s / b).sqrt()).collect();
        Ok(RadialQuadrature { b, abs_m, tilt, nodes_s, nodes_rho, weights, exact_degree: 2 * n_nodes - 1 })
    }

    pub fn len(&self) -> usize {
        self.nodes_s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes_s.is_empty()
    }
}

fn pair_prefactor(na: usize, nb: usize, am: usize) -> f64 {
    (0.5 * (ln_factorial(na) + ln_factorial(nb) - ln_factorial(na + am) - ln_factorial(nb + am)) + ln_factorial(am))
        .exp()
}

/// Matrix `R_ab = int phi_{q_a,m} phi_{q_b,m} W rho d rho` over the Landau
/// indices `qs` using a single quadrature rule.
pub fn radial_matrix<T: Scalar>(
    qs: &[usize],
    m: i64,
    quad: &RadialQuadrature,
    w: impl Fn(f64) -> T,
) -> Result<DMatrix<T>> {
    let mm = m_minus(m);
    let am = m.unsigned_abs() as usize;
    if am != quad.abs_m {
        return Err(Error::domain("quadrature built for a different |m|"));
    }
    if let Some(&q) = qs.iter().find(|&&q| q < mm) {
        return Err(Error::domain(format!("q = {q} below m_- = {mm}")));
    }
    let n_max = qs.iter().map(|q| q - mm).max().unwrap_or(0);
    let k = qs.len();
    let mut out = DMatrix::from_element(k, k, T::zero());
    for (i, &s) in quad.nodes_s.iter().enumerate() {
        let lag = laguerre_all(n_max, am as f64, s);
        let wv = w(quad.nodes_rho[i]) * T::from_real(quad.weights[i]);
        for a in 0..k {
            let la = lag[qs[a] - mm];
            for bb in a..k {
                let v = wv * T::from_real(la * lag[qs[bb] - mm]);
                out[(a, bb)] += v;
            }
        }
    }
    for a in 0..k {
        for bb in a..k {
            let pf = T::from_real(pair_prefactor(qs[a] - mm, qs[bb] - mm, am));
            let v = out[(a, bb)] * pf;
            out[(a, bb)] = v;
            out[(bb, a)] = v;
        }
    }
    Ok(out)
}

/// `int phi_{q_a,m} phi_{q_b,m} W rho d rho` with the given rule.
pub fn radial_overlap<T: Scalar>(
    qa: usize,
    qb: usize,
    m: i64,
    quad: &RadialQuadrature,
    w: impl Fn(f64) -> T,
) -> Result<T> {
    let r = radial_matrix(&[qa, qb], m, quad, w)?;
    Ok(r[(0, 1)])
}

/// Radial matrix with an accuracy check: the rule is doubled until two
/// successive results agree to `tol` relative to the largest entry.
pub fn radial_matrix_checked<T: Scalar>(
    qs: &[usize],
    m: i64,
    b: f64,
    tilt: f64,
    tol: f64,
    w: impl Fn(f64) -> T,
) -> Result<DMatrix<T>> {
    let am = m.unsigned_abs() as usize;
    let n_max = qs.iter().copied().max().unwrap_or(0);
    let mut n_nodes = (n_max + 24).max(32);
    let mut prev = radial_matrix(qs, m, &RadialQuadrature::new(b, am, n_nodes, tilt)?, &w)?;
    for _ in 0..4 {
        n_nodes *= 2;
        let cur = radial_matrix(qs, m, &RadialQuadrature::new(b, am, n_nodes, tilt)?, &w)?;
        let scale = cur.iter().map(|v| v.modulus()).fold(0.0, f64::max).max(1e-300);
        let diff = cur.iter().zip(prev.iter()).map(|(a, b)| (*a - *b).modulus()).fold(0.0, f64::max);
        if diff <= tol * scale {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::accuracy(format!("radial quadrature not converged with {n_nodes} nodes for m = {m}")))
}

/// Spherical Bessel functions `j_0(x) .. j_{n_max}(x)` for `x >= 0`.
pub fn spherical_bessel_j(n_max: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; n_max + 1];
    let ax = x.abs();
    if ax < 1e-2 {
        // two-term series: x^n / (2n+1)!! (1 - x^2 / (2(2n+3)))
        let mut lead = 1.0;
        for (n, o) in out.iter_mut().enumerate() {
            if n > 0 {
                lead *= ax / (2 * n + 1) as f64;
            }
            let x2 = ax * ax;
            *o = lead * (1.0 - x2 / (2.0 * (2 * n + 3) as f64) + x2 * x2 / (8.0 * ((2 * n + 3) * (2 * n + 5)) as f64));
        }
    } else if ax > n_max as f64 + 1.0 {
        out[0] = ax.sin() / ax;
        if n_max > 0 {
            out[1] = ax.sin() / (ax * ax) - ax.cos() / ax;
        }
        for n in 1..n_max {
            out[n + 1] = (2 * n + 1) as f64 / ax * out[n] - out[n - 1];
        }
    } else {
        let start = n_max + 20 + ax as usize;
        let mut jp1 = 0.0;
        let mut j = 1e-280;
        let mut tmp = vec![0.0; start + 1];
        tmp[start] = j;
        for n in (1..=start).rev() {
            let jm1 = (2 * n + 1) as f64 / ax * j - jp1;
            jp1 = j;
            j = jm1;
            tmp[n - 1] = j;
            if j.abs() > 1e250 {
                for t in tmp.iter_mut().skip(n - 1) {
                    *t *= 1e-250;
                }
                j *= 1e-250;
                jp1 *= 1e-250;
            }
        }
        let j0 = ax.sin() / ax;
        let j1 = ax.sin() / (ax * ax) - ax.cos() / ax;
        let scale = if j0.abs() > j1.abs() { j0 / tmp[0] } else { j1 / tmp[1] };
        for n in 0..=n_max {
            out[n] = tmp[n] * scale;
        }
    }
    if x < 0.0 {
        for (n, o) in out.iter_mut().enumerate() {
            if n % 2 == 1 {
                *o = -*o;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recurrence_matches_series() {
        for n in 0..12 {
            for &alpha in &[0.0, 1.0, 3.0, 7.5] {
                for &s in &[0.0, 0.3, 2.0, 9.0] {
                    let a = laguerre_alpha(n, alpha, s);
                    let b = laguerre_series(n, alpha, s);
                    assert!((a - b).abs() <= 1e-10 * (1.0 + b.abs()), "n={n} a={alpha} s={s}");
                }
            }
        }
    }

    #[test]
    fn documented_laguerre_values() {
        assert_eq!(laguerre(0, 3, 7.2).unwrap(), 1.0);
        assert_eq!(laguerre(1, 0, 2.0).unwrap(), -1.0);
        let rec = laguerre(5, 2, 1.3).unwrap();
        assert!((rec - laguerre_series(5, 2.0, 1.3)).abs() < 1e-13);
        assert!(laguerre(1, -2, 0.5).is_err());
    }

    #[test]
    fn ground_mode_is_gaussian_and_first_excited_changes_sign() {
        for rho in [0.0, 0.5, 2.0] {
            let v = landau_radial(0, 0, 1.0, rho).unwrap();
            assert!((v - (-rho * rho / 4.0f64).exp()).abs() < 1e-15);
        }
        let root = 2f64.sqrt();
        assert!(landau_radial(1, 0, 1.0, root - 1e-6).unwrap() > 0.0);
        assert!(landau_radial(1, 0, 1.0, root + 1e-6).unwrap() < 0.0);
        assert!(landau_radial(0, -1, 1.0, 0.5).is_err());
        for m in [-3i64, 0, 2] {
            assert!(landau_radial(m_minus(m) + 2, m, 1.0, 1e-3).unwrap() > 0.0);
        }
    }

    #[test]
    fn negative_order_identity() {
        // L_q^{(-k)}(s) = (-s)^k (q-k)!/q! L_{q-k}^{(k)}(s)
        for q in 2..6usize {
            for k in 1..=q {
                let s = 1.7;
                let lhs = laguerre_series(q, -(k as f64), s);
                let ratio = (ln_factorial(q - k) - ln_factorial(q)).exp();
                let rhs = (-s).powi(k as i32) * ratio * laguerre_alpha(q - k, k as f64, s);
                assert!((lhs - rhs).abs() < 1e-11 * (1.0 + rhs.abs()));
                let signed = laguerre(q, -(k as i64), s).unwrap();
                assert!((signed - lhs).abs() < 1e-11 * (1.0 + lhs.abs()));
            }
        }
    }

    #[test]
    fn radial_functions_are_orthonormal() {
        let b = 1.3;
        for m in [-2i64, 0, 3] {
            let qs: Vec<usize> = (m_minus(m)..m_minus(m) + 4).collect();
            let quad = RadialQuadrature::new(b, m.unsigned_abs() as usize, 20, 0.0).unwrap();
            let r = radial_matrix(&qs, m, &quad, |_| 1.0).unwrap();
            for a in 0..4 {
                for c in 0..4 {
                    let e = if a == c { 1.0 } else { 0.0 };
                    assert!((r[(a, c)] - e).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn quadrature_overlap_matches_pointwise_functions() {
        // trapezoid in rho on the explicit eigenfunctions
        let b = 0.8;
        let m = -1;
        let (qa, qb) = (1, 3);
        let h = 1e-3;
        let mut direct = 0.0;
        for i in 1..20000 {
            let rho = i as f64 * h;
            let w = (-0.3 * rho * rho).exp() / (1.0 + rho * rho);
            direct += h * rho * w * landau_radial(qa, m, b, rho).unwrap() * landau_radial(qb, m, b, rho).unwrap();
        }
        let quad = RadialQuadrature::new(b, 1, 60, 0.0).unwrap();
        let v = radial_overlap(qa, qb, m, &quad, |rho| (-0.3 * rho * rho).exp() / (1.0 + rho * rho)).unwrap();
        assert!((v - direct).abs() < 1e-7, "{v} vs {direct}");
    }

    #[test]
    fn gaussian_weight_closed_form() {
        // int phi_{0,m}^2 e^{-mu rho^2} rho d rho = (b/(b+2mu))^{m+1}
        for &(b, mu) in &[(1.0, 0.5), (2.0, 1.0)] {
            for m in [0i64, 5, 40] {
                let quad = RadialQuadrature::new(b, m as usize, 8, 2.0 * mu / b).unwrap();
                let v = radial_overlap(0, 0, m, &quad, |rho| (-mu * rho * rho).exp()).unwrap();
                let exact = (b / (b + 2.0 * mu)).powi(m as i32 + 1);
                assert!(((v - exact) / exact).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn spherical_bessel_closed_forms() {
        for &x in &[1e-3, 0.5, 3.0, 17.0, 250.0] {
            let j = spherical_bessel_j(6, x);
            let j2 = (3.0 / (x * x) - 1.0) * x.sin() / x - 3.0 * x.cos() / (x * x);
            assert!((j[0] - x.sin() / x).abs() < 1e-14);
            assert!((j[2] - j2).abs() < 1e-12 * (1.0 + 1.0 / x), "x={x}: {} vs {}", j[2], j2);
        }
        // Legendre integral identity: int_{-1}^{1} P_n(u) e^{-i w u} du = 2 (-i)^n j_n(w)
        let (u, w) = gauss_legendre(40);
        let om = 2.7;
        let j = spherical_bessel_j(3, om);
        let p3 = |x: f64| 0.5 * (5.0 * x * x * x - 3.0 * x);
        let re: f64 = u.iter().zip(&w).map(|(x, wt)| wt * p3(*x) * (om * x).cos()).sum();
        let im: f64 = u.iter().zip(&w).map(|(x, wt)| -wt * p3(*x) * (om * x).sin()).sum();
        assert!(re.abs() < 1e-13);
        assert!((im - 2.0 * j[3]).abs() < 1e-13);
    }

    #[test]
    fn legendre_rule_integrates_polynomials() {
        let (x, w) = gauss_legendre(7);
        let v: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(12)).sum();
        assert!((v - 2.0 / 13.0).abs() < 1e-14);
    }
}
