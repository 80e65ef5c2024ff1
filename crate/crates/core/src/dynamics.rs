//! Smoothed autocorrelation `<e^{-i H_kappa t} g(H_kappa) Phi, Phi>` of an
//! embedded eigenvector under the perturbed evolution and exponential fits
//! to it.
//!
//! The spectral density of `Phi` is taken from the dilated resolvent,
//! `rho(E) = Im <(H - E - i0)^{-1} Phi, Phi> / pi`, so the truncation behaves
//! like the infinite system (outgoing waves are absorbed by the complex
//! scaling rather than reflected at the box ends). The time transform of
//! `g rho` uses Filon quadrature on adaptively bisected panels: the density
//! is interpolated by quartics and the oscillatory factor is integrated
//! exactly, so the error is bounded by the interpolation error uniformly in
//! `t`.

use crate::error::{Error, Result};
use crate::linalg::BandedMatrix;
use crate::operators::{
    dilated_bound_state, embedded_eigenpair, AssembledOperator, BasisTruncation, LandauProblem, OperatorFamily,
};
use crate::potential::smooth_step;
use crate::resonance::{find_eigenvalue_from, RESIDUAL_TOL};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// `C^inf` bump equal to 1 on `[c - delta/2, c + delta/2]` and 0 outside
/// `(c - delta, c + delta)`. On the shoulders, with
/// `s = (delta - |E - c|) / (delta / 2)` and `f(u) = exp(-1/u)`,
/// `g = f(s) / (f(s) + f(1 - s))`.
pub fn smooth_cutoff(energy: f64, center: f64, delta: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::domain(format!("cutoff half-width must be positive, got {delta}")));
    }
    Ok(smooth_step((delta - (energy - center).abs()) / (0.5 * delta)))
}

/// Default cutoff half-width: half of the largest window
/// `min(-lambda/2, (2b + lambda)/2)` around the level.
pub fn default_window(problem: &LandauProblem, lambda: f64) -> f64 {
    0.5 * (-lambda / 2.0).min((2.0 * problem.b + lambda) / 2.0)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AutocorrelationSeries {
    pub kappa: f64,
    pub times: Vec<f64>,
    pub values: Vec<Complex64>,
    /// Centre and half-width of the cutoff `g`.
    pub center: f64,
    pub delta: f64,
    /// Mean energy of `g rho`; `values * e^{i E_ref t}` varies slowly.
    pub reference_energy: f64,
    /// Bound on `int |g rho - interpolant|`, which bounds the error of every
    /// value.
    pub error_bound: f64,
    /// Linear solves spent on the density.
    pub density_evaluations: usize,
    /// Set when late values fall to the level of `error_bound`.
    pub warning: Option<String>,
}

impl AutocorrelationSeries {
    /// `values(t) e^{i E_ref t}`.
    pub fn demodulated(&self) -> Vec<Complex64> {
        self.times
            .iter()
            .zip(&self.values)
            .map(|(t, v)| v * Complex64::from_polar(1.0, self.reference_energy * t))
            .collect()
    }
}

/// Options for the density integration.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct DensityOptions {
    pub theta: Complex64,
    /// Target for `int |g rho - interpolant|`.
    pub tolerance: f64,
    pub initial_panels: usize,
    /// Cap on cutoff-density evaluations in the panel refinement.
    pub max_evaluations: usize,
}

impl Default for DensityOptions {
    fn default() -> Self {
        DensityOptions {
            theta: Complex64::new(0.0, 0.3),
            tolerance: 1e-9,
            initial_panels: 32,
            max_evaluations: 4_000_000,
        }
    }
}

/// Quartic panel on five equally spaced nodes.
#[derive(Clone, Copy, Debug)]
struct Panel {
    a: f64,
    b: f64,
    f: [f64; 5],
}

impl Panel {
    fn nodes(a: f64, b: f64) -> [f64; 5] {
        let h = 0.25 * (b - a);
        [a, a + h, a + 2.0 * h, a + 3.0 * h, b]
    }

    /// Interpolation-error estimate: deviation of the two midpoints from the
    /// quadratic through the outer and centre nodes, times the width.
    fn error(&self) -> f64 {
        let f = &self.f;
        let quad = |u: f64| {
            // quadratic through u = -1, 0, 1
            f[2] + 0.5 * (f[4] - f[0]) * u + 0.5 * (f[4] - 2.0 * f[2] + f[0]) * u * u
        };
        let e = (f[1] - quad(-0.5)).abs().max((f[3] - quad(0.5)).abs());
        e * (self.b - self.a)
    }

    fn integral(&self) -> f64 {
        // Boole's rule
        let f = &self.f;
        (self.b - self.a) / 90.0 * (7.0 * (f[0] + f[4]) + 32.0 * (f[1] + f[3]) + 12.0 * f[2])
    }

    fn first_moment(&self) -> f64 {
        let h = 0.25 * (self.b - self.a);
        let w = [7.0, 32.0, 12.0, 32.0, 7.0];
        (0..5).map(|i| w[i] * self.f[i] * (self.a + h * i as f64)).sum::<f64>() * (self.b - self.a) / 90.0
    }
}

/// `M_k(w) = int_{-1}^{1} u^k e^{-i w u} du` for `k = 0..=4`.
fn moments(w: f64) -> [Complex64; 5] {
    let mut m = [Complex64::new(0.0, 0.0); 5];
    if w.abs() < 4.0 {
        // power series; even/odd parity kills half the terms
        let iw = Complex64::new(0.0, -w);
        for (k, slot) in m.iter_mut().enumerate() {
            let mut term = Complex64::new(1.0, 0.0);
            let mut total = Complex64::new(0.0, 0.0);
            for n in 0..80 {
                if (k + n) % 2 == 0 {
                    total += term * (2.0 / (k + n + 1) as f64);
                }
                term = term * iw / (n + 1) as f64;
                if term.norm() < 1e-18 {
                    break;
                }
            }
            *slot = total;
        }
    } else {
        let iw = Complex64::new(0.0, -w);
        let ep = iw.exp();
        let em = (-iw).exp();
        // M_k = [u^k e^{-iwu} / (-iw)]_{-1}^{1} - k / (-iw) M_{k-1}
        m[0] = (ep - em) / iw;
        for k in 1..5 {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            m[k] = (ep - sign * em) / iw - (k as f64) / iw * m[k - 1];
        }
    }
    m
}

/// Lagrange weights `int_{-1}^{1} l_j(u) e^{-i w u} du` on the nodes
/// `u = -1, -1/2, 0, 1/2, 1`.
fn filon_weights(w: f64) -> [Complex64; 5] {
    // monomial coefficients of the Lagrange basis: row j is l_j
    const L: [[f64; 5]; 5] = [
        [0.0, 1.0 / 6.0, -1.0 / 6.0, -2.0 / 3.0, 2.0 / 3.0],
        [0.0, -4.0 / 3.0, 8.0 / 3.0, 4.0 / 3.0, -8.0 / 3.0],
        [1.0, 0.0, -5.0, 0.0, 4.0],
        [0.0, 4.0 / 3.0, 8.0 / 3.0, -4.0 / 3.0, -8.0 / 3.0],
        [0.0, -1.0 / 6.0, -1.0 / 6.0, 2.0 / 3.0, 2.0 / 3.0],
    ];
    let m = moments(w);
    let mut out = [Complex64::new(0.0, 0.0); 5];
    for j in 0..5 {
        out[j] = (0..5).map(|k| L[j][k] * m[k]).sum();
    }
    out
}

/// Filon transform `int g rho e^{-i (E - E_ref) t} dE` over all panels.
fn transform(panels: &[Panel], e_ref: f64, t: f64) -> Complex64 {
    let mut total = Complex64::new(0.0, 0.0);
    for p in panels {
        let c = 0.5 * (p.a + p.b);
        let half = 0.5 * (p.b - p.a);
        let w = filon_weights(t * half);
        let s: Complex64 = w.iter().zip(&p.f).map(|(a, b)| a * b).sum();
        total += s * half * Complex64::from_polar(1.0, -(c - e_ref) * t);
    }
    total
}

/// `<(M - E)^{-1} Phi, Phi>` by one banded solve.
fn sandwich(matrix: &BandedMatrix<Complex64>, phi: &[Complex64], h: f64, e: f64) -> Result<Complex64> {
    let mut a = matrix.clone();
    a.add_diagonal(-Complex64::new(e, 0.0));
    let sol = a.lu()?.solve(phi);
    Ok(h * phi.iter().zip(&sol).map(|(x, y)| x * y).sum::<Complex64>())
}

/// Barycentric interpolant on Chebyshev points of the second kind.
struct Chebyshev {
    nodes: Vec<f64>,
    values: Vec<Complex64>,
}

impl Chebyshev {
    fn nodes(center: f64, half: f64, n: usize) -> Vec<f64> {
        (0..=n).map(|k| center + half * (PI * k as f64 / n as f64).cos()).collect()
    }

    fn eval(&self, x: f64) -> Complex64 {
        let n = self.nodes.len() - 1;
        let mut num = Complex64::new(0.0, 0.0);
        let mut den = 0.0;
        for (k, (&xk, &fk)) in self.nodes.iter().zip(&self.values).enumerate() {
            let d = x - xk;
            if d == 0.0 {
                return fk;
            }
            let mut w = if k % 2 == 0 { 1.0 } else { -1.0 };
            if k == 0 || k == n {
                w *= 0.5;
            }
            num += fk * (w / d);
            den += w / d;
        }
        num / den
    }
}

/// Spectral density of `Phi` on the cutoff support. The dilated resolvent
/// sandwich is split as `R / (w - E) + S(E)` with `w` the resonance and `S`
/// analytic near the support, so only `S` needs linear solves and the sharp
/// Lorentzian is evaluated in closed form.
struct Density {
    residue: Complex64,
    pole: Complex64,
    smooth: Chebyshev,
    center: f64,
    delta: f64,
}

impl Density {
    fn g_rho(&self, e: f64) -> f64 {
        let g = smooth_step((self.delta - (e - self.center).abs()) / (0.5 * self.delta));
        if g == 0.0 {
            return 0.0;
        }
        let f = self.residue / (self.pole - e) + self.smooth.eval(e);
        g * f.im / PI
    }
}

/// Largest Chebyshev degree tried for the smooth part.
const MAX_DEGREE: usize = 192;

fn build_density(
    op: &AssembledOperator,
    phi: &[Complex64],
    h: f64,
    center: f64,
    delta: f64,
    tolerance: f64,
) -> Result<(Density, f64, usize)> {
    let res = find_eigenvalue_from(op, Complex64::new(center, 0.0), phi, RESIDUAL_TOL)?;
    let matrix = &op.matrix;
    let u = &res.vector;
    let uu: Complex64 = u.iter().map(|x| x * x).sum();
    let pu: Complex64 = phi.iter().zip(u).map(|(x, y)| x * y).sum();
    if uu.norm() < 1e-12 {
        return Err(Error::Solver("resonance eigenvector is quasi-null in the bilinear form".into()));
    }
    let residue = h * pu * pu / uu;
    let pole = res.value;
    let smooth_at = |e: f64| -> Result<Complex64> { Ok(sandwich(matrix, phi, h, e)? - residue / (pole - e)) };
    // half of the budget goes to the interpolant
    let target = 0.5 * tolerance * PI / (2.0 * delta);
    let mut n = 24;
    let mut evaluations = 0;
    loop {
        let nodes = Chebyshev::nodes(center, delta, n);
        let values = nodes.par_iter().map(|&e| smooth_at(e)).collect::<Result<Vec<_>>>()?;
        let smooth = Chebyshev { nodes, values };
        let checks: Vec<f64> = (0..8)
            .map(|k| center + delta * (PI * (k as f64 * n as f64 / 8.0 + 0.5).floor().max(0.5) / n as f64).cos())
            .collect();
        let exact = checks.par_iter().map(|&e| smooth_at(e)).collect::<Result<Vec<_>>>()?;
        evaluations += n + 1 + checks.len();
        let err = checks.iter().zip(&exact).map(|(&e, v)| (smooth.eval(e) - v).norm()).fold(0.0, f64::max);
        if err <= target {
            let bound = err * 2.0 * delta / PI;
            return Ok((Density { residue, pole, smooth, center, delta }, bound, evaluations));
        }
        if 2 * n > MAX_DEGREE {
            return Err(Error::accuracy(format!(
                "smooth part of the spectral density not resolved at degree {n}: error {err:.2e}"
            )));
        }
        n *= 2;
    }
}

fn build_panels(density: &Density, options: &DensityOptions) -> Result<(Vec<Panel>, f64, usize)> {
    let (lo, hi) = (density.center - density.delta, density.center + density.delta);
    let width = hi - lo;
    let n0 = options.initial_panels.max(1);
    let mut pending: Vec<(f64, f64)> =
        (0..n0).map(|i| (lo + width * i as f64 / n0 as f64, lo + width * (i + 1) as f64 / n0 as f64)).collect();
    let mut done: Vec<Panel> = Vec::new();
    let mut evaluations = 0;
    let mut error = 0.0;
    // the other half of the budget goes to the panels
    let budget = 0.5 * options.tolerance;
    while !pending.is_empty() {
        evaluations += 5 * pending.len();
        if evaluations > options.max_evaluations {
            return Err(Error::accuracy(format!(
                "spectral density not resolved within {} evaluations",
                options.max_evaluations
            )));
        }
        let panels: Vec<Panel> = pending
            .par_iter()
            .map(|&(a, b)| {
                let x = Panel::nodes(a, b);
                Panel { a, b, f: x.map(|e| density.g_rho(e)) }
            })
            .collect();
        let mut next = Vec::new();
        for panel in panels {
            let err = panel.error();
            let allowed = budget * (panel.b - panel.a) / width;
            if err > allowed && (panel.b - panel.a) > 1e-13 * width {
                let m = 0.5 * (panel.a + panel.b);
                next.push((panel.a, m));
                next.push((m, panel.b));
            } else {
                error += err;
                done.push(panel);
            }
        }
        pending = next;
    }
    done.sort_by(|x, y| x.a.total_cmp(&y.a));
    Ok((done, error, evaluations))
}

/// Smoothed autocorrelation at the given times, with cutoff `g` of
/// half-width `delta` centred on `2bq + lambda`.
pub fn autocorrelation(
    problem: &LandauProblem,
    basis: &BasisTruncation,
    q: usize,
    kappa: f64,
    times: &[f64],
    delta: f64,
) -> Result<AutocorrelationSeries> {
    autocorrelation_with(problem, basis, q, kappa, times, delta, &DensityOptions::default())
}

pub fn autocorrelation_with(
    problem: &LandauProblem,
    basis: &BasisTruncation,
    q: usize,
    kappa: f64,
    times: &[f64],
    delta: f64,
    options: &DensityOptions,
) -> Result<AutocorrelationSeries> {
    if times.iter().any(|t| !(*t >= 0.0)) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::domain("times must be ascending and nonnegative"));
    }
    let pair = embedded_eigenpair(problem, basis, q)?;
    let center = pair.energy;
    let g0 = smooth_cutoff(center, center, delta)?;
    let window = default_window(problem, pair.lambda);
    if delta > 2.0 * window {
        return Err(Error::domain(format!(
            "cutoff half-width {delta} reaches past the thresholds (at most {})",
            2.0 * window
        )));
    }
    if kappa == 0.0 || problem.perturbation.is_zero() {
        // Phi is an eigenvector: the measure is a point mass
        let values = times.iter().map(|t| g0 * Complex64::from_polar(1.0, -center * t)).collect();
        return Ok(AutocorrelationSeries {
            kappa,
            times: times.to_vec(),
            values,
            center,
            delta,
            reference_energy: center,
            error_bound: 0.0,
            density_evaluations: 0,
            warning: None,
        });
    }
    let family = OperatorFamily::new(problem, basis, options.theta)?;
    let dil = dilated_bound_state(problem, basis, options.theta, &pair.bound_state)?;
    let phi = basis.embed(pair.mode, &dil.psi);
    let op = family.at(kappa);
    let (density, smooth_error, solves) = build_density(&op, &phi, basis.grid.h(), center, delta, options.tolerance)?;
    let (panels, panel_error, _) = build_panels(&density, options)?;
    let error_bound = smooth_error + panel_error;
    let mass: f64 = panels.iter().map(Panel::integral).sum();
    let reference_energy = if mass > 0.0 { panels.iter().map(Panel::first_moment).sum::<f64>() / mass } else { center };
    let values: Vec<Complex64> = times
        .par_iter()
        .map(|&t| transform(&panels, reference_energy, t) * Complex64::from_polar(1.0, -reference_energy * t))
        .collect();
    let warning =
        values.iter().zip(times).find(|(v, _)| v.norm() < 100.0 * error_bound).map(|(_, t)| {
            format!("values from t = {t} are within 100x of the quadrature error bound {error_bound:.2e}")
        });
    Ok(AutocorrelationSeries {
        kappa,
        times: times.to_vec(),
        values,
        center,
        delta,
        reference_energy,
        error_bound,
        density_evaluations: solves,
        warning,
    })
}

/// `values(t) ~ a e^{-i omega t - Gamma t / 2}` on a time window.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct DecayFit {
    pub a: Complex64,
    pub gamma: f64,
    pub omega: f64,
    /// Largest `|values - fit|` on the window.
    pub background_norm: f64,
    /// Quadratic coefficient of `ln|values|` times the squared window
    /// length; near zero for a clean exponential.
    pub curvature: f64,
    pub window: (f64, f64),
}

fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (my - slope * mx, slope)
}

/// Curvature tolerance of [`fit_decay`].
pub const CURVATURE_TOL: f64 = 0.05;

/// Least-squares fit of `ln|values|` and of the unwrapped demodulated phase,
/// both linear in `t`, over `window`.
pub fn fit_decay(series: &AutocorrelationSeries, window: (f64, f64)) -> Result<DecayFit> {
    let demod = series.demodulated();
    let idx: Vec<usize> =
        (0..series.times.len()).filter(|&i| series.times[i] >= window.0 && series.times[i] <= window.1).collect();
    if idx.len() < 4 {
        return Err(Error::domain("decay fit needs at least four samples in the window"));
    }
    let ts: Vec<f64> = idx.iter().map(|&i| series.times[i]).collect();
    if demod.iter().any(|v| v.norm() == 0.0) {
        return Err(Error::FitQuality("autocorrelation vanishes in the window".into()));
    }
    let logs: Vec<f64> = idx.iter().map(|&i| demod[i].norm().ln()).collect();
    let mut phases = Vec::with_capacity(idx.len());
    let mut prev = demod[idx[0]].arg();
    let mut offset = 0.0;
    for &i in &idx {
        let p = demod[i].arg();
        let mut d = p - prev;
        while d > PI {
            d -= 2.0 * PI;
            offset -= 2.0 * PI;
        }
        while d < -PI {
            d += 2.0 * PI;
            offset += 2.0 * PI;
        }
        phases.push(p + offset);
        prev = p;
    }
    let (la, ls) = linear_fit(&ts, &logs);
    let (pa, ps) = linear_fit(&ts, &phases);
    let gamma = -2.0 * ls;
    let omega = series.reference_energy - ps;
    let a = Complex64::from_polar(la.exp(), pa);

    // curvature of ln|values| from a quadratic fit in the scaled time
    let t0 = ts[0];
    let len = (ts[ts.len() - 1] - t0).max(1e-300);
    let us: Vec<f64> = ts.iter().map(|t| (t - t0) / len).collect();
    let design = nalgebra::DMatrix::from_fn(us.len(), 3, |i, j| us[i].powi(j as i32));
    let y = nalgebra::DVector::from_column_slice(&logs);
    let coef = design.svd(true, true).solve(&y, 1e-14).map_err(|e| Error::FitQuality(e.to_string()))?;
    let curvature = coef[2];

    let background_norm = idx
        .iter()
        .map(|&i| {
            let t = series.times[i];
            let model = a * Complex64::from_polar((-0.5 * gamma * t).exp(), -omega * t);
            (series.values[i] - model).norm()
        })
        .fold(0.0, f64::max);
    let fit = DecayFit { a, gamma, omega, background_norm, curvature, window };
    if curvature.abs() > CURVATURE_TOL {
        return Err(Error::FitQuality(format!(
            "ln|values| bends by {curvature:.3e} over [{}, {}]; not an exponential window",
            window.0, window.1
        )));
    }
    Ok(fit)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn direct(k: usize, w: f64) -> Complex64 {
        // composite Simpson with many nodes
        let n = 20_000;
        let h = 2.0 / n as f64;
        let f = |u: f64| u.powi(k as i32) * Complex64::from_polar(1.0, -w * u);
        let mut s = f(-1.0) + f(1.0);
        for i in 1..n {
            s += f(-1.0 + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }

    #[test]
    fn moments_match_direct_quadrature_on_both_branches() {
        for w in [0.0, 0.3, 3.9, 4.1, 25.0] {
            let m = moments(w);
            for k in 0..5 {
                assert!((m[k] - direct(k, w)).norm() < 1e-11, "k {k} w {w}");
            }
        }
    }

    #[test]
    fn filon_weights_reduce_to_boole_at_zero_frequency() {
        let w = filon_weights(0.0);
        let boole = [14.0, 64.0, 24.0, 64.0, 14.0];
        for j in 0..5 {
            assert!((w[j] - boole[j] / 90.0).norm() < 1e-14);
        }
    }

    #[test]
    fn cutoff_shape() {
        assert_eq!(smooth_cutoff(1.0, 1.0, 0.2).unwrap(), 1.0);
        assert_eq!(smooth_cutoff(1.1, 1.0, 0.2).unwrap(), 1.0);
        assert_eq!(smooth_cutoff(1.2, 1.0, 0.2).unwrap(), 0.0);
        assert!((smooth_cutoff(1.15, 1.0, 0.2).unwrap() - 0.5).abs() < 1e-12);
        assert!(smooth_cutoff(0.0, 0.0, 0.0).is_err());
    }
}
