//! Transverse profiles `U(rho) = int V(rho, x) psi(x)^2 dx`, the diagonal
//! Berezin-Toeplitz spectra `<U phi_{q,m}, phi_{q,m}>`, their counting
//! functions and leading-order counting laws, and the accumulation of
//! discrete eigenvalues of `H -+ V` at the lowest isolated level.

use crate::error::{Error, Result};
use crate::fgr::trapezoid;
use crate::operators::{assemble, BasisTruncation, LandauProblem};
use crate::potential::{PerturbationProfile, RadialFactor};
use crate::schrodinger1d::{bound_states_with, BoundState};
use crate::specfun::{gauss_legendre, laguerre_alpha, ln_factorial, m_minus};
use crate::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::OnceLock;

/// Largest angular momentum used when choosing `m_max` automatically.
pub const M_MAX_CAP: i64 = 4000;

/// Width parameter `epsilon` of the counting sandwich.
pub const SANDWICH_EPSILON: f64 = 0.1;

const SAMPLES: usize = 4000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum DecayClass {
    /// `U ~ u0 rho^{-alpha}`.
    Power {
        alpha: f64,
        u0: f64,
    },
    /// `ln U ~ -mu rho^{2 beta}`.
    Exponential {
        beta: f64,
        mu: f64,
    },
    /// `U = 0` for `rho >= radius`; `lower_bound` is `min U` on
    /// `rho <= radius / 2`.
    Compact {
        radius: f64,
        lower_bound: f64,
    },
    Unclassified,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileTerm {
    pub coefficient: f64,
    pub radial: RadialFactor,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TransverseProfile {
    /// `U(rho) = sum c_i W_i(rho)`.
    pub terms: Vec<ProfileTerm>,
    pub rho: Vec<f64>,
    pub samples: Vec<f64>,
    pub decay_class: DecayClass,
    pub b: f64,
}

impl TransverseProfile {
    /// Profile given directly by its radial terms.
    pub fn from_terms(terms: Vec<ProfileTerm>, b: f64) -> Result<Self> {
        if !(b > 0.0) || !b.is_finite() {
            return Err(Error::domain("field strength must be positive"));
        }
        if terms.iter().any(|t| !t.coefficient.is_finite()) {
            return Err(Error::domain("profile coefficients must be finite"));
        }
        let rho_max = 40.0 / b.sqrt();
        let rho: Vec<f64> = (0..=SAMPLES).map(|k| rho_max * k as f64 / SAMPLES as f64).collect();
        let eval = |r: f64| terms.iter().map(|t| t.coefficient * t.radial.eval(r)).sum::<f64>();
        let samples: Vec<f64> = rho.iter().map(|&r| eval(r)).collect();
        let decay_class = classify_tail(&rho, &samples);
        Ok(TransverseProfile { terms, rho, samples, decay_class, b })
    }

    /// Single-term profile `c W(rho)`.
    pub fn radial(coefficient: f64, radial: RadialFactor, b: f64) -> Result<Self> {
        Self::from_terms(vec![ProfileTerm { coefficient, radial }], b)
    }

    pub fn eval(&self, rho: f64) -> f64 {
        self.terms.iter().map(|t| t.coefficient * t.radial.eval(rho)).sum()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.samples.iter().all(|&u| u >= 0.0)
    }

    pub fn is_nonpositive(&self) -> bool {
        self.samples.iter().all(|&u| u <= 0.0)
    }

    /// Area of `{x in R^2 : |U(|x|)| > eta}`.
    pub fn superlevel_area(&self, eta: f64) -> Result<f64> {
        if !(eta > 0.0) {
            return Err(Error::domain("level must be positive"));
        }
        let f = |r: f64| self.eval(r).abs() - eta;
        let mut rho = self.rho.clone();
        // follow a slowly decaying tail past the sampled range
        let mut last = *rho.last().unwrap();
        while f(last) > 0.0 {
            if last > 1e8 {
                return Err(Error::Range(format!("superlevel set at {eta:.3e} is unbounded in the tested range")));
            }
            let next = 2.0 * last;
            let step = (next - last) / SAMPLES as f64;
            rho.extend((1..=SAMPLES).map(|k| last + step * k as f64));
            last = next;
        }
        let bisect = |mut a: f64, mut b: f64| {
            let fa = f(a);
            for _ in 0..80 {
                let m = 0.5 * (a + b);
                if (f(m) > 0.0) == (fa > 0.0) {
                    a = m;
                } else {
                    b = m;
                }
            }
            0.5 * (a + b)
        };
        let mut area = 0.0;
        let mut inside_from = if f(rho[0]) > 0.0 { Some(rho[0]) } else { None };
        for w in rho.windows(2) {
            let (a, b) = (w[0], w[1]);
            let (ia, ib) = (f(a) > 0.0, f(b) > 0.0);
            if ia != ib {
                let r = bisect(a, b);
                match inside_from.take() {
                    Some(r0) => area += PI * (r * r - r0 * r0),
                    None => inside_from = Some(r),
                }
            }
        }
        Ok(area)
    }
}

fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let icpt = my - slope * mx;
    let rms = (xs.iter().zip(ys).map(|(x, y)| (icpt + slope * x - y).powi(2)).sum::<f64>() / n).sqrt();
    (icpt, slope, rms)
}

/// Tail regression of `ln|U|` against `ln rho` (power) and against
/// `rho^{2 beta}` (exponential, `beta` by golden-section search) over the
/// last decade of resolved samples; compact support is recognized by an
/// abrupt run of exact zeros.
fn classify_tail(rho: &[f64], u: &[f64]) -> DecayClass {
    let umax = u.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if umax == 0.0 || !umax.is_finite() {
        return DecayClass::Unclassified;
    }
    let last_nonzero = match u.iter().rposition(|v| *v != 0.0) {
        Some(k) => k,
        None => return DecayClass::Unclassified,
    };
    if last_nonzero + 1 < u.len() && u[last_nonzero].abs() > 1e-100 * umax {
        let radius = rho[last_nonzero + 1];
        let lower_bound =
            rho.iter().zip(u).filter(|(r, _)| **r <= 0.5 * radius).map(|(_, v)| v.abs()).fold(f64::INFINITY, f64::min);
        return DecayClass::Compact { radius, lower_bound };
    }
    let hi = match u.iter().rposition(|v| v.abs() > 1e-250 * umax) {
        Some(k) => k,
        None => return DecayClass::Unclassified,
    };
    let rho_hi = rho[hi];
    let (xs, ys): (Vec<f64>, Vec<f64>) = rho[..=hi]
        .iter()
        .zip(&u[..=hi])
        .filter(|(r, v)| **r >= 0.1 * rho_hi && **r > 0.0 && **v != 0.0)
        .map(|(r, v)| (*r, v.abs().ln()))
        .unzip();
    if xs.len() < 10 {
        return DecayClass::Unclassified;
    }
    let logr: Vec<f64> = xs.iter().map(|r| r.ln()).collect();
    let (p_icpt, p_slope, p_rms) = linear_fit(&logr, &ys);
    let exp_fit = |beta: f64| {
        let t: Vec<f64> = xs.iter().map(|r| r.powf(2.0 * beta)).collect();
        linear_fit(&t, &ys)
    };
    let (mut lo, mut hi_b) = (0.25f64, 4.0f64);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let a = hi_b - g * (hi_b - lo);
        let b = lo + g * (hi_b - lo);
        if exp_fit(a).2 < exp_fit(b).2 {
            hi_b = b;
        } else {
            lo = a;
        }
    }
    let beta = 0.5 * (lo + hi_b);
    let (_, e_slope, e_rms) = exp_fit(beta);
    let spread = ys.iter().fold(f64::NEG_INFINITY, |a, &y| a.max(y)) - ys.iter().fold(f64::INFINITY, |a, &y| a.min(y));
    let good = 0.02 * spread.max(1e-300);
    if p_rms <= e_rms && p_rms < good && e_rms > 3.0 * p_rms && p_slope < 0.0 {
        DecayClass::Power { alpha: -p_slope, u0: p_icpt.exp() }
    } else if e_rms < p_rms && e_rms < good && p_rms > 3.0 * e_rms && e_slope < 0.0 {
        DecayClass::Exponential { beta, mu: -e_slope }
    } else {
        DecayClass::Unclassified
    }
}

/// `U(rho) = int V(rho, x) psi(x)^2 dx`, exact in `rho` for separable `V`
/// with the longitudinal integrals by the trapezoid rule on the bound-state
/// grid.
pub fn transverse_profile(v: &PerturbationProfile, psi: &BoundState, b: f64) -> Result<TransverseProfile> {
    v.validate()?;
    if (psi.norm() - 1.0).abs() > 1e-8 {
        return Err(Error::domain(format!("bound state must be normalized, norm = {}", psi.norm())));
    }
    let terms = v
        .terms
        .iter()
        .map(|t| {
            let w = trapezoid(&psi.grid, |i, x| t.longitudinal.eval(x) * psi.psi[i] * psi.psi[i]);
            ProfileTerm { coefficient: t.coefficient * w, radial: t.radial.clone() }
        })
        .collect();
    TransverseProfile::from_terms(terms, b)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ToeplitzSpectrum {
    pub q: usize,
    /// `eigenvalues[k]` belongs to `m = -q + k`.
    pub eigenvalues: Vec<f64>,
}

impl ToeplitzSpectrum {
    pub fn m_min(&self) -> i64 {
        -(self.q as i64)
    }

    pub fn m_max(&self) -> i64 {
        self.m_min() + self.eigenvalues.len() as i64 - 1
    }

    pub fn get(&self, m: i64) -> Option<f64> {
        let k = m - self.m_min();
        if k < 0 {
            return None;
        }
        self.eigenvalues.get(k as usize).copied()
    }

    /// `|eigenvalue|` at `m_max`; counts are trusted only above it.
    pub fn resolved_floor(&self) -> f64 {
        self.eigenvalues.last().map_or(f64::INFINITY, |v| v.abs())
    }
}

fn gl16() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(16))
}

fn gl_panel(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let (x, w) = gl16();
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    x.iter().zip(w).map(|(xi, wi)| wi * f(c + h * xi)).sum::<f64>() * h
}

/// Adaptive Gauss-Legendre with bisection on the given breakpoints.
fn integrate(f: impl Fn(f64) -> f64, breaks: &[f64], rel: f64) -> Result<f64> {
    let mut stack: Vec<(f64, f64, f64, usize)> =
        breaks.windows(2).filter(|w| w[1] > w[0]).map(|w| (w[0], w[1], gl_panel(&f, w[0], w[1]), 0)).collect();
    let estimate: f64 = stack.iter().map(|p| p.2.abs()).sum();
    let tol = rel * estimate.max(1e-300);
    let mut total = 0.0;
    while let Some((a, b, whole, depth)) = stack.pop() {
        let m = 0.5 * (a + b);
        let left = gl_panel(&f, a, m);
        let right = gl_panel(&f, m, b);
        let diff = (left + right - whole).abs();
        // the log-space density carries relative noise of about 1e-13 at large |m|
        let floor = 1e-12 * (left.abs() + right.abs());
        if diff <= tol * (b - a) / (breaks[breaks.len() - 1] - breaks[0]) || diff <= floor || depth > 40 {
            if depth > 40 {
                return Err(Error::accuracy(format!("radial integral not converged on [{a}, {b}]")));
            }
            total += left + right;
        } else {
            stack.push((a, m, left, depth + 1));
            stack.push((m, b, right, depth + 1));
        }
    }
    Ok(total)
}

fn radial_breakpoints(radial: &RadialFactor) -> Vec<f64> {
    match radial {
        RadialFactor::Compact { radius, smoothing } => vec![radius - smoothing, *radius],
        _ => vec![],
    }
}

/// `<U phi_{q,m}, phi_{q,m}>` in `L^2(rho d rho)`, integrated in
/// `s = b rho^2 / 2` against `n! / (n + |m|)! s^|m| L_n^{(|m|)}(s)^2 e^{-s}`.
pub fn toeplitz_eigenvalue(u: &TransverseProfile, q: usize, m: i64) -> Result<f64> {
    let mm = m_minus(m);
    if q < mm {
        return Err(Error::domain(format!("q = {q} below m_- = {mm} for m = {m}")));
    }
    let am = m.unsigned_abs() as usize;
    let n = q - mm;
    let ln_pref = ln_factorial(n) - ln_factorial(n + am);
    let b = u.b;
    let density = |s: f64| {
        let lag = laguerre_alpha(n, am as f64, s);
        if lag == 0.0 {
            return 0.0;
        }
        let ln_pow = if am == 0 {
            0.0
        } else if s > 0.0 {
            am as f64 * s.ln()
        } else {
            return 0.0;
        };
        (ln_pref + ln_pow - s).exp() * lag * lag
    };
    let sc = (2 * n + am + 1) as f64;
    let spread = 16.0 * sc.sqrt();
    let lo = (sc - spread).max(0.0);
    let hi = sc + spread + 40.0;
    let mut breaks: Vec<f64> = (0..=16).map(|k| lo + (hi - lo) * k as f64 / 16.0).collect();
    for t in &u.terms {
        for r in radial_breakpoints(&t.radial) {
            let s = 0.5 * b * r * r;
            if s > lo && s < hi {
                breaks.push(s);
            }
        }
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let mut total = 0.0;
    for t in &u.terms {
        let f = |s: f64| density(s) * t.radial.eval((2.0 * s / b).sqrt());
        total += t.coefficient * integrate(f, &breaks, 1e-12)?;
    }
    Ok(total)
}

/// Toeplitz eigenvalues for `m = -q ..= m_max`.
pub fn toeplitz_eigenvalues(u: &TransverseProfile, q: usize, m_max: i64) -> Result<ToeplitzSpectrum> {
    let m_min = -(q as i64);
    if m_max < m_min {
        return Err(Error::domain(format!("m_max = {m_max} below -q = {m_min}")));
    }
    let eigenvalues =
        (m_min..=m_max).into_par_iter().map(|m| toeplitz_eigenvalue(u, q, m)).collect::<Result<Vec<_>>>()?;
    Ok(ToeplitzSpectrum { q, eigenvalues })
}

/// Smallest `m_max` whose eigenvalue falls below `eta_min / 10`, searched
/// up to [`M_MAX_CAP`].
pub fn default_m_max(u: &TransverseProfile, q: usize, eta_min: f64) -> Result<i64> {
    if !(eta_min > 0.0) {
        return Err(Error::domain("eta_min must be positive"));
    }
    let target = 0.1 * eta_min;
    let mut m = -(q as i64);
    let chunk = 64;
    while m <= M_MAX_CAP {
        let top = (m + chunk - 1).min(M_MAX_CAP);
        let vals = (m..=top).into_par_iter().map(|k| toeplitz_eigenvalue(u, q, k)).collect::<Result<Vec<_>>>()?;
        if let Some(k) = vals.iter().position(|v| v.abs() < target) {
            return Ok(m + k as i64);
        }
        m = top + 1;
    }
    Err(Error::Range(format!("eigenvalues stay above {target:.3e} up to m = {M_MAX_CAP}")))
}

/// Spectrum resolved down to `eta_min`.
pub fn toeplitz_spectrum_for(u: &TransverseProfile, q: usize, eta_min: f64) -> Result<ToeplitzSpectrum> {
    toeplitz_eigenvalues(u, q, default_m_max(u, q, eta_min)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountRow {
    pub eta: f64,
    pub n_plus: usize,
    pub n_minus: usize,
    pub n_star: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CountingFunction {
    pub q: usize,
    pub m_max: i64,
    pub rows: Vec<CountRow>,
}

fn check_level(spectrum: &ToeplitzSpectrum, eta: f64) -> Result<()> {
    if !(eta > 0.0) {
        return Err(Error::domain("eta must be positive"));
    }
    if eta <= spectrum.resolved_floor() {
        return Err(Error::Range(format!(
            "eta = {eta:.3e} is not above the resolved tail {:.3e} at m = {}",
            spectrum.resolved_floor(),
            spectrum.m_max()
        )));
    }
    Ok(())
}

/// `n_+(eta)`: number of eigenvalues above `eta`.
pub fn counting(spectrum: &ToeplitzSpectrum, eta: f64) -> Result<usize> {
    check_level(spectrum, eta)?;
    Ok(spectrum.eigenvalues.iter().filter(|&&v| v > eta).count())
}

/// `n_-(eta)`: number of eigenvalues below `-eta`.
pub fn counting_negative(spectrum: &ToeplitzSpectrum, eta: f64) -> Result<usize> {
    check_level(spectrum, eta)?;
    Ok(spectrum.eigenvalues.iter().filter(|&&v| v < -eta).count())
}

pub fn counting_function(spectrum: &ToeplitzSpectrum, etas: &[f64]) -> Result<CountingFunction> {
    let rows = etas
        .iter()
        .map(|&eta| {
            let n_plus = counting(spectrum, eta)?;
            let n_minus = counting_negative(spectrum, eta)?;
            Ok(CountRow { eta, n_plus, n_minus, n_star: n_plus + n_minus })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CountingFunction { q: spectrum.q, m_max: spectrum.m_max(), rows })
}

/// Exponential-class law: `(b / (2 mu^{1/beta})) |ln eta|^{1/beta}` for
/// `beta < 1`, `|ln eta| / ln(1 + 2 mu / b)` for `beta = 1` and
/// `(beta / (beta - 1)) |ln eta| / ln|ln eta|` for `beta > 1`.
pub fn exponential_law(beta: f64, mu: f64, b: f64, eta: f64) -> Result<f64> {
    if !(beta > 0.0) || !(mu > 0.0) || !(b > 0.0) {
        return Err(Error::domain("exponential law needs beta, mu, b > 0"));
    }
    let l = log_level(eta)?;
    Ok(if beta < 1.0 {
        b / (2.0 * mu.powf(1.0 / beta)) * l.powf(1.0 / beta)
    } else if beta == 1.0 {
        l / (1.0 + 2.0 * mu / b).ln()
    } else {
        beta / (beta - 1.0) * l / l.ln()
    })
}

/// Compact-support law `|ln eta| / ln|ln eta|`.
pub fn compact_law(eta: f64) -> Result<f64> {
    let l = log_level(eta)?;
    Ok(l / l.ln())
}

fn log_level(eta: f64) -> Result<f64> {
    if !(eta > 0.0) || !(eta < (-1.0f64).exp()) {
        return Err(Error::domain(format!("logarithmic laws need 0 < eta < 1/e, got {eta}")));
    }
    Ok(-eta.ln())
}

/// Exponents within this distance of 1 use the `beta = 1` branch.
pub const BETA_ONE_TOL: f64 = 0.02;

/// Leading-order prediction for `n_+(eta)` (of `|U|` when `U <= 0`).
/// Power class: `(b / 2 pi) |{|U| > eta}|`.
pub fn law_prediction(u: &TransverseProfile, eta: f64) -> Result<f64> {
    match &u.decay_class {
        DecayClass::Power { .. } => Ok(u.b / (2.0 * PI) * u.superlevel_area(eta)?),
        DecayClass::Exponential { beta, mu } => {
            let beta = if (beta - 1.0).abs() < BETA_ONE_TOL { 1.0 } else { *beta };
            exponential_law(beta, *mu, u.b, eta)
        }
        DecayClass::Compact { .. } => compact_law(eta),
        DecayClass::Unclassified => Err(Error::Unsupported("profile tail has no decay class".into())),
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct LawRow {
    pub eta: f64,
    pub count: usize,
    pub prediction: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LawReport {
    pub q: usize,
    pub m_max: i64,
    pub decay_class: DecayClass,
    pub rows: Vec<LawRow>,
    /// Mean ratio over `eta in [eta_min, 10 eta_min]`.
    pub last_decade_mean: f64,
    /// Slope of the ratio against `log10(1/eta)` over the same decade.
    pub last_decade_slope: f64,
}

/// `eta_max, ..., eta_min` with `per_decade` points per decade.
pub fn geometric_grid(eta_max: f64, eta_min: f64, per_decade: usize) -> Result<Vec<f64>> {
    if !(eta_max > eta_min) || !(eta_min > 0.0) || per_decade == 0 {
        return Err(Error::domain("geometric grid needs eta_max > eta_min > 0"));
    }
    let decades = (eta_max / eta_min).log10();
    let n = (decades * per_decade as f64).round().max(1.0) as usize;
    Ok((0..=n).map(|k| eta_max * (eta_min / eta_max).powf(k as f64 / n as f64)).collect())
}

/// Ratios `n(eta) / prediction(eta)` with `n = n_+` for `U >= 0` and
/// `n = n_-` for `U <= 0`.
pub fn law_convergence_report(u: &TransverseProfile, q: usize, etas: &[f64]) -> Result<LawReport> {
    if etas.is_empty() {
        return Err(Error::domain("empty eta grid"));
    }
    let eta_min = etas.iter().copied().fold(f64::INFINITY, f64::min);
    let spectrum = toeplitz_spectrum_for(u, q, eta_min)?;
    let negative = u.is_nonpositive() && !u.is_nonnegative();
    let rows = etas
        .iter()
        .map(|&eta| {
            let count = if negative { counting_negative(&spectrum, eta)? } else { counting(&spectrum, eta)? };
            let prediction = law_prediction(u, eta)?;
            Ok(LawRow { eta, count, prediction, ratio: count as f64 / prediction })
        })
        .collect::<Result<Vec<_>>>()?;
    let tail: Vec<&LawRow> = rows.iter().filter(|r| r.eta <= 10.0 * eta_min * (1.0 + 1e-12)).collect();
    let last_decade_mean = tail.iter().map(|r| r.ratio).sum::<f64>() / tail.len() as f64;
    let xs: Vec<f64> = tail.iter().map(|r| -r.eta.log10()).collect();
    let ys: Vec<f64> = tail.iter().map(|r| r.ratio).collect();
    let last_decade_slope = if xs.len() > 1 { linear_fit(&xs, &ys).1 } else { 0.0 };
    Ok(LawReport {
        q,
        m_max: spectrum.m_max(),
        decay_class: u.decay_class.clone(),
        rows,
        last_decade_mean,
        last_decade_slope,
    })
}

/// Which side of the level the perturbation pushes eigenvalues to:
/// `Below` for `H - V`, `Above` for `H + V`, with `V >= 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapSide {
    Below,
    Above,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct GapRow {
    pub eta: f64,
    /// Eigenvalues of the truncated `H -+ V` between the level shifted by
    /// `eta` and the outer edge, summed over sectors.
    pub count: usize,
    /// `n_+((1 + epsilon) eta)`
    pub lower: usize,
    pub n_plus: usize,
    /// `n_+((1 - epsilon) eta)`
    pub upper: usize,
    /// Distance of `count` from `[lower, upper]`.
    pub slack: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GapReport {
    pub side: GapSide,
    /// `lambda`, the lowest level `2b * 0 + lambda`.
    pub level: f64,
    pub outer_edge: f64,
    pub m_max: i64,
    pub epsilon: f64,
    pub rows: Vec<GapRow>,
    pub max_slack: usize,
}

/// Counts eigenvalues of the truncated `H^(m) -+ V` that leave the lowest
/// level `lambda` by more than `eta`, summed over `m = 0 ..= m_max`, and
/// compares them with the Toeplitz counts `n_+((1 +- epsilon) eta)` of the
/// profile `U = int V psi^2`. `m_max` is chosen so that all further
/// Toeplitz eigenvalues are below `(1 - epsilon) min eta / 10`.
pub fn gap_accumulation_check(
    problem: &LandauProblem,
    basis: &BasisTruncation,
    side: GapSide,
    etas: &[f64],
) -> Result<GapReport> {
    let v = &problem.perturbation;
    if !v.is_sign_definite() {
        return Err(Error::domain("accumulation check needs V >= 0"));
    }
    if etas.is_empty() || etas.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::domain("eta values must be positive"));
    }
    let psi = bound_states_with(&problem.v0, &basis.grid, basis.stencil)?
        .into_iter()
        .next()
        .ok_or_else(|| Error::NoBoundState("H_par has no bound state".into()))?;
    let level = psi.lambda;
    let u = transverse_profile(v, &psi, problem.b)?;
    let eps = SANDWICH_EPSILON;
    let eta_min = etas.iter().copied().fold(f64::INFINITY, f64::min);
    let spectrum = toeplitz_spectrum_for(&u, 0, (1.0 - eps) * eta_min)?;
    let u_max = spectrum.eigenvalues.iter().copied().fold(0.0, f64::max);
    let sup_v = sup_estimate(v, basis, problem.b);
    let outer_edge = match side {
        GapSide::Below => level - sup_v - 0.5,
        GapSide::Above => {
            // the continuum of the lowest channel starts at 0
            let edge = 0.5 * level;
            if level + 2.0 * u_max >= edge {
                return Err(Error::domain("perturbation too strong to separate the cluster from the continuum"));
            }
            edge
        }
    };
    let kappa = match side {
        GapSide::Below => -1.0,
        GapSide::Above => 1.0,
    };
    let m_max = spectrum.m_max();
    // inertia counts at the shifted levels, per sector
    let mut shifts: Vec<f64> = etas
        .iter()
        .map(|eta| match side {
            GapSide::Below => level - eta,
            GapSide::Above => level + eta,
        })
        .collect();
    shifts.push(outer_edge);
    let per_sector = (0..=m_max)
        .into_par_iter()
        .map(|m| {
            let p = LandauProblem { m, ..problem.clone() };
            let op = assemble(&p, basis, Complex64::new(0.0, 0.0), kappa)?;
            let real = op.matrix.map(|z| z.re);
            Ok(shifts.iter().map(|&s| real.count_below(s)).collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;
    let k_edge = etas.len();
    let rows = etas
        .iter()
        .enumerate()
        .map(|(k, &eta)| {
            let count: usize = per_sector
                .iter()
                .map(|c| match side {
                    GapSide::Below => c[k].saturating_sub(c[k_edge]),
                    GapSide::Above => c[k_edge].saturating_sub(c[k]),
                })
                .sum();
            let lower = counting(&spectrum, (1.0 + eps) * eta)?;
            let n_plus = counting(&spectrum, eta)?;
            let upper = counting(&spectrum, (1.0 - eps) * eta)?;
            let slack = lower.saturating_sub(count).max(count.saturating_sub(upper));
            Ok(GapRow { eta, count, lower, n_plus, upper, slack })
        })
        .collect::<Result<Vec<_>>>()?;
    let max_slack = rows.iter().map(|r| r.slack).max().unwrap_or(0);
    Ok(GapReport { side, level, outer_edge, m_max, epsilon: eps, rows, max_slack })
}

fn sup_estimate(v: &PerturbationProfile, basis: &BasisTruncation, b: f64) -> f64 {
    let rho_max = 40.0 / b.sqrt();
    v.terms
        .iter()
        .map(|t| {
            let w = (0..=SAMPLES).map(|k| t.radial.eval(rho_max * k as f64 / SAMPLES as f64).abs()).fold(0.0, f64::max);
            let l = (0..basis.grid.n).map(|i| t.longitudinal.eval(basis.grid.x(i)).abs()).fold(0.0, f64::max);
            t.coefficient.abs() * w * l
        })
        .sum()
}
