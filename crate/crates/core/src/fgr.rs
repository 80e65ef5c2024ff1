//! First-order shifts and the Fermi Golden Rule coefficient
//! `F_{q,m}(2bq + lambda)`, computed from the open-channel amplitudes and,
//! independently, from the dilated resolvent on the truncation. Also the
//! polynomial structure of the radial overlaps against weights
//! `P(s) exp(-alpha s)`.

use crate::error::{Error, Result};
use crate::linalg::{BandedMatrix, Scalar};
use crate::operators::{dilated_bound_state, embedded_eigenpair, BasisTruncation, LandauProblem, OperatorFamily};
use crate::potential::{PerturbationProfile, RadialFactor, SampledFunction};
use crate::schrodinger1d::{
    bound_states_with, default_deltas, extrapolate_checked, jost_solutions, scattering_state_from, BoundState, Grid1D,
};
use crate::specfun::{m_minus, radial_matrix_checked};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const RADIAL_TOL: f64 = 1e-13;
const DOUBLING_TOL: f64 = 1e-8;

/// Radial matrix of one separable term between two levels.
fn radial_pair(problem: &LandauProblem, qa: usize, qb: usize) -> Result<Vec<f64>> {
    problem
        .perturbation
        .terms
        .iter()
        .map(|t| {
            let r = radial_matrix_checked(
                &[qa, qb],
                problem.m,
                problem.b,
                t.radial.quadrature_tilt(problem.b),
                RADIAL_TOL,
                |rho| t.radial.eval(rho),
            )?;
            Ok(t.coefficient * r[(0, 1)])
        })
        .collect()
}

/// Trapezoid sum of `f` on the grid.
pub(crate) fn trapezoid<T: Scalar>(grid: &Grid1D, f: impl Fn(usize, f64) -> T) -> T {
    let h = grid.h();
    let n = grid.n;
    let mut total = T::zero();
    for i in 0..n {
        let w = if i == 0 || i == n - 1 { 0.5 * h } else { h };
        total += f(i, grid.x(i)) * T::from_real(w);
    }
    total
}

fn ground_state(problem: &LandauProblem, basis: &BasisTruncation) -> Result<BoundState> {
    bound_states_with(&problem.v0, &basis.grid, basis.stencil)?
        .into_iter()
        .next()
        .ok_or_else(|| Error::NoBoundState("H_par has no bound state".into()))
}

/// `<V Phi_{q,m}, Phi_{q,m}>` in `L^2(rho d rho dx)`.
pub fn first_order_shift(problem: &LandauProblem, basis: &BasisTruncation, q: usize) -> Result<f64> {
    basis.slot(q, problem.m)?;
    let psi = ground_state(problem, basis)?;
    first_order_shift_with(problem, &psi, q)
}

/// First-order shift against a given longitudinal bound state.
pub fn first_order_shift_with(problem: &LandauProblem, psi: &BoundState, q: usize) -> Result<f64> {
    let mm = m_minus(problem.m);
    if q < mm {
        return Err(Error::domain(format!("q = {q} below m_- = {mm}")));
    }
    let radial = radial_pair(problem, q, q)?;
    let mut total = 0.0;
    for (t, r) in problem.perturbation.terms.iter().zip(&radial) {
        total += r * trapezoid(&psi.grid, |i, x| t.longitudinal.eval(x) * psi.psi[i] * psi.psi[i]);
    }
    Ok(total)
}

/// Amplitude of the open channel `(j, l)`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ChannelAmplitude {
    pub j: usize,
    pub l: u8,
    pub energy: f64,
    pub value: Complex64,
}

fn channel_on(problem: &LandauProblem, psi: &BoundState, q: usize, j: usize, l: u8) -> Result<ChannelAmplitude> {
    let mm = m_minus(problem.m);
    if j < mm || j >= q {
        return Err(Error::domain(format!("channel j = {j} must satisfy m_- = {mm} <= j < q = {q}")));
    }
    let energy = 2.0 * problem.b * (q - j) as f64 + psi.lambda;
    if !(energy > 0.0) {
        return Err(Error::domain("channel energy not positive"));
    }
    let grid = psi.grid;
    let jost = jost_solutions(&problem.v0, energy.sqrt(), &grid)?;
    let state = scattering_state_from(&jost, l)?;
    let radial = radial_pair(problem, j, q)?;
    let mut value = Complex64::new(0.0, 0.0);
    for (t, r) in problem.perturbation.terms.iter().zip(&radial) {
        if *r == 0.0 {
            continue;
        }
        value += *r * trapezoid(&grid, |i, x| state.values[i] * (t.longitudinal.eval(x) * psi.psi[i]));
    }
    Ok(ChannelAmplitude { j, l, energy, value })
}

/// `int int phi_{j,m} phi_{q,m} psi Psi_l(.; 2b(q-j) + lambda) V dx rho d rho`,
/// accepted only when halving the grid step changes it by less than `1e-8`
/// relative.
pub fn fgr_channel(problem: &LandauProblem, grid: &Grid1D, q: usize, j: usize, l: u8) -> Result<Complex64> {
    let basis = BasisTruncation::new(1, *grid)?;
    let coarse = channel_on(problem, &ground_state(problem, &basis)?, q, j, l)?;
    let fine_basis = BasisTruncation::new(1, grid.refined())?;
    let fine = channel_on(problem, &ground_state(problem, &fine_basis)?, q, j, l)?;
    let scale = fine.value.norm().max(1e-300);
    if (fine.value - coarse.value).norm() > DOUBLING_TOL * scale && fine.value.norm() > 1e-14 {
        return Err(Error::accuracy(format!(
            "channel ({j}, {l}) changes by {:.2e} under grid halving",
            (fine.value - coarse.value).norm() / scale
        )));
    }
    Ok(fine.value)
}

/// All open channels, in ascending `j` then `l`.
pub fn channel_amplitudes(problem: &LandauProblem, psi: &BoundState, q: usize) -> Result<Vec<ChannelAmplitude>> {
    let mm = m_minus(problem.m);
    let mut out = Vec::new();
    for j in mm..q {
        for l in [1u8, 2] {
            out.push(channel_on(problem, psi, q, j, l)?);
        }
    }
    Ok(out)
}

/// `pi sum |channel|^2`.
pub fn im_f_from_channels(channels: &[ChannelAmplitude]) -> f64 {
    PI * channels.iter().map(|c| c.value.norm_sqr()).sum::<f64>()
}

/// Both routes to `F_{q,m}(2bq + lambda)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FgrResult {
    pub q: usize,
    pub m: i64,
    pub energy: f64,
    pub first_order: f64,
    /// Resolvent route, full complex value.
    pub f: Complex64,
    pub f_error_estimate: f64,
    /// Channel route, `pi sum |amplitude|^2`.
    pub im_f_channels: f64,
    pub channel_amplitudes: Vec<ChannelAmplitude>,
    pub theta: Complex64,
    /// `|Im F_channels - Im F_resolvent| / max(Im F_channels, 1e-12)`.
    pub route_gap: f64,
}

impl FgrResult {
    pub fn routes_agree(&self, tol: f64) -> bool {
        self.route_gap < tol
    }

    /// Accuracy error carrying both values when the routes disagree.
    pub fn check(&self, tol: f64) -> Result<()> {
        if self.routes_agree(tol) {
            Ok(())
        } else {
            Err(Error::accuracy(format!(
                "Im F routes disagree: channels {:.10e}, resolvent {:.10e} (relative gap {:.2e})",
                self.im_f_channels, self.f.im, self.route_gap
            )))
        }
    }
}

/// Default dilation used by the resolvent route.
pub const DEFAULT_THETA: f64 = 0.3;

/// `F = <(H^(m) - E - i0)^{-1} (I - P) V Phi, V Phi>` from the dilated
/// truncation (bilinear pairing of dilated vectors, boundary value by
/// extrapolation over the default delta schedule) together with the channel
/// sum for `Im F`.
pub fn fgr_value(problem: &LandauProblem, basis: &BasisTruncation, q: usize) -> Result<FgrResult> {
    fgr_value_at(problem, basis, q, Complex64::new(0.0, DEFAULT_THETA))
}

pub fn fgr_value_at(problem: &LandauProblem, basis: &BasisTruncation, q: usize, theta: Complex64) -> Result<FgrResult> {
    let pair = embedded_eigenpair(problem, basis, q)?;
    let psi = &pair.bound_state;
    let first_order = first_order_shift_with(problem, psi, q)?;
    let channels = channel_amplitudes(problem, psi, q)?;
    let im_f_channels = im_f_from_channels(&channels);

    let (f, f_error_estimate) = if problem.perturbation.is_zero() {
        (Complex64::new(0.0, 0.0), 0.0)
    } else {
        resolvent_route(problem, basis, &pair.bound_state, pair.mode, q, theta)?
    };
    let route_gap = (im_f_channels - f.im).abs() / im_f_channels.max(1e-12);
    Ok(FgrResult {
        q,
        m: problem.m,
        energy: pair.energy,
        first_order,
        f,
        f_error_estimate,
        im_f_channels,
        channel_amplitudes: channels,
        theta,
        route_gap,
    })
}

fn resolvent_route(
    problem: &LandauProblem,
    basis: &BasisTruncation,
    psi: &BoundState,
    mode: usize,
    q: usize,
    theta: Complex64,
) -> Result<(Complex64, f64)> {
    let family = OperatorFamily::new(problem, basis, theta)?;
    let dil = dilated_bound_state(problem, basis, theta, psi)?;
    let h = basis.grid.h();
    let phi = basis.embed(mode, &dil.psi);
    let vphi = family.coupling.matvec(&phi);
    let energy = 2.0 * problem.b * q as f64 + dil.lambda;
    // (I - P) with P u = Phi (h Phi^T u)
    let proj: Complex64 = h * phi.iter().zip(&vphi).map(|(a, b)| a * b).sum::<Complex64>();
    let rhs: Vec<Complex64> = vphi.iter().zip(&phi).map(|(v, p)| v - proj * p).collect();
    let deltas = default_deltas();
    let samples = deltas
        .iter()
        .map(|&d| {
            let mut a: BandedMatrix<Complex64> = family.base.clone();
            a.add_diagonal(-(energy + Complex64::new(0.0, d)));
            let sol = a.lu()?.solve(&rhs);
            Ok(h * vphi.iter().zip(&sol).map(|(a, b)| a * b).sum::<Complex64>())
        })
        .collect::<Result<Vec<_>>>()?;
    extrapolate_checked(&deltas, &samples)
}

/// Polynomial `Pi(gamma)` with `Pi(1 / (1 + alpha)) = int phi_{q-1,m} phi_{q,m}
/// P(s) e^{-alpha s} rho d rho`, `s = b rho^2 / 2`, reconstructed by
/// barycentric interpolation on Chebyshev nodes in `gamma`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OverlapPolynomial {
    pub q: usize,
    pub m: i64,
    pub b: f64,
    pub poly: Vec<f64>,
    pub gammas: Vec<f64>,
    pub values: Vec<f64>,
    weights: Vec<f64>,
}

/// Quadrature value of the overlap at a single `alpha`.
pub fn weighted_overlap(q: usize, m: i64, b: f64, poly: &[f64], alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::domain(format!("alpha must be positive, got {alpha}")));
    }
    if q == 0 || q - 1 < m_minus(m) {
        return Err(Error::domain(format!("overlap needs q - 1 >= m_-, got q = {q}, m = {m}")));
    }
    let w = RadialFactor::LaguerreWeight { coeffs: poly.to_vec(), alpha, b };
    let r = radial_matrix_checked(&[q - 1, q], m, b, alpha, RADIAL_TOL, |rho| w.eval(rho))?;
    Ok(r[(0, 1)])
}

impl OverlapPolynomial {
    /// Interpolates on `2q + m + 2 + deg P` nodes.
    pub fn new(q: usize, m: i64, b: f64, poly: &[f64]) -> Result<Self> {
        let deg_p = poly.iter().rposition(|&c| c != 0.0).unwrap_or(0);
        let count = (2 * q) as i64 + m + 2 + deg_p as i64;
        if count < 2 {
            return Err(Error::domain("overlap polynomial needs at least two nodes"));
        }
        let count = count as usize;
        // Chebyshev points of the second kind on (0.05, 0.95)
        let gammas: Vec<f64> = (0..count).map(|i| 0.5 - 0.45 * (PI * i as f64 / (count - 1) as f64).cos()).collect();
        let values =
            gammas.iter().map(|&g| weighted_overlap(q, m, b, poly, 1.0 / g - 1.0)).collect::<Result<Vec<_>>>()?;
        let weights = (0..count)
            .map(|i| {
                let s = if i % 2 == 0 { 1.0 } else { -1.0 };
                if i == 0 || i == count - 1 {
                    0.5 * s
                } else {
                    s
                }
            })
            .collect();
        Ok(OverlapPolynomial { q, m, b, poly: poly.to_vec(), gammas, values, weights })
    }

    /// Degree bound of the interpolant.
    pub fn degree_bound(&self) -> usize {
        self.gammas.len() - 1
    }

    pub fn eval_gamma(&self, gamma: f64) -> Result<f64> {
        let mut num = 0.0;
        let mut den = 0.0;
        let mut lebesgue = 0.0;
        for ((g, v), w) in self.gammas.iter().zip(&self.values).zip(&self.weights) {
            let d = gamma - g;
            if d == 0.0 {
                return Ok(*v);
            }
            let t = w / d;
            num += t * v;
            den += t;
            lebesgue += t.abs();
        }
        if !(lebesgue / den.abs() < 1e8) {
            return Err(Error::accuracy(format!("interpolation ill-conditioned at gamma = {gamma}")));
        }
        Ok(num / den)
    }

    pub fn eval_alpha(&self, alpha: f64) -> Result<f64> {
        if !(alpha > 0.0) {
            return Err(Error::domain(format!("alpha must be positive, got {alpha}")));
        }
        self.eval_gamma(1.0 / (1.0 + alpha))
    }

    /// Monomial coefficients in `gamma`, ascending, from the interpolation
    /// conditions.
    pub fn coefficients(&self) -> Vec<f64> {
        let k = self.gammas.len();
        let v = nalgebra::DMatrix::from_fn(k, k, |i, j| self.gammas[i].powi(j as i32));
        let rhs = nalgebra::DVector::from_column_slice(&self.values);
        match v.lu().solve(&rhs) {
            Some(c) => c.iter().copied().collect(),
            None => vec![f64::NAN; k],
        }
    }

    /// Degree read off the coefficients: highest index above `tol` times the
    /// largest coefficient.
    pub fn numerical_degree(&self, tol: f64) -> usize {
        let c = self.coefficients();
        let big = c.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        c.iter().rposition(|x| x.abs() > tol * big).unwrap_or(0)
    }
}

/// Quadrature and interpolated values of the overlap at one `alpha`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct OverlapCheck {
    pub alpha: f64,
    pub quadrature: f64,
    pub polynomial: f64,
}

pub fn overlap_polynomial_check(q: usize, m: i64, b: f64, poly: &[f64], alphas: &[f64]) -> Result<Vec<OverlapCheck>> {
    let p = OverlapPolynomial::new(q, m, b, poly)?;
    alphas
        .iter()
        .map(|&alpha| {
            Ok(OverlapCheck {
                alpha,
                quadrature: weighted_overlap(q, m, b, poly, alpha)?,
                polynomial: p.eval_alpha(alpha)?,
            })
        })
        .collect()
}

/// `omega(x) = psi(x) Re Psi_1(x; 2b + lambda)`: the longitudinal direction
/// along which the open channel `j = q - 1` sees a perturbation.
pub fn channel_direction(problem: &LandauProblem, psi: &BoundState) -> Result<SampledFunction> {
    let energy = 2.0 * problem.b + psi.lambda;
    let jost = jost_solutions(&problem.v0, energy.sqrt(), &psi.grid)?;
    let state = scattering_state_from(&jost, 1)?;
    let ys = psi.psi.iter().zip(&state.values).map(|(p, s)| p * s.re).collect();
    SampledFunction::new(psi.grid.points(), ys)
}

/// One candidate perturbation evaluated on one `(q, m)` cell.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PositivityCell {
    pub candidate: usize,
    pub q: usize,
    pub m: i64,
    pub im_f: f64,
    pub passes: bool,
}

/// `Im F_{q,m}` from the channel sum for every candidate perturbation and
/// every cell with `q > m_-`; a cell passes when `Im F > threshold`.
pub fn fgr_positivity_scan(
    problem: &LandauProblem,
    candidates: &[PerturbationProfile],
    grid: &Grid1D,
    qs: std::ops::RangeInclusive<usize>,
    ms: std::ops::RangeInclusive<i64>,
    threshold: f64,
) -> Result<Vec<PositivityCell>> {
    let basis = BasisTruncation::new(1, *grid)?;
    let psi = ground_state(problem, &basis)?;
    let mut out = Vec::new();
    for (ci, v) in candidates.iter().enumerate() {
        for m in ms.clone() {
            for q in qs.clone() {
                if q <= m_minus(m) {
                    continue;
                }
                let p = LandauProblem { perturbation: v.clone(), m, ..problem.clone() };
                let im_f = if v.is_zero() { 0.0 } else { im_f_from_channels(&channel_amplitudes(&p, &psi, q)?) };
                out.push(PositivityCell { candidate: ci, q, m, im_f, passes: im_f > threshold });
            }
        }
    }
    Ok(out)
}
