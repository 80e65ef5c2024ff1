//! Complex eigenvalues `w_{q,m}(kappa)` of the dilated truncation near an
//! embedded level, continued in the coupling, and the quadratic expansion
//! `w = c0 + c1 kappa + c2 kappa^2 + O(kappa^3)`.

use crate::error::{Error, Result};
use crate::operators::{
    dilated_bound_state, embedded_eigenpair, inverse_iteration, AssembledOperator, BasisTruncation, EigenSolution,
    LandauProblem, OperatorFamily,
};
use crate::schrodinger1d::bound_states_with;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Residual certificate required of every reported eigenvalue.
pub const RESIDUAL_TOL: f64 = 1e-10;
const MAX_ITER: usize = 60;

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ResonanceResult {
    pub kappa: f64,
    pub w: Complex64,
    pub residual: f64,
    pub iterations: usize,
    pub theta: Complex64,
}

fn probe_vector(n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|i| Complex64::new(1.0 + 0.37 * ((i * 7919) % 23) as f64 / 23.0, 0.11 * ((i * 104_729) % 7) as f64))
        .collect()
}

/// Eigenvalue of `op` closest to `shift`, by shifted inverse iteration with
/// Rayleigh refinement, certified by `|(M - w) u| < tol` for unit `u`.
pub fn find_eigenvalue_near(op: &AssembledOperator, shift: Complex64, tol: f64) -> Result<EigenSolution> {
    find_eigenvalue_from(op, shift, &probe_vector(op.dim()), tol)
}

/// As [`find_eigenvalue_near`] with a caller-supplied start vector.
pub fn find_eigenvalue_from(
    op: &AssembledOperator,
    shift: Complex64,
    start: &[Complex64],
    tol: f64,
) -> Result<EigenSolution> {
    if start.len() != op.dim() {
        return Err(Error::domain("start vector has the wrong length"));
    }
    inverse_iteration(&op.matrix, shift, start, tol, MAX_ITER, 3)
}

fn distance_to_ray(z: Complex64, origin: f64, angle: f64) -> f64 {
    let d = z - origin;
    let dir = Complex64::from_polar(1.0, angle);
    let t = (d * dir.conj()).re;
    if t <= 0.0 {
        d.norm()
    } else {
        (d - t * dir).norm()
    }
}

/// Half the distance from `2bq + lambda` to the nearest other discrete
/// eigenvalue or rotated continuum string `2bj + e^{-2 theta} R_+` of the
/// unperturbed dilated operator.
pub fn isolation_radius(problem: &LandauProblem, basis: &BasisTruncation, theta: Complex64, q: usize) -> Result<f64> {
    let pair = embedded_eigenpair(problem, basis, q)?;
    let states = bound_states_with(&problem.v0, &basis.grid, basis.stencil)?;
    let e0 = Complex64::new(pair.energy, 0.0);
    let angle = -2.0 * theta.im;
    let mut best = f64::INFINITY;
    for level in basis.levels(problem.m) {
        let threshold = 2.0 * problem.b * level as f64;
        best = best.min(distance_to_ray(e0, threshold, angle));
        for (k, s) in states.iter().enumerate() {
            if level == q && k == 0 {
                continue;
            }
            best = best.min((e0 - (threshold + s.lambda)).norm());
        }
    }
    Ok(0.5 * best)
}

/// Branch of `w(kappa)` tracked from `2bq + lambda`, or the point where it
/// was lost.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Branch {
    pub q: usize,
    pub theta: Complex64,
    pub isolation_radius: f64,
    pub points: Vec<ResonanceResult>,
}

/// Continues the eigenvalue starting at `2bq + lambda` along `kappa_grid`
/// (ascending, starting at 0), using each converged eigenpair (linearly
/// extrapolated) as the next shift and start vector.
pub fn continue_in_kappa(
    problem: &LandauProblem,
    basis: &BasisTruncation,
    theta: Complex64,
    q: usize,
    kappa_grid: &[f64],
) -> Result<Branch> {
    if kappa_grid.first() != Some(&0.0) {
        return Err(Error::domain("kappa grid must start at 0"));
    }
    if kappa_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::domain("kappa grid must be strictly ascending"));
    }
    let family = OperatorFamily::new(problem, basis, theta)?;
    continue_family(problem, &family, q, kappa_grid)
}

/// Continuation on a prebuilt operator family; the grid may also descend
/// from 0 (negative couplings).
pub fn continue_family(
    problem: &LandauProblem,
    family: &OperatorFamily,
    q: usize,
    kappa_grid: &[f64],
) -> Result<Branch> {
    let basis = family.basis;
    let theta = family.theta;
    let pair = embedded_eigenpair(problem, &basis, q)?;
    let radius = isolation_radius(problem, &basis, theta, q)?;
    let dil = dilated_bound_state(problem, &basis, theta, &pair.bound_state)?;
    let mut start = basis.embed(pair.mode, &dil.psi);
    let e0 = Complex64::new(2.0 * problem.b * q as f64, 0.0) + dil.lambda;
    let mut points: Vec<ResonanceResult> = Vec::with_capacity(kappa_grid.len());
    for (idx, &kappa) in kappa_grid.iter().enumerate() {
        let shift = match points.len() {
            0 => e0,
            1 => points[0].w,
            _ => {
                let (a, b) = (&points[points.len() - 2], &points[points.len() - 1]);
                b.w + (b.w - a.w) * ((kappa - b.kappa) / (b.kappa - a.kappa))
            }
        };
        let op = family.at(kappa);
        let sol = find_eigenvalue_from(&op, shift, &start, RESIDUAL_TOL).map_err(|e| Error::Continuation {
            kappa,
            completed: idx,
            reason: e.to_string(),
        })?;
        let previous = points.last().map(|p| p.w).unwrap_or(e0);
        if (sol.value - previous).norm() > radius {
            return Err(Error::Continuation {
                kappa,
                completed: idx,
                reason: format!(
                    "jump of {:.3e} exceeds the isolation radius {radius:.3e}",
                    (sol.value - previous).norm()
                ),
            });
        }
        points.push(ResonanceResult { kappa, w: sol.value, residual: sol.residual, iterations: sol.iterations, theta });
        start = sol.vector;
    }
    Ok(Branch { q, theta, isolation_radius: radius, points })
}

/// Least-squares fit `w ~ c0 + c1 kappa + c2 kappa^2`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AsymptoticFit {
    pub c0: Complex64,
    pub c1: Complex64,
    pub c2: Complex64,
    /// Root-mean-square residual of the quadratic fit.
    pub fit_residual: f64,
    pub kappa_window: (f64, f64),
    pub points_used: usize,
    /// `|c3| kappa_max` from a cubic fit on the same window, compared with
    /// `|c2|` when shrinking the window.
    pub cubic_estimate: f64,
}

fn polyfit(kappas: &[f64], ws: &[Complex64], degree: usize) -> Result<(Vec<Complex64>, f64)> {
    let n = kappas.len();
    let scale = kappas.iter().fold(0.0f64, |a, k| a.max(k.abs())).max(1e-300);
    let a = DMatrix::from_fn(n, degree + 1, |i, j| (kappas[i] / scale).powi(j as i32));
    let svd = a.clone().svd(true, true);
    let mut coeffs = vec![Complex64::new(0.0, 0.0); degree + 1];
    let mut resid = 0.0;
    for part in 0..2 {
        let y = DVector::from_iterator(n, ws.iter().map(|w| if part == 0 { w.re } else { w.im }));
        let c = svd.solve(&y, 1e-14).map_err(|e| Error::FitQuality(e.to_string()))?;
        let r = &a * &c - &y;
        resid += r.norm_squared();
        for j in 0..=degree {
            let v = c[j] / scale.powi(j as i32);
            if part == 0 {
                coeffs[j].re = v;
            } else {
                coeffs[j].im = v;
            }
        }
    }
    Ok((coeffs, (resid / n as f64).sqrt()))
}

/// Quadratic fit of a branch. The window `[0, kappa_max]` shrinks (dropping
/// the largest couplings, keeping at least five points) until the cubic
/// term's estimated contribution is below 10% of the quadratic one.
/// Fails if the final root-mean-square residual exceeds `tol`.
pub fn fit_expansion(branch: &[ResonanceResult], tol: f64) -> Result<AsymptoticFit> {
    if branch.len() < 5 {
        return Err(Error::domain("expansion fit needs at least five branch points"));
    }
    let mut used = branch.len();
    loop {
        let pts = &branch[..used];
        let ks: Vec<f64> = pts.iter().map(|p| p.kappa).collect();
        let ws: Vec<Complex64> = pts.iter().map(|p| p.w).collect();
        let kmax = ks.iter().fold(0.0f64, |a, k| a.max(k.abs()));
        let (c, fit_residual) = polyfit(&ks, &ws, 2)?;
        let cubic_estimate = if used >= 6 {
            let (c3, _) = polyfit(&ks, &ws, 3)?;
            c3[3].norm() * kmax
        } else {
            0.0
        };
        let settled = cubic_estimate <= 0.1 * c[2].norm() || c[2].norm() == 0.0;
        if settled || used == 5 {
            if fit_residual > tol {
                return Err(Error::FitQuality(format!(
                    "quadratic fit residual {fit_residual:.3e} above {tol:.1e} on kappa <= {kmax}"
                )));
            }
            let kmin = ks.iter().cloned().fold(f64::INFINITY, f64::min);
            return Ok(AsymptoticFit {
                c0: c[0],
                c1: c[1],
                c2: c[2],
                fit_residual,
                kappa_window: (kmin, kmax),
                points_used: used,
                cubic_estimate,
            });
        }
        used -= 1;
    }
}

/// Independent values the fit is compared against: `c0 = 2bq + lambda`,
/// `c1 = <V Phi, Phi>`, `c2 = -F`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ExpansionReference {
    pub energy: f64,
    pub first_order: f64,
    pub f: Complex64,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ExpansionComparison {
    pub c0_error: f64,
    pub c1_relative_error: f64,
    /// `|Im c2 + Im F| / |Im F|`
    pub im_c2_relative_error: f64,
    /// `|c2 + F| / |F|`
    pub c2_relative_error: f64,
}

impl AsymptoticFit {
    pub fn compare(&self, reference: &ExpansionReference) -> ExpansionComparison {
        let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1e-300);
        ExpansionComparison {
            c0_error: (self.c0 - reference.energy).norm(),
            c1_relative_error: (self.c1 - reference.first_order).norm() / reference.first_order.abs().max(1e-300),
            im_c2_relative_error: rel(self.c2.im, -reference.f.im),
            c2_relative_error: (self.c2 + reference.f).norm() / reference.f.norm().max(1e-300),
        }
    }
}

/// Eigenvalue at one coupling for several dilation angles.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ThetaSpread {
    pub kappa: f64,
    pub values: Vec<(Complex64, Complex64)>,
    /// Largest pairwise distance between the eigenvalues.
    pub spread: f64,
}

/// Tracks the branch to `kappa` in four steps for each `theta` and reports
/// the spread of the results.
pub fn theta_independence(
    problem: &LandauProblem,
    basis: &BasisTruncation,
    q: usize,
    kappa: f64,
    thetas: &[Complex64],
) -> Result<ThetaSpread> {
    let grid: Vec<f64> = (0..=4).map(|i| kappa * i as f64 / 4.0).collect();
    let mut values = Vec::with_capacity(thetas.len());
    for &theta in thetas {
        let branch = if kappa == 0.0 {
            continue_in_kappa(problem, basis, theta, q, &[0.0])?
        } else if kappa > 0.0 {
            continue_in_kappa(problem, basis, theta, q, &grid)?
        } else {
            let family = OperatorFamily::new(problem, basis, theta)?;
            continue_family(problem, &family, q, &grid)?
        };
        values.push((theta, branch.points.last().unwrap().w));
    }
    let mut spread = 0.0f64;
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            spread = spread.max((values[i].1 - values[j].1).norm());
        }
    }
    Ok(ThetaSpread { kappa, values, spread })
}
