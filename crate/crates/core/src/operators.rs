//! Finite truncations of the fibre operator `H^(m) = 2bq (+) H_par` coupled by
//! a perturbation `kappa V`, optionally complex-dilated in the longitudinal
//! variable, together with the embedded eigenpairs and the commutators
//! with the dilation generator.
//!
//! Unknowns are ordered point-major: entry `i * J + a` is the value at grid
//! point `i` in radial mode `q_a = m_- + a`. Both the longitudinal stencil
//! and the mode coupling then fit in a band of half-width `p J`, where `p`
//! is the stencil half-width.

use crate::error::{Error, Result};
use crate::linalg::{norm2, BandedMatrix};
use crate::potential::{PerturbationProfile, Potential1D};
use crate::schrodinger1d::{bound_states_with, longitudinal_matrix, sample_potential, BoundState, Grid1D, Stencil};
use crate::specfun::{m_minus, radial_matrix_checked};
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

const RADIAL_TOL: f64 = 1e-13;

/// Fibre problem in the angular-momentum sector `m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LandauProblem {
    pub b: f64,
    pub v0: Potential1D,
    pub perturbation: PerturbationProfile,
    pub m: i64,
}

impl LandauProblem {
    pub fn new(b: f64, v0: Potential1D, perturbation: PerturbationProfile, m: i64) -> Result<Self> {
        if !(b > 0.0) || !b.is_finite() {
            return Err(Error::domain(format!("field strength must be positive, got {b}")));
        }
        v0.validate()?;
        perturbation.validate()?;
        Ok(LandauProblem { b, v0, perturbation, m })
    }

    /// `b = 1`, `v0 = -2 sech^2`, `V = exp(-rho^2) exp(-x^2)`, `m = 0`.
    pub fn reference() -> Self {
        LandauProblem {
            b: 1.0,
            v0: Potential1D::poschl_teller(),
            perturbation: PerturbationProfile::gaussian_product(1.0, 1.0, 1.0),
            m: 0,
        }
    }

    pub fn m_minus(&self) -> usize {
        m_minus(self.m)
    }

    pub fn with_perturbation(&self, perturbation: PerturbationProfile) -> Self {
        LandauProblem { perturbation, ..self.clone() }
    }

    /// Largest admissible `Im theta`: both `v0` and `V` must continue
    /// analytically into the sector.
    pub fn dilation_bound(&self) -> Option<f64> {
        let a = self.v0.dilation_bound()?;
        if self.perturbation.is_zero() {
            return Some(a);
        }
        Some(a.min(self.perturbation.dilation_bound()?))
    }

    /// Rejects `inf sigma(H_par) <= -2b` on the given discretization.
    pub fn check_lower_bound(&self, grid: &Grid1D, stencil: Stencil) -> Result<()> {
        let h = longitudinal_matrix(grid, stencil, 1.0, &sample_potential(&self.v0, grid));
        if h.count_below(-2.0 * self.b) > 0 {
            return Err(Error::domain(format!(
                "longitudinal spectrum reaches below -2b = {}; the Landau channels overlap",
                -2.0 * self.b
            )));
        }
        Ok(())
    }
}

/// Radial modes `q = m_- .. m_- + modes - 1` times a longitudinal grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasisTruncation {
    pub modes: usize,
    pub grid: Grid1D,
    pub stencil: Stencil,
}

impl BasisTruncation {
    pub fn new(modes: usize, grid: Grid1D) -> Result<Self> {
        Self::with_stencil(modes, grid, Stencil::Eighth)
    }

    pub fn with_stencil(modes: usize, grid: Grid1D, stencil: Stencil) -> Result<Self> {
        if modes == 0 {
            return Err(Error::domain("basis needs at least one radial mode"));
        }
        if grid.n < 2 * stencil.half_width() + 1 {
            return Err(Error::domain("grid too small for the stencil"));
        }
        Ok(BasisTruncation { modes, grid, stencil })
    }

    /// Default size for targeting level `q`: six modes beyond it.
    pub fn for_level(q: usize, m: i64, grid: Grid1D) -> Result<Self> {
        let mm = m_minus(m);
        if q < mm {
            return Err(Error::domain(format!("q = {q} below m_- = {mm}")));
        }
        Self::new(q - mm + 7, grid)
    }

    /// Five modes on `[-30, 30]` with `h = 0.1`.
    pub fn reference() -> Self {
        BasisTruncation { modes: 5, grid: Grid1D::symmetric(30.0, 0.1).unwrap(), stencil: Stencil::Eighth }
    }

    pub fn dim(&self) -> usize {
        self.modes * self.grid.n
    }

    pub fn index(&self, point: usize, mode: usize) -> usize {
        point * self.modes + mode
    }

    pub fn levels(&self, m: i64) -> Vec<usize> {
        let mm = m_minus(m);
        (mm..mm + self.modes).collect()
    }

    /// Mode slot of level `q`, checking the truncation keeps three modes of
    /// headroom above it.
    pub fn slot(&self, q: usize, m: i64) -> Result<usize> {
        let mm = m_minus(m);
        if q < mm {
            return Err(Error::domain(format!("q = {q} below m_- = {mm}")));
        }
        if q - mm + 3 > self.modes {
            return Err(Error::domain(format!(
                "{} radial modes cannot resolve level q = {q}; need at least {}",
                self.modes,
                q - mm + 3
            )));
        }
        Ok(q - mm)
    }

    /// Coefficient vector of `e_mode (x) f`.
    pub fn embed<T: Copy + Default>(&self, mode: usize, f: &[T]) -> Vec<T> {
        let mut out = vec![T::default(); self.dim()];
        for (i, v) in f.iter().enumerate() {
            out[self.index(i, mode)] = *v;
        }
        out
    }

    /// Grid function of one mode.
    pub fn extract<T: Copy>(&self, mode: usize, u: &[T]) -> Vec<T> {
        (0..self.grid.n).map(|i| u[self.index(i, mode)]).collect()
    }

    /// Discrete `L^2` norm `sqrt(h sum |u|^2)`.
    pub fn norm(&self, u: &[Complex64]) -> f64 {
        self.grid.h().sqrt() * norm2(u)
    }
}

/// Complex dilation `x -> e^theta x` with its admissibility bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DilationParams {
    pub theta: Complex64,
    pub bound: f64,
}

impl DilationParams {
    pub fn new(problem: &LandauProblem, theta: Complex64) -> Result<Self> {
        if !theta.re.is_finite() || !theta.im.is_finite() || theta.im < 0.0 {
            return Err(Error::domain(format!("dilation needs Im theta >= 0, got {theta}")));
        }
        if theta.im == 0.0 {
            return Ok(DilationParams { theta, bound: problem.dilation_bound().unwrap_or(0.0) });
        }
        match problem.dilation_bound() {
            Some(bound) if theta.im < bound => Ok(DilationParams { theta, bound }),
            Some(bound) => {
                Err(Error::domain(format!("Im theta = {} outside the analyticity sector {bound}", theta.im)))
            }
            None => Err(Error::domain("complex dilation needs analytic v0 and V")),
        }
    }

    pub fn factor(&self) -> Complex64 {
        self.theta.exp()
    }
}

/// Banded matrix of `H^(m)(theta) + kappa V_theta` on a truncation.
#[derive(Clone, Debug)]
pub struct AssembledOperator {
    pub matrix: BandedMatrix<Complex64>,
    pub basis: BasisTruncation,
    pub kappa: f64,
    pub theta: Complex64,
    pub m: i64,
}

impl AssembledOperator {
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// Exact equality with the transpose.
    pub fn is_complex_symmetric(&self) -> bool {
        self.matrix.is_symmetric(0.0)
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        self.matrix.to_dense()
    }

    pub fn apply(&self, u: &[Complex64]) -> Vec<Complex64> {
        self.matrix.matvec(u)
    }

    /// Largest coupling between distinct radial modes.
    pub fn max_mode_coupling(&self) -> f64 {
        let j = self.basis.modes;
        let n = self.dim();
        let mut worst = 0.0f64;
        for r in 0..n {
            let lo = r.saturating_sub(self.matrix.lower_bandwidth());
            let hi = (r + self.matrix.upper_bandwidth() + 1).min(n);
            for c in lo..hi {
                if r % j != c % j {
                    worst = worst.max(self.matrix.get(r, c).norm());
                }
            }
        }
        worst
    }
}

/// The two pieces of `H(theta) + kappa V_theta`, kept apart so that many
/// couplings can be assembled cheaply.
#[derive(Clone, Debug)]
pub struct OperatorFamily {
    pub base: BandedMatrix<Complex64>,
    pub coupling: BandedMatrix<Complex64>,
    pub basis: BasisTruncation,
    pub theta: Complex64,
    pub m: i64,
}

impl OperatorFamily {
    pub fn new(problem: &LandauProblem, basis: &BasisTruncation, theta: Complex64) -> Result<Self> {
        let dil = DilationParams::new(problem, theta)?;
        problem.check_lower_bound(&basis.grid, basis.stencil)?;
        let grid = basis.grid;
        let n = grid.n;
        let jm = basis.modes;
        let z = dil.factor();
        let real = theta.im == 0.0;
        let pot: Vec<Complex64> = grid
            .points()
            .iter()
            .map(|&x| {
                if real {
                    Ok(Complex64::new(problem.v0.cell_average(z.re * x, z.re * grid.h()), 0.0))
                } else {
                    problem.v0.eval_complex(z * x).ok_or_else(|| Error::domain("v0 has no complex evaluator"))
                }
            })
            .collect::<Result<_>>()?;
        let h_par = longitudinal_matrix(&grid, basis.stencil, (-2.0 * theta).exp(), &pot);
        let p = basis.stencil.half_width();
        let bw = p * jm;
        let mut base = BandedMatrix::zeros(n * jm, bw, bw);
        let levels = basis.levels(problem.m);
        for i in 0..n {
            let lo = i.saturating_sub(p);
            let hi = (i + p + 1).min(n);
            for i2 in lo..hi {
                let v = h_par.get(i, i2);
                for a in 0..jm {
                    base.set(basis.index(i, a), basis.index(i2, a), v);
                }
            }
            for (a, &q) in levels.iter().enumerate() {
                base.add_to(basis.index(i, a), basis.index(i, a), Complex64::new(2.0 * problem.b * q as f64, 0.0));
            }
        }

        let mut coupling = BandedMatrix::zeros(n * jm, bw, bw);
        for term in &problem.perturbation.terms {
            if term.coefficient == 0.0 {
                continue;
            }
            let radial = radial_matrix_checked(
                &levels,
                problem.m,
                problem.b,
                term.radial.quadrature_tilt(problem.b),
                RADIAL_TOL,
                |rho| term.radial.eval(rho),
            )?;
            for i in 0..n {
                let x = grid.x(i);
                let w = if real {
                    Complex64::new(term.longitudinal.eval(z.re * x), 0.0)
                } else {
                    term.longitudinal
                        .eval_complex(z * x)
                        .ok_or_else(|| Error::domain("perturbation has no complex evaluator"))?
                };
                let w = w * term.coefficient;
                for a in 0..jm {
                    for c in 0..jm {
                        coupling.add_to(basis.index(i, a), basis.index(i, c), w * radial[(a, c)]);
                    }
                }
            }
        }
        Ok(OperatorFamily { base, coupling, basis: *basis, theta, m: problem.m })
    }

    pub fn at(&self, kappa: f64) -> AssembledOperator {
        let matrix = if kappa == 0.0 {
            self.base.clone()
        } else {
            self.base.add_scaled(&self.coupling, Complex64::new(kappa, 0.0))
        };
        AssembledOperator { matrix, basis: self.basis, kappa, theta: self.theta, m: self.m }
    }
}

/// Matrix of `H^(m)(theta) + kappa V_theta` with
/// `H_par(theta) = -e^{-2 theta} d^2/dx^2 + v0(e^theta x)`.
pub fn assemble(
    problem: &LandauProblem,
    basis: &BasisTruncation,
    theta: Complex64,
    kappa: f64,
) -> Result<AssembledOperator> {
    Ok(OperatorFamily::new(problem, basis, theta)?.at(kappa))
}

/// `Phi_{q,m} = phi_{q,m} (x) psi` on the truncation.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EmbeddedEigenpair {
    pub energy: f64,
    pub lambda: f64,
    pub q: usize,
    pub mode: usize,
    /// Unit vector in the discrete norm `h sum |u|^2`.
    pub coefficients: Vec<f64>,
    pub bound_state: BoundState,
}

impl EmbeddedEigenpair {
    /// `energy < 2 b m_-`: below the essential spectrum of the fibre.
    pub fn is_isolated(&self, problem: &LandauProblem) -> bool {
        self.energy < 2.0 * problem.b * problem.m_minus() as f64
    }
}

pub fn embedded_eigenpair(problem: &LandauProblem, basis: &BasisTruncation, q: usize) -> Result<EmbeddedEigenpair> {
    embedded_eigenpair_with(problem, basis, q, 0)
}

/// Embedded eigenpair built on the `bound_index`-th bound state of `H_par`.
pub fn embedded_eigenpair_with(
    problem: &LandauProblem,
    basis: &BasisTruncation,
    q: usize,
    bound_index: usize,
) -> Result<EmbeddedEigenpair> {
    let mode = basis.slot(q, problem.m)?;
    let states = bound_states_with(&problem.v0, &basis.grid, basis.stencil)?;
    let bound_state = states
        .into_iter()
        .nth(bound_index)
        .ok_or_else(|| Error::NoBoundState(format!("H_par has no bound state with index {bound_index}")))?;
    let lambda = bound_state.lambda;
    if lambda <= -2.0 * problem.b {
        return Err(Error::domain("bound state below -2b"));
    }
    let coefficients = basis.embed(mode, &bound_state.psi);
    Ok(EmbeddedEigenpair { energy: 2.0 * problem.b * q as f64 + lambda, lambda, q, mode, coefficients, bound_state })
}

/// Eigenvector of `H_par(theta)` continuing a real bound state, normalized by
/// the bilinear form `h sum psi_theta^2 = 1`.
#[derive(Clone, Debug)]
pub struct DilatedBoundState {
    pub lambda: Complex64,
    pub psi: Vec<Complex64>,
}

pub fn dilated_bound_state(
    problem: &LandauProblem,
    basis: &BasisTruncation,
    theta: Complex64,
    bound: &BoundState,
) -> Result<DilatedBoundState> {
    let single = BasisTruncation { modes: 1, ..*basis };
    let flat = LandauProblem { perturbation: PerturbationProfile::zero(), m: 0, ..problem.clone() };
    let op = OperatorFamily::new(&flat, &single, theta)?.at(0.0);
    let h = basis.grid.h();
    let guess: Vec<Complex64> = bound.psi.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let sol = inverse_iteration(&op.matrix, Complex64::new(bound.lambda, 0.0), &guess, 1e-10, 50, 2)?;
    let (lambda, mut psi) = (sol.value, sol.vector);
    let s: Complex64 = psi.iter().map(|v| v * v).sum::<Complex64>() * h;
    let mut scale = s.sqrt().inv();
    let overlap: Complex64 = psi.iter().zip(&bound.psi).map(|(a, b)| a * b).sum();
    if (overlap * scale).re < 0.0 {
        scale = -scale;
    }
    psi.iter_mut().for_each(|v| *v *= scale);
    Ok(DilatedBoundState { lambda, psi })
}

/// Converged eigenpair with its residual certificate.
#[derive(Clone, Debug)]
pub struct EigenSolution {
    pub value: Complex64,
    /// Unit Euclidean norm.
    pub vector: Vec<Complex64>,
    /// `|(M - value) vector|`
    pub residual: f64,
    pub iterations: usize,
}

/// Shifted inverse iteration on a banded matrix. The first `fixed_steps`
/// solves keep the shift, later ones move it to the bilinear Rayleigh
/// quotient (suited to complex-symmetric matrices). Stops once the
/// residual falls below `tol`.
pub(crate) fn inverse_iteration(
    a: &BandedMatrix<Complex64>,
    shift: Complex64,
    start: &[Complex64],
    tol: f64,
    max_iter: usize,
    fixed_steps: usize,
) -> Result<EigenSolution> {
    let scale = a.norm_inf().max(1.0);
    let mut sigma = shift;
    let mut v = start.to_vec();
    let nv = norm2(&v);
    if nv == 0.0 || !nv.is_finite() {
        return Err(Error::Solver("start vector must be nonzero".into()));
    }
    v.iter_mut().for_each(|x| *x /= nv);
    let mut lambda = sigma;
    let mut residual = f64::INFINITY;
    let mut lu = None;
    for it in 1..=max_iter {
        if lu.is_none() {
            let mut eps = Complex64::new(0.0, 0.0);
            let mut attempt = 0;
            lu = loop {
                let mut shifted = a.clone();
                shifted.add_diagonal(-(sigma + eps));
                match shifted.lu() {
                    Ok(f) => break Some(f),
                    Err(_) if attempt < 2 => {
                        attempt += 1;
                        eps = Complex64::new(1e-10, 1e-10) * scale * (attempt as f64);
                    }
                    Err(e) => return Err(e),
                }
            };
        }
        lu.as_ref().unwrap().solve_in_place(&mut v);
        let nv = norm2(&v);
        if !nv.is_finite() || nv == 0.0 {
            return Err(Error::Solver("inverse iteration produced a degenerate vector".into()));
        }
        v.iter_mut().for_each(|x| *x /= nv);
        let av = a.matvec(&v);
        let den: Complex64 = v.iter().map(|x| x * x).sum();
        lambda = if den.norm() > 1e-3 {
            av.iter().zip(&v).map(|(x, y)| x * y).sum::<Complex64>() / den
        } else {
            av.iter().zip(&v).map(|(x, y)| x * y.conj()).sum::<Complex64>()
        };
        residual = av.iter().zip(&v).map(|(x, y)| (x - lambda * y).norm_sqr()).sum::<f64>().sqrt();
        if residual < tol {
            return Ok(EigenSolution { value: lambda, vector: v, residual, iterations: it });
        }
        if it >= fixed_steps {
            sigma = lambda;
            lu = None;
        }
    }
    Err(Error::Solver(format!(
        "inverse iteration did not converge in {max_iter} steps near {lambda} (residual {residual:.2e})"
    )))
}

/// Coefficients `c_{k,j}` of `i^k ad_A^k(H) = 2^k H_0 + sum_j c_{k,j} v_j`
/// with `v_j = x^j v0^(j)`; row `k` has entries `j = 0..=k`.
pub fn commutator_coefficients(k: usize) -> Vec<Vec<f64>> {
    let mut rows = vec![vec![1.0]];
    for kk in 0..k {
        let prev = &rows[kk];
        let mut next = vec![0.0; kk + 2];
        for (j, slot) in next.iter_mut().enumerate() {
            let same = if j <= kk { -(j as f64) * prev[j] } else { 0.0 };
            let lower = if j >= 1 { -prev[j - 1] } else { 0.0 };
            *slot = same + lower;
        }
        rows.push(next);
    }
    rows
}

/// Matrix of `i^k ad_A^k(H^(m))` with `A = -(i/2)(x d/dx + d/dx x)` acting
/// on the longitudinal variable.
pub fn commutator_ad(problem: &LandauProblem, basis: &BasisTruncation, k: usize) -> Result<AssembledOperator> {
    if k == 0 {
        return Err(Error::domain("commutator order must be at least 1"));
    }
    if problem.v0.derivative_order() < k {
        return Err(Error::domain(format!(
            "v0 supplies {} derivatives, order {k} needs {k}",
            problem.v0.derivative_order()
        )));
    }
    let grid = basis.grid;
    let coeffs = commutator_coefficients(k);
    let c = &coeffs[k];
    let diag: Vec<f64> = grid
        .points()
        .iter()
        .map(|&x| {
            let v = problem.v0.scaled_derivatives(x, k)?;
            Ok(c.iter().zip(&v).map(|(a, b)| a * b).sum())
        })
        .collect::<Result<_>>()?;
    let block = longitudinal_matrix(&grid, basis.stencil, 2f64.powi(k as i32), &diag);
    let n = grid.n;
    let jm = basis.modes;
    let p = basis.stencil.half_width();
    let mut m = BandedMatrix::zeros(n * jm, p * jm, p * jm);
    for i in 0..n {
        for i2 in i.saturating_sub(p)..(i + p + 1).min(n) {
            let v = Complex64::new(block.get(i, i2), 0.0);
            for a in 0..jm {
                m.set(basis.index(i, a), basis.index(i2, a), v);
            }
        }
    }
    Ok(AssembledOperator { matrix: m, basis: *basis, kappa: 0.0, theta: Complex64::new(0.0, 0.0), m: problem.m })
}

/// Outcome of the compressed-commutator test on a spectral window.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MourreDiagnostic {
    /// Smallest eigenvalue left after removing `removed` eigenvalues.
    pub value: f64,
    pub window: (f64, f64),
    pub rank: usize,
    pub lower_channel_count: usize,
    pub removed: usize,
    /// Eigenvalues of the compressed commutator, ascending.
    pub eigenvalues: Vec<f64>,
}

/// Compression of `[H^(m), iA]` to the spectral window `(E - delta, E + delta)`
/// around `E = 2bq + lambda`.
///
/// The `r` smallest eigenvalues are discarded, where `r` is the number of
/// window states outside the lower channels `j < q` (the continuum states
/// of those channels are the ones the estimate is about); these are the
/// bound-state directions on which the commutator expectation vanishes by
/// the virial theorem. The remaining minimum is the
/// diagnostic. When nothing remains (no lower channels), the minimum over
/// all of the compression is returned.
pub fn mourre_quantity(
    problem: &LandauProblem,
    basis: &BasisTruncation,
    q: usize,
    delta: f64,
) -> Result<MourreDiagnostic> {
    let pair = embedded_eigenpair(problem, basis, q)?;
    let lambda = pair.lambda;
    let b = problem.b;
    let limit = (-lambda / 2.0).min((2.0 * b + lambda) / 2.0);
    if !(delta > 0.0) || delta >= limit {
        return Err(Error::domain(format!("window half-width must lie in (0, {limit}), got {delta}")));
    }
    let (lo, hi) = (pair.energy - delta, pair.energy + delta);
    let grid = basis.grid;
    let h_par = longitudinal_matrix(&grid, basis.stencil, 1.0, &sample_potential(&problem.v0, &grid));
    let comm = commutator_ad(problem, &BasisTruncation { modes: 1, ..*basis }, 1)?;
    let comm: BandedMatrix<f64> = comm.matrix.map(|z: Complex64| z.re);

    let mut eigenvalues = Vec::new();
    let mut rank = 0;
    let mut lower = 0;
    for level in basis.levels(problem.m) {
        let shift = 2.0 * b * level as f64;
        let pairs = h_par.window_eigenpairs(lo - shift, hi - shift)?;
        if level < q {
            lower += pairs.len();
        }
        if pairs.is_empty() {
            continue;
        }
        rank += pairs.len();
        // the commutator is diagonal in the radial modes
        let k = pairs.len();
        let cu: Vec<Vec<f64>> = pairs.iter().map(|(_, u)| comm.matvec(u)).collect();
        let mut t = DMatrix::<f64>::zeros(k, k);
        for r in 0..k {
            for c in 0..k {
                t[(r, c)] = pairs[r].1.iter().zip(&cu[c]).map(|(x, y)| x * y).sum();
            }
        }
        let t = (&t + t.transpose()) * 0.5;
        eigenvalues.extend(SymmetricEigen::new(t).eigenvalues.iter().copied());
    }
    if rank == 0 {
        return Err(Error::domain("spectral window contains no eigenvalues of the truncation"));
    }
    eigenvalues.sort_by(f64::total_cmp);
    let removed = rank.saturating_sub(lower);
    let value = if removed < rank { eigenvalues[removed] } else { eigenvalues[0] };
    Ok(MourreDiagnostic { value, window: (lo, hi), rank, lower_channel_count: lower, removed, eigenvalues })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn commutator_coefficients_follow_recurrence() {
        let c = commutator_coefficients(3);
        assert_eq!(c[1], vec![0.0, -1.0]);
        assert_eq!(c[2], vec![0.0, 1.0, 1.0]);
        assert_eq!(c[3], vec![0.0, -1.0, -3.0, -1.0]);
    }

    #[test]
    fn basis_rejects_thin_truncations() {
        let grid = Grid1D::symmetric(5.0, 0.1).unwrap();
        let basis = BasisTruncation::new(3, grid).unwrap();
        assert!(basis.slot(0, 0).is_ok());
        assert!(basis.slot(1, 0).is_err());
        assert!(basis.slot(0, -2).is_err());
        assert_eq!(basis.levels(-2), vec![2, 3, 4]);
    }
}
