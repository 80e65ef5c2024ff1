//! The longitudinal operator `H_par = -d^2/dx^2 + v0(x)`: bound states,
//! Jost solutions, scattering coefficients, scattering states and boundary
//! values of the resolvent.

use crate::error::{Error, Result};
use crate::linalg::{neville_to_zero, BandedMatrix, Scalar};
use crate::potential::Potential1D;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Uniform grid on `[x_min, x_max]` with `n` points. The operator acts on
/// all `n` points with zero values assumed beyond both ends.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        if !(x_min < 0.0 && 0.0 < x_max) || !x_min.is_finite() || !x_max.is_finite() {
            return Err(Error::domain(format!("grid must satisfy x_min < 0 < x_max, got [{x_min}, {x_max}]")));
        }
        if n < 3 {
            return Err(Error::domain("grid needs at least 3 points"));
        }
        Ok(Grid1D { x_min, x_max, n })
    }

    /// Symmetric grid `[-half_length, half_length]` with spacing close to `h`
    /// (exactly `h` when `half_length / h` is an integer).
    pub fn symmetric(half_length: f64, h: f64) -> Result<Self> {
        let cells = (2.0 * half_length / h).round() as usize;
        Grid1D::new(-half_length, half_length, cells + 1)
    }

    pub fn h(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.h()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    /// Same interval with half the spacing.
    pub fn refined(&self) -> Grid1D {
        Grid1D { n: 2 * self.n - 1, ..*self }
    }
}

/// Central finite-difference stencil for the second derivative.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stencil {
    Second,
    Fourth,
    Sixth,
    Eighth,
}

impl Stencil {
    pub fn from_order(order: usize) -> Result<Self> {
        match order {
            2 => Ok(Stencil::Second),
            4 => Ok(Stencil::Fourth),
            6 => Ok(Stencil::Sixth),
            8 => Ok(Stencil::Eighth),
            _ => Err(Error::domain(format!("unsupported stencil order {order} (use 2, 4, 6 or 8)"))),
        }
    }

    pub fn order(&self) -> usize {
        match self {
            Stencil::Second => 2,
            Stencil::Fourth => 4,
            Stencil::Sixth => 6,
            Stencil::Eighth => 8,
        }
    }

    pub fn half_width(&self) -> usize {
        self.order() / 2
    }

    /// Weights `c_0, c_1, ..` with `u''(x) ~ (c_0 u_0 + sum_j c_j (u_j + u_-j)) / h^2`.
    pub fn weights(&self) -> &'static [f64] {
        match self {
            Stencil::Second => &[-2.0, 1.0],
            Stencil::Fourth => &[-5.0 / 2.0, 4.0 / 3.0, -1.0 / 12.0],
            Stencil::Sixth => &[-49.0 / 18.0, 3.0 / 2.0, -3.0 / 20.0, 1.0 / 90.0],
            Stencil::Eighth => &[-205.0 / 72.0, 8.0 / 5.0, -1.0 / 5.0, 8.0 / 315.0, -1.0 / 560.0],
        }
    }
}

/// Banded matrix of `-scale * d^2/dx^2 + diag(potential)` on the grid.
pub fn longitudinal_matrix<T: Scalar>(grid: &Grid1D, stencil: Stencil, scale: T, potential: &[T]) -> BandedMatrix<T> {
    let n = grid.n;
    let p = stencil.half_width();
    let w = stencil.weights();
    let inv_h2 = 1.0 / (grid.h() * grid.h());
    let mut a = BandedMatrix::zeros(n, p, p);
    for i in 0..n {
        a.set(i, i, potential[i] - scale * T::from_real(w[0] * inv_h2));
        for (j, &c) in w.iter().enumerate().skip(1) {
            let v = -scale * T::from_real(c * inv_h2);
            if i + j < n {
                a.set(i, i + j, v);
                a.set(i + j, i, v);
            }
        }
    }
    a
}

/// Grid samples of `v0`; cell averages for potentials with jumps.
pub fn sample_potential(v0: &Potential1D, grid: &Grid1D) -> Vec<f64> {
    let h = grid.h();
    grid.points().iter().map(|&x| v0.cell_average(x, h)).collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundState {
    pub lambda: f64,
    /// Samples on the grid, normalized by `h * sum psi^2 = 1`, largest
    /// sample positive.
    pub psi: Vec<f64>,
    pub grid: Grid1D,
}

impl BoundState {
    pub fn norm(&self) -> f64 {
        (self.grid.h() * self.psi.iter().map(|v| v * v).sum::<f64>()).sqrt()
    }
}

/// All negative eigenvalues of the three-point discretization, ascending.
pub fn bound_states(v0: &Potential1D, grid: &Grid1D) -> Result<Vec<BoundState>> {
    bound_states_with(v0, grid, Stencil::Second)
}

pub fn bound_states_with(v0: &Potential1D, grid: &Grid1D, stencil: Stencil) -> Result<Vec<BoundState>> {
    v0.validate()?;
    let pot = sample_potential(v0, grid);
    let a = longitudinal_matrix(grid, stencil, 1.0, &pot);
    let count = a.count_below(0.0);
    let mut lower = pot.iter().cloned().fold(f64::INFINITY, f64::min) - 1.0;
    let mut out = Vec::with_capacity(count);
    for k in 0..count {
        // k-th eigenvalue: smallest x with count_below(x) > k
        let mut hi = 0.0;
        let mut lo = lower;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if a.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 4.0 * f64::EPSILON * hi.abs().max(lo.abs()) {
                break;
            }
        }
        let lambda = 0.5 * (lo + hi);
        let psi = eigenvector_at(&a, lambda, grid.h())?;
        let lambda = rayleigh(&a, &psi);
        lower = lambda;
        out.push(BoundState { lambda, psi, grid: *grid });
    }
    Ok(out)
}

fn rayleigh(a: &BandedMatrix<f64>, v: &[f64]) -> f64 {
    let av = a.matvec(v);
    let num: f64 = av.iter().zip(v).map(|(x, y)| x * y).sum();
    let den: f64 = v.iter().map(|x| x * x).sum();
    num / den
}

/// Inverse iteration for a real symmetric banded matrix at a converged
/// eigenvalue estimate.
fn eigenvector_at(a: &BandedMatrix<f64>, lambda: f64, h: f64) -> Result<Vec<f64>> {
    let n = a.dim();
    let scale = a.norm_inf().max(1.0);
    let mut shifted = a.clone();
    shifted.add_diagonal(-(lambda + 1e-10 * scale));
    let lu = shifted.lu()?;
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * ((i * 7919) % 13) as f64).collect();
    for _ in 0..4 {
        lu.solve_in_place(&mut v);
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
    }
    let imax = (0..n).max_by(|&i, &j| v[i].abs().total_cmp(&v[j].abs())).unwrap_or(0);
    let sign = v[imax].signum();
    let norm = (h * v.iter().map(|x| x * x).sum::<f64>()).sqrt();
    Ok(v.iter().map(|x| sign * x / norm).collect())
}

/// Eigenvalue estimates on `h` and `h/2` and their Richardson combination
/// for a stencil of the given order.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct RichardsonEstimate {
    pub coarse: f64,
    pub fine: f64,
    pub extrapolated: f64,
}

pub fn bound_state_richardson(
    v0: &Potential1D,
    grid: &Grid1D,
    index: usize,
    stencil: Stencil,
) -> Result<RichardsonEstimate> {
    let coarse = bound_states_with(v0, grid, stencil)?;
    let fine = bound_states_with(v0, &grid.refined(), stencil)?;
    match (coarse.get(index), fine.get(index)) {
        (Some(c), Some(f)) => {
            let r = 2f64.powi(stencil.order() as i32);
            Ok(RichardsonEstimate {
                coarse: c.lambda,
                fine: f.lambda,
                extrapolated: (r * f.lambda - c.lambda) / (r - 1.0),
            })
        }
        _ => Err(Error::NoBoundState(format!("bound state {index} not present on both grids"))),
    }
}

/// Jost solutions at momentum `k` sampled on the grid together with the
/// transition and reflection coefficients.
#[derive(Clone, Debug)]
pub struct JostPair {
    pub k: Complex64,
    pub grid: Grid1D,
    /// `y1 ~ e^{ikx}` as `x -> +inf`
    pub y1: Vec<Complex64>,
    pub dy1: Vec<Complex64>,
    /// `y2 ~ e^{-ikx}` as `x -> -inf`
    pub y2: Vec<Complex64>,
    pub dy2: Vec<Complex64>,
    pub transmission: Complex64,
    pub reflection: Complex64,
    /// `y1 y2' - y1' y2`, evaluated at the right end.
    pub wronskian: Complex64,
    /// Maximal relative deviation of the Wronskian across the grid.
    pub wronskian_variation: f64,
    /// Size of the neglected potential tails, relative to `|k|`.
    pub tail_residual: f64,
}

impl JostPair {
    /// Physical transmission amplitude `1 / T` of a wave of unit amplitude
    /// incident from the right. With `T`, `R` defined by
    /// `y2 = T y1(.; -k) + R y1(.; k)`, current conservation reads
    /// `|T|^2 - |R|^2 = 1`, equivalently `|t|^2 + |r|^2 = 1`.
    pub fn transmission_amplitude(&self) -> Complex64 {
        self.transmission.inv()
    }

    /// Physical reflection amplitude `R / T`.
    pub fn reflection_amplitude(&self) -> Complex64 {
        self.reflection / self.transmission
    }

    /// `|t|^2 + |r|^2`, equal to one for real `k`.
    pub fn flux(&self) -> f64 {
        self.transmission_amplitude().norm_sqr() + self.reflection_amplitude().norm_sqr()
    }
}

/// Alias used by the scattering tables.
pub type ScatteringSolution = JostPair;

/// Samples of a scattering state `Psi_l(x; E)`.
#[derive(Clone, Debug)]
pub struct ScatteringState {
    pub energy: f64,
    pub l: u8,
    pub values: Vec<Complex64>,
}

const TAIL_TOLERANCE: f64 = 1e-8;

/// RK4 march of `y'' = (v0 - z) y` from one end of the grid to the other,
/// recording values at every grid point. Sub-steps never straddle a
/// breakpoint of `v0`.
fn march(
    v0: &Potential1D,
    z: Complex64,
    grid: &Grid1D,
    forward: bool,
    y0: Complex64,
    dy0: Complex64,
) -> (Vec<Complex64>, Vec<Complex64>) {
    let n = grid.n;
    let h = grid.h();
    let vmax = (0..n).map(|i| v0.eval(grid.x(i)).abs()).fold(0.0, f64::max);
    let k_eff = (z.norm() + vmax).sqrt().max(1.0);
    let h_max = 0.01 / k_eff;
    let mut breaks = v0.breakpoints();
    breaks.sort_by(f64::total_cmp);

    let mut ys = vec![Complex64::new(0.0, 0.0); n];
    let mut dys = ys.clone();
    let (start, step): (usize, isize) = if forward { (0, 1) } else { (n - 1, -1) };
    ys[start] = y0;
    dys[start] = dy0;
    let mut y = y0;
    let mut dy = dy0;
    let f = |x: f64, y: Complex64| (v0.eval(x) - z) * y;
    let mut i = start as isize;
    for _ in 0..n - 1 {
        let a = grid.x(i as usize);
        let b = grid.x((i + step) as usize);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let mut nodes = vec![a];
        let inner: Vec<f64> = breaks.iter().cloned().filter(|&t| t > lo && t < hi).collect();
        if forward {
            nodes.extend(inner);
        } else {
            nodes.extend(inner.into_iter().rev());
        }
        nodes.push(b);
        for seg in nodes.windows(2) {
            let len = seg[1] - seg[0];
            let m = ((len.abs() / h_max).ceil() as usize).max(1);
            let dt = len / m as f64;
            let eps = 1e-12 * dt;
            for s in 0..m {
                let x = seg[0] + s as f64 * dt;
                let (xa, xm, xb) = (x + eps, x + 0.5 * dt, x + dt - eps);
                let k1y = dy;
                let k1d = f(xa, y);
                let k2y = dy + 0.5 * dt * k1d;
                let k2d = f(xm, y + 0.5 * dt * k1y);
                let k3y = dy + 0.5 * dt * k2d;
                let k3d = f(xm, y + 0.5 * dt * k2y);
                let k4y = dy + dt * k3d;
                let k4d = f(xb, y + dt * k3y);
                y += dt / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
                dy += dt / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d);
            }
        }
        i += step;
        ys[i as usize] = y;
        dys[i as usize] = dy;
    }
    let _ = h;
    (ys, dys)
}

fn jost_complex(v0: &Potential1D, k: Complex64, grid: &Grid1D) -> Result<JostPair> {
    v0.validate()?;
    let i = Complex64::i();
    let z = k * k;
    let (xa, xb) = (grid.x_min, grid.x_max);
    let e_b = (i * k * xb).exp();
    let (y1, dy1) = march(v0, z, grid, false, e_b, i * k * e_b);
    let e_a = (-i * k * xa).exp();
    let (y2, dy2) = march(v0, z, grid, true, e_a, -i * k * e_a);
    let n = grid.n;
    let (y2b, dy2b) = (y2[n - 1], dy2[n - 1]);
    let transmission = e_b * (i * k * y2b - dy2b) / (2.0 * i * k);
    let reflection = (i * k * y2b + dy2b) / (e_b * 2.0 * i * k);
    let wr = |j: usize| y1[j] * dy2[j] - dy1[j] * y2[j];
    let wronskian = wr(n - 1);
    let wronskian_variation = (0..n).map(|j| (wr(j) - wronskian).norm()).fold(0.0, f64::max) / wronskian.norm();
    let peak = (0..n).map(|j| v0.eval(grid.x(j)).abs()).fold(0.0, f64::max);
    let tail = v0.eval(xa).abs().max(v0.eval(xb).abs());
    let tail_residual = if peak == 0.0 { 0.0 } else { tail / k.norm() };
    if tail_residual > TAIL_TOLERANCE {
        return Err(Error::accuracy(format!(
            "potential tail {tail:.3e} at the grid ends is not negligible; widen the grid"
        )));
    }
    Ok(JostPair {
        k,
        grid: *grid,
        y1,
        dy1,
        y2,
        dy2,
        transmission,
        reflection,
        wronskian,
        wronskian_variation,
        tail_residual,
    })
}

/// Jost solutions for real momentum `k > 0`.
pub fn jost_solutions(v0: &Potential1D, k: f64, grid: &Grid1D) -> Result<JostPair> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::domain(format!("momentum must be positive, got {k}")));
    }
    jost_complex(v0, Complex64::new(k, 0.0), grid)
}

/// `Psi_l(x; E) = y_l(x; sqrt E) / (sqrt(4 pi sqrt E) T(sqrt E))`.
pub fn scattering_state(v0: &Potential1D, energy: f64, l: u8, grid: &Grid1D) -> Result<ScatteringState> {
    if !(energy > 0.0) {
        return Err(Error::domain(format!("scattering energy must be positive, got {energy}")));
    }
    let jost = jost_solutions(v0, energy.sqrt(), grid)?;
    scattering_state_from(&jost, l)
}

pub fn scattering_state_from(jost: &JostPair, l: u8) -> Result<ScatteringState> {
    let k = jost.k.re;
    let norm = (4.0 * PI * k).sqrt() * jost.transmission;
    let src = match l {
        1 => &jost.y1,
        2 => &jost.y2,
        _ => return Err(Error::domain(format!("scattering index must be 1 or 2, got {l}"))),
    };
    Ok(ScatteringState { energy: k * k, l, values: src.iter().map(|y| y / norm).collect() })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ResolventValue {
    /// Extrapolated `<(H - E - i0)^{-1} f, g>`.
    pub value: Complex64,
    pub error_estimate: f64,
    pub deltas: Vec<f64>,
    pub samples: Vec<Complex64>,
}

/// Default schedule `0.1 * 2^-j`, `j = 0..8`.
pub fn default_deltas() -> Vec<f64> {
    (0..9).map(|j| 0.1 * 0.5f64.powi(j)).collect()
}

/// `<(H - z)^{-1} f, g> = int conj(g) (H - z)^{-1} f` for `Im z > 0`, from the
/// Jost kernel `G(x, x') = y1(x_>) y2(x_<) / W` with cumulative trapezoid sums.
pub fn resolvent_sandwich(
    v0: &Potential1D,
    z: Complex64,
    f: &[Complex64],
    g: &[Complex64],
    grid: &Grid1D,
) -> Result<Complex64> {
    let n = grid.n;
    if f.len() != n || g.len() != n {
        return Err(Error::domain("f and g must be sampled on the grid"));
    }
    let mut k = z.sqrt();
    if k.im < 0.0 {
        k = -k;
    }
    let jost = jost_complex(v0, k, grid)?;
    let w = jost.wronskian;
    let h = grid.h();
    // left[i] = int_{x_min}^{x_i} y2 f, right[i] = int_{x_i}^{x_max} y1 f
    let mut left = vec![Complex64::new(0.0, 0.0); n];
    for i in 1..n {
        left[i] = left[i - 1] + 0.5 * h * (jost.y2[i - 1] * f[i - 1] + jost.y2[i] * f[i]);
    }
    let mut right = vec![Complex64::new(0.0, 0.0); n];
    for i in (0..n - 1).rev() {
        right[i] = right[i + 1] + 0.5 * h * (jost.y1[i + 1] * f[i + 1] + jost.y1[i] * f[i]);
    }
    let mut total = Complex64::new(0.0, 0.0);
    for i in 0..n {
        let u = (jost.y1[i] * left[i] + jost.y2[i] * right[i]) / w;
        let wt = if i == 0 || i == n - 1 { 0.5 * h } else { h };
        total += wt * g[i].conj() * u;
    }
    Ok(total)
}

/// Boundary value `<(H - E - i0)^{-1} f, g>` by polynomial extrapolation of
/// `delta -> <(H - E - i delta)^{-1} f, g>` over the `deltas` schedule.
pub fn limiting_resolvent(
    v0: &Potential1D,
    energy: f64,
    f: &[Complex64],
    g: &[Complex64],
    grid: &Grid1D,
    deltas: &[f64],
) -> Result<ResolventValue> {
    if !(energy > 0.0) {
        return Err(Error::domain("limiting resolvent needs E > 0"));
    }
    if deltas.len() < 3 || deltas.iter().any(|&d| !(d > 0.0)) || deltas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::domain("delta schedule must be at least 3 decreasing positive values"));
    }
    let samples = deltas
        .iter()
        .map(|&d| resolvent_sandwich(v0, Complex64::new(energy, d), f, g, grid))
        .collect::<Result<Vec<_>>>()?;
    let (value, error_estimate) = extrapolate_checked(deltas, &samples)?;
    Ok(ResolventValue { value, error_estimate, deltas: deltas.to_vec(), samples })
}

/// Neville extrapolation to zero with a convergence check: successive
/// extrapolants (adding one smaller delta at a time) must settle.
pub(crate) fn extrapolate_checked(deltas: &[f64], samples: &[Complex64]) -> Result<(Complex64, f64)> {
    let n = deltas.len();
    let mut estimates = Vec::with_capacity(n);
    for j in 2..=n {
        estimates.push(neville_to_zero(&deltas[..j], &samples[..j]).value);
    }
    let diffs: Vec<f64> = estimates.windows(2).map(|w| (w[1] - w[0]).norm()).collect();
    let value = *estimates.last().unwrap();
    let last = *diffs.last().unwrap_or(&0.0);
    let prev = if diffs.len() >= 2 { diffs[diffs.len() - 2] } else { f64::INFINITY };
    let floor = 1e-6 * value.norm().max(1e-300);
    if last > floor && last > prev {
        return Err(Error::accuracy(format!(
            "delta extrapolation not settling: successive changes {prev:.3e} then {last:.3e}"
        )));
    }
    Ok((value, last))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stencils_differentiate_polynomials_exactly() {
        let grid = Grid1D::new(-1.0, 1.0, 21).unwrap();
        for st in [Stencil::Second, Stencil::Fourth, Stencil::Sixth, Stencil::Eighth] {
            let p = st.order();
            let u: Vec<f64> = grid.points().iter().map(|x| x.powi(p as i32 + 1)).collect();
            let zero = vec![0.0; grid.n];
            let a = longitudinal_matrix(&grid, st, 1.0, &zero);
            let lap = a.matvec(&u);
            let hw = st.half_width();
            for i in hw..grid.n - hw {
                let x = grid.x(i);
                let exact = -(((p + 1) * p) as f64) * x.powi(p as i32 - 1);
                assert!((lap[i] - exact).abs() < 1e-8, "order {p} at {x}");
            }
        }
    }

    #[test]
    fn free_jost_is_trivial() {
        let grid = Grid1D::new(-5.0, 5.0, 101).unwrap();
        let j = jost_solutions(&Potential1D::Zero, 1.3, &grid).unwrap();
        assert!((j.transmission - 1.0).norm() < 1e-9);
        assert!(j.reflection.norm() < 1e-9);
    }

    #[test]
    fn zero_potential_has_no_bound_states() {
        let grid = Grid1D::new(-10.0, 10.0, 201).unwrap();
        assert!(bound_states(&Potential1D::Zero, &grid).unwrap().is_empty());
    }
}
