use super::Scalar;
use crate::error::{Error, Result};
use nalgebra::DMatrix;

/// Square matrix with `kl` sub- and `ku` super-diagonals, stored row by
/// row. Entry `(i, j)` lives at `i * width + (j + kl - i)`.
#[derive(Clone, Debug)]
pub struct BandedMatrix<T> {
    n: usize,
    kl: usize,
    ku: usize,
    data: Vec<T>,
}

impl<T: Scalar> BandedMatrix<T> {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = kl + ku + 1;
        BandedMatrix { n, kl, ku, data: vec![T::zero(); n * width] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn lower_bandwidth(&self) -> usize {
        self.kl
    }

    pub fn upper_bandwidth(&self) -> usize {
        self.ku
    }

    fn width(&self) -> usize {
        self.kl + self.ku + 1
    }

    pub fn in_band(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && j + self.kl >= i && j <= i + self.ku
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        if self.in_band(i, j) {
            self.data[i * self.width() + j + self.kl - i]
        } else {
            T::zero()
        }
    }

    /// Panics when `(i, j)` lies outside the band.
    pub fn add_to(&mut self, i: usize, j: usize, value: T) {
        assert!(self.in_band(i, j), "entry ({i}, {j}) outside band");
        let w = self.width();
        self.data[i * w + j + self.kl - i] += value;
    }

    pub fn set(&mut self, i: usize, j: usize, value: T) {
        assert!(self.in_band(i, j), "entry ({i}, {j}) outside band");
        let w = self.width();
        self.data[i * w + j + self.kl - i] = value;
    }

    pub fn add_diagonal(&mut self, shift: T) {
        let w = self.width();
        for i in 0..self.n {
            self.data[i * w + self.kl] += shift;
        }
    }

    /// `self + s * other`; both operands must share the band structure.
    pub fn add_scaled(&self, other: &BandedMatrix<T>, s: T) -> BandedMatrix<T> {
        assert_eq!((self.n, self.kl, self.ku), (other.n, other.kl, other.ku));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| *a + s * *b).collect();
        BandedMatrix { n: self.n, kl: self.kl, ku: self.ku, data }
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> BandedMatrix<U> {
        BandedMatrix { n: self.n, kl: self.kl, ku: self.ku, data: self.data.iter().map(|&a| f(a)).collect() }
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.n);
        let w = self.width();
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku).min(self.n - 1);
                let row = &self.data[i * w..(i + 1) * w];
                let mut acc = T::zero();
                for j in lo..=hi {
                    acc += row[j + self.kl - i] * x[j];
                }
                acc
            })
            .collect()
    }

    /// Largest absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        let w = self.width();
        (0..self.n).map(|i| self.data[i * w..(i + 1) * w].iter().map(|a| a.modulus()).sum::<f64>()).fold(0.0, f64::max)
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        let b = self.kl.max(self.ku);
        (0..self.n).all(|i| (i..(i + b + 1).min(self.n)).all(|j| (self.get(i, j) - self.get(j, i)).modulus() <= tol))
    }

    pub fn to_dense(&self) -> DMatrix<T> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    /// LU factorization with partial pivoting. Row interchanges widen the
    /// upper band to `kl + ku`.
    pub fn lu(&self) -> Result<BandedLu<T>> {
        let n = self.n;
        let kl = self.kl;
        let ku2 = self.kl + self.ku;
        let w = kl + ku2 + 1;
        let mut a = vec![T::zero(); n * w];
        for i in 0..n {
            let lo = i.saturating_sub(kl);
            let hi = (i + self.ku).min(n.saturating_sub(1));
            for j in lo..=hi {
                a[i * w + j + kl - i] = self.get(i, j);
            }
        }
        let idx = |i: usize, j: usize| i * w + j + kl - i;
        let mut piv = vec![0usize; n];
        let mut max_pivot = 0.0f64;
        let mut min_pivot = f64::INFINITY;
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = a[idx(k, k)].modulus();
            for i in k + 1..=last {
                let v = a[idx(i, k)].modulus();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            piv[k] = p;
            if best == 0.0 || !best.is_finite() {
                return Err(Error::Solver(format!("singular banded matrix at pivot {k}")));
            }
            max_pivot = max_pivot.max(best);
            min_pivot = min_pivot.min(best);
            let jmax = (k + ku2).min(n - 1);
            if p != k {
                for j in k..=jmax {
                    a.swap(idx(k, j), idx(p, j));
                }
            }
            let inv = T::one() / a[idx(k, k)];
            for i in k + 1..=last {
                let l = a[idx(i, k)] * inv;
                a[idx(i, k)] = l;
                if l == T::zero() {
                    continue;
                }
                for j in k + 1..=jmax {
                    let u = a[idx(k, j)];
                    a[idx(i, j)] -= l * u;
                }
            }
        }
        Ok(BandedLu { n, kl, ku2, data: a, piv, pivot_ratio: min_pivot / max_pivot })
    }
}

impl BandedMatrix<f64> {
    /// Sylvester inertia of `A - shift I` for a symmetric banded `A`,
    /// from an unpivoted LDL^T factorization.
    pub fn inertia(&self, shift: f64) -> Inertia {
        let n = self.n;
        let b = self.kl;
        // lower band: l[i][i-j] for j in i-b..=i
        let mut l: Vec<f64> = vec![0.0; n * (b + 1)];
        for i in 0..n {
            for d in 0..=b.min(i) {
                l[i * (b + 1) + d] = self.get(i, i - d);
            }
            l[i * (b + 1)] -= shift;
        }
        let scale = self.norm_inf().max(shift.abs()).max(1.0);
        let mut inertia = Inertia::default();
        let mut dvals = vec![0.0; n];
        for k in 0..n {
            let mut d = l[k * (b + 1)];
            if d.abs() < 1e-300 * scale {
                d = f64::EPSILON * scale;
                inertia.zero += 1;
            }
            dvals[k] = d;
            if d < 0.0 {
                inertia.negative += 1;
            } else {
                inertia.positive += 1;
            }
            let last = (k + b).min(n - 1);
            // column k multipliers
            for i in k + 1..=last {
                l[i * (b + 1) + (i - k)] /= d;
            }
            for i in k + 1..=last {
                let lik = l[i * (b + 1) + (i - k)];
                if lik == 0.0 {
                    continue;
                }
                for j in k + 1..=i {
                    let ljk = l[j * (b + 1) + (j - k)];
                    l[i * (b + 1) + (i - j)] -= lik * d * ljk;
                }
            }
        }
        inertia
    }

    /// Number of eigenvalues strictly below `value`.
    pub fn count_below(&self, value: f64) -> usize {
        self.inertia(value).negative
    }
}

impl BandedMatrix<f64> {
    /// Eigenpairs of a symmetric banded matrix with eigenvalues in
    /// `(lo, hi)`: bisection on inertia counts, then inverse iteration.
    /// Eigenvectors have unit Euclidean norm and are mutually orthogonal.
    pub fn window_eigenpairs(&self, lo: f64, hi: f64) -> Result<Vec<(f64, Vec<f64>)>> {
        let base = self.count_below(lo);
        let count = self.count_below(hi) - base;
        let scale = self.norm_inf().max(1.0);
        let mut out: Vec<(f64, Vec<f64>)> = Vec::with_capacity(count);
        for k in 0..count {
            let target = base + k;
            let (mut a, mut b) = (lo, hi);
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                if self.count_below(mid) > target {
                    b = mid;
                } else {
                    a = mid;
                }
                if b - a <= 8.0 * f64::EPSILON * scale {
                    break;
                }
            }
            let lambda = 0.5 * (a + b);
            let mut shifted = self.clone();
            shifted.add_diagonal(-(lambda + 64.0 * f64::EPSILON * scale));
            let lu = shifted.lu()?;
            let n = self.n;
            let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.3 * (((i + 11 * k) * 7919) % 17) as f64).collect();
            for _ in 0..3 {
                lu.solve_in_place(&mut v);
                // deflate converged neighbours (clustered eigenvalues)
                for (_, u) in &out {
                    let d: f64 = u.iter().zip(&v).map(|(x, y)| x * y).sum();
                    v.iter_mut().zip(u).for_each(|(x, y)| *x -= d * y);
                }
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                v.iter_mut().for_each(|x| *x /= norm);
            }
            let av = self.matvec(&v);
            let rq: f64 = av.iter().zip(&v).map(|(x, y)| x * y).sum();
            out.push((rq, v));
        }
        Ok(out)
    }
}

/// Signature of a symmetric matrix. `zero` counts pivots that were
/// numerically zero and were nudged positive.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Inertia {
    pub negative: usize,
    pub positive: usize,
    pub zero: usize,
}

#[derive(Clone, Debug)]
pub struct BandedLu<T> {
    n: usize,
    kl: usize,
    ku2: usize,
    data: Vec<T>,
    piv: Vec<usize>,
    /// Smallest over largest pivot modulus; tiny values signal a nearly
    /// singular matrix.
    pub pivot_ratio: f64,
}

impl<T: Scalar> BandedLu<T> {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve_in_place(&self, b: &mut [T]) {
        let n = self.n;
        assert_eq!(b.len(), n);
        let w = self.kl + self.ku2 + 1;
        let kl = self.kl;
        let idx = |i: usize, j: usize| i * w + j + kl - i;
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                b.swap(k, p);
            }
            let bk = b[k];
            if bk == T::zero() {
                continue;
            }
            for i in k + 1..=(k + kl).min(n - 1) {
                b[i] -= self.data[idx(i, k)] * bk;
            }
        }
        for k in (0..n).rev() {
            let mut acc = b[k];
            for j in k + 1..=(k + self.ku2).min(n - 1) {
                acc -= self.data[idx(k, j)] * b[j];
            }
            b[k] = acc / self.data[idx(k, k)];
        }
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn sample(n: usize, kl: usize, ku: usize) -> BandedMatrix<Complex64> {
        let mut a = BandedMatrix::zeros(n, kl, ku);
        for i in 0..n {
            for j in i.saturating_sub(kl)..=(i + ku).min(n - 1) {
                let v = Complex64::new(((i * 7 + j * 3) % 11) as f64 - 5.0, ((i + 2 * j) % 5) as f64 - 2.0);
                a.set(i, j, v);
            }
        }
        a
    }

    #[test]
    fn lu_solve_matches_dense_solve() {
        let a = sample(40, 3, 2);
        let b: Vec<Complex64> = (0..40).map(|i| Complex64::new(i as f64, 1.0)).collect();
        let x = a.lu().unwrap().solve(&b);
        let dense = a.to_dense();
        let xd = dense.lu().solve(&nalgebra::DVector::from_vec(b.clone())).unwrap();
        for i in 0..40 {
            assert!((x[i] - xd[i]).norm() < 1e-9 * (1.0 + xd[i].norm()));
        }
        let r = a.matvec(&x);
        for i in 0..40 {
            assert!((r[i] - b[i]).norm() < 1e-9);
        }
    }

    #[test]
    fn singular_matrix_is_reported() {
        let a: BandedMatrix<f64> = BandedMatrix::zeros(5, 1, 1);
        assert!(a.lu().is_err());
    }

    #[test]
    fn window_eigenpairs_of_laplacian() {
        let n = 40;
        let mut a = BandedMatrix::zeros(n, 1, 1);
        for i in 0..n {
            a.set(i, i, 2.0);
            if i + 1 < n {
                a.set(i, i + 1, -1.0);
                a.set(i + 1, i, -1.0);
            }
        }
        let pairs = a.window_eigenpairs(0.5, 1.5).unwrap();
        let exact: Vec<f64> = (1..=n)
            .map(|k| 2.0 - 2.0 * (k as f64 * std::f64::consts::PI / (n + 1) as f64).cos())
            .filter(|&e| e > 0.5 && e < 1.5)
            .collect();
        assert_eq!(pairs.len(), exact.len());
        for ((e, v), x) in pairs.iter().zip(&exact) {
            assert!((e - x).abs() < 1e-12);
            let r = a.matvec(v);
            let res: f64 = r.iter().zip(v).map(|(p, q)| (p - e * q).powi(2)).sum::<f64>().sqrt();
            assert!(res < 1e-10);
        }
    }

    #[test]
    fn inertia_counts_eigenvalues_of_laplacian() {
        // -u'' with Dirichlet ends: eigenvalues 2 - 2 cos(k pi/(n+1))
        let n = 50;
        let mut a = BandedMatrix::zeros(n, 1, 1);
        for i in 0..n {
            a.set(i, i, 2.0);
            if i + 1 < n {
                a.set(i, i + 1, -1.0);
                a.set(i + 1, i, -1.0);
            }
        }
        for shift in [0.1, 0.5, 1.3, 3.9] {
            let exact = (1..=n)
                .filter(|&k| 2.0 - 2.0 * (k as f64 * std::f64::consts::PI / (n + 1) as f64).cos() < shift)
                .count();
            assert_eq!(a.count_below(shift), exact);
        }
    }
}
