use crate::error::{Error, Result};

/// Eigenvalues (ascending) of a symmetric tridiagonal matrix together with
/// the first component of each normalized eigenvector.
#[derive(Clone, Debug)]
pub struct TridiagonalEigen {
    pub values: Vec<f64>,
    pub first_components: Vec<f64>,
}

/// Implicit QL iteration with Wilkinson shifts. Only the first row of the
/// eigenvector matrix is accumulated, which is all Golub-Welsch needs.
pub fn symmetric_tridiagonal_eigen(diag: &[f64], offdiag: &[f64]) -> Result<TridiagonalEigen> {
    let n = diag.len();
    if n == 0 {
        return Ok(TridiagonalEigen { values: vec![], first_components: vec![] });
    }
    if offdiag.len() + 1 != n {
        return Err(Error::domain("off-diagonal length must be one less than the diagonal"));
    }
    let mut d = diag.to_vec();
    let mut e = offdiag.to_vec();
    e.push(0.0);
    let mut z = vec![0.0; n];
    z[0] = 1.0;

    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::Solver("tridiagonal QL did not converge".into()));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                let zf = z[i + 1];
                z[i + 1] = s * z[i] + c * zf;
                z[i] = c * z[i] - s * zf;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    Ok(TridiagonalEigen {
        values: order.iter().map(|&i| d[i]).collect(),
        first_components: order.iter().map(|&i| z[i]).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    #[test]
    fn matches_dense_symmetric_eigen() {
        let n = 12;
        let diag: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7).sin() * 3.0).collect();
        let off: Vec<f64> = (0..n - 1).map(|i| 1.0 + 0.1 * i as f64).collect();
        let te = symmetric_tridiagonal_eigen(&diag, &off).unwrap();
        let dense = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                diag[i]
            } else if i + 1 == j {
                off[i]
            } else if j + 1 == i {
                off[j]
            } else {
                0.0
            }
        });
        let eig = dense.symmetric_eigen();
        let mut pairs: Vec<(f64, f64)> = (0..n).map(|k| (eig.eigenvalues[k], eig.eigenvectors[(0, k)].abs())).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        for k in 0..n {
            assert!((pairs[k].0 - te.values[k]).abs() < 1e-12);
            assert!((pairs[k].1 - te.first_components[k].abs()).abs() < 1e-10);
        }
        let s: f64 = te.first_components.iter().map(|z| z * z).sum();
        assert!((s - 1.0).abs() < 1e-13);
    }
}
