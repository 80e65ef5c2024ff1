//! Small dense-free linear algebra kernels used by the solvers: banded
//! LU and LDL^T factorizations, the symmetric tridiagonal QL iteration and
//! polynomial extrapolation.

mod banded;
mod extrapolate;
mod tridiag;

pub use banded::{BandedLu, BandedMatrix, Inertia};
pub use extrapolate::{neville_to_zero, Extrapolation};
pub use tridiag::{symmetric_tridiagonal_eigen, TridiagonalEigen};

use num_complex::Complex64;
use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

/// Field operations needed by the banded kernels; implemented for `f64`
/// and `Complex64`.
pub trait Scalar:
    Copy
    + Debug
    + PartialEq
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + nalgebra::Scalar
    + 'static
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_real(x: f64) -> Self;
    fn modulus(self) -> f64;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_real(x: f64) -> Self {
        x
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn from_real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
}

/// Unconjugated bilinear product `sum_i u_i v_i`.
pub fn bilinear(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

pub fn norm2<T: Scalar>(u: &[T]) -> f64 {
    u.iter().map(|a| a.modulus().powi(2)).sum::<f64>().sqrt()
}
