//! Numerical toolkit for embedded eigenvalues of the three-dimensional
//! Landau Hamiltonian with a longitudinal well and a small perturbation.
//!
//! Units: `hbar = 1`, `2 m* = 1`, field strength `b` enters the Landau
//! levels `2 b q`. The longitudinal operator is `-d^2/dx^2 + v0(x)` and the
//! transverse coordinates are reduced to the radial variable `rho` inside
//! a fixed angular-momentum sector `m`.

// `!(x > 0.0)` rejects NaN along with the nonpositive values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod fgr;
pub mod jet;
pub mod linalg;
pub mod operators;
pub mod potential;
pub mod resonance;
pub mod schrodinger1d;
pub mod specfun;
pub mod toeplitz;

pub use num_complex::Complex64;

pub use error::{Error, Result};
pub use operators::{AssembledOperator, BasisTruncation, LandauProblem};
pub use potential::{LongitudinalFactor, PerturbationProfile, Potential1D, RadialFactor};
pub use schrodinger1d::{BoundState, Grid1D, JostPair, ScatteringState, Stencil};
