//! Fixtures shared by the benchmarks: the reference problem and a few
//! assembled objects that are expensive enough to build once.

use landau_core::operators::{assemble, AssembledOperator};
use landau_core::toeplitz::TransverseProfile;
use landau_core::{BasisTruncation, Complex64, LandauProblem, RadialFactor};

pub const THETA: Complex64 = Complex64::new(0.0, 0.3);

pub struct Fixture {
    pub problem: LandauProblem,
    pub basis: BasisTruncation,
    /// Dilated operator at `kappa = 0.04`.
    pub operator: AssembledOperator,
    /// Unperturbed level `2b + lambda`.
    pub level: f64,
}

impl Fixture {
    pub fn reference() -> Self {
        let problem = LandauProblem::reference();
        let basis = BasisTruncation::reference();
        let operator = assemble(&problem, &basis, THETA, 0.04).expect("reference operator");
        Fixture { problem, basis, operator, level: 1.0 }
    }
}

pub fn gaussian_profile() -> TransverseProfile {
    TransverseProfile::radial(1.0, RadialFactor::Gaussian { mu: 0.5 }, 1.0).expect("gaussian profile")
}

pub fn power_profile() -> TransverseProfile {
    TransverseProfile::radial(1.0, RadialFactor::Power { alpha: 4.0 }, 1.0).expect("power profile")
}
