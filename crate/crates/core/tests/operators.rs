use landau_core::operators::{
    assemble, commutator_ad, dilated_bound_state, embedded_eigenpair, mourre_quantity, BasisTruncation, LandauProblem,
};
use landau_core::schrodinger1d::{longitudinal_matrix, Grid1D};
use landau_core::{Complex64, PerturbationProfile, Potential1D};
use nalgebra::DMatrix;

fn small_basis(modes: usize) -> BasisTruncation {
    BasisTruncation::new(modes, Grid1D::symmetric(12.0, 0.1).unwrap()).unwrap()
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn unperturbed_assembly_is_block_diagonal_with_tensor_eigenvector() {
    let p = LandauProblem::reference();
    let basis = small_basis(4);
    let op = assemble(&p, &basis, c(0.0, 0.0), 0.0).unwrap();
    assert_eq!(op.max_mode_coupling(), 0.0);
    assert!(op.is_complex_symmetric());
    assert!(op.matrix.to_dense().iter().all(|z| z.im == 0.0));
    for q in 0..2 {
        let pair = embedded_eigenpair(&p, &basis, q).unwrap();
        let u: Vec<Complex64> = pair.coefficients.iter().map(|&v| c(v, 0.0)).collect();
        assert!((basis.norm(&u) - 1.0).abs() < 1e-12);
        let r = op.apply(&u);
        let res: Vec<Complex64> = r.iter().zip(&u).map(|(a, b)| a - pair.energy * b).collect();
        assert!(basis.norm(&res) < 1e-8, "q = {q}");
        assert!((pair.energy - (2.0 * q as f64 - 1.0)).abs() < 1e-6);
    }
    assert!(embedded_eigenpair(&p, &basis, 0).unwrap().is_isolated(&p));
    assert!(!embedded_eigenpair(&p, &basis, 1).unwrap().is_isolated(&p));
}

#[test]
fn negative_m_starts_at_m_minus() {
    let p = LandauProblem { m: -2, ..LandauProblem::reference() };
    let basis = small_basis(4);
    assert!(embedded_eigenpair(&p, &basis, 1).is_err());
    let pair = embedded_eigenpair(&p, &basis, 2).unwrap();
    assert!(pair.is_isolated(&p));
    assert_eq!(pair.mode, 0);
}

#[test]
fn dilated_assembly_is_complex_symmetric() {
    let p = LandauProblem::reference();
    let op = assemble(&p, &small_basis(3), c(0.0, 0.3), 0.7).unwrap();
    assert!(op.is_complex_symmetric());
    assert!(op.max_mode_coupling() > 0.0);
    let no_v = assemble(&p.with_perturbation(PerturbationProfile::zero()), &small_basis(3), c(0.0, 0.3), 0.7).unwrap();
    assert_eq!(no_v.max_mode_coupling(), 0.0);
}

#[test]
fn dilation_guards() {
    let p = LandauProblem::reference();
    let basis = small_basis(3);
    assert!(assemble(&p, &basis, c(0.0, -0.1), 0.0).is_err());
    // the Gaussian perturbation limits the sector to pi / 4
    assert!(assemble(&p, &basis, c(0.0, 0.8), 0.0).is_err());
    let well = LandauProblem { v0: Potential1D::SquareWell { depth: 0.5, half_width: 1.0 }, ..p.clone() };
    assert!(assemble(&well, &basis, c(0.0, 0.2), 0.0).is_err());
    assert!(assemble(&well, &basis, c(0.0, 0.0), 0.1).is_ok());
    // a bound state below -2b would mix the Landau channels
    let deep = LandauProblem { v0: Potential1D::Sech2 { depth: 12.0, width: 1.0 }, ..p };
    assert!(assemble(&deep, &basis, c(0.0, 0.0), 0.0).is_err());
}

fn dense_eigenvalues(m: DMatrix<Complex64>) -> Vec<Complex64> {
    m.schur().eigenvalues().unwrap().iter().copied().collect()
}

#[test]
fn real_dilation_keeps_bound_state_and_complex_dilation_rotates_continuum() {
    let p = LandauProblem { perturbation: PerturbationProfile::zero(), ..LandauProblem::reference() };
    let basis = BasisTruncation::new(1, Grid1D::symmetric(10.0, 0.1).unwrap()).unwrap();
    let lowest = |theta: Complex64| {
        let ev = dense_eigenvalues(assemble(&p, &basis, theta, 0.0).unwrap().to_dense());
        ev.into_iter().min_by(|a, b| (a + 1.0).norm().total_cmp(&(b + 1.0).norm())).unwrap()
    };
    for s in [-0.2, 0.15] {
        assert!((lowest(c(s, 0.0)) + 1.0).norm() < 1e-6);
    }
    let ev = dense_eigenvalues(assemble(&p, &basis, c(0.0, 0.3), 0.0).unwrap().to_dense());
    let bound = ev.iter().filter(|z| (*z + 1.0).norm() < 1e-6).count();
    assert_eq!(bound, 1);
    let mut args: Vec<f64> = ev.iter().filter(|z| z.norm() > 0.5 && z.norm() < 4.0).map(|z| z.arg()).collect();
    args.sort_by(f64::total_cmp);
    let median = args[args.len() / 2];
    assert!((median + 0.6).abs() < 0.05, "median arg {median}");
}

#[test]
fn dilated_bound_state_is_theta_independent() {
    let p = LandauProblem::reference();
    let basis = small_basis(4);
    let pair = embedded_eigenpair(&p, &basis, 1).unwrap();
    let a = dilated_bound_state(&p, &basis, c(0.0, 0.2), &pair.bound_state).unwrap();
    let b = dilated_bound_state(&p, &basis, c(0.0, 0.4), &pair.bound_state).unwrap();
    assert!((a.lambda - b.lambda).norm() < 1e-8);
    assert!((a.lambda - pair.lambda).norm() < 1e-8);
    let h = basis.grid.h();
    let s: Complex64 = a.psi.iter().map(|v| v * v).sum::<Complex64>() * h;
    assert!((s - 1.0).norm() < 1e-12);
}

#[test]
fn free_commutator_is_twice_the_laplacian_exactly() {
    let p = LandauProblem { v0: Potential1D::Zero, ..LandauProblem::reference() };
    let basis = small_basis(3);
    let comm = commutator_ad(&p, &basis, 1).unwrap();
    let grid = basis.grid;
    let h0 = longitudinal_matrix(&grid, basis.stencil, 1.0, &vec![0.0; grid.n]);
    let dense = comm.to_dense();
    for r in 0..basis.dim() {
        for col in 0..basis.dim() {
            let (i, a) = (r / 3, r % 3);
            let (i2, a2) = (col / 3, col % 3);
            let expected = if a == a2 && h0.in_band(i, i2) { 2.0 * h0.get(i, i2) } else { 0.0 };
            assert_eq!(dense[(r, col)], c(expected, 0.0));
        }
    }
}

#[test]
fn first_commutator_subtracts_x_times_derivative() {
    let p = LandauProblem::reference();
    let basis = small_basis(2);
    let comm = commutator_ad(&p, &basis, 1).unwrap();
    let grid = basis.grid;
    let h0 = longitudinal_matrix(&grid, basis.stencil, 1.0, &vec![0.0; grid.n]);
    for i in 0..grid.n {
        let x = grid.x(i);
        // v0 = -2 sech^2 x, v0' = 4 sech^2 x tanh x
        let v1 = x * 4.0 * x.tanh() / x.cosh().powi(2);
        let got = comm.matrix.get(basis.index(i, 1), basis.index(i, 1)).re;
        assert!((got - (2.0 * h0.get(i, i) - v1)).abs() < 1e-12);
    }
    let second = commutator_ad(&p, &basis, 2).unwrap();
    assert!(second.is_complex_symmetric());
    let well = LandauProblem { v0: Potential1D::SquareWell { depth: 0.5, half_width: 1.0 }, ..p };
    assert!(commutator_ad(&well, &basis, 1).is_err());
}

#[test]
fn mourre_diagnostic_positive_on_embedded_level() {
    let p = LandauProblem { perturbation: PerturbationProfile::zero(), ..LandauProblem::reference() };
    let basis = BasisTruncation::new(4, Grid1D::symmetric(30.0, 0.1).unwrap()).unwrap();
    let d = mourre_quantity(&p, &basis, 1, 0.1).unwrap();
    assert!(d.value > 0.0, "{d:?}");
    assert!(d.lower_channel_count >= 1);
    assert_eq!(d.removed, 1);
    // the discarded direction is the eigenvector itself: virial theorem
    assert!(d.eigenvalues[0].abs() < 1e-6, "{d:?}");

    let iso = mourre_quantity(&p, &basis, 0, 0.1).unwrap();
    assert_eq!(iso.rank, 1);
    assert_eq!(iso.eigenvalues.len(), 1);

    assert!(mourre_quantity(&p, &basis, 1, 0.6).is_err());

    let shifted = LandauProblem {
        v0: Potential1D::Shifted { offset: -0.05, base: Box::new(Potential1D::poschl_teller()) },
        ..p.clone()
    };
    let e = mourre_quantity(&shifted, &basis, 1, 0.1).unwrap();
    assert_eq!(e.rank, d.rank);
    assert!((e.value - d.value).abs() < 1e-8 * d.value.abs(), "{} vs {}", e.value, d.value);
}

#[test]
fn commutator_matches_central_difference_of_real_dilation() {
    // i ad_A(H) = -d/ds H(e^s x) at s = 0
    let p = LandauProblem::reference();
    let basis = small_basis(3);
    let s = 5e-4;
    let plus = assemble(&p, &basis, c(s, 0.0), 0.0).unwrap().to_dense();
    let minus = assemble(&p, &basis, c(-s, 0.0), 0.0).unwrap().to_dense();
    let oracle = (minus - plus) / c(2.0 * s, 0.0);
    let comm = commutator_ad(&p, &basis, 1).unwrap().to_dense();
    let scale = comm.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let err = comm.iter().zip(oracle.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    assert!(err < 1e-6 * scale, "{err:.3e} vs scale {scale:.3e}");
}
