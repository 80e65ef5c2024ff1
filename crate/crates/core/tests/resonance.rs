use landau_core::fgr::fgr_value;
use landau_core::operators::{assemble, embedded_eigenpair, BasisTruncation, LandauProblem, OperatorFamily};
use landau_core::resonance::{
    continue_family, continue_in_kappa, find_eigenvalue_near, fit_expansion, isolation_radius, theta_independence,
    ExpansionReference, RESIDUAL_TOL,
};
use landau_core::{Complex64, Grid1D, PerturbationProfile};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

const THETA: Complex64 = Complex64::new(0.0, 0.3);

fn ramp(kmax: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| kmax * i as f64 / n as f64).collect()
}

#[test]
fn unperturbed_shift_returns_the_embedded_level() {
    let p = LandauProblem::reference();
    let basis = BasisTruncation::new(4, Grid1D::symmetric(20.0, 0.1).unwrap()).unwrap();
    let e0 = embedded_eigenpair(&p, &basis, 1).unwrap().energy;
    let op = assemble(&p, &basis, THETA, 0.0).unwrap();
    let sol = find_eigenvalue_near(&op, c(e0 + 1e-3, 0.0), RESIDUAL_TOL).unwrap();
    assert!((sol.value - e0).norm() < 1e-9, "{} vs {e0}", sol.value);
    assert!(sol.residual < RESIDUAL_TOL);
}

#[test]
fn small_truncation_agrees_with_dense_eigensolve() {
    // J * n = 4 * 100 = 400
    let p = LandauProblem::reference();
    let basis = BasisTruncation::new(4, Grid1D::symmetric(9.9, 0.2).unwrap()).unwrap();
    assert_eq!(basis.dim(), 400);
    let branch = continue_in_kappa(&p, &basis, THETA, 1, &ramp(0.08, 8)).unwrap();
    for pt in branch.points.iter().step_by(2) {
        let op = assemble(&p, &basis, THETA, pt.kappa).unwrap();
        let dense = op.to_dense().schur().eigenvalues().unwrap();
        let nearest = dense.iter().map(|z| (z - pt.w).norm()).fold(f64::INFINITY, f64::min);
        assert!(nearest < 1e-8, "kappa = {}: {nearest:.2e}", pt.kappa);
    }
}

#[test]
fn eigenvalue_is_stable_under_shift_perturbation() {
    let p = LandauProblem::reference();
    let basis = BasisTruncation::new(4, Grid1D::symmetric(20.0, 0.1).unwrap()).unwrap();
    let op = assemble(&p, &basis, THETA, 0.04).unwrap();
    let e0 = embedded_eigenpair(&p, &basis, 1).unwrap().energy;
    let base = find_eigenvalue_near(&op, c(e0, 0.0), RESIDUAL_TOL).unwrap().value;
    for d in [c(1e-3, 0.0), c(-1e-3, 0.0), c(0.0, 1e-3), c(0.0, -1e-3)] {
        let w = find_eigenvalue_near(&op, base + d, RESIDUAL_TOL).unwrap().value;
        assert!((w - base).norm() < 1e-10);
    }
}

#[test]
fn continuation_guards_and_zero_grid() {
    let p = LandauProblem::reference();
    let basis = BasisTruncation::new(4, Grid1D::symmetric(20.0, 0.1).unwrap()).unwrap();
    assert!(continue_in_kappa(&p, &basis, THETA, 1, &[0.01, 0.02]).is_err());
    assert!(continue_in_kappa(&p, &basis, THETA, 1, &[0.0, 0.02, 0.01]).is_err());
    let zero = p.with_perturbation(PerturbationProfile::zero());
    let branch = continue_in_kappa(&zero, &basis, THETA, 1, &ramp(0.1, 5)).unwrap();
    let w0 = branch.points[0].w;
    assert!(branch.points.iter().all(|pt| (pt.w - w0).norm() < 1e-10));
    let fit = fit_expansion(&branch.points, 1e-8).unwrap();
    assert!(fit.c1.norm() < 1e-8 && fit.c2.norm() < 1e-6);
    assert!(isolation_radius(&p, &basis, THETA, 1).unwrap() > 0.1);
}

#[test]
fn branch_is_certified_smooth_and_in_the_lower_half_plane() {
    let p = LandauProblem::reference();
    let basis = BasisTruncation::reference();
    let grid = ramp(0.1, 20);
    let branch = continue_in_kappa(&p, &basis, THETA, 1, &grid).unwrap();
    let h = grid[1];
    for pt in &branch.points {
        assert!(pt.residual < RESIDUAL_TOL);
        assert!(pt.w.im <= 1e-10);
        if pt.kappa > 0.0 {
            assert!(pt.w.im < 0.0, "kappa = {}", pt.kappa);
        }
    }
    // second differences of an analytic branch are O(h^2) with a bounded constant
    let second: Vec<f64> =
        branch.points.windows(3).map(|w| (w[2].w - 2.0 * w[1].w + w[0].w).norm() / (h * h)).collect();
    let max = second.iter().cloned().fold(0.0, f64::max);
    assert!(max < 1.0, "{max}");
}

#[test]
fn reversing_the_coupling_flips_the_linear_term_only() {
    let p = LandauProblem::reference();
    let basis = BasisTruncation::reference();
    let up = continue_in_kappa(&p, &basis, THETA, 1, &ramp(0.06, 12)).unwrap();
    let family = OperatorFamily::new(&p, &basis, THETA).unwrap();
    let down_grid: Vec<f64> = ramp(0.06, 12).iter().map(|k| -k).collect();
    let down = continue_family(&p, &family, 1, &down_grid).unwrap();
    let fu = fit_expansion(&up.points, 1e-7).unwrap();
    let fd = fit_expansion(&down.points, 1e-7).unwrap();
    assert!((fu.c1 - fd.c1).norm() < 1e-6 * fu.c1.norm());
    assert!((fu.c2 - fd.c2).norm() < 0.02 * fu.c2.norm());
    assert!(down.points.iter().all(|pt| pt.w.im <= 1e-10));
}

#[test]
fn expansion_coefficients_match_first_order_shift_and_fgr() {
    let p = LandauProblem::reference();
    let basis = BasisTruncation::reference();
    let branch = continue_in_kappa(&p, &basis, THETA, 1, &ramp(0.08, 16)).unwrap();
    let fit = fit_expansion(&branch.points, 1e-7).unwrap();
    let r = fgr_value(&p, &basis, 1).unwrap();
    let cmp = fit.compare(&ExpansionReference { energy: r.energy, first_order: r.first_order, f: r.f });
    assert!(cmp.c0_error < 1e-6, "{cmp:?}");
    assert!(cmp.c1_relative_error < 1e-4, "{cmp:?}");
    assert!(cmp.im_c2_relative_error < 0.05, "{cmp:?}");
    assert!(fit.c2.im < 0.0 && fit.c1.im.abs() < 1e-6 && fit.c0.im.abs() < 1e-6);
}

#[test]
fn resonance_does_not_depend_on_the_dilation_angle() {
    let p = LandauProblem::reference();
    let basis = BasisTruncation::reference();
    let thetas = [0.2, 0.3, 0.4].map(|t| c(0.0, t));
    let s0 = theta_independence(&p, &basis, 1, 0.0, &thetas).unwrap();
    assert!(s0.spread < 1e-9, "{}", s0.spread);
    let s = theta_independence(&p, &basis, 1, 0.05, &thetas).unwrap();
    assert!(s.spread < 1e-5, "{}", s.spread);

    // continuum eigenvalues rotate with the angle while the resonance stays
    let small = BasisTruncation::new(4, Grid1D::symmetric(9.9, 0.2).unwrap()).unwrap();
    let median_arg = |t: f64| {
        let ev = assemble(&p, &small, c(0.0, t), 0.05).unwrap().to_dense().schur().eigenvalues().unwrap();
        let mut args: Vec<f64> =
            ev.iter().filter(|z| z.norm() > 3.0 && z.norm() < 20.0).map(|z| (z - 2.0).arg()).collect();
        args.sort_by(f64::total_cmp);
        args[args.len() / 2]
    };
    assert!((median_arg(0.2) - median_arg(0.4)).abs() > 0.2);
}
