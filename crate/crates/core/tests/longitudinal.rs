use landau_core::schrodinger1d::{
    bound_state_richardson, bound_states, default_deltas, jost_solutions, limiting_resolvent, scattering_state, Grid1D,
    Stencil,
};
use landau_core::{Complex64, Potential1D};
use nalgebra::DMatrix;

fn square_well_ground_state(depth: f64, a: f64) -> f64 {
    // even state: q tan(q a) = kappa, q = sqrt(depth + lambda), kappa = sqrt(-lambda)
    let f = |lam: f64| {
        let q = (depth + lam).sqrt();
        q * (q * a).tan() - (-lam).sqrt()
    };
    let (mut lo, mut hi) = (-depth + 1e-14, -1e-14);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(lo) * f(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn poschl_teller_ground_state_after_richardson() {
    let grid = Grid1D::symmetric(20.0, 0.02).unwrap();
    let est = bound_state_richardson(&Potential1D::poschl_teller(), &grid, 0, Stencil::Second).unwrap();
    assert!((est.extrapolated + 1.0).abs() < 1e-6, "{est:?}");
    let states = bound_states(&Potential1D::poschl_teller(), &grid).unwrap();
    assert_eq!(states.len(), 1);
    let psi = &states[0];
    assert!((psi.norm() - 1.0).abs() < 1e-12);
    // psi proportional to sech(x) / sqrt(2)
    for (i, x) in grid.points().iter().enumerate().step_by(97) {
        let exact = 1.0 / (x.cosh() * 2f64.sqrt());
        assert!((psi.psi[i] - exact).abs() < 1e-3, "x = {x}");
    }
}

#[test]
fn second_order_convergence_of_bound_state() {
    let v = Potential1D::poschl_teller();
    let g = Grid1D::symmetric(20.0, 0.1).unwrap();
    let e1 = (bound_states(&v, &g).unwrap()[0].lambda + 1.0).abs();
    let e2 = (bound_states(&v, &g.refined()).unwrap()[0].lambda + 1.0).abs();
    let ratio = e1 / e2;
    assert!((ratio - 4.0).abs() < 0.1, "ratio {ratio}");
}

#[test]
fn square_well_matches_transcendental_equation() {
    let v = Potential1D::SquareWell { depth: 0.5, half_width: 1.0 };
    let exact = square_well_ground_state(0.5, 1.0);
    let grid = Grid1D::symmetric(25.0, 0.005).unwrap();
    let states = bound_states(&v, &grid).unwrap();
    assert_eq!(states.len(), 1);
    assert!((states[0].lambda - exact).abs() < 2e-4, "{} vs {exact}", states[0].lambda);
}

#[test]
fn reflectionless_well_and_flux_conservation() {
    let grid = Grid1D::symmetric(20.0, 0.05).unwrap();
    for k in [0.5, 1.0, 2.0, 4.0] {
        let j = jost_solutions(&Potential1D::poschl_teller(), k, &grid).unwrap();
        assert!(j.reflection.norm() < 1e-6);
        assert!((j.transmission.norm() - 1.0).abs() < 1e-6);
        // Wronskian y1 y2' - y1' y2 = -2ik T
        let expected = Complex64::new(0.0, -2.0 * k) * j.transmission;
        assert!((j.wronskian - expected).norm() < 1e-8 * expected.norm());
        assert!(j.wronskian_variation < 1e-8);
    }
    let wells = [
        Potential1D::SquareWell { depth: 0.5, half_width: 1.0 },
        Potential1D::Gaussian { depth: 1.5, width: 1.2 },
        Potential1D::Sech2 { depth: 3.0, width: 0.8 },
    ];
    for v in &wells {
        for k in [0.05, 0.3, 1.0, 3.0, 10.0] {
            let j = jost_solutions(v, k, &grid).unwrap();
            let flux = j.flux();
            assert!((flux - 1.0).abs() < 1e-6, "{v:?} k={k}: {flux}");
            let wronskian_form = j.transmission.norm_sqr() - j.reflection.norm_sqr();
            assert!((wronskian_form - 1.0).abs() < 1e-6);
            assert!(j.transmission.norm() > 1e-3);
        }
    }
}

#[test]
fn jost_rejects_bad_input() {
    let grid = Grid1D::symmetric(3.0, 0.05).unwrap();
    assert!(jost_solutions(&Potential1D::poschl_teller(), 0.0, &grid).is_err());
    // tails of sech^2 at |x| = 3 are far from negligible
    assert!(jost_solutions(&Potential1D::poschl_teller(), 1.0, &grid).is_err());
}

#[test]
fn scattering_states_free_and_reflectionless() {
    let grid = Grid1D::symmetric(15.0, 0.05).unwrap();
    let e = 1.0;
    let free = scattering_state(&Potential1D::Zero, e, 1, &grid).unwrap();
    let c = 1.0 / (4.0 * std::f64::consts::PI).sqrt();
    for (i, x) in grid.points().iter().enumerate() {
        let exact = Complex64::new(0.0, *x).exp() * c;
        assert!((free.values[i] - exact).norm() < 1e-9);
    }
    let pt = scattering_state(&Potential1D::poschl_teller(), e, 1, &grid).unwrap();
    let n = grid.n;
    for i in (0..60).chain(n - 60..n) {
        assert!((pt.values[i].norm() - c).abs() < 1e-6);
    }
    for l in [1u8, 2] {
        let s = scattering_state(&Potential1D::poschl_teller(), 0.7, l, &grid).unwrap();
        assert!(s.values.iter().any(|v| v.re.abs() > 1e-3));
        assert!(s.values.iter().any(|v| v.im.abs() > 1e-3));
    }
    assert!(scattering_state(&Potential1D::Zero, -1.0, 1, &grid).is_err());
    assert!(scattering_state(&Potential1D::Zero, 1.0, 3, &grid).is_err());
}

fn bump(grid: &Grid1D, center: f64) -> Vec<Complex64> {
    grid.points().iter().map(|x| Complex64::new((-(x - center).powi(2)).exp() / (1.0 + x * x).sqrt(), 0.0)).collect()
}

#[test]
fn free_resolvent_matches_green_function_quadrature() {
    let grid = Grid1D::symmetric(8.0, 0.01).unwrap();
    let e = 1.7f64;
    let f = bump(&grid, 0.4);
    let r = limiting_resolvent(&Potential1D::Zero, e, &f, &f, &grid, &default_deltas()).unwrap();
    // double quadrature of i e^{ik|x-x'|} / (2k) on a finer independent grid
    let k = e.sqrt();
    let fine = Grid1D::symmetric(8.0, 0.004).unwrap();
    let xs = fine.points();
    let fv: Vec<f64> = xs.iter().map(|x| (-(x - 0.4).powi(2)).exp() / (1.0 + x * x).sqrt()).collect();
    let h = fine.h();
    let mut total = Complex64::new(0.0, 0.0);
    for i in 0..xs.len() {
        for j in 0..xs.len() {
            let g = Complex64::new(0.0, k * (xs[i] - xs[j]).abs()).exp() * Complex64::new(0.0, 0.5 / k);
            total += h * h * fv[i] * fv[j] * g;
        }
    }
    assert!((r.value - total).norm() < 2e-4 * total.norm(), "{} vs {}", r.value, total);
    assert!(r.value.im > 0.0);
}

#[test]
fn imaginary_part_is_positive_and_rank_two() {
    let grid = Grid1D::symmetric(12.0, 0.02).unwrap();
    let v = Potential1D::poschl_teller();
    let e = 0.8;
    let centers = [-2.0, -0.7, 0.0, 0.9, 2.5];
    let fs: Vec<Vec<Complex64>> = centers.iter().map(|&c| bump(&grid, c)).collect();
    let nf = fs.len();
    let mut a = DMatrix::<f64>::zeros(nf, nf);
    for i in 0..nf {
        for j in 0..nf {
            let r = limiting_resolvent(&v, e, &fs[j], &fs[i], &grid, &default_deltas()).unwrap();
            a[(i, j)] = r.value.im;
        }
        assert!(a[(i, i)] > 0.0);
    }
    let sym = (&a + a.transpose()) * 0.5;
    let mut ev: Vec<f64> = sym.symmetric_eigen().eigenvalues.iter().map(|x| x.abs()).collect();
    ev.sort_by(|x, y| y.total_cmp(x));
    assert!(ev[1] > 1e-6 * ev[0], "{ev:?}");
    assert!(ev[2] < 1e-7 * ev[0], "{ev:?}");
}
