use landau_core::dynamics::{
    autocorrelation, default_window, fit_decay, smooth_cutoff, AutocorrelationSeries, CURVATURE_TOL,
};
use landau_core::fgr::fgr_value;
use landau_core::operators::{BasisTruncation, LandauProblem};
use landau_core::resonance::continue_in_kappa;
use landau_core::{Complex64, Error, Grid1D, PerturbationProfile};

fn f(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else {
        (-1.0 / u).exp()
    }
}

#[test]
fn cutoff_plateau_shoulder_and_support() {
    let (c, d) = (1.0, 0.25);
    for e in [c, c + 0.5 * d, c - 0.5 * d, c + 0.1 * d] {
        assert_eq!(smooth_cutoff(e, c, d).unwrap(), 1.0);
    }
    for e in [c + d, c - d, c + 2.0 * d, c - 7.0] {
        assert_eq!(smooth_cutoff(e, c, d).unwrap(), 0.0);
    }
    for frac in [0.55, 0.6, 0.75, 0.9, 0.97] {
        let s = (d - frac * d) / (0.5 * d);
        let exact = f(s) / (f(s) + f(1.0 - s));
        let up = smooth_cutoff(c + frac * d, c, d).unwrap();
        let down = smooth_cutoff(c - frac * d, c, d).unwrap();
        assert!((up - exact).abs() < 1e-14 && (down - exact).abs() < 1e-14);
    }
    assert!((smooth_cutoff(c + 0.75 * d, c, d).unwrap() - 0.5).abs() < 1e-15);
    assert!(smooth_cutoff(c, c, 0.0).is_err());
    assert!(smooth_cutoff(c, c, -1.0).is_err());
}

#[test]
fn default_window_is_half_the_distance_to_the_nearest_threshold() {
    let p = LandauProblem::reference();
    // lambda = -1, b = 1: min(1/2, 1/2) / 2
    assert!((default_window(&p, -1.0) - 0.25).abs() < 1e-15);
    assert!((default_window(&p, -0.2) - 0.05).abs() < 1e-15);
    assert!((default_window(&p, -1.8) - 0.05).abs() < 1e-15);
}

fn synthetic(a: Complex64, gamma: f64, omega: f64, times: &[f64], e_ref: f64) -> AutocorrelationSeries {
    let values = times.iter().map(|&t| a * Complex64::from_polar((-0.5 * gamma * t).exp(), -omega * t)).collect();
    AutocorrelationSeries {
        kappa: 0.1,
        times: times.to_vec(),
        values,
        center: e_ref,
        delta: 0.25,
        reference_energy: e_ref,
        error_bound: 0.0,
        density_evaluations: 0,
        warning: None,
    }
}

#[test]
fn fit_recovers_an_exact_exponential() {
    let times: Vec<f64> = (0..=200).map(|i| i as f64 * 5.0).collect();
    let a = Complex64::from_polar(0.97, 0.01);
    let s = synthetic(a, 3e-4, 1.0012, &times, 1.0);
    let fit = fit_decay(&s, (100.0, 900.0)).unwrap();
    assert!((fit.a - a).norm() < 1e-10, "{:?}", fit.a);
    assert!((fit.gamma - 3e-4).abs() < 1e-12);
    assert!((fit.omega - 1.0012).abs() < 1e-12);
    assert!(fit.background_norm < 1e-10);
    assert!(fit.curvature.abs() < 1e-8);
}

#[test]
fn fit_rejects_a_gaussian_decay_and_short_windows() {
    let times: Vec<f64> = (0..=200).map(|i| i as f64 * 0.01).collect();
    let mut s = synthetic(Complex64::new(1.0, 0.0), 0.0, 1.0, &times, 1.0);
    for (v, t) in s.values.iter_mut().zip(&times) {
        *v *= (-t * t).exp();
    }
    // ln|values| = -t^2 bends by (window length)^2 = 1 > CURVATURE_TOL
    const { assert!(CURVATURE_TOL < 1.0) };
    match fit_decay(&s, (0.5, 1.5)) {
        Err(Error::FitQuality(_)) => {}
        other => panic!("expected a fit-quality error, got {other:?}"),
    }
    assert!(fit_decay(&s, (0.5, 0.52)).is_err());
}

#[test]
fn unperturbed_autocorrelation_is_a_pure_phase() {
    let p = LandauProblem::reference();
    let basis = BasisTruncation::new(4, Grid1D::symmetric(20.0, 0.1).unwrap()).unwrap();
    let times: Vec<f64> = (0..50).map(|i| i as f64 * 3.0).collect();
    for (problem, kappa) in [(p.clone(), 0.0), (p.with_perturbation(PerturbationProfile::zero()), 0.05)] {
        let s = autocorrelation(&problem, &basis, 1, kappa, &times, 0.25).unwrap();
        assert!(s.values.iter().all(|v| (v.norm() - 1.0).abs() < 1e-14));
        let fit = fit_decay(&s, (0.0, 150.0)).unwrap();
        assert!((fit.a - 1.0).norm() < 1e-12 && fit.gamma.abs() < 1e-12);
        assert!((fit.omega - s.center).abs() < 1e-12);
        assert!(s.warning.is_none());
    }
}

#[test]
fn autocorrelation_rejects_bad_arguments() {
    let p = LandauProblem::reference();
    let basis = BasisTruncation::new(4, Grid1D::symmetric(20.0, 0.1).unwrap()).unwrap();
    assert!(autocorrelation(&p, &basis, 1, 0.04, &[1.0, 0.0], 0.25).is_err());
    assert!(autocorrelation(&p, &basis, 1, 0.04, &[-1.0], 0.25).is_err());
    // twice the default window reaches the thresholds
    assert!(autocorrelation(&p, &basis, 1, 0.04, &[0.0], 0.6).is_err());
    assert!(autocorrelation(&p, &basis, 1, 0.04, &[0.0], 0.0).is_err());
}

#[test]
fn perturbed_decay_follows_the_resonance() {
    let p = LandauProblem::reference();
    let basis = BasisTruncation::reference();
    let kappa = 0.04;
    let im_f = fgr_value(&p, &basis, 1).unwrap().f.im;
    let gamma_pred = 2.0 * kappa * kappa * im_f;
    let t_max = 2.0 / gamma_pred;
    let times: Vec<f64> = (0..=200).map(|i| t_max * i as f64 / 200.0).collect();
    let s = autocorrelation(&p, &basis, 1, kappa, &times, 0.25).unwrap();

    assert!(s.values[0].im.abs() < 1e-12 && s.values[0].re > 0.0 && s.values[0].re <= 1.0 + 1e-9);
    assert!(s.values.iter().all(|v| v.norm() <= 1.0 + 1e-9));
    let norms: Vec<f64> = s.values.iter().map(|v| v.norm()).collect();
    assert!(norms.windows(2).all(|w| w[1] <= w[0] + 1e-9));

    let fit = fit_decay(&s, (0.2 / gamma_pred, 1.5 / gamma_pred)).unwrap();
    assert!((fit.gamma / gamma_pred - 1.0).abs() < 0.1, "{} vs {gamma_pred}", fit.gamma);
    let w = continue_in_kappa(&p, &basis, Complex64::new(0.0, 0.3), 1, &[0.0, 0.01, 0.02, 0.03, 0.04])
        .unwrap()
        .points
        .last()
        .unwrap()
        .w;
    assert!((fit.omega - w.re).abs() < 1e-4, "{} vs {}", fit.omega, w.re);
    assert!((fit.gamma + 2.0 * w.im).abs() < 0.01 * fit.gamma);
    assert!((fit.a.norm() - 1.0).abs() < 0.01);
}
