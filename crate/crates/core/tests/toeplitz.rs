use landau_core::operators::{BasisTruncation, LandauProblem};
use landau_core::toeplitz::{
    compact_law, counting, counting_function, counting_negative, exponential_law, gap_accumulation_check,
    geometric_grid, law_convergence_report, law_prediction, toeplitz_eigenvalue, toeplitz_eigenvalues,
    toeplitz_spectrum_for, DecayClass, GapSide, ProfileTerm, TransverseProfile, SANDWICH_EPSILON,
};
use landau_core::{Error, RadialFactor};

fn gaussian(mu: f64, b: f64) -> TransverseProfile {
    TransverseProfile::radial(1.0, RadialFactor::Gaussian { mu }, b).unwrap()
}

#[test]
fn gaussian_profile_has_geometric_eigenvalues() {
    for (b, mu) in [(1.0, 0.5), (2.0, 1.0), (0.5, 3.0)] {
        let r: f64 = b / (b + 2.0 * mu);
        let s = toeplitz_eigenvalues(&gaussian(mu, b), 0, 60).unwrap();
        assert_eq!((s.m_min(), s.m_max()), (0, 60));
        for m in 0..=60 {
            let exact = r.powi(m as i32 + 1);
            assert!((s.get(m).unwrap() / exact - 1.0).abs() < 1e-10, "b {b} mu {mu} m {m}");
        }
    }
}

#[test]
fn constant_profile_gives_the_constant_in_every_sector() {
    let u = TransverseProfile::radial(0.7, RadialFactor::One, 1.3).unwrap();
    for q in 0..4 {
        for m in [-(q as i64), 0, 5, 40] {
            assert!((toeplitz_eigenvalue(&u, q, m).unwrap() - 0.7).abs() < 1e-11, "q {q} m {m}");
        }
    }
    assert!(toeplitz_eigenvalue(&u, 1, -2).is_err());
}

#[test]
fn counts_of_a_geometric_spectrum() {
    let r: f64 = 0.5;
    let s = toeplitz_spectrum_for(&gaussian(0.5, 1.0), 0, 1e-9).unwrap();
    for eta in [0.3f64, 0.07, 1.3e-3, 4.1e-7, 2.2e-9] {
        // m >= 0 with r^{m+1} > eta
        let x = eta.ln() / r.ln();
        let expected = x.ceil() as usize - 1;
        assert_eq!(counting(&s, eta).unwrap(), expected, "eta {eta}");
        assert_eq!(counting_negative(&s, eta).unwrap(), 0);
    }
    let etas = geometric_grid(1e-1, 1e-8, 5).unwrap();
    let table = counting_function(&s, &etas).unwrap();
    assert!(table.rows.windows(2).all(|w| w[1].n_plus >= w[0].n_plus));
    assert!(table.rows.iter().all(|r| r.n_minus == 0 && r.n_star == r.n_plus));
}

#[test]
fn negative_profile_counts_below() {
    let u = TransverseProfile::radial(-1.0, RadialFactor::Gaussian { mu: 0.5 }, 1.0).unwrap();
    assert!(u.is_nonpositive() && !u.is_nonnegative());
    let s = toeplitz_spectrum_for(&u, 0, 1e-6).unwrap();
    assert_eq!(counting(&s, 1e-5).unwrap(), 0);
    assert_eq!(counting_negative(&s, 1e-5).unwrap(), 16);
    let rep = law_convergence_report(&u, 0, &geometric_grid(1e-3, 1e-8, 10).unwrap()).unwrap();
    assert!((rep.last_decade_mean - 1.0).abs() < 0.05);
}

#[test]
fn counting_below_the_resolved_tail_is_a_range_error() {
    let s = toeplitz_eigenvalues(&gaussian(0.5, 1.0), 0, 10).unwrap();
    // u_10 = 2^-11
    assert!(counting(&s, 1e-3).is_ok());
    assert!(matches!(counting(&s, 1e-4), Err(Error::Range(_))));
    assert!(counting(&s, 0.0).is_err());
    assert!(matches!(exponential_law(1.0, 0.5, 1.0, 0.5), Err(Error::Domain(_))));
    assert!(compact_law(1.0).is_err());
    assert!(geometric_grid(1e-6, 1e-3, 3).is_err());
    assert!(geometric_grid(1e-3, 1e-6, 0).is_err());
}

#[test]
fn tail_classes_are_detected() {
    match gaussian(0.5, 1.0).decay_class {
        DecayClass::Exponential { beta, mu } => {
            assert!((beta - 1.0).abs() < 1e-3 && (mu - 0.5).abs() < 1e-3, "{beta} {mu}")
        }
        c => panic!("{c:?}"),
    }
    match TransverseProfile::radial(2.0, RadialFactor::Power { alpha: 3.0 }, 1.0).unwrap().decay_class {
        // the (1 + rho^2) correction biases the tail fit slightly
        DecayClass::Power { alpha, u0 } => {
            assert!((alpha - 3.0).abs() < 0.05 && (u0 / 2.0 - 1.0).abs() < 0.1, "{alpha} {u0}")
        }
        c => panic!("{c:?}"),
    }
    let compact = RadialFactor::Compact { radius: 2.0, smoothing: 0.2 };
    match TransverseProfile::radial(1.0, compact, 1.0).unwrap().decay_class {
        DecayClass::Compact { radius, lower_bound } => {
            assert!((radius - 2.0).abs() < 0.05 && lower_bound > 0.0, "{radius} {lower_bound}")
        }
        c => panic!("{c:?}"),
    }
    let mut u = gaussian(0.5, 1.0);
    u.decay_class = DecayClass::Unclassified;
    assert!(matches!(law_prediction(&u, 1e-3), Err(Error::Unsupported(_))));
}

#[test]
fn exponential_law_at_beta_one_and_its_neighbours() {
    let (mu, b) = (0.5, 1.0);
    for eta in [1e-3, 1e-6, 1e-12] {
        let at_one = exponential_law(1.0, mu, b, eta).unwrap();
        assert!((at_one - eta.ln().abs() / 2f64.ln()).abs() < 1e-12 * at_one);
        // the beta < 1 branch approaches (b / 2 mu) |ln eta|, which differs
        // from the beta = 1 branch by (2 mu / b) / ln(1 + 2 mu / b)
        let below = exponential_law(1.0 - 1e-9, mu, b, eta).unwrap();
        let ratio = at_one / below;
        let expected = (2.0 * mu / b) / (1.0 + 2.0 * mu / b).ln();
        assert!((ratio - expected).abs() < 1e-6, "{ratio} vs {expected}");
        // the beta > 1 branch blows up as beta -> 1+
        let above = [1.1, 1.01, 1.001].map(|beta| exponential_law(beta, mu, b, eta).unwrap());
        assert!(above[0] < above[1] && above[1] < above[2]);
        assert!(above[2] > 100.0 * at_one);
    }
}

#[test]
fn geometric_spectrum_follows_the_logarithmic_law() {
    for (b, mu) in [(1.0, 0.5), (2.0, 1.0)] {
        let rep = law_convergence_report(&gaussian(mu, b), 0, &geometric_grid(1e-3, 1e-8, 10).unwrap()).unwrap();
        assert!((rep.last_decade_mean - 1.0).abs() < 0.05, "{rep:?}");
        assert!(rep.rows.iter().all(|r| r.prediction > 0.0));
    }
}

#[test]
fn power_profile_follows_the_area_law() {
    let alpha = 4.0;
    let u = TransverseProfile::radial(1.0, RadialFactor::Power { alpha }, 1.0).unwrap();
    let etas = geometric_grid(1e-2, 1e-6, 10).unwrap();
    let rep = law_convergence_report(&u, 0, &etas).unwrap();
    let tail: Vec<f64> = rep
        .rows
        .iter()
        .filter(|r| r.eta <= 1e-5 * (1.0 + 1e-12))
        .map(|r| r.count as f64 * r.eta.powf(2.0 / alpha))
        .collect();
    let mean = tail.iter().sum::<f64>() / tail.len() as f64;
    assert!((mean / 0.5 - 1.0).abs() < 0.1, "{mean}");
    assert!((rep.last_decade_mean - 1.0).abs() < 0.1, "{}", rep.last_decade_mean);
}

#[test]
fn compact_law_does_not_see_the_radius() {
    let small = TransverseProfile::radial(1.0, RadialFactor::Compact { radius: 1.0, smoothing: 0.2 }, 1.0).unwrap();
    let large = TransverseProfile::radial(1.0, RadialFactor::Compact { radius: 2.0, smoothing: 0.2 }, 1.0).unwrap();
    let etas = geometric_grid(1e-3, 1e-10, 2).unwrap();
    let a = law_convergence_report(&small, 0, &etas).unwrap();
    let b = law_convergence_report(&large, 0, &etas).unwrap();
    for (ra, rb) in a.rows.iter().zip(&b.rows) {
        assert_eq!(ra.prediction, rb.prediction);
        assert!(rb.count >= ra.count);
    }
    // a larger support only adds a bounded number of sectors relative to the law
    let last = a.rows.len() - 1;
    assert!(b.rows[last].ratio / a.rows[last].ratio < 3.0);
}

#[test]
fn profile_terms_add_linearly() {
    let terms = vec![
        ProfileTerm { coefficient: 0.3, radial: RadialFactor::Gaussian { mu: 0.5 } },
        ProfileTerm { coefficient: 0.2, radial: RadialFactor::Gaussian { mu: 2.0 } },
    ];
    let u = TransverseProfile::from_terms(terms, 1.0).unwrap();
    for m in 0..10 {
        let exact = 0.3 * 0.5f64.powi(m + 1) + 0.2 * 0.2f64.powi(m + 1);
        assert!((toeplitz_eigenvalue(&u, 0, m as i64).unwrap() / exact - 1.0).abs() < 1e-10);
    }
    assert!(TransverseProfile::from_terms(vec![], 0.0).is_err());
}

#[test]
fn perturbed_cluster_sits_inside_the_counting_sandwich() {
    let p = LandauProblem::reference();
    let basis = BasisTruncation::reference();
    let etas = [0.01, 0.003, 0.001];
    for side in [GapSide::Below, GapSide::Above] {
        let rep = gap_accumulation_check(&p, &basis, side, &etas).unwrap();
        assert_eq!(rep.epsilon, SANDWICH_EPSILON);
        assert!(rep.max_slack <= 3, "{rep:?}");
        for r in &rep.rows {
            assert!(r.lower <= r.n_plus && r.n_plus <= r.upper);
        }
        assert!(rep.rows.windows(2).all(|w| w[1].count >= w[0].count));
        assert!(rep.rows[2].count > rep.rows[0].count);
    }
    // nothing leaves the level by more than the largest Toeplitz eigenvalue
    let far = gap_accumulation_check(&p, &basis, GapSide::Below, &[1.0]).unwrap();
    assert_eq!(far.rows[0].count, 0);
    assert_eq!(far.rows[0].upper, 0);
}
