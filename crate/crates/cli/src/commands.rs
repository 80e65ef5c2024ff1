//! One function per subcommand. Each reads its `task.*` keys, runs the
//! pipeline and returns tables plus scalar summaries.

use crate::config::Config;
use crate::error::CliError;
use crate::record::{Output, Table};
use crate::setup::Setup;
use landau_core::dynamics::{autocorrelation_with, default_window, fit_decay, DensityOptions};
use landau_core::fgr::{fgr_value_at, overlap_polynomial_check};
use landau_core::operators::{assemble, commutator_ad, embedded_eigenpair, mourre_quantity};
use landau_core::resonance::{continue_in_kappa, fit_expansion, theta_independence, ExpansionReference};
use landau_core::schrodinger1d::{bound_state_richardson, bound_states_with, jost_solutions, longitudinal_matrix};
use landau_core::toeplitz::{
    counting, counting_function, gap_accumulation_check, geometric_grid, law_convergence_report, toeplitz_eigenvalues,
    toeplitz_spectrum_for, transverse_profile, DecayClass, GapSide, TransverseProfile,
};
use landau_core::{BasisTruncation, Complex64, Grid1D, LandauProblem, Potential1D, RadialFactor, Stencil};

type Res<T> = Result<T, CliError>;

fn theta(cfg: &Config) -> Res<Complex64> {
    Ok(Complex64::new(0.0, cfg.positive_or("task.theta", 0.3)?))
}

fn positive_list(cfg: &Config, key: &str, default: &[f64]) -> Res<Vec<f64>> {
    let v = cfg.f64_list(key)?.unwrap_or_else(|| default.to_vec());
    if v.iter().any(|x| !(*x > 0.0)) {
        return Err(cfg.invalid(key, "values must be positive"));
    }
    Ok(v)
}

/// Basis for level `q` in sector `m`, widened when the configured one is
/// too thin for this level.
fn basis_for(s: &Setup, q: usize, m: i64) -> Res<BasisTruncation> {
    let need = q - landau_core::specfun::m_minus(m) + 4;
    if s.basis.modes >= need {
        Ok(s.basis)
    } else {
        Ok(BasisTruncation::with_stencil(need, s.grid, s.stencil)?)
    }
}

pub fn bound(cfg: &Config, s: &Setup) -> Res<Output> {
    let ks = positive_list(cfg, "task.k", &[0.5, 1.0, 2.0, 4.0])?;
    let v0 = &s.problem.v0;
    let states = bound_states_with(v0, &s.grid, s.stencil)?;
    let mut levels = Table::new("bound_states", &["index", "lambda", "lambda_refined", "lambda_extrapolated"]);
    for (i, st) in states.iter().enumerate() {
        let r = bound_state_richardson(v0, &s.grid, i, s.stencil)?;
        levels.push(vec![i.into(), st.lambda.into(), r.fine.into(), r.extrapolated.into()]);
    }
    let mut scattering = Table::new(
        "scattering",
        &["k", "t_re", "t_im", "r_re", "r_im", "flux", "wronskian_variation", "tail_residual"],
    );
    for &k in &ks {
        let j = jost_solutions(v0, k, &s.grid)?;
        let (t, r) = (j.transmission_amplitude(), j.reflection_amplitude());
        scattering.push(vec![
            k.into(),
            t.re.into(),
            t.im.into(),
            r.re.into(),
            r.im.into(),
            j.flux().into(),
            j.wronskian_variation.into(),
            j.tail_residual.into(),
        ]);
    }
    let mut out = Output { tables: vec![levels, scattering], ..Default::default() };
    out.summary.insert("bound_state_count".into(), states.len().into());
    out.summary.insert("stencil_order".into(), s.stencil.order().into());
    Ok(out)
}

pub fn fgr(cfg: &Config, s: &Setup) -> Res<Output> {
    let qs = cfg.i64_list("task.q")?.unwrap_or_else(|| vec![s.q as i64]);
    let ms = cfg.i64_list("task.m")?.unwrap_or_else(|| vec![s.problem.m]);
    if qs.iter().any(|&q| q < 1) {
        return Err(cfg.invalid("task.q", "levels must be at least 1 (q = 0 has no lower channel)"));
    }
    let theta = theta(cfg)?;
    let tol = cfg.positive_or("task.route_tol", 1e-3)?;
    let mut table = Table::new(
        "fgr",
        &[
            "q",
            "m",
            "energy",
            "first_order",
            "f_re",
            "f_im",
            "im_f_channels",
            "route_gap",
            "f_error_estimate",
            "channels",
        ],
    );
    let mut failures = Vec::new();
    for &q in &qs {
        for &m in &ms {
            if q < -m {
                continue;
            }
            let q = q as usize;
            let p = LandauProblem { m, ..s.problem.clone() };
            let r = fgr_value_at(&p, &basis_for(s, q, m)?, q, theta)?;
            if !r.routes_agree(tol) {
                failures.push(format!("q = {q}, m = {m}: {}", r.check(tol).unwrap_err()));
            }
            table.push(vec![
                q.into(),
                m.into(),
                r.energy.into(),
                r.first_order.into(),
                r.f.re.into(),
                r.f.im.into(),
                r.im_f_channels.into(),
                r.route_gap.into(),
                r.f_error_estimate.into(),
                r.channel_amplitudes.len().into(),
            ]);
        }
    }
    if table.rows.is_empty() {
        return Err(cfg.invalid("task.q", "no level exists in the requested sectors"));
    }
    let mut out = Output { tables: vec![table], ..Default::default() };
    out.summary.insert("route_tol".into(), tol.into());
    if !failures.is_empty() {
        out.failure = Some(failures.join("; "));
    }
    Ok(out)
}

pub fn resonance(cfg: &Config, s: &Setup) -> Res<Output> {
    let kappa_max = cfg.positive_or("task.kappa_max", 0.08)?;
    let steps = cfg.usize_or("task.kappa_steps", 16)?;
    if steps < 4 {
        return Err(cfg.invalid("task.kappa_steps", "the quadratic fit needs at least 4 steps"));
    }
    let fit_tol = cfg.positive_or("task.fit_tol", 1e-7)?;
    let theta = theta(cfg)?;
    let grid: Vec<f64> = (0..=steps).map(|i| kappa_max * i as f64 / steps as f64).collect();
    let branch = continue_in_kappa(&s.problem, &s.basis, theta, s.q, &grid)?;
    let fit = fit_expansion(&branch.points, fit_tol)?;
    let r = fgr_value_at(&s.problem, &s.basis, s.q, theta)?;
    let cmp = fit.compare(&ExpansionReference { energy: r.energy, first_order: r.first_order, f: r.f });

    let mut points = Table::new("branch", &["kappa", "w_re", "w_im", "residual", "iterations"]);
    for pt in &branch.points {
        points.push(vec![pt.kappa.into(), pt.w.re.into(), pt.w.im.into(), pt.residual.into(), pt.iterations.into()]);
    }
    let mut coefficients = Table::new("fit", &["coefficient", "re", "im"]);
    for (name, c) in [("c0", fit.c0), ("c1", fit.c1), ("c2", fit.c2)] {
        coefficients.push(vec![name.into(), c.re.into(), c.im.into()]);
    }
    let mut comparison = Table::new("comparison", &["quantity", "fitted", "reference", "error", "error_kind"]);
    comparison.push(vec!["c0".into(), fit.c0.re.into(), r.energy.into(), cmp.c0_error.into(), "absolute".into()]);
    comparison.push(vec![
        "c1".into(),
        fit.c1.re.into(),
        r.first_order.into(),
        cmp.c1_relative_error.into(),
        "relative".into(),
    ]);
    comparison.push(vec![
        "im_c2".into(),
        fit.c2.im.into(),
        (-r.f.im).into(),
        cmp.im_c2_relative_error.into(),
        "relative".into(),
    ]);
    let mut out = Output { tables: vec![points, coefficients, comparison], ..Default::default() };
    out.summary.insert("isolation_radius".into(), branch.isolation_radius.into());
    out.summary.insert("fit_residual".into(), fit.fit_residual.into());
    out.summary.insert("points_used".into(), fit.points_used.into());
    out.summary.insert("kappa_window_max".into(), fit.kappa_window.1.into());
    out.summary.insert("cubic_estimate".into(), fit.cubic_estimate.into());
    out.summary.insert("c2_relative_error".into(), cmp.c2_relative_error.into());
    out.summary.insert("route_gap".into(), r.route_gap.into());
    Ok(out)
}

pub fn dynamics(cfg: &Config, s: &Setup) -> Res<Output> {
    let kappa = cfg.f64_or("task.kappa", 0.04)?;
    let theta = theta(cfg)?;
    let options = DensityOptions {
        theta,
        tolerance: cfg.positive_or("task.density_tol", DensityOptions::default().tolerance)?,
        ..DensityOptions::default()
    };
    let pair = embedded_eigenpair(&s.problem, &s.basis, s.q)?;
    let delta = cfg.positive_or("task.delta", default_window(&s.problem, pair.lambda))?;
    let im_f = fgr_value_at(&s.problem, &s.basis, s.q, theta)?.f.im;
    let gamma_pred = 2.0 * kappa * kappa * im_f;
    let scale = if gamma_pred > 0.0 { Some(1.0 / gamma_pred) } else { None };
    let needs = |key: &str| cfg.invalid(key, "required when the predicted decay rate is zero");
    let t_max = match cfg.f64("task.t_max")? {
        Some(t) if t > 0.0 => t,
        Some(_) => return Err(cfg.invalid("task.t_max", "must be positive")),
        None => 2.0 * scale.ok_or_else(|| needs("task.t_max"))?,
    };
    let n_times = cfg.usize_or("task.n_times", 201)?;
    if n_times < 2 {
        return Err(cfg.invalid("task.n_times", "need at least two times"));
    }
    let window = match cfg.f64_list("task.fit_window")? {
        Some(w) if w.len() == 2 && w[0] >= 0.0 && w[1] > w[0] => (w[0], w[1]),
        Some(_) => return Err(cfg.invalid("task.fit_window", "expects `start, end` with 0 <= start < end")),
        None => {
            let sc = scale.ok_or_else(|| needs("task.fit_window"))?;
            (0.2 * sc, 1.5 * sc)
        }
    };
    let times: Vec<f64> = (0..n_times).map(|i| t_max * i as f64 / (n_times - 1) as f64).collect();
    let series = autocorrelation_with(&s.problem, &s.basis, s.q, kappa, &times, delta, &options)?;
    let fit = fit_decay(&series, window)?;

    let mut table = Table::new("series", &["t", "re", "im", "abs"]);
    for (t, v) in series.times.iter().zip(&series.values) {
        table.push(vec![(*t).into(), v.re.into(), v.im.into(), v.norm().into()]);
    }
    let mut fitted = Table::new("fit", &["quantity", "value"]);
    for (name, v) in [
        ("a_re", fit.a.re),
        ("a_im", fit.a.im),
        ("gamma", fit.gamma),
        ("omega", fit.omega),
        ("gamma_predicted", gamma_pred),
        ("background_norm", fit.background_norm),
        ("curvature", fit.curvature),
        ("window_start", window.0),
        ("window_end", window.1),
    ] {
        fitted.push(vec![name.into(), v.into()]);
    }
    let mut out = Output { tables: vec![table, fitted], ..Default::default() };
    out.summary.insert("kappa".into(), kappa.into());
    out.summary.insert("center".into(), series.center.into());
    out.summary.insert("delta".into(), series.delta.into());
    out.summary.insert("reference_energy".into(), series.reference_energy.into());
    out.summary.insert("error_bound".into(), series.error_bound.into());
    out.summary.insert("density_evaluations".into(), series.density_evaluations.into());
    out.warnings.extend(series.warning);
    Ok(out)
}

fn class_name(c: &DecayClass) -> String {
    match c {
        DecayClass::Power { alpha, u0 } => format!("power(alpha = {alpha:.6}, u0 = {u0:.6})"),
        DecayClass::Exponential { beta, mu } => format!("exponential(beta = {beta:.6}, mu = {mu:.6})"),
        DecayClass::Compact { radius, lower_bound } => format!("compact(radius = {radius:.6}, min = {lower_bound:.6})"),
        DecayClass::Unclassified => "unclassified".into(),
    }
}

fn eta_grid(cfg: &Config) -> Res<Vec<f64>> {
    if let Some(list) = cfg.f64_list("task.eta")? {
        if list.iter().any(|e| !(*e > 0.0)) {
            return Err(cfg.invalid("task.eta", "values must be positive"));
        }
        return Ok(list);
    }
    let hi = cfg.positive_or("task.eta_max", 1e-3)?;
    let lo = cfg.positive_or("task.eta_min", 1e-8)?;
    let per = cfg.usize_or("task.per_decade", 10)?;
    geometric_grid(hi, lo, per).map_err(|e| cfg.invalid("task.eta_min", e))
}

fn lowest_bound_state(s: &Setup) -> Res<landau_core::BoundState> {
    bound_states_with(&s.problem.v0, &s.grid, s.stencil)?
        .into_iter()
        .next()
        .ok_or_else(|| landau_core::Error::NoBoundState("the longitudinal well has no bound state".into()).into())
}

pub fn toeplitz(cfg: &Config, s: &Setup) -> Res<Output> {
    let q = cfg.usize_or("task.q", s.q)?;
    let etas = eta_grid(cfg)?;
    let psi = lowest_bound_state(s)?;
    let u = transverse_profile(&s.problem.perturbation, &psi, s.problem.b)?;
    let eta_min = etas.iter().copied().fold(f64::INFINITY, f64::min);
    let spectrum = toeplitz_spectrum_for(&u, q, eta_min)?;

    let mut eig = Table::new("spectrum", &["m", "eigenvalue"]);
    for (k, v) in spectrum.eigenvalues.iter().enumerate() {
        eig.push(vec![(spectrum.m_min() + k as i64).into(), (*v).into()]);
    }
    let counts = counting_function(&spectrum, &etas)?;
    let mut count_table = Table::new("counting", &["eta", "n_plus", "n_minus", "n_star"]);
    for r in &counts.rows {
        count_table.push(vec![r.eta.into(), r.n_plus.into(), r.n_minus.into(), r.n_star.into()]);
    }
    let mut out = Output { tables: vec![count_table, eig], ..Default::default() };
    out.summary.insert("q".into(), q.into());
    out.summary.insert("m_max".into(), spectrum.m_max().into());
    out.summary.insert("decay_class".into(), class_name(&u.decay_class).into());
    let sign_definite = u.is_nonnegative() || u.is_nonpositive();
    if u.decay_class != DecayClass::Unclassified && sign_definite {
        let rep = law_convergence_report(&u, q, &etas)?;
        let mut law = Table::new("law", &["eta", "count", "prediction", "ratio"]);
        for r in &rep.rows {
            law.push(vec![r.eta.into(), r.count.into(), r.prediction.into(), r.ratio.into()]);
        }
        out.tables.push(law);
        out.summary.insert("last_decade_mean".into(), rep.last_decade_mean.into());
        out.summary.insert("last_decade_slope".into(), rep.last_decade_slope.into());
    } else {
        out.warnings.push("no law comparison: the profile is unclassified or changes sign".into());
    }
    Ok(out)
}

pub fn gap(cfg: &Config, s: &Setup) -> Res<Output> {
    let sides = match cfg.string_or("task.side", "both").as_str() {
        "below" => vec![GapSide::Below],
        "above" => vec![GapSide::Above],
        "both" => vec![GapSide::Below, GapSide::Above],
        other => return Err(cfg.invalid("task.side", format!("expected below, above or both, got `{other}`"))),
    };
    let etas = positive_list(cfg, "task.eta", &[0.01, 0.003, 0.001])?;
    let mut table = Table::new("gap", &["side", "eta", "count", "lower", "n_plus", "upper", "slack"]);
    let mut out = Output::default();
    for side in sides {
        let rep = gap_accumulation_check(&s.problem, &s.basis, side, &etas)?;
        let name = match side {
            GapSide::Below => "below",
            GapSide::Above => "above",
        };
        for r in &rep.rows {
            table.push(vec![
                name.into(),
                r.eta.into(),
                r.count.into(),
                r.lower.into(),
                r.n_plus.into(),
                r.upper.into(),
                r.slack.into(),
            ]);
        }
        out.summary.insert("level".into(), rep.level.into());
        out.summary.insert("m_max".into(), rep.m_max.into());
        out.summary.insert("epsilon".into(), rep.epsilon.into());
        out.summary.insert(format!("outer_edge_{name}"), rep.outer_edge.into());
        out.summary.insert(format!("max_slack_{name}"), rep.max_slack.into());
    }
    out.tables.push(table);
    Ok(out)
}

pub fn mourre(cfg: &Config, s: &Setup) -> Res<Output> {
    let delta = cfg.positive_or("task.delta", 0.1)?;
    let d = mourre_quantity(&s.problem, &s.basis, s.q, delta)?;
    let mut table = Table::new("eigenvalues", &["index", "eigenvalue", "removed"]);
    for (k, v) in d.eigenvalues.iter().enumerate() {
        table.push(vec![k.into(), (*v).into(), (k < d.removed).into()]);
    }
    let mut out = Output { tables: vec![table], ..Default::default() };
    out.summary.insert("value".into(), d.value.into());
    out.summary.insert("window_lo".into(), d.window.0.into());
    out.summary.insert("window_hi".into(), d.window.1.into());
    out.summary.insert("rank".into(), d.rank.into());
    out.summary.insert("lower_channel_count".into(), d.lower_channel_count.into());
    out.summary.insert("removed".into(), d.removed.into());
    Ok(out)
}

struct Check {
    name: &'static str,
    value: f64,
    target: f64,
    tolerance: f64,
    pass: bool,
}

fn within(name: &'static str, value: f64, target: f64, tolerance: f64) -> Check {
    Check { name, value, target, tolerance, pass: (value - target).abs() <= tolerance }
}

fn below(name: &'static str, value: f64, tolerance: f64) -> Check {
    Check { name, value, target: 0.0, tolerance, pass: value <= tolerance }
}

/// Regression suite on the reference configuration. Takes no problem or
/// numerics keys.
pub fn all(cfg: &Config) -> Res<Output> {
    let with_dynamics = match cfg.string_or("task.dynamics", "true").as_str() {
        "true" => true,
        "false" => false,
        other => return Err(cfg.invalid("task.dynamics", format!("expected true or false, got `{other}`"))),
    };
    let p = LandauProblem::reference();
    let basis = BasisTruncation::reference();
    let theta = Complex64::new(0.0, 0.3);
    let mut checks = Vec::new();

    let grid = Grid1D::symmetric(20.0, 0.02)?;
    let est = bound_state_richardson(&Potential1D::poschl_teller(), &grid, 0, Stencil::Second)?;
    checks.push(within("bound_state_lambda", est.extrapolated, -1.0, 1e-6));

    let scatter_grid = Grid1D::symmetric(20.0, 0.05)?;
    let mut refl = 0.0f64;
    for k in [0.5, 1.0, 2.0, 4.0] {
        refl = refl.max(jost_solutions(&Potential1D::poschl_teller(), k, &scatter_grid)?.reflection.norm());
    }
    checks.push(below("reflectionless_max_abs_r", refl, 1e-6));

    let mut closed = 0.0f64;
    for (b, mu) in [(1.0, 0.5), (2.0, 1.0)] {
        let u = TransverseProfile::radial(1.0, RadialFactor::Gaussian { mu }, b)?;
        let r: f64 = b / (b + 2.0 * mu);
        for (m, v) in toeplitz_eigenvalues(&u, 0, 60)?.eigenvalues.iter().enumerate() {
            closed = closed.max((v / r.powi(m as i32 + 1) - 1.0).abs());
        }
    }
    checks.push(below("toeplitz_closed_form_rel", closed, 1e-8));

    let gaussian = TransverseProfile::radial(1.0, RadialFactor::Gaussian { mu: 0.5 }, 1.0)?;
    let rep = law_convergence_report(&gaussian, 0, &geometric_grid(1e-3, 1e-8, 10)?)?;
    checks.push(within("beta_one_law_mean", rep.last_decade_mean, 1.0, 0.05));

    let power = TransverseProfile::radial(1.0, RadialFactor::Power { alpha: 4.0 }, 1.0)?;
    let spectrum = toeplitz_spectrum_for(&power, 0, 1e-6)?;
    let etas = geometric_grid(1e-5, 1e-6, 10)?;
    let mut scaled = 0.0;
    for &eta in &etas {
        scaled += counting(&spectrum, eta)? as f64 * eta.sqrt();
    }
    checks.push(within("power_law_mean", scaled / etas.len() as f64, 0.5, 0.05));

    let r = fgr_value_at(&p, &basis, 1, theta)?;
    checks.push(below("fgr_route_gap", r.route_gap, 1e-3));
    let branch = continue_in_kappa(&p, &basis, theta, 1, &(0..=16).map(|i| 0.005 * i as f64).collect::<Vec<_>>())?;
    let fit = fit_expansion(&branch.points, 1e-7)?;
    let cmp = fit.compare(&ExpansionReference { energy: r.energy, first_order: r.first_order, f: r.f });
    checks.push(below("expansion_c0_abs", cmp.c0_error, 1e-6));
    checks.push(below("expansion_c1_rel", cmp.c1_relative_error, 1e-4));
    checks.push(below("expansion_im_c2_rel", cmp.im_c2_relative_error, 0.05));

    let thetas = [0.2, 0.3, 0.4].map(|t| Complex64::new(0.0, t));
    checks.push(below("theta_spread", theta_independence(&p, &basis, 1, 0.05, &thetas)?.spread, 1e-5));

    if with_dynamics {
        let kappa = 0.04;
        let gp = 2.0 * kappa * kappa * r.f.im;
        let times: Vec<f64> = (0..=200).map(|i| 2.0 / gp * i as f64 / 200.0).collect();
        let series = autocorrelation_with(&p, &basis, 1, kappa, &times, 0.25, &DensityOptions::default())?;
        let fit = fit_decay(&series, (0.2 / gp, 1.5 / gp))?;
        checks.push(within("dynamics_gamma_ratio", fit.gamma / gp, 1.0, 0.1));
    }

    let gap = gap_accumulation_check(&p, &basis, GapSide::Below, &[0.01, 0.003, 0.001])?;
    checks.push(below("gap_max_slack", gap.max_slack as f64, 3.0));

    let small = BasisTruncation::new(3, Grid1D::symmetric(12.0, 0.1)?)?;
    let s = 5e-4;
    let plus = assemble(&p, &small, Complex64::new(s, 0.0), 0.0)?.to_dense();
    let minus = assemble(&p, &small, Complex64::new(-s, 0.0), 0.0)?.to_dense();
    let oracle = (minus - plus) / Complex64::new(2.0 * s, 0.0);
    let comm = commutator_ad(&p, &small, 1)?.to_dense();
    let scale = comm.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let err = comm.iter().zip(oracle.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max) / scale;
    checks.push(below("commutator_oracle_rel", err, 1e-6));
    let free = LandauProblem { v0: Potential1D::Zero, ..p.clone() };
    let comm0 = commutator_ad(&free, &small, 1)?.to_dense();
    let h0 = longitudinal_matrix(&small.grid, small.stencil, 1.0, &vec![0.0; small.grid.n]);
    let j = small.modes;
    let mut free_err = 0.0f64;
    for r in 0..small.dim() {
        for c in 0..small.dim() {
            let (i, a, i2, a2) = (r / j, r % j, c / j, c % j);
            let expected = if a == a2 && h0.in_band(i, i2) { 2.0 * h0.get(i, i2) } else { 0.0 };
            free_err = free_err.max((comm0[(r, c)] - expected).norm());
        }
    }
    checks.push(below("free_commutator_abs", free_err, 0.0));

    let alphas: Vec<f64> = (0..10).map(|i| 0.13 + 0.37 * i as f64).collect();
    let mut overlap = 0.0f64;
    for (q, m) in [(1usize, 0i64), (2, 1), (2, -1)] {
        for c in overlap_polynomial_check(q, m, 1.0, &[1.0], &alphas)? {
            overlap = overlap.max((c.quadrature - c.polynomial).abs() / c.quadrature.abs());
        }
    }
    checks.push(below("overlap_polynomial_rel", overlap, 1e-9));

    let mut table = Table::new("checks", &["check", "value", "target", "tolerance", "pass"]);
    for c in &checks {
        table.push(vec![c.name.into(), c.value.into(), c.target.into(), c.tolerance.into(), c.pass.into()]);
    }
    let failed: Vec<&str> = checks.iter().filter(|c| !c.pass).map(|c| c.name).collect();
    let mut out = Output { tables: vec![table], ..Default::default() };
    out.summary.insert("checks".into(), checks.len().into());
    out.summary.insert("failed".into(), failed.len().into());
    if !failed.is_empty() {
        out.failure = Some(format!("regression checks failed: {}", failed.join(", ")));
    }
    Ok(out)
}
