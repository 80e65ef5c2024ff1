//! Longitudinal wells `v0(x)` and axisymmetric perturbations `V(rho, x)`.
//!
//! Built-in families carry closed-form complex evaluators (for complex
//! scaling) and exact derivative jets. Sampled data is supported but is
//! neither dilatable nor differentiable.

use crate::error::{Error, Result};
use crate::jet::Jet;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

/// Piecewise-linear interpolant of samples, zero outside the sampled range.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampledFunction {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl SampledFunction {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() || xs.len() < 2 {
            return Err(Error::domain("sampled function needs at least two (x, y) pairs"));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::domain("sample abscissae must be strictly increasing"));
        }
        if xs.iter().chain(&ys).any(|v| !v.is_finite()) {
            return Err(Error::domain("sampled values must be finite"));
        }
        Ok(SampledFunction { xs, ys })
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x < self.xs[0] || x > self.xs[n - 1] {
            return 0.0;
        }
        let i = self.xs.partition_point(|&t| t <= x).clamp(1, n - 1);
        let (x0, x1) = (self.xs[i - 1], self.xs[i]);
        let t = (x - x0) / (x1 - x0);
        self.ys[i - 1] * (1.0 - t) + self.ys[i] * t
    }

    /// Trapezoidal integral of `self * f` over the sample range.
    pub fn integrate_against(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.xs
            .windows(2)
            .zip(self.ys.windows(2))
            .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] * f(x[0]) + y[1] * f(x[1])))
            .sum()
    }
}

fn csech2(z: Complex64) -> Complex64 {
    let c = z.cosh();
    (c * c).inv()
}

/// Longitudinal potential `v0(x)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Potential1D {
    Zero,
    /// `-depth * sech^2(x / width)`
    Sech2 {
        depth: f64,
        width: f64,
    },
    /// `-depth` on `|x| < half_width`
    SquareWell {
        depth: f64,
        half_width: f64,
    },
    /// `-depth * exp(-(x / width)^2)`
    Gaussian {
        depth: f64,
        width: f64,
    },
    Sampled(SampledFunction),
    /// `base(x) + offset`; does not decay unless `offset = 0`.
    Shifted {
        offset: f64,
        base: Box<Potential1D>,
    },
}

impl Potential1D {
    /// The reflectionless well `-2 sech^2 x` with the single bound state
    /// `lambda = -1`, `psi = sech(x) / sqrt(2)`.
    pub fn poschl_teller() -> Self {
        Potential1D::Sech2 { depth: 2.0, width: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            Potential1D::Zero | Potential1D::Sampled(_) => true,
            Potential1D::Sech2 { depth, width } | Potential1D::Gaussian { depth, width } => {
                depth.is_finite() && *width > 0.0 && width.is_finite()
            }
            Potential1D::SquareWell { depth, half_width } => depth.is_finite() && *half_width > 0.0,
            Potential1D::Shifted { offset, base } => offset.is_finite() && base.validate().is_ok(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::domain(format!("invalid potential parameters: {self:?}")))
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Potential1D::Zero => 0.0,
            Potential1D::Sech2 { depth, width } => {
                let c = (x / width).cosh();
                -depth / (c * c)
            }
            Potential1D::SquareWell { depth, half_width } => {
                if x.abs() < *half_width {
                    -depth
                } else {
                    0.0
                }
            }
            Potential1D::Gaussian { depth, width } => -depth * (-(x / width).powi(2)).exp(),
            Potential1D::Sampled(s) => s.eval(x),
            Potential1D::Shifted { offset, base } => base.eval(x) + offset,
        }
    }

    /// Open half-angle of the sector on which the analytic continuation
    /// decays; `None` for non-analytic families.
    pub fn dilation_bound(&self) -> Option<f64> {
        match self {
            Potential1D::Zero => Some(FRAC_PI_2),
            Potential1D::Sech2 { .. } => Some(FRAC_PI_2),
            Potential1D::Gaussian { .. } => Some(FRAC_PI_4),
            Potential1D::SquareWell { .. } | Potential1D::Sampled(_) => None,
            Potential1D::Shifted { base, .. } => base.dilation_bound(),
        }
    }

    pub fn eval_complex(&self, z: Complex64) -> Option<Complex64> {
        match self {
            Potential1D::Zero => Some(Complex64::new(0.0, 0.0)),
            Potential1D::Sech2 { depth, width } => Some(-*depth * csech2(z / *width)),
            Potential1D::Gaussian { depth, width } => {
                let u = z / *width;
                Some(-*depth * (-(u * u)).exp())
            }
            Potential1D::Shifted { offset, base } => base.eval_complex(z).map(|v| v + offset),
            _ => None,
        }
    }

    /// Highest derivative order available through [`Potential1D::jet`].
    pub fn derivative_order(&self) -> usize {
        match self {
            Potential1D::Zero | Potential1D::Sech2 { .. } | Potential1D::Gaussian { .. } => usize::MAX,
            Potential1D::SquareWell { .. } | Potential1D::Sampled(_) => 0,
            Potential1D::Shifted { base, .. } => base.derivative_order(),
        }
    }

    /// Taylor jet of `v0` at `x` up to `order`.
    pub fn jet(&self, x: f64, order: usize) -> Option<Jet> {
        match self {
            Potential1D::Zero => Some(Jet::constant(0.0, order)),
            Potential1D::Sech2 { depth, width } => {
                let t = Jet::variable(x, order).scale(1.0 / width).tanh();
                // sech^2 = 1 - tanh^2
                Some((&t * &t).add_scalar(-1.0).scale(*depth))
            }
            Potential1D::Gaussian { depth, width } => {
                let u = Jet::variable(x, order).scale(1.0 / width);
                Some((&u * &u).scale(-1.0).exp().scale(-depth))
            }
            Potential1D::Shifted { offset, base } => base.jet(x, order).map(|j| j.add_scalar(*offset)),
            _ if order == 0 => Some(Jet::constant(self.eval(x), 0)),
            _ => None,
        }
    }

    /// `v_j(x) = x^j v0^(j)(x)` for `j = 0..=order`.
    pub fn scaled_derivatives(&self, x: f64, order: usize) -> Result<Vec<f64>> {
        let jet = self
            .jet(x, order)
            .ok_or_else(|| Error::domain(format!("potential has no derivatives of order {order}")))?;
        let d = jet.derivatives();
        Ok(d.iter().enumerate().map(|(j, v)| x.powi(j as i32) * v).collect())
    }

    /// Points where `v0` or its derivative jumps.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            Potential1D::SquareWell { half_width, .. } => vec![-half_width, *half_width],
            Potential1D::Sampled(s) => s.xs().to_vec(),
            Potential1D::Shifted { base, .. } => base.breakpoints(),
            _ => vec![],
        }
    }

    /// Mean of `v0` over `[x - h/2, x + h/2]`, integrated piecewise between
    /// breakpoints. Equals `eval(x)` up to `O(h^2)` for smooth potentials
    /// and restores second-order accuracy of grid methods at jumps.
    pub fn cell_average(&self, x: f64, h: f64) -> f64 {
        let bps = self.breakpoints();
        if bps.is_empty() {
            return self.eval(x);
        }
        let (a, b) = (x - 0.5 * h, x + 0.5 * h);
        let mut sorted = bps;
        sorted.sort_by(f64::total_cmp);
        let lo = sorted.partition_point(|&t| t <= a);
        let hi = sorted.partition_point(|&t| t < b);
        let mut nodes = vec![a];
        nodes.extend_from_slice(&sorted[lo..hi]);
        nodes.push(b);
        const GX: [f64; 3] = [-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4];
        const GW: [f64; 3] = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];
        let mut total = 0.0;
        for seg in nodes.windows(2) {
            let (c, r) = (0.5 * (seg[0] + seg[1]), 0.5 * (seg[1] - seg[0]));
            total += r * GX.iter().zip(&GW).map(|(g, w)| w * self.eval(c + r * g)).sum::<f64>();
        }
        total / h
    }

    /// Smallest `R` such that `|v0(x)| <= tol * max|v0|` for `|x| >= R`,
    /// found on a coarse scan.
    pub fn effective_range(&self, tol: f64) -> f64 {
        let peak = (0..=4000).map(|i| self.eval(-50.0 + 0.025 * i as f64).abs()).fold(0.0, f64::max);
        if peak == 0.0 {
            return 0.0;
        }
        let mut r = 50.0;
        while r > 0.0 && self.eval(r).abs() <= tol * peak && self.eval(-r).abs() <= tol * peak {
            r -= 0.025;
        }
        r + 0.025
    }
}

/// Radial factor `W(rho)` of a separable perturbation term.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum RadialFactor {
    One,
    /// `exp(-mu rho^2)`
    Gaussian {
        mu: f64,
    },
    /// `(1 + rho^2)^(-alpha/2)`
    Power {
        alpha: f64,
    },
    /// Smoothed indicator of `rho < radius`: one on `rho <= radius - smoothing`.
    Compact {
        radius: f64,
        smoothing: f64,
    },
    /// `P(s) exp(-alpha s)` with `s = b rho^2 / 2` and `P` given by its
    /// monomial coefficients in `s`.
    LaguerreWeight {
        coeffs: Vec<f64>,
        alpha: f64,
        b: f64,
    },
    Sampled(SampledFunction),
}

/// Smooth step: 0 for `t <= 0`, 1 for `t >= 1`, built from `exp(-1/t)`.
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let f = |u: f64| if u > 0.0 { (-1.0 / u).exp() } else { 0.0 };
    let a = f(t);
    a / (a + f(1.0 - t))
}

impl RadialFactor {
    pub fn eval(&self, rho: f64) -> f64 {
        match self {
            RadialFactor::One => 1.0,
            RadialFactor::Gaussian { mu } => (-mu * rho * rho).exp(),
            RadialFactor::Power { alpha } => (1.0 + rho * rho).powf(-0.5 * alpha),
            RadialFactor::Compact { radius, smoothing } => {
                if *smoothing <= 0.0 {
                    if rho < *radius {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    smooth_step((radius - rho) / smoothing)
                }
            }
            RadialFactor::LaguerreWeight { coeffs, alpha, b } => {
                let s = 0.5 * b * rho * rho;
                let p = coeffs.iter().rev().fold(0.0, |acc, c| acc * s + c);
                p * (-alpha * s).exp()
            }
            RadialFactor::Sampled(f) => f.eval(rho),
        }
    }

    /// Exponential rate in `s = b rho^2 / 2` carried by the factor; used
    /// to tilt the radial quadrature.
    pub fn quadrature_tilt(&self, b: f64) -> f64 {
        match self {
            RadialFactor::Gaussian { mu } => 2.0 * mu / b,
            RadialFactor::LaguerreWeight { alpha, b: bw, .. } => alpha * bw / b,
            _ => 0.0,
        }
    }

    pub fn is_nonnegative(&self) -> bool {
        match self {
            RadialFactor::LaguerreWeight { coeffs, .. } => coeffs.len() == 1 && coeffs[0] >= 0.0,
            RadialFactor::Sampled(f) => f.ys().iter().all(|&y| y >= 0.0),
            _ => true,
        }
    }
}

/// Longitudinal factor `w(x)` of a separable perturbation term.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum LongitudinalFactor {
    /// `exp(-nu x^2)`
    Gaussian {
        nu: f64,
    },
    /// `sech^2(x / width)`
    Sech2 {
        width: f64,
    },
    Sampled(SampledFunction),
}

impl LongitudinalFactor {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            LongitudinalFactor::Gaussian { nu } => (-nu * x * x).exp(),
            LongitudinalFactor::Sech2 { width } => {
                let c = (x / width).cosh();
                1.0 / (c * c)
            }
            LongitudinalFactor::Sampled(f) => f.eval(x),
        }
    }

    pub fn eval_complex(&self, z: Complex64) -> Option<Complex64> {
        match self {
            LongitudinalFactor::Gaussian { nu } => Some((-*nu * z * z).exp()),
            LongitudinalFactor::Sech2 { width } => Some(csech2(z / *width)),
            LongitudinalFactor::Sampled(_) => None,
        }
    }

    pub fn dilation_bound(&self) -> Option<f64> {
        match self {
            LongitudinalFactor::Gaussian { .. } => Some(FRAC_PI_4),
            LongitudinalFactor::Sech2 { .. } => Some(FRAC_PI_2),
            LongitudinalFactor::Sampled(_) => None,
        }
    }

    pub fn jet(&self, x: f64, order: usize) -> Option<Jet> {
        match self {
            LongitudinalFactor::Gaussian { nu } => {
                let u = Jet::variable(x, order);
                Some((&u * &u).scale(-nu).exp())
            }
            LongitudinalFactor::Sech2 { width } => {
                let t = Jet::variable(x, order).scale(1.0 / width).tanh();
                Some((&t * &t).scale(-1.0).add_scalar(1.0))
            }
            LongitudinalFactor::Sampled(_) if order == 0 => Some(Jet::constant(self.eval(x), 0)),
            LongitudinalFactor::Sampled(_) => None,
        }
    }

    pub fn is_nonnegative(&self) -> bool {
        match self {
            LongitudinalFactor::Sampled(f) => f.ys().iter().all(|&y| y >= 0.0),
            _ => true,
        }
    }
}

/// One term `c * W(rho) * w(x)` of a perturbation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparableTerm {
    pub coefficient: f64,
    pub radial: RadialFactor,
    pub longitudinal: LongitudinalFactor,
}

/// Axisymmetric perturbation `V(rho, x) = sum_i c_i W_i(rho) w_i(x)`.
/// The empty sum is `V = 0`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PerturbationProfile {
    pub terms: Vec<SeparableTerm>,
}

impl PerturbationProfile {
    pub fn zero() -> Self {
        PerturbationProfile { terms: vec![] }
    }

    pub fn separable(coefficient: f64, radial: RadialFactor, longitudinal: LongitudinalFactor) -> Self {
        PerturbationProfile { terms: vec![SeparableTerm { coefficient, radial, longitudinal }] }
    }

    /// `amplitude * exp(-mu rho^2) * exp(-nu x^2)`.
    pub fn gaussian_product(amplitude: f64, mu: f64, nu: f64) -> Self {
        Self::separable(amplitude, RadialFactor::Gaussian { mu }, LongitudinalFactor::Gaussian { nu })
    }

    /// `amplitude * (1 + rho^2)^(-alpha/2) * exp(-nu x^2)`.
    pub fn power_radial(amplitude: f64, alpha: f64, nu: f64) -> Self {
        Self::separable(amplitude, RadialFactor::Power { alpha }, LongitudinalFactor::Gaussian { nu })
    }

    /// `amplitude * 1_{rho < radius} * exp(-nu x^2)` with a smoothed edge.
    pub fn compact_radial(amplitude: f64, radius: f64, smoothing: f64, nu: f64) -> Self {
        Self::separable(amplitude, RadialFactor::Compact { radius, smoothing }, LongitudinalFactor::Gaussian { nu })
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.coefficient == 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        for t in &self.terms {
            let bad = !t.coefficient.is_finite()
                || match &t.radial {
                    RadialFactor::Gaussian { mu } => !(*mu > 0.0),
                    RadialFactor::Power { alpha } => !(*alpha > 0.0),
                    RadialFactor::Compact { radius, smoothing } => {
                        !(*radius > 0.0) || *smoothing < 0.0 || smoothing > radius
                    }
                    RadialFactor::LaguerreWeight { alpha, b, coeffs } => {
                        !(*alpha > 0.0) || !(*b > 0.0) || coeffs.is_empty()
                    }
                    _ => false,
                }
                || match &t.longitudinal {
                    LongitudinalFactor::Gaussian { nu } => !(*nu > 0.0),
                    LongitudinalFactor::Sech2 { width } => !(*width > 0.0),
                    _ => false,
                };
            if bad {
                return Err(Error::domain(format!("invalid perturbation term: {t:?}")));
            }
        }
        Ok(())
    }

    pub fn eval(&self, rho: f64, x: f64) -> f64 {
        self.terms.iter().map(|t| t.coefficient * t.radial.eval(rho) * t.longitudinal.eval(x)).sum()
    }

    pub fn dilation_bound(&self) -> Option<f64> {
        self.terms.iter().map(|t| t.longitudinal.dilation_bound()).try_fold(FRAC_PI_2, |acc, b| b.map(|b| acc.min(b)))
    }

    /// `V >= 0` everywhere, judged from the signs of the factors.
    pub fn is_sign_definite(&self) -> bool {
        !self.terms.is_empty()
            && self
                .terms
                .iter()
                .all(|t| t.coefficient >= 0.0 && t.radial.is_nonnegative() && t.longitudinal.is_nonnegative())
    }

    pub fn scaled(&self, c: f64) -> Self {
        PerturbationProfile {
            terms: self.terms.iter().map(|t| SeparableTerm { coefficient: c * t.coefficient, ..t.clone() }).collect(),
        }
    }

    /// Perturbation with the same action off the direction `omega` but
    /// whose projection `int omega(x) V(rho, x) dx` equals `target(rho)`:
    ///
    /// `V~ = target * omega / |omega|^2 + V - V_perp * omega / |omega|^2`,
    /// `V_perp(rho) = int omega V dx`.
    pub fn with_projection(&self, target: RadialFactor, omega: &SampledFunction) -> Result<Self> {
        let norm2 = omega.integrate_against(|x| omega.eval(x));
        if !(norm2 > 0.0) {
            return Err(Error::domain("projection direction must be nonzero"));
        }
        let dir = LongitudinalFactor::Sampled(omega.clone());
        let mut terms = vec![SeparableTerm { coefficient: 1.0 / norm2, radial: target, longitudinal: dir.clone() }];
        for t in &self.terms {
            terms.push(t.clone());
            let proj = omega.integrate_against(|x| t.longitudinal.eval(x));
            terms.push(SeparableTerm {
                coefficient: -t.coefficient * proj / norm2,
                radial: t.radial.clone(),
                longitudinal: dir.clone(),
            });
        }
        Ok(PerturbationProfile { terms })
    }
}
