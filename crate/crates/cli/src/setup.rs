//! `problem.*` and `numerics.*` blocks.

use crate::config::Config;
use crate::error::CliError;
use landau_core::potential::SampledFunction;
use landau_core::{
    BasisTruncation, Grid1D, LandauProblem, LongitudinalFactor, PerturbationProfile, Potential1D, RadialFactor, Stencil,
};
use std::path::Path;

pub struct Setup {
    pub problem: LandauProblem,
    pub q: usize,
    pub grid: Grid1D,
    pub stencil: Stencil,
    pub basis: BasisTruncation,
}

fn read_samples(cfg: &Config, key: &str) -> Result<SampledFunction, CliError> {
    let path = cfg.path(key).ok_or_else(|| cfg.invalid(key, "a sampled family needs a data file"))?;
    load_samples(&path).map_err(|e| cfg.invalid(key, e))
}

/// Two comma-separated columns `x, y`; `#` lines are skipped.
pub fn load_samples(path: &Path) -> Result<SampledFunction, String> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| format!("{}: {e}", path.display()))?;
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (k, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| format!("{}: {e}", path.display()))?;
        let num = |i: usize| -> Result<f64, String> {
            rec.get(i)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| format!("{}: record {} needs two numbers", path.display(), k + 1))
        };
        xs.push(num(0)?);
        ys.push(num(1)?);
    }
    SampledFunction::new(xs, ys).map_err(|e| format!("{}: {e}", path.display()))
}

fn potential(cfg: &Config) -> Result<Potential1D, CliError> {
    let family = cfg.string_or("problem.v0", "sech2");
    let v = match family.as_str() {
        "zero" => Potential1D::Zero,
        "sech2" => Potential1D::Sech2 {
            depth: cfg.f64_or("problem.v0.depth", 2.0)?,
            width: cfg.positive_or("problem.v0.width", 1.0)?,
        },
        "square_well" => Potential1D::SquareWell {
            depth: cfg.f64_or("problem.v0.depth", 0.5)?,
            half_width: cfg.positive_or("problem.v0.half_width", 1.0)?,
        },
        "gaussian" => Potential1D::Gaussian {
            depth: cfg.f64_or("problem.v0.depth", 1.0)?,
            width: cfg.positive_or("problem.v0.width", 1.0)?,
        },
        "sampled" => Potential1D::Sampled(read_samples(cfg, "problem.v0.file")?),
        other => {
            return Err(cfg.invalid(
                "problem.v0",
                format!("unknown family `{other}` (zero, sech2, square_well, gaussian, sampled)"),
            ))
        }
    };
    v.validate().map_err(|e| cfg.invalid("problem.v0", e))?;
    Ok(v)
}

fn perturbation(cfg: &Config) -> Result<PerturbationProfile, CliError> {
    let family = cfg.string_or("problem.v", "gaussian_product");
    let amplitude = |cfg: &Config| cfg.f64_or("problem.v.amplitude", 1.0);
    let nu = |cfg: &Config| cfg.positive_or("problem.v.nu", 1.0);
    let v = match family.as_str() {
        "zero" => PerturbationProfile::zero(),
        "gaussian_product" => {
            PerturbationProfile::gaussian_product(amplitude(cfg)?, cfg.positive_or("problem.v.mu", 1.0)?, nu(cfg)?)
        }
        "power_radial" => {
            PerturbationProfile::power_radial(amplitude(cfg)?, cfg.positive_or("problem.v.alpha", 4.0)?, nu(cfg)?)
        }
        "compact_radial" => PerturbationProfile::compact_radial(
            amplitude(cfg)?,
            cfg.positive_or("problem.v.radius", 1.0)?,
            cfg.positive_or("problem.v.smoothing", 0.2)?,
            nu(cfg)?,
        ),
        "sampled" => PerturbationProfile::separable(
            amplitude(cfg)?,
            RadialFactor::Sampled(read_samples(cfg, "problem.v.radial_file")?),
            LongitudinalFactor::Sampled(read_samples(cfg, "problem.v.longitudinal_file")?),
        ),
        other => {
            return Err(cfg.invalid(
                "problem.v",
                format!("unknown family `{other}` (zero, gaussian_product, power_radial, compact_radial, sampled)"),
            ))
        }
    };
    v.validate().map_err(|e| cfg.invalid("problem.v", e))?;
    Ok(v)
}

pub fn setup(cfg: &Config) -> Result<Setup, CliError> {
    let b = cfg.positive_or("problem.b", 1.0)?;
    let m = cfg.i64_or("problem.m", 0)?;
    let q = cfg.usize_or("problem.q", 1)?;
    let problem =
        LandauProblem::new(b, potential(cfg)?, perturbation(cfg)?, m).map_err(|e| cfg.invalid("problem.b", e))?;
    if (q as i64) < -m {
        return Err(cfg.invalid("problem.q", format!("level q = {q} does not exist in sector m = {m}")));
    }

    let x_min = cfg.f64_or("numerics.x_min", -30.0)?;
    let x_max = cfg.f64_or("numerics.x_max", 30.0)?;
    let n = cfg.usize_or("numerics.n", 601)?;
    let grid = Grid1D::new(x_min, x_max, n).map_err(|e| cfg.invalid("numerics.x_min", e))?;
    let stencil =
        Stencil::from_order(cfg.usize_or("numerics.stencil", 8)?).map_err(|e| cfg.invalid("numerics.stencil", e))?;
    // three modes of headroom above the level
    let default_modes = q - problem.m_minus() + 4;
    let modes = cfg.usize_or("numerics.modes", default_modes)?;
    let basis = BasisTruncation::with_stencil(modes, grid, stencil).map_err(|e| cfg.invalid("numerics.modes", e))?;
    Ok(Setup { problem, q, grid, stencil, basis })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::PathBuf;

    #[test]
    fn defaults_are_the_reference_configuration() {
        let cfg = Config::parse("t", PathBuf::new(), "").unwrap();
        let s = setup(&cfg).unwrap();
        assert_eq!(s.problem, LandauProblem::reference());
        assert_eq!(s.q, 1);
        let r = BasisTruncation::reference();
        assert_eq!((s.basis.modes, s.basis.grid.n, s.basis.stencil), (r.modes, r.grid.n, r.stencil));
        assert_eq!(s.basis.grid.h(), r.grid.h());
    }

    #[test]
    fn families_and_their_errors() {
        let cfg = Config::parse(
            "t",
            PathBuf::new(),
            "problem.v0 = square_well\nproblem.v = power_radial\nproblem.v.alpha = 3\n",
        )
        .unwrap();
        let s = setup(&cfg).unwrap();
        assert_eq!(s.problem.v0, Potential1D::SquareWell { depth: 0.5, half_width: 1.0 });
        assert_eq!(s.problem.perturbation, PerturbationProfile::power_radial(1.0, 3.0, 1.0));
        let cfg = Config::parse("t", PathBuf::new(), "\nproblem.v0 = lorentzian\n").unwrap();
        match setup(&cfg) {
            Err(CliError::Config { line: Some(2), .. }) => {}
            other => panic!("{:?}", other.err()),
        }
        let cfg = Config::parse("t", PathBuf::new(), "problem.q = 0\nproblem.m = -2\n").unwrap();
        assert!(matches!(setup(&cfg), Err(CliError::Config { line: Some(1), .. })));
    }
}
