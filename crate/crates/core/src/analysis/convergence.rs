//! Refinement studies against the manufactured solution.

use crate::analysis::manufactured::{ExactSolution, ManufacturedProblem};
use crate::analysis::norms::error_norms;
use crate::analysis::{solve_mixed, SolverConfig};
use crate::discretization::Discretization;
use crate::error::{FeccError, Result};
use crate::material::MaterialParams;
use crate::mesh::MeshFamily;

/// Quadrature degree for error integrals.
pub const ERROR_QUADRATURE_DEGREE: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelErrors {
    /// Subdivisions per side.
    pub n: usize,
    pub h: f64,
    pub n_u: usize,
    pub n_p: usize,
    pub l2_u: f64,
    pub h1_u: f64,
    pub l2_p: f64,
    pub residual: f64,
}

/// Fitted `error ~ constant * h^rate` for each norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fit {
    pub rate: f64,
    pub constant: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub family: String,
    pub material: MaterialParams,
    pub config: SolverConfig,
    pub levels: Vec<LevelErrors>,
    pub l2_u: Fit,
    pub h1_u: Fit,
    pub l2_p: Fit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub family: MeshFamily,
    pub levels: Vec<usize>,
    pub young: f64,
    pub solver: SolverConfig,
}

/// Least-squares fit of `log e = log C + r log h`; returns `(r, C)`.
pub fn fit_rate(h: &[f64], e: &[f64]) -> Result<(f64, f64)> {
    if h.len() != e.len() || h.len() < 2 {
        return Err(FeccError::InvalidArgument("rate fit needs at least two levels".into()));
    }
    if h.iter().chain(e).any(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(FeccError::NonFinite("rate fit needs positive finite data".into()));
    }
    let xs: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let ys: Vec<f64> = e.iter().map(|v| v.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let rate = sxy / sxx;
    Ok((rate, (my - rate * mx).exp()))
}

fn fit_levels(levels: &[LevelErrors], pick: impl Fn(&LevelErrors) -> f64) -> Result<Fit> {
    // The coarsest level is pre-asymptotic; drop it when enough levels remain.
    let used = if levels.len() >= 3 { &levels[1..] } else { levels };
    let h: Vec<f64> = used.iter().map(|l| l.h).collect();
    let e: Vec<f64> = used.iter().map(pick).collect();
    let (rate, constant) = fit_rate(&h, &e)?;
    Ok(Fit { rate, constant })
}

pub fn check_levels(levels: &[usize]) -> Result<()> {
    if levels.len() < 2 {
        return Err(FeccError::InvalidArgument("a study needs at least two levels".into()));
    }
    if levels[0] == 0 || levels.windows(2).any(|w| w[1] != 2 * w[0]) {
        return Err(FeccError::InvalidArgument(format!(
            "levels must start above zero and double each time (got {levels:?})"
        )));
    }
    Ok(())
}

/// Runs the manufactured problem at every level for one material.
pub fn run_study(config: &StudyConfig, material: MaterialParams) -> Result<ConvergenceReport> {
    check_levels(&config.levels)?;
    let problem = ManufacturedProblem::new(material.lambda, material.mu, config.solver.form)?;
    let mut levels = Vec::with_capacity(config.levels.len());
    for &n in &config.levels {
        let disc = Discretization::new(config.family.generate(n)?)?;
        let (_, sol) = solve_mixed(&disc, material.lambda, material.mu, &config.solver, &|x| problem.f(x))?;
        let e = error_norms(&disc, &sol.u, &sol.p, &problem, ERROR_QUADRATURE_DEGREE)?;
        levels.push(LevelErrors {
            n,
            h: 1.0 / n as f64,
            n_u: sol.u.len(),
            n_p: sol.p.len(),
            l2_u: e.l2_u,
            h1_u: e.h1_u,
            l2_p: e.l2_p,
            residual: sol.residual,
        });
    }
    Ok(ConvergenceReport {
        family: config.family.name().to_string(),
        material,
        config: config.solver,
        l2_u: fit_levels(&levels, |l| l.l2_u)?,
        h1_u: fit_levels(&levels, |l| l.h1_u)?,
        l2_p: fit_levels(&levels, |l| l.l2_p)?,
        levels,
    })
}

/// One report per Poisson ratio, with Young's modulus from the config.
pub fn convergence_study(config: &StudyConfig, poisson: &[f64]) -> Result<Vec<ConvergenceReport>> {
    poisson
        .iter()
        .map(|&nu| run_study(config, MaterialParams::from_young_poisson(config.young, nu)?))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_recovers_power_law() {
        let h = [0.5, 0.25, 0.125];
        let e: Vec<f64> = h.iter().map(|x: &f64| 3.0 * x.powf(1.5)).collect();
        let (r, c) = fit_rate(&h, &e).unwrap();
        assert!((r - 1.5).abs() < 1e-12 && (c - 3.0).abs() < 1e-12);
        assert!(fit_rate(&[0.5], &[1.0]).is_err());
        assert!(fit_rate(&[0.5, 0.25], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn levels_must_double() {
        assert!(check_levels(&[4, 8, 16]).is_ok());
        assert!(check_levels(&[4, 8, 12]).is_err());
        assert!(check_levels(&[4]).is_err());
        assert!(check_levels(&[0, 0]).is_err());
    }

    #[test]
    fn errors_decrease_on_small_study() {
        let config = StudyConfig {
            family: MeshFamily::Triangles,
            levels: vec![4, 8, 16],
            young: 1.0,
            solver: SolverConfig::default(),
        };
        let reports = convergence_study(&config, &[0.3, 0.4999]).unwrap();
        for r in &reports {
            for w in r.levels.windows(2) {
                assert!(w[1].l2_u < w[0].l2_u && w[1].h1_u < w[0].h1_u && w[1].l2_p < w[0].l2_p);
            }
            assert!(r.l2_u.rate > 1.7, "{}", r.l2_u.rate);
        }
    }
}
