//! Versioned CSV reports. Numbers carry 12 significant digits.

use std::fmt::Write as _;

use crate::analysis::{ConvergenceReport, LockingRow};

fn num(v: f64) -> String {
    format!("{v:.11e}")
}

pub fn convergence_csv(reports: &[ConvergenceReport]) -> String {
    let mut out = String::from("# fecc-convergence v1\n");
    out.push_str("family,form,condensed,kappa,nu,lambda,mu,n,h,n_u,n_p,l2_u,h1_u,l2_p,residual\n");
    for r in reports {
        for l in &r.levels {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                r.family,
                r.config.form,
                r.config.condensed,
                num(r.config.kappa),
                num(r.material.poisson),
                num(r.material.lambda),
                num(r.material.mu),
                l.n,
                num(l.h),
                l.n_u,
                l.n_p,
                num(l.l2_u),
                num(l.h1_u),
                num(l.l2_p),
                num(l.residual),
            )
            .unwrap();
        }
    }
    for r in reports {
        writeln!(
            out,
            "# rates nu={} l2_u={} h1_u={} l2_p={}",
            num(r.material.poisson),
            num(r.l2_u.rate),
            num(r.h1_u.rate),
            num(r.l2_p.rate)
        )
        .unwrap();
        writeln!(
            out,
            "# constants nu={} l2_u={} h1_u={} l2_p={}",
            num(r.material.poisson),
            num(r.l2_u.constant),
            num(r.h1_u.constant),
            num(r.l2_p.constant)
        )
        .unwrap();
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InfSupRow {
    pub n: usize,
    pub h: f64,
    pub beta: f64,
    pub unfiltered_min: f64,
    pub alpha0: Option<f64>,
}

pub fn infsup_csv(family: &str, rows: &[InfSupRow]) -> String {
    let mut out = String::from("# fecc-infsup v1\n");
    out.push_str("family,n,h,beta,unfiltered_min,alpha0\n");
    for r in rows {
        let alpha = r.alpha0.map(num).unwrap_or_default();
        writeln!(out, "{family},{},{},{},{},{alpha}", r.n, num(r.h), num(r.beta), num(r.unfiltered_min)).unwrap();
    }
    let betas: Vec<f64> = rows.iter().map(|r| r.beta).collect();
    if !betas.is_empty() {
        let max = betas.iter().copied().fold(f64::MIN, f64::max);
        let min = betas.iter().copied().fold(f64::MAX, f64::min);
        writeln!(out, "# beta min={} max/min={}", num(min), num(max / min)).unwrap();
    }
    out
}

pub fn locking_csv(family: &str, rows: &[LockingRow]) -> String {
    let mut out = String::from("# fecc-locking v1\n");
    out.push_str("family,n,nu,lambda,mixed_l2_u,baseline_l2_u,ratio\n");
    for r in rows {
        writeln!(
            out,
            "{family},{},{},{},{},{},{}",
            r.n,
            num(r.poisson),
            num(r.lambda),
            num(r.mixed_l2_u),
            num(r.baseline_l2_u),
            num(r.ratio())
        )
        .unwrap();
    }
    out
}
