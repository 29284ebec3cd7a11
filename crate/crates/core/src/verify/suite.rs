//! The check suite, run concurrently and merged in a fixed order.

use rayon::prelude::*;

use super::boundary::{boundary_report, sample_points, BoundaryEnd, FitOptions};
use super::report::{Check, GridSummary, VerificationReport};
use super::residual::{closed_residual, coclosed_residual};
use super::torsion::{torsion_report, TorsionOptions};
use crate::numerics::fit::fit_polynomial;
use crate::numerics::grid::chebyshev_per_decade;
use crate::ode::{DSolution, OdeError};
use crate::structures::{build_g2, ProfileSet};

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub t_min: f64,
    /// Upper end of the residual grid; `None` means `min(L, 10)`.
    pub t_max: Option<f64>,
    pub per_decade: usize,
    pub coclosed_tol: f64,
    pub consistency_tol: f64,
    pub taylor_tol: f64,
    pub parity_window: f64,
    pub parity_degree: usize,
    pub parity_tol: f64,
    pub fit: FitOptions,
    pub torsion: TorsionOptions,
    /// Run the (slower) torsion and flux checks.
    pub torsion_checks: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            t_min: 1e-3,
            t_max: None,
            per_decade: 400,
            coclosed_tol: 1e-7,
            consistency_tol: 1e-9,
            taylor_tol: 1e-6,
            parity_window: 0.02,
            parity_degree: 7,
            parity_tol: 1e-6,
            fit: FitOptions::default(),
            torsion: TorsionOptions::default(),
            torsion_checks: true,
        }
    }
}

impl VerifyOptions {
    pub fn grid(&self, domain_end: f64) -> Vec<f64> {
        let hi = self.t_max.unwrap_or(10.0).min(domain_end);
        chebyshev_per_decade(self.t_min, hi, self.per_decade)
    }
}

type Task<'a> = Box<dyn Fn() -> Vec<Check> + Send + Sync + 'a>;

fn run(tasks: Vec<Task<'_>>) -> Vec<Check> {
    let parts: Vec<Vec<Check>> = tasks.par_iter().map(|f| f()).collect();
    parts.into_iter().flatten().collect()
}

fn coclosed_check(p: &ProfileSet, grid: &[f64], tol: f64) -> Check {
    let claim = "dψ = 0";
    match coclosed_residual(&build_g2(p), grid) {
        Ok(r) => {
            let (v, t) = r.max();
            Check::at_most("coclosed", claim, v, tol, GridSummary::of(grid)).with_metric("t_at_max", t)
        }
        Err(e) => Check::error("coclosed", claim, e),
    }
}

fn closed_check(p: &ProfileSet, grid: &[f64], tol: f64) -> Check {
    let claim = "dφ = 0 (torsion-free)";
    match closed_residual(&build_g2(p), grid) {
        Ok(r) => {
            let (v, t) = r.max();
            let mut c = Check::info("torsion_free", claim, v).with_metric("t_at_max", t);
            c.grid = GridSummary::of(grid);
            c.tolerance = tol;
            c.with_metric("flag", if v <= tol { 1.0 } else { 0.0 })
        }
        Err(e) => Check::error("torsion_free", claim, e),
    }
}

fn boundary_checks(p: &ProfileSet, opts: &FitOptions) -> Vec<Check> {
    match boundary_report(p, BoundaryEnd::Start, opts) {
        Ok(r) => r.checks,
        Err(e) => vec![Check::error("boundary", "smooth extension at t = 0", e)],
    }
}

fn torsion_checks(p: &ProfileSet, grid: &[f64], opts: &TorsionOptions) -> Vec<Check> {
    match torsion_report(p, &build_g2(p), grid, opts) {
        Ok(r) => r.checks,
        Err(e) => vec![Check::error("torsion", "torsion forms", e)],
    }
}

/// `d_{i,4} = 1/16 − b₀²a_{i,3}/2` from the bootstrap and
/// `b_{i,2} = 1/(8b₀) − b₀Σa_{j,3}` from a fit of the recovered `B_i`.
pub fn taylor_relations(sol: &DSolution, fit: &FitOptions, tol: f64) -> Vec<Check> {
    let sys = sol.system();
    let (b0, a3) = (sys.b0, sys.a3());
    let d4 = sol.bootstrap().d4();
    let mut c = Check::at_most(
        "taylor_d4",
        "d_{i,4} = 1/16 − b₀²a_{i,3}/2",
        (0..3)
            .map(|i| (d4[i] - (1.0 / 16.0 - 0.5 * b0 * b0 * a3[i])).abs())
            .fold(0.0, f64::max),
        tol,
        GridSummary::empty(),
    );
    for i in 0..3 {
        c = c.with_metric(format!("d_{},4", i + 1), d4[i]);
    }
    let mut out = vec![c];

    let want = 1.0 / (8.0 * b0) - b0 * (a3[0] + a3[1] + a3[2]);
    let claim = "b_{i,2} = 1/(8b₀) − b₀(a_{1,3}+a_{2,3}+a_{3,3})";
    match sol.profile_set().map_err(|e| e.to_string()).and_then(|p| {
        boundary_report(&p, BoundaryEnd::Start, fit).map_err(|e| e.to_string())
    }) {
        Ok(r) => {
            let b2 = r.b2();
            let mut c = Check::at_most(
                "taylor_b2",
                claim,
                b2.iter().map(|x| (x - want).abs()).fold(0.0, f64::max),
                tol,
                GridSummary::of(&sample_points(fit.window, fit.samples)),
            )
            .with_metric("expected", want);
            for i in 0..3 {
                c = c.with_metric(format!("b_{},2", i + 1), b2[i]);
            }
            out.push(c);
        }
        Err(e) => out.push(Check::error("taylor_b2", claim, e)),
    }
    out
}

fn positivity_check(sol: &DSolution, grid: &[f64]) -> Check {
    let mut min = f64::INFINITY;
    let mut at = f64::NAN;
    let node_ts = sol.nodes().iter().map(|n| n.t);
    for t in grid.iter().copied().chain(node_ts).filter(|t| *t > 0.0) {
        for d in sol.d(t) {
            if !(d >= min) {
                min = d;
                at = t;
            }
        }
    }
    Check::at_least("positivity", "D_i > 0 for t > 0", min, f64::MIN_POSITIVE, GridSummary::of(grid))
        .with_metric("t_at_min", at)
}

fn parity_check(sol: &DSolution, opts: &VerifyOptions) -> Check {
    let claim = "D_i even at t = 0";
    let ss = sample_points(opts.parity_window, opts.fit.samples);
    let mut worst = 0.0f64;
    for i in 0..3 {
        let ys: Vec<f64> = ss.iter().map(|&t| sol.d(t)[i]).collect();
        match fit_polynomial(&ss, &ys, opts.parity_degree, opts.parity_window) {
            Ok(f) => worst = worst.max(f.max_scaled(true) / f.max_scaled(false)),
            Err(e) => return Check::error("parity", claim, e),
        }
    }
    Check::at_most("parity", claim, worst, opts.parity_tol, GridSummary::of(&ss))
}

fn consistency_check(sol: &DSolution, p: &ProfileSet, grid: &[f64], tol: f64) -> Check {
    let mut worst = 0.0f64;
    for &t in grid {
        let (a, b) = p.values(t);
        let d = sol.d(t);
        for k in 0..3 {
            let (i, j) = ((k + 1) % 3, (k + 2) % 3);
            let v = a[i] * b[i] * a[j] * b[j];
            worst = worst.max((v - d[k]).abs() / d[k].abs());
        }
    }
    Check::at_most(
        "consistency",
        "A_iB_iA_jB_j = D_k",
        worst,
        tol,
        GridSummary::of(grid),
    )
}

fn switch_check(sol: &DSolution) -> Check {
    Check::at_most(
        "series_switch",
        "series and integrator agree past t_switch",
        sol.switch_mismatch(),
        1e-9,
        GridSummary::empty(),
    )
}

/// Full suite for a solution of the coclosed system.
pub fn verify_solution(subject: &str, sol: &DSolution, opts: &VerifyOptions) -> Result<VerificationReport, OdeError> {
    let p = sol.profile_set()?;
    let grid = opts.grid(sol.t_max());
    let (p, grid) = (&p, &grid);
    let mut tasks: Vec<Task> = vec![
        Box::new(|| vec![coclosed_check(p, grid, opts.coclosed_tol)]),
        Box::new(|| vec![positivity_check(sol, grid)]),
        Box::new(|| vec![parity_check(sol, opts)]),
        Box::new(|| vec![consistency_check(sol, p, grid, opts.consistency_tol)]),
        Box::new(|| vec![switch_check(sol)]),
        Box::new(|| boundary_checks(p, &opts.fit)),
        Box::new(|| taylor_relations(sol, &opts.fit, opts.taylor_tol)),
    ];
    if opts.torsion_checks {
        tasks.push(Box::new(|| torsion_checks(p, grid, &opts.torsion)));
    }
    Ok(VerificationReport::new(subject, run(tasks)))
}

/// Suite for profiles not tied to a solver run (analytic families, tables).
pub fn verify_profiles(subject: &str, p: &ProfileSet, opts: &VerifyOptions) -> VerificationReport {
    let grid = opts.grid(p.domain_end);
    let grid = &grid;
    let mut tasks: Vec<Task> = vec![
        Box::new(|| vec![coclosed_check(p, grid, opts.coclosed_tol)]),
        Box::new(|| vec![closed_check(p, grid, opts.torsion.closed_tol)]),
        Box::new(|| boundary_checks(p, &opts.fit)),
    ];
    if opts.torsion_checks {
        tasks.push(Box::new(|| torsion_checks(p, grid, &opts.torsion)));
    }
    VerificationReport::new(subject, run(tasks))
}
