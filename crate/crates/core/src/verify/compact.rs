//! Numerical view of the obstruction to a second singular orbit.

use serde::Serialize;

use super::report::{Check, GridSummary, VerificationReport};
use crate::numerics::grid::linspace;
use crate::ode::{solve, AProfile, CoclosedSystem, OdeError, SolveOptions};

#[derive(Debug, Clone)]
pub struct CompactOptions {
    pub a: [AProfile; 3],
    pub b0: f64,
    /// Smallest distance to `t = 1` reached by the integration.
    pub eps_min: f64,
    /// Distances at which `B_1` is tabulated.
    pub eps: Vec<f64>,
    pub grid_points: usize,
    /// Required growth of `B_1` per decade of `ε`.
    pub growth: f64,
}

impl Default for CompactOptions {
    fn default() -> Self {
        let s = AProfile::sine(std::f64::consts::PI);
        CompactOptions {
            a: [s.clone(), s.clone(), s],
            b0: 1.0,
            eps_min: 1e-3,
            eps: vec![1e-1, 1e-2, 1e-3],
            grid_points: 2000,
            growth: 10.0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BlowUpRow {
    pub eps: f64,
    pub t: f64,
    pub b: [f64; 3],
    pub sum_d: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompactReport {
    pub verdict: String,
    pub sum_d_half: f64,
    pub sum_d_end: f64,
    pub min_sum_d_dot: f64,
    pub blow_up: Vec<BlowUpRow>,
    pub report: VerificationReport,
}

pub const NO_EXTENSION: &str = "no compact extension: ΣD(1⁻) > 0";

/// Integrates the system on `[0, 1 − ε_min]` for `A_i` vanishing at `t = 1`
/// and records why no smooth second singular orbit can exist there.
pub fn compact_obstruction_demo(opts: &CompactOptions) -> Result<CompactReport, OdeError> {
    let sys = CoclosedSystem::new(opts.a.clone(), opts.b0, 1.0)?;
    let t_end = 1.0 - opts.eps_min;
    let sol = solve(
        &sys,
        &SolveOptions {
            t_max: t_end,
            ..Default::default()
        },
    )?;
    let b = sol.recover_b()?;

    let mut ts: Vec<f64> = linspace(0.0, t_end, opts.grid_points).into_iter().skip(1).collect();
    ts.extend(sol.nodes().iter().map(|n| n.t));
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    let grid = GridSummary::of(&ts);

    let sum = |v: [f64; 3]| v[0] + v[1] + v[2];
    let mut min_dot = f64::INFINITY;
    let mut at = f64::NAN;
    for &t in &ts {
        let s = sum(sol.d_dot(t));
        if !(s >= min_dot) {
            min_dot = s;
            at = t;
        }
    }
    let mut checks = vec![Check::at_least(
        "sum_d_increasing",
        "d(D₁+D₂+D₃)/dt > 0 at every grid point",
        min_dot,
        f64::MIN_POSITIVE,
        grid,
    )
    .with_metric("t_at_min", at)];

    let half = sum(sol.d(0.5));
    let end = sum(sol.d(t_end));
    let mut c = Check::at_least(
        "sum_d_bounded_below",
        "ΣD(1−ε) > ΣD(1/2) > 0",
        end - half,
        f64::MIN_POSITIVE,
        grid,
    )
    .with_metric("sum_d_half", half)
    .with_metric("sum_d_end", end);
    if !(half > 0.0) {
        c.passed = false;
    }
    checks.push(c);

    let blow_up: Vec<BlowUpRow> = opts
        .eps
        .iter()
        .map(|&eps| {
            let t = 1.0 - eps;
            BlowUpRow {
                eps,
                t,
                b: std::array::from_fn(|i| b[i].eval(t)),
                sum_d: sum(sol.d(t)),
            }
        })
        .collect();
    let mut growth = f64::INFINITY;
    for w in blow_up.windows(2) {
        let decades = (w[0].eps / w[1].eps).log10();
        let per_decade = (w[1].b[0].abs() / w[0].b[0].abs()).powf(1.0 / decades);
        growth = growth.min(per_decade);
    }
    let mut c = Check::at_least(
        "b_blow_up",
        "|B₁(1−ε)| grows at least 10× per decade of ε",
        growth,
        opts.growth,
        GridSummary::of(&blow_up.iter().map(|r| r.t).collect::<Vec<_>>()),
    );
    for r in &blow_up {
        c = c.with_metric(format!("B1(1-{})", r.eps), r.b[0]);
    }
    checks.push(c);

    let report = VerificationReport::new("compact obstruction", checks);
    let verdict = if end > 0.0 && report.passed {
        NO_EXTENSION.to_string()
    } else {
        "inconclusive".to_string()
    };
    Ok(CompactReport {
        verdict,
        sum_d_half: half,
        sum_d_end: end,
        min_sum_d_dot: min_dot,
        blow_up,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sine_profile_cannot_close_up() {
        let r = compact_obstruction_demo(&CompactOptions::default()).unwrap();
        assert_eq!(r.verdict, NO_EXTENSION, "{:#?}", r.report);
        assert!(r.sum_d_end > r.sum_d_half && r.sum_d_half > 0.0);
    }

    #[test]
    fn unequal_profiles_vanishing_at_one() {
        let opts = CompactOptions {
            a: [
                AProfile::sine(std::f64::consts::PI),
                AProfile::odd_poly(&[0.5, -0.5]),
                AProfile::odd_poly(&[0.5, -0.3, -0.2]),
            ],
            b0: -0.7,
            ..Default::default()
        };
        let r = compact_obstruction_demo(&opts).unwrap();
        assert_eq!(r.verdict, NO_EXTENSION, "{:#?}", r.report);
    }
}
