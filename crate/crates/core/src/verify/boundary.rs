//! Smooth-extension conditions at a singular orbit, tested by polynomial fits.

use serde::Serialize;

use super::report::{Check, GridSummary};
use crate::numerics::fit::{fit_polynomial, FitError, PolyFit};
use crate::scalar::ScalarFn;
use crate::structures::ProfileSet;

#[derive(Debug, Clone, Copy)]
pub struct FitOptions {
    pub window: f64,
    pub degree: usize,
    pub samples: usize,
    pub tolerance: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            window: 0.1,
            degree: 8,
            samples: 80,
            tolerance: 1e-5,
        }
    }
}

/// Which singular orbit the fit is taken at.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum BoundaryEnd {
    /// `t = 0`, fit variable `s = t`.
    Start,
    /// `t = L`, fit variable `s = L − t`.
    End(f64),
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundaryFit {
    pub end: BoundaryEnd,
    pub a: Vec<PolyFit>,
    pub b: Vec<PolyFit>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundaryReport {
    pub fit: BoundaryFit,
    pub checks: Vec<Check>,
}

impl BoundaryReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// Fitted `Ḃ̈_i(0)/2`, i.e. the coefficient of `s²` in `B_i`.
    pub fn b2(&self) -> [f64; 3] {
        std::array::from_fn(|i| self.fit.b[i].coefficient(2))
    }
}

/// Chebyshev–Gauss samples of `s` on `(0, window]`, ascending.
pub fn sample_points(window: f64, n: usize) -> Vec<f64> {
    (0..n)
        .rev()
        .map(|j| {
            let x = ((2 * j + 1) as f64 * std::f64::consts::PI / (2 * n) as f64).cos();
            0.5 * window * (1.0 + x)
        })
        .collect()
}

fn fit_fn(f: &ScalarFn, ss: &[f64], end: BoundaryEnd, opts: &FitOptions) -> Result<PolyFit, FitError> {
    let ys: Vec<f64> = ss
        .iter()
        .map(|&s| match end {
            BoundaryEnd::Start => f.eval(s),
            BoundaryEnd::End(l) => f.eval(l - s),
        })
        .collect();
    fit_polynomial(ss, &ys, opts.degree, opts.window)
}

fn scale_of(fit: &PolyFit) -> f64 {
    fit.scaled.iter().fold(0.0, |a, c| a.max(c.abs()))
}

/// Checks (i) `A_i` odd with `|A_i'(0)| = 1/2` and (ii) `B_i` even with equal
/// nonzero values and equal second derivatives at the chosen end.
pub fn boundary_report(p: &ProfileSet, end: BoundaryEnd, opts: &FitOptions) -> Result<BoundaryReport, FitError> {
    let ss = sample_points(opts.window, opts.samples);
    let grid = GridSummary::of(&ss);
    let tol = opts.tolerance;
    let mut a = Vec::new();
    let mut b = Vec::new();
    for i in 0..3 {
        a.push(fit_fn(&p.a[i], &ss, end, opts)?);
        b.push(fit_fn(&p.b[i], &ss, end, opts)?);
    }

    let mut checks = Vec::new();
    let a_even = a
        .iter()
        .map(|f| f.max_scaled(false) / scale_of(f))
        .fold(0.0, f64::max);
    checks.push(Check::at_most(
        "a_odd",
        "A_i are odd at the singular orbit",
        a_even,
        tol,
        grid,
    ));
    let slope = a
        .iter()
        .map(|f| (f.coefficient(1) - 0.5).abs())
        .fold(0.0, f64::max);
    checks.push(
        Check::at_most("a_slope", "dA_i/ds(0) = 1/2", slope, tol, grid)
            .with_metric("A1'(0)", a[0].coefficient(1))
            .with_metric("A2'(0)", a[1].coefficient(1))
            .with_metric("A3'(0)", a[2].coefficient(1)),
    );

    let b_scale = b.iter().map(scale_of).fold(0.0, f64::max);
    let b_odd = b.iter().map(|f| f.max_scaled(true)).fold(0.0, f64::max) / b_scale;
    checks.push(Check::at_most(
        "b_even",
        "B_i are even at the singular orbit",
        b_odd,
        tol,
        grid,
    ));
    let b0: Vec<f64> = b.iter().map(|f| f.coefficient(0)).collect();
    let spread0 = b0.iter().map(|x| (x - b0[0]).abs()).fold(0.0, f64::max) / b_scale;
    let mut c = Check::at_most(
        "b_equal_values",
        "B_1(0) = B_2(0) = B_3(0) ≠ 0",
        spread0,
        tol,
        grid,
    );
    if !(b0[0].abs() > tol * b_scale) {
        c.passed = false;
        c = c.with_note("B(0) vanishes");
    }
    checks.push(
        c.with_metric("B1(0)", b0[0])
            .with_metric("B2(0)", b0[1])
            .with_metric("B3(0)", b0[2]),
    );
    let b2: Vec<f64> = b.iter().map(|f| f.scaled[2]).collect();
    let spread2 = b2.iter().map(|x| (x - b2[0]).abs()).fold(0.0, f64::max) / b_scale;
    checks.push(
        Check::at_most(
            "b_equal_second_derivatives",
            "B_1''(0) = B_2''(0) = B_3''(0)",
            spread2,
            tol,
            grid,
        )
        .with_metric("b_1,2", b[0].coefficient(2))
        .with_metric("b_2,2", b[1].coefficient(2))
        .with_metric("b_3,2", b[2].coefficient(2)),
    );
    Ok(BoundaryReport {
        fit: BoundaryFit { end, a, b },
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::cone_family;

    #[test]
    fn cone_passes() {
        let r = boundary_report(&cone_family(1.0), BoundaryEnd::Start, &FitOptions::default()).unwrap();
        assert!(r.passed(), "{:?}", r.checks);
        for b2 in r.b2() {
            assert!((b2 - 0.125).abs() < 1e-8);
        }
    }

    #[test]
    fn wrong_slope_fails_condition_one() {
        let mut p = cone_family(1.0);
        p.a[0] = ScalarFn::identity();
        let r = boundary_report(&p, BoundaryEnd::Start, &FitOptions::default()).unwrap();
        let failed: Vec<_> = r.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        assert_eq!(failed, ["a_slope"]);
    }

    #[test]
    fn unequal_values_fail_condition_two() {
        let mut p = cone_family(1.0);
        p.b[2] = p.b[2].scale(1.1);
        let r = boundary_report(&p, BoundaryEnd::Start, &FitOptions::default()).unwrap();
        assert!(!r.get_passed("b_equal_values"));
    }

    #[test]
    fn far_end_uses_reflected_variable() {
        let mut p = cone_family(1.0);
        let s = ScalarFn::sin(0.5 / std::f64::consts::PI, std::f64::consts::PI, 0.0);
        p.a = [s.clone(), s.clone(), s];
        let r = boundary_report(&p, BoundaryEnd::End(1.0), &FitOptions::default()).unwrap();
        assert!(r.checks[0].passed && r.checks[1].passed, "{:?}", r.checks);
    }

    impl BoundaryReport {
        fn get_passed(&self, name: &str) -> bool {
            self.checks.iter().find(|c| c.name == name).unwrap().passed
        }
    }
}
