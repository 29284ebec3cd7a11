//! The complete torsion-free metric with `A = (r/3)√(1 − r⁻³)`, `B = r/√3`
//! and `dt = dr/√(1 − r⁻³)`.
//!
//! All quantities are parametrised by `u = √(r − 1)`, in which
//! `dt/du = 2r^{3/2}/√(r² + r + 1)` is smooth and nonvanishing, so the
//! endpoint singularity of `dt/dr` at `r = 1` disappears.

use std::sync::Arc;

use super::AnalyticError;
use crate::numerics::grid::geomspace;
use crate::numerics::quadrature::{cumulative, integrate, QuadOptions};
use crate::numerics::spline::CubicSpline;
use crate::scalar::{ScalarFn, ScalarLeaf};
use crate::structures::ProfileSet;

fn dt_du(u: f64) -> f64 {
    let r = 1.0 + u * u;
    2.0 * r.powf(1.5) / (r * r + r + 1.0).sqrt()
}

struct Inverse {
    /// Tabulated `(t_k, u_k)`.
    t: Vec<f64>,
    u: Vec<f64>,
    guess: CubicSpline,
    opts: QuadOptions,
}

impl Inverse {
    /// Solves `t(u) = t` by Newton iteration from the spline guess, with
    /// `t(u)` integrated from the nearest tabulated node.
    fn u_of(&self, t: f64) -> f64 {
        if t < 0.0 || t > *self.t.last().unwrap() * (1.0 + 1e-12) {
            return f64::NAN;
        }
        let k = self.t.partition_point(|&x| x <= t).clamp(1, self.t.len()) - 1;
        let (tk, uk) = (self.t[k], self.u[k]);
        let mut u = self.guess.eval(t);
        for _ in 0..8 {
            let Ok(tu) = integrate(dt_du, uk, u, &self.opts) else {
                return f64::NAN;
            };
            let step = (tk + tu - t) / dt_du(u);
            u -= step;
            if step.abs() <= 1e-16 * u.abs().max(1e-300) {
                break;
            }
        }
        u
    }
}

struct ULeaf(Arc<Inverse>);

impl ScalarLeaf for ULeaf {
    fn eval(&self, t: f64) -> f64 {
        self.0.u_of(t)
    }

    fn derivative(&self) -> Option<ScalarFn> {
        let inner = ScalarFn::leaf(Arc::new(ULeaf(self.0.clone())));
        Some(du_dt_of_u().compose(&inner))
    }

    fn describe(&self) -> String {
        "u(t)".into()
    }
}

/// `du/dt = √(u⁴ + 3u² + 3) / (2(1 + u²)^{3/2})` as a function of `u`.
fn du_dt_of_u() -> ScalarFn {
    let q = ScalarFn::poly(vec![3.0, 0.0, 3.0, 0.0, 1.0]).sqrt();
    let r = ScalarFn::poly(vec![1.0, 0.0, 1.0]);
    let r32 = ScalarFn::product(&[r.clone(), r.sqrt()]);
    q.mul(&r32.recip()).scale(0.5)
}

/// `A` and `B` as functions of `u`.
fn a_of_u() -> ScalarFn {
    let u = ScalarFn::identity();
    let q = ScalarFn::poly(vec![3.0, 0.0, 3.0, 0.0, 1.0]).sqrt();
    let r_sqrt = ScalarFn::poly(vec![1.0, 0.0, 1.0]).sqrt();
    ScalarFn::product(&[u, q, r_sqrt.recip()]).scale(1.0 / 3.0)
}

fn b_of_u() -> ScalarFn {
    ScalarFn::poly(vec![1.0, 0.0, 1.0]).scale(1.0 / 3f64.sqrt())
}

#[derive(Clone)]
pub struct BryantSalamon {
    inverse: Arc<Inverse>,
    u: ScalarFn,
    a: ScalarFn,
    b: ScalarFn,
}

impl std::fmt::Debug for BryantSalamon {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "BryantSalamon(t ≤ {})", self.t_max())
    }
}

/// Tabulates `t(r)` on `r_grid` (ascending, starting at 1) and returns the
/// profiles as functions of `t`.
pub fn bryant_salamon(r_grid: &[f64]) -> Result<BryantSalamon, AnalyticError> {
    if let Some(&r) = r_grid.iter().find(|&&r| !(r >= 1.0)) {
        return Err(AnalyticError::RadiusBelowOne(r));
    }
    if r_grid.first() != Some(&1.0) {
        return Err(AnalyticError::Invalid("r grid must start at r = 1".into()));
    }
    let opts = QuadOptions::default();
    let u: Vec<f64> = r_grid.iter().map(|r| (r - 1.0).sqrt()).collect();
    let t = cumulative(dt_du, &u, &opts)?;
    let guess = CubicSpline::not_a_knot(t.clone(), u.clone())?;
    let inverse = Arc::new(Inverse { t, u, guess, opts });
    let u_fn = ScalarFn::leaf(Arc::new(ULeaf(inverse.clone())));
    Ok(BryantSalamon {
        a: a_of_u().compose(&u_fn),
        b: b_of_u().compose(&u_fn),
        u: u_fn,
        inverse,
    })
}

/// Default tabulation: 2000 geometric points on `r ∈ [1, 10³]`.
pub fn default_r_grid() -> Vec<f64> {
    let mut g = vec![1.0];
    g.extend(geomspace(1.0 + 1e-8, 1e3, 1999));
    g
}

impl BryantSalamon {
    pub fn with_default_grid() -> Result<Self, AnalyticError> {
        bryant_salamon(&default_r_grid())
    }

    pub fn t_max(&self) -> f64 {
        *self.inverse.t.last().unwrap()
    }

    /// `r(t)`.
    pub fn r(&self, t: f64) -> f64 {
        let u = self.u.eval(t);
        1.0 + u * u
    }

    /// `t(r)`.
    pub fn t_of_r(&self, r: f64) -> Result<f64, AnalyticError> {
        if !(r >= 1.0) {
            return Err(AnalyticError::RadiusBelowOne(r));
        }
        Ok(integrate(dt_du, 0.0, (r - 1.0).sqrt(), &self.inverse.opts)?)
    }

    pub fn a_fn(&self) -> ScalarFn {
        self.a.clone()
    }

    pub fn b_fn(&self) -> ScalarFn {
        self.b.clone()
    }

    pub fn b0(&self) -> f64 {
        1.0 / 3f64.sqrt()
    }

    pub fn profile_set(&self) -> ProfileSet {
        let (a, b) = (self.a.clone(), self.b.clone());
        ProfileSet::new(
            [a.clone(), a.clone(), a],
            [b.clone(), b.clone(), b],
            self.b0(),
            self.t_max(),
        )
    }
}
