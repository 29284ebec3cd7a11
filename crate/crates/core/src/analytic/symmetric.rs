//! The family `A₁ = A₂ = A₃`, `B₁ = B₂ = B₃`.
//!
//! Here the system collapses to `Ḋ = A³ + D/A`. With
//! `G(t) = ∫₀ᵗ (1/A − 2/ξ) dξ` the solution with `D ~ b0²t²/4` is
//! `D = t²e^{G}(b0²/4 + ∫₀ᵗ A³η⁻²e^{−G(η)} dη)`; both integrands are smooth
//! at 0.

use std::sync::Arc;

use super::AnalyticError;
use crate::numerics::grid::geomspace;
use crate::numerics::quadrature::{integrate, QuadOptions};
use crate::ode::series::series_div;
use crate::ode::AProfile;
use crate::scalar::{poly_eval, ScalarFn, ScalarLeaf};
use crate::structures::ProfileSet;

/// Below this radius `1/A − 2/t` is taken from its Taylor series.
const TAYLOR_RADIUS: f64 = 1e-3;

struct Tables {
    a: AProfile,
    b0: f64,
    t_max: f64,
    /// Taylor coefficients of `1/A − 2/t`.
    g_taylor: Vec<f64>,
    nodes: Vec<f64>,
    g: Vec<f64>,
    j: Vec<f64>,
    opts: QuadOptions,
}

impl Tables {
    fn g_integrand(&self, x: f64) -> f64 {
        if x < TAYLOR_RADIUS {
            poly_eval(&self.g_taylor, x)
        } else {
            1.0 / self.a.f.eval(x) - 2.0 / x
        }
    }

    fn j_integrand(&self, x: f64, g_at: f64) -> f64 {
        let a = self.a.f.eval(x);
        let alpha = if x < TAYLOR_RADIUS {
            poly_eval(&self.a.taylor[1..], x)
        } else {
            a / x
        };
        // A³/x² = α²·A
        alpha * alpha * a * (-g_at).exp()
    }

    fn g_from(&self, k: usize, t: f64) -> Result<f64, AnalyticError> {
        Ok(self.g[k] + integrate(|x| self.g_integrand(x), self.nodes[k], t, &self.opts)?)
    }

    fn locate(&self, t: f64) -> usize {
        self.nodes.partition_point(|&x| x <= t).max(1) - 1
    }

    /// `(G(t), J(t))`.
    fn at(&self, t: f64) -> Result<(f64, f64), AnalyticError> {
        self.at_from(self.locate(t), t)
    }

    /// `(G(t), J(t))` integrating from node `k`.
    fn at_from(&self, k: usize, t: f64) -> Result<(f64, f64), AnalyticError> {
        let g = self.g_from(k, t)?;
        let inner_err = std::cell::RefCell::new(None);
        let dj = integrate(
            |x| match self.g_from(k, x) {
                Ok(gx) => self.j_integrand(x, gx),
                Err(e) => {
                    inner_err.borrow_mut().get_or_insert(e);
                    0.0
                }
            },
            self.nodes[k],
            t,
            &self.opts,
        )?;
        if let Some(e) = inner_err.into_inner() {
            return Err(e);
        }
        Ok((g, self.j[k] + dj))
    }

    fn d(&self, t: f64) -> f64 {
        if !(0.0..=self.t_max * (1.0 + 1e-12)).contains(&t) {
            return f64::NAN;
        }
        match self.at(t) {
            Ok((g, j)) => t * t * g.exp() * (0.25 * self.b0 * self.b0 + j),
            Err(_) => f64::NAN,
        }
    }
}

struct SymmetricD {
    tables: Arc<Tables>,
}

impl ScalarLeaf for SymmetricD {
    fn eval(&self, t: f64) -> f64 {
        self.tables.d(t)
    }

    fn derivative(&self) -> Option<ScalarFn> {
        let tb = &self.tables;
        let a = tb.a.f.clone();
        let d = ScalarFn::leaf(Arc::new(SymmetricD { tables: tb.clone() }));
        let a3 = ScalarFn::product(&[a.clone(), a.clone(), a.clone()]);
        let expr = a3.add(&d.mul(&a.recip()));
        let (b2, d4) = (tb.b0 * tb.b0, 1.0 / 16.0 - 0.5 * tb.a.a3() * tb.b0 * tb.b0);
        Some(expr.guarded(1e-8, vec![0.0, 0.5 * b2, 0.0, 4.0 * d4]))
    }

    fn describe(&self) -> String {
        format!("D[symmetric, A = {}]", self.tables.a.label)
    }
}

/// Solution of the symmetric reduction on `[0, t_max]`.
#[derive(Clone)]
pub struct SymmetricSolution {
    tables: Arc<Tables>,
    d: ScalarFn,
    b: ScalarFn,
}

impl std::fmt::Debug for SymmetricSolution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SymmetricSolution")
            .field("a", &self.tables.a.label)
            .field("b0", &self.tables.b0)
            .field("t_max", &self.tables.t_max)
            .finish()
    }
}

/// Tabulates `G` and the inhomogeneous integral on a geometric grid and
/// returns the symmetric solution for `A₁ = A₂ = A₃ = a`.
pub fn symmetric_solution(a: AProfile, b0: f64, t_max: f64) -> Result<SymmetricSolution, AnalyticError> {
    if b0 == 0.0 || !b0.is_finite() {
        return Err(AnalyticError::Invalid("b0 must be nonzero".into()));
    }
    if (a.taylor.get(1).copied().unwrap_or(0.0) - 0.5).abs() > 1e-12 || a.taylor.len() < 4 {
        return Err(AnalyticError::Invalid(
            "A must be odd with leading coefficient 1/2".into(),
        ));
    }
    if !(t_max > 0.0) {
        return Err(AnalyticError::Invalid("t_max must be positive".into()));
    }
    // 1/A − 2/t = (1/α − 2)/t with α = A/t.
    let alpha = &a.taylor[1..];
    let len = alpha.len();
    let mut inv = series_div(&[1.0], alpha, len);
    inv[0] -= 2.0;
    let g_taylor = inv[1..].to_vec();

    let mut nodes = vec![0.0];
    if t_max > 1e-3 {
        nodes.extend(geomspace(1e-3, t_max, 200));
    } else {
        nodes.push(t_max);
    }
    let mut tables = Tables {
        a,
        b0,
        t_max,
        g_taylor,
        g: vec![0.0; nodes.len()],
        j: vec![0.0; nodes.len()],
        nodes,
        opts: QuadOptions::default(),
    };
    for k in 1..tables.nodes.len() {
        let (g, j) = tables.at_from(k - 1, tables.nodes[k])?;
        tables.g[k] = g;
        tables.j[k] = j;
    }
    let tables = Arc::new(tables);
    let d = ScalarFn::leaf(Arc::new(SymmetricD {
        tables: tables.clone(),
    }));
    let af = tables.a.f.clone();
    let b2 = 1.0 / (8.0 * b0) - 3.0 * b0 * tables.a.a3();
    let b = d
        .mul(&ScalarFn::product(&[af.clone(), af]).recip())
        .sqrt()
        .scale(b0.signum())
        .guarded(1e-6, vec![b0, 0.0, b2]);
    Ok(SymmetricSolution { tables, d, b })
}

impl SymmetricSolution {
    pub fn d_fn(&self) -> ScalarFn {
        self.d.clone()
    }

    pub fn b_fn(&self) -> ScalarFn {
        self.b.clone()
    }

    /// `G(t) = ∫₀ᵗ (1/A − 2/ξ) dξ`.
    pub fn g(&self, t: f64) -> Result<f64, AnalyticError> {
        Ok(self.tables.at(t)?.0)
    }

    pub fn profile_set(&self) -> ProfileSet {
        let a = self.tables.a.f.clone();
        let b = self.b.clone();
        ProfileSet::new(
            [a.clone(), a.clone(), a],
            [b.clone(), b.clone(), b],
            self.tables.b0,
            self.tables.t_max,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cone_is_reproduced() {
        let s = symmetric_solution(AProfile::cone(), 1.0, 5.0).unwrap();
        for t in [1e-4f64, 0.3, 1.0, 4.9] {
            let want = 0.25 * t * t + t.powi(4) / 16.0;
            assert!((s.d_fn().eval(t) - want).abs() < 1e-12 * want, "t={t}");
            let bw = (t * t / 4.0 + 1.0f64).sqrt();
            assert!((s.b_fn().eval(t) - bw).abs() < 1e-12);
            assert!((s.b_fn().eval_deriv(t).unwrap() - t / 4.0 / bw).abs() < 1e-10);
        }
    }

    #[test]
    fn satisfies_reduced_ode() {
        let a = AProfile::odd_poly(&[0.5, 0.1]);
        let s = symmetric_solution(a.clone(), 0.7, 2.0).unwrap();
        let d = s.d_fn();
        for t in [0.2, 0.9, 1.8] {
            let h = 1e-4;
            let fd = (d.eval(t + h) - d.eval(t - h)) / (2.0 * h);
            let av = a.f.eval(t);
            let want = av.powi(3) + d.eval(t) / av;
            assert!((fd - want).abs() < 1e-7 * want);
            assert!((d.eval_deriv(t).unwrap() - want).abs() < 1e-13 * want);
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(symmetric_solution(AProfile::cone(), 0.0, 1.0).is_err());
        assert!(symmetric_solution(AProfile::odd_poly(&[1.0]), 1.0, 1.0).is_err());
    }
}
