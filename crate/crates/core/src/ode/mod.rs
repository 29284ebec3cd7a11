//! The singular initial value problem for `D_i = A_jB_jA_kB_k`.
//!
//! Coclosedness of the ansatz reduces to
//! `Ḋ_i = P + (−A_i²D_i + A_j²D_j + A_k²D_k)/P`, `P = A₁A₂A₃`, with
//! `D_i ~ b0²t²/4` at the singular orbit. The solution is bootstrapped by a
//! power series on `[0, t_switch]` and continued with an adaptive
//! Runge–Kutta integrator; the `B_i` are recovered algebraically.

mod profile;
pub mod series;
mod solution;

pub use profile::AProfile;
pub use series::series_coefficients;
pub use solution::{solve, DSolution, DerivState, Node, SeriesBootstrap, SolveOptions};

use crate::scalar::{poly_eval, ScalarFn};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OdeError {
    #[error("invalid system: {0}")]
    InvalidSystem(String),
    #[error("the system is singular at t = {t}; use the series branch")]
    SingularPoint { t: f64 },
    #[error("series recurrence is singular at order {order}")]
    SingularSeries { order: usize },
    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },
    #[error("non-finite solution at t = {t}")]
    NonFinite { t: f64 },
    #[error("invariant violated at t = {t}: {detail}")]
    InvariantViolation { t: f64, detail: String },
}

/// `A_1, A_2, A_3`, `b0` and the domain end `L`.
#[derive(Clone, Debug)]
pub struct CoclosedSystem {
    pub a: [AProfile; 3],
    pub b0: f64,
    pub domain_end: f64,
}

impl CoclosedSystem {
    /// Validates `b0 ≠ 0`, `A_i` odd with `Ȧ_i(0) = 1/2`, and that every `A_i`
    /// is differentiable and agrees with its Taylor data near 0.
    pub fn new(a: [AProfile; 3], b0: f64, domain_end: f64) -> Result<Self, OdeError> {
        if b0 == 0.0 || !b0.is_finite() {
            return Err(OdeError::InvalidSystem("b0 must be nonzero".into()));
        }
        if !(domain_end > 0.0) {
            return Err(OdeError::InvalidSystem(format!(
                "domain end must be positive, got {domain_end}"
            )));
        }
        for (i, p) in a.iter().enumerate() {
            let n = i + 1;
            if (p.taylor.get(1).copied().unwrap_or(0.0) - 0.5).abs() > 1e-12 {
                return Err(OdeError::InvalidSystem(format!(
                    "A{n} must have leading coefficient 1/2 (got {:?})",
                    p.taylor.get(1)
                )));
            }
            if p.taylor.iter().step_by(2).any(|c| *c != 0.0) {
                return Err(OdeError::InvalidSystem(format!("A{n} must be odd")));
            }
            if !p.f.has_derivative() {
                return Err(OdeError::InvalidSystem(format!("A{n} has no derivative")));
            }
            let t = 1e-3;
            let (f, s) = (p.f.eval(t), poly_eval(&p.taylor, t));
            if (f - s).abs() > 1e-9 * f.abs() {
                return Err(OdeError::InvalidSystem(format!(
                    "A{n} disagrees with its Taylor data near 0 ({f} vs {s})"
                )));
            }
        }
        Ok(CoclosedSystem { a, b0, domain_end })
    }

    pub fn a_fns(&self) -> [ScalarFn; 3] {
        self.a.clone().map(|p| p.f)
    }

    pub fn a3(&self) -> [f64; 3] {
        [self.a[0].a3(), self.a[1].a3(), self.a[2].a3()]
    }
}

/// Right-hand side from the values of `A_i` and `D_i` at one `t`.
pub fn rhs_from_values(a: [f64; 3], d: [f64; 3]) -> [f64; 3] {
    let p = a[0] * a[1] * a[2];
    let w = [a[0] * a[0] * d[0], a[1] * a[1] * d[1], a[2] * a[2] * d[2]];
    let s = w[0] + w[1] + w[2];
    std::array::from_fn(|i| p + (s - 2.0 * w[i]) / p)
}

/// `D̈` obtained by differentiating the right-hand side along a solution.
pub fn second_derivative(a: [f64; 3], a_dot: [f64; 3], d: [f64; 3], d_dot: [f64; 3]) -> [f64; 3] {
    let p = a[0] * a[1] * a[2];
    let p_dot = a_dot[0] * a[1] * a[2] + a[0] * a_dot[1] * a[2] + a[0] * a[1] * a_dot[2];
    let w: [f64; 3] = std::array::from_fn(|j| a[j] * a[j] * d[j]);
    let w_dot: [f64; 3] =
        std::array::from_fn(|j| 2.0 * a[j] * a_dot[j] * d[j] + a[j] * a[j] * d_dot[j]);
    let (s, s_dot) = (w.iter().sum::<f64>(), w_dot.iter().sum::<f64>());
    std::array::from_fn(|i| {
        let (u, u_dot) = (s - 2.0 * w[i], s_dot - 2.0 * w_dot[i]);
        p_dot + u_dot / p - u * p_dot / (p * p)
    })
}

/// `Ḋ` at `t > 0`.
pub fn rhs(sys: &CoclosedSystem, t: f64, d: [f64; 3]) -> Result<[f64; 3], OdeError> {
    if t <= 0.0 {
        return Err(OdeError::SingularPoint { t });
    }
    let a = sys.a_fns().map(|f| f.eval(t));
    Ok(rhs_from_values(a, d))
}
