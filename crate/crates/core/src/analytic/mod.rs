//! Exact and quadrature-based special solutions used as oracles.

mod bryant_salamon;
mod symmetric;

pub use bryant_salamon::{bryant_salamon, default_r_grid, BryantSalamon};
pub use symmetric::{symmetric_solution, SymmetricSolution};

use crate::numerics::quadrature::QuadratureError;
use crate::numerics::spline::SplineError;
use crate::scalar::ScalarFn;
use crate::structures::ProfileSet;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnalyticError {
    #[error("no linear asymptote for a = {0} (need a > 1/4)")]
    NoLinearAsymptote(f64),
    #[error("r must be at least 1, got {0}")]
    RadiusBelowOne(f64),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Spline(#[from] SplineError),
}

/// `A_i = t/2`, `B_i = sign(b0)·sqrt(t²/4 + b0²)`.
pub fn cone_family(b0: f64) -> ProfileSet {
    let a = ScalarFn::poly(vec![0.0, 0.5]);
    let b = ScalarFn::poly(vec![b0 * b0, 0.0, 0.25]).sqrt();
    let b = if b0 < 0.0 { b.neg() } else { b };
    ProfileSet::new(
        [a.clone(), a.clone(), a],
        [b.clone(), b.clone(), b],
        b0,
        f64::INFINITY,
    )
}

/// Growth rate `lim B/t = sqrt(a²/(4a − 1))` of the symmetric family when
/// `A ~ a·t`.
pub fn asymptotic_slope(a: f64) -> Result<f64, AnalyticError> {
    if !(a > 0.25) {
        return Err(AnalyticError::NoLinearAsymptote(a));
    }
    Ok((a * a / (4.0 * a - 1.0)).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_values() {
        assert!((asymptotic_slope(1.0 / 3.0).unwrap() - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert_eq!(asymptotic_slope(0.5).unwrap(), 0.5);
        assert!(asymptotic_slope(0.25).is_err());
        assert!(asymptotic_slope(0.2500001).unwrap() > 100.0);
    }

    #[test]
    fn cone_values() {
        let p = cone_family(1.0);
        assert!((p.b[0].eval(2.0) - 2f64.sqrt()).abs() < 1e-15);
        let p = cone_family(1e-9);
        assert!((p.b[1].eval(3.0) - 1.5).abs() < 1e-12);
        let p = cone_family(-2.0);
        assert_eq!(p.b[2].eval(0.0), -2.0);
    }
}
