use rayon::prelude::*;

use crate::exterior::{d, ExteriorError, InvariantForm};
use crate::scalar::Evaluator;
use crate::structures::G2Structure;

/// Per-point relative size of `df` against `f`.
#[derive(Debug, Clone)]
pub struct ResidualProfile {
    pub t: Vec<f64>,
    pub values: Vec<f64>,
}

impl ResidualProfile {
    /// `(max residual, t where it occurs)`; NaN propagates.
    pub fn max(&self) -> (f64, f64) {
        if let Some(i) = self.values.iter().position(|v| v.is_nan()) {
            return (f64::NAN, self.t[i]);
        }
        self.t
            .iter()
            .zip(&self.values)
            .fold((0.0, f64::NAN), |acc, (&t, &v)| {
                if v > acc.0 || acc.1.is_nan() {
                    (v, t)
                } else {
                    acc
                }
            })
    }
}

/// `max|coeff of df(t)| / max|coeff of f(t)|` at every grid point.
pub fn exterior_residual(f: &InvariantForm, grid: &[f64]) -> Result<ResidualProfile, ExteriorError> {
    let df = d(f)?;
    let values = grid
        .par_iter()
        .map(|&t| {
            let mut ev = Evaluator::new(t);
            let num = df.eval_with(&mut ev).max_abs();
            let den = f.eval_with(&mut ev).max_abs();
            num / den
        })
        .collect();
    Ok(ResidualProfile {
        t: grid.to_vec(),
        values,
    })
}

/// Relative `dψ` residual.
pub fn coclosed_residual(g: &G2Structure, grid: &[f64]) -> Result<ResidualProfile, ExteriorError> {
    exterior_residual(&g.psi, grid)
}

/// Relative `dφ` residual.
pub fn closed_residual(g: &G2Structure, grid: &[f64]) -> Result<ResidualProfile, ExteriorError> {
    exterior_residual(&g.phi, grid)
}
