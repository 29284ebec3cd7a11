//! Least-squares polynomial fits near an endpoint.

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FitError {
    #[error("fit of degree {degree} needs more than {samples} samples")]
    InsufficientSamples { degree: usize, samples: usize },
    #[error("least-squares solve failed: {0}")]
    Solve(String),
}

/// Polynomial fit in the scaled variable `s = t / width`.
#[derive(Debug, Clone, serde::Serialize)]
pub struct PolyFit {
    pub width: f64,
    /// Coefficients of `s^k`.
    pub scaled: Vec<f64>,
    /// Root-mean-square residual of the fit.
    pub rms_residual: f64,
}

impl PolyFit {
    /// Coefficient of `t^k` in the unscaled variable.
    pub fn coefficient(&self, k: usize) -> f64 {
        self.scaled[k] / self.width.powi(k as i32)
    }

    pub fn coefficients(&self) -> Vec<f64> {
        (0..self.scaled.len()).map(|k| self.coefficient(k)).collect()
    }

    pub fn degree(&self) -> usize {
        self.scaled.len() - 1
    }

    /// Largest `|scaled coefficient|` over odd (or even) powers.
    pub fn max_scaled(&self, odd: bool) -> f64 {
        self.scaled
            .iter()
            .enumerate()
            .filter(|(k, _)| (k % 2 == 1) == odd)
            .fold(0.0, |a, (_, c)| a.max(c.abs()))
    }
}

/// Fits `y ≈ Σ_{k≤degree} c_k (t/width)^k` to samples `(t, y)`.
pub fn fit_polynomial(ts: &[f64], ys: &[f64], degree: usize, width: f64) -> Result<PolyFit, FitError> {
    let n = ts.len();
    if n <= degree {
        return Err(FitError::InsufficientSamples { degree, samples: n });
    }
    let v = DMatrix::from_fn(n, degree + 1, |i, k| (ts[i] / width).powi(k as i32));
    let y = DVector::from_column_slice(ys);
    let svd = v.clone().svd(true, true);
    let c = svd.solve(&y, 1e-14).map_err(|e| FitError::Solve(e.to_string()))?;
    let r = &v * &c - &y;
    Ok(PolyFit {
        width,
        scaled: c.iter().copied().collect(),
        rms_residual: (r.norm_squared() / n as f64).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_polynomial() {
        let ts: Vec<f64> = (1..=50).map(|i| i as f64 * 0.002).collect();
        let ys: Vec<f64> = ts.iter().map(|t| 0.5 * t - 0.2 * t.powi(3) + 3.0 * t.powi(5)).collect();
        let fit = fit_polynomial(&ts, &ys, 6, 0.1).unwrap();
        assert!((fit.coefficient(1) - 0.5).abs() < 1e-10);
        assert!((fit.coefficient(3) + 0.2).abs() < 1e-7);
        assert!(fit.max_scaled(false) < 1e-11);
    }

    #[test]
    fn too_few_samples() {
        assert!(fit_polynomial(&[0.1, 0.2], &[1.0, 2.0], 3, 1.0).is_err());
    }
}
