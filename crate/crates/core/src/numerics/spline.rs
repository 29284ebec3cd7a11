//! Cubic interpolating splines with not-a-knot end conditions.

use std::sync::Arc;

use crate::scalar::{ScalarFn, ScalarLeaf};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SplineError {
    #[error("need at least 4 nodes, got {0}")]
    TooFewNodes(usize),
    #[error("nodes must be strictly increasing (index {0})")]
    NotIncreasing(usize),
    #[error("x and y have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
}

#[derive(Debug, Clone)]
pub struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    /// Second derivatives at the nodes.
    m: Vec<f64>,
}

impl CubicSpline {
    pub fn not_a_knot(x: Vec<f64>, y: Vec<f64>) -> Result<Self, SplineError> {
        let n = x.len();
        if n != y.len() {
            return Err(SplineError::LengthMismatch(n, y.len()));
        }
        if n < 4 {
            return Err(SplineError::TooFewNodes(n));
        }
        if let Some(i) = (1..n).find(|&i| x[i] <= x[i - 1]) {
            return Err(SplineError::NotIncreasing(i));
        }
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let slope: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();

        // Unknowns M_1..M_{n-2}; M_0 and M_{n-1} are eliminated with the
        // not-a-knot conditions (third derivative continuous at x_1, x_{n-2}).
        let k = n - 2;
        let mut lower = vec![0.0; k];
        let mut diag = vec![0.0; k];
        let mut upper = vec![0.0; k];
        let mut rhs = vec![0.0; k];
        for r in 0..k {
            let i = r + 1;
            lower[r] = h[i - 1];
            diag[r] = 2.0 * (h[i - 1] + h[i]);
            upper[r] = h[i];
            rhs[r] = 6.0 * (slope[i] - slope[i - 1]);
        }
        let (h0, h1) = (h[0], h[1]);
        diag[0] += h0 * (h0 + h1) / h1;
        upper[0] -= h0 * h0 / h1;
        let (ha, hb) = (h[n - 3], h[n - 2]);
        diag[k - 1] += hb * (ha + hb) / ha;
        lower[k - 1] -= hb * hb / ha;

        // Thomas algorithm.
        for r in 1..k {
            let w = lower[r] / diag[r - 1];
            diag[r] -= w * upper[r - 1];
            rhs[r] -= w * rhs[r - 1];
        }
        let mut inner = vec![0.0; k];
        inner[k - 1] = rhs[k - 1] / diag[k - 1];
        for r in (0..k - 1).rev() {
            inner[r] = (rhs[r] - upper[r] * inner[r + 1]) / diag[r];
        }
        let mut m = vec![0.0; n];
        m[1..n - 1].copy_from_slice(&inner);
        m[0] = ((h0 + h1) * m[1] - h0 * m[2]) / h1;
        m[n - 1] = ((ha + hb) * m[n - 2] - hb * m[n - 3]) / ha;
        Ok(CubicSpline { x, y, m })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.x
    }

    pub fn values(&self) -> &[f64] {
        &self.y
    }

    fn locate(&self, t: f64) -> usize {
        let i = self.x.partition_point(|&xi| xi <= t);
        i.clamp(1, self.x.len() - 1) - 1
    }

    pub fn eval(&self, t: f64) -> f64 {
        let i = self.locate(t);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        a * self.y[i]
            + b * self.y[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0
    }

    pub fn derivative(&self, t: f64) -> f64 {
        let i = self.locate(t);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        (self.y[i + 1] - self.y[i]) / h
            + ((1.0 - 3.0 * a * a) * self.m[i] + (3.0 * b * b - 1.0) * self.m[i + 1]) * h / 6.0
    }

    pub fn second_derivative(&self, t: f64) -> f64 {
        let i = self.locate(t);
        let h = self.x[i + 1] - self.x[i];
        let b = (t - self.x[i]) / h;
        (1.0 - b) * self.m[i] + b * self.m[i + 1]
    }

    pub fn third_derivative(&self, t: f64) -> f64 {
        let i = self.locate(t);
        (self.m[i + 1] - self.m[i]) / (self.x[i + 1] - self.x[i])
    }

    /// The spline as a [`ScalarFn`] with derivatives through third order.
    pub fn into_scalar_fn(self) -> ScalarFn {
        SplineLeaf::make(Arc::new(self), 0)
    }
}

struct SplineLeaf {
    spline: Arc<CubicSpline>,
    order: u8,
}

impl SplineLeaf {
    fn make(spline: Arc<CubicSpline>, order: u8) -> ScalarFn {
        ScalarFn::leaf(Arc::new(SplineLeaf { spline, order }))
    }
}

impl ScalarLeaf for SplineLeaf {
    fn eval(&self, t: f64) -> f64 {
        match self.order {
            0 => self.spline.eval(t),
            1 => self.spline.derivative(t),
            2 => self.spline.second_derivative(t),
            _ => self.spline.third_derivative(t),
        }
    }

    fn derivative(&self) -> Option<ScalarFn> {
        (self.order < 3).then(|| SplineLeaf::make(self.spline.clone(), self.order + 1))
    }

    fn describe(&self) -> String {
        format!("spline[{} nodes]^({})", self.spline.x.len(), self.order)
    }
}
