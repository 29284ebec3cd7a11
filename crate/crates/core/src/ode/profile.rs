use crate::scalar::ScalarFn;

/// One `A_i` with its odd Taylor data at `t = 0`.
#[derive(Clone, Debug)]
pub struct AProfile {
    pub f: ScalarFn,
    /// Taylor coefficients indexed by power (only odd powers nonzero).
    pub taylor: Vec<f64>,
    pub label: String,
}

/// Number of Taylor terms kept for transcendental profiles.
const TAYLOR_LEN: usize = 24;

impl AProfile {
    /// `A = c₁t + c₃t³ + c₅t⁵ + …` from the odd coefficients `[c₁, c₃, …]`.
    pub fn odd_poly(odd: &[f64]) -> Self {
        // A polynomial is its own Taylor series; pad with exact zeros.
        let mut taylor = vec![0.0; (2 * odd.len()).max(TAYLOR_LEN)];
        for (k, c) in odd.iter().enumerate() {
            taylor[2 * k + 1] = *c;
        }
        AProfile {
            f: ScalarFn::poly(taylor.clone()),
            label: format!("odd_poly{odd:?}"),
            taylor,
        }
    }

    /// `A = t/2`.
    pub fn cone() -> Self {
        let mut p = Self::odd_poly(&[0.5]);
        p.label = "t/2".into();
        p
    }

    /// `A = sin(kt)/(2k)`.
    pub fn sine(k: f64) -> Self {
        let mut taylor = vec![0.0; TAYLOR_LEN];
        let mut term = 0.5; // k^{2m} / (2 (2m+1)!) with alternating sign
        for m in 0..TAYLOR_LEN / 2 {
            taylor[2 * m + 1] = term;
            term *= -k * k / ((2 * m + 2) as f64 * (2 * m + 3) as f64);
        }
        AProfile {
            f: ScalarFn::sin(0.5 / k, k, 0.0),
            taylor,
            label: format!("sin({k}t)/(2·{k})"),
        }
    }

    /// `A = a·t + (1/2 − a)·t/(1 + t²)`, asymptotically `a·t`.
    pub fn rational_linear(a: f64) -> Self {
        let t = ScalarFn::identity();
        let tail = t.mul(&ScalarFn::poly(vec![1.0, 0.0, 1.0]).recip());
        let f = ScalarFn::linear_combination(&[(a, t), (0.5 - a, tail)]);
        let mut taylor = vec![0.0; TAYLOR_LEN];
        taylor[1] = 0.5;
        for m in 1..TAYLOR_LEN / 2 {
            taylor[2 * m + 1] = (0.5 - a) * if m % 2 == 1 { -1.0 } else { 1.0 };
        }
        AProfile {
            f,
            taylor,
            label: format!("{a}t + ({}t)/(1+t²)", 0.5 - a),
        }
    }

    /// Arbitrary differentiable `f` with `A = t/2 + a₃t³ + O(t⁵)`.
    pub fn custom(f: ScalarFn, a3: f64, label: impl Into<String>) -> Self {
        AProfile {
            f,
            taylor: vec![0.0, 0.5, 0.0, a3],
            label: label.into(),
        }
    }

    pub fn a3(&self) -> f64 {
        self.taylor.get(3).copied().unwrap_or(0.0)
    }
}
