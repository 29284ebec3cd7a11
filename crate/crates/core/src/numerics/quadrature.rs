//! Adaptive Gauss–Kronrod (7/15) quadrature.

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QuadratureError {
    #[error("quadrature on [{a}, {b}] did not converge: error estimate {estimate:e} after {intervals} subintervals")]
    NoConvergence {
        a: f64,
        b: f64,
        estimate: f64,
        intervals: usize,
    },
    #[error("integrand is not finite at t = {t}")]
    NonFinite { t: f64 },
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            abs_tol: 1e-14,
            rel_tol: 1e-12,
            max_intervals: 4000,
        }
    }
}

/// One 15-point Kronrod panel: `(integral, error estimate)`.
fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<(f64, f64), QuadratureError> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let eval = |x: f64| {
        let v = f(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(QuadratureError::NonFinite { t: x })
        }
    };
    let fc = eval(c)?;
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let pair = eval(c - dx)? + eval(c + dx)?;
        k += WGK[j] * pair;
        if j % 2 == 1 {
            g += WG[j / 2] * pair;
        }
    }
    Ok((k * h, ((k - g) * h).abs()))
}

/// `∫_a^b f` by global adaptive bisection.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    opts: &QuadOptions,
) -> Result<f64, QuadratureError> {
    if a == b {
        return Ok(0.0);
    }
    let (v, e) = kronrod(&f, a, b)?;
    let mut panels = vec![(a, b, v, e)];
    let mut total = v;
    let mut err = e;
    while err > opts.abs_tol.max(opts.rel_tol * total.abs()) {
        if panels.len() >= opts.max_intervals {
            return Err(QuadratureError::NoConvergence {
                a,
                b,
                estimate: err,
                intervals: panels.len(),
            });
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, _)| i)
            .unwrap();
        let (lo, hi, v, e) = panels.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = kronrod(&f, lo, mid)?;
        let (v2, e2) = kronrod(&f, mid, hi)?;
        total += v1 + v2 - v;
        err += e1 + e2 - e;
        panels.push((lo, mid, v1, e1));
        panels.push((mid, hi, v2, e2));
        if mid <= lo || mid >= hi {
            return Err(QuadratureError::NoConvergence {
                a,
                b,
                estimate: err,
                intervals: panels.len(),
            });
        }
    }
    // Resum to shed the drift of incremental updates.
    Ok(panels.iter().map(|p| p.2).sum())
}

/// `F(x_k) = ∫_{x_0}^{x_k} f` at every node.
pub fn cumulative<F: Fn(f64) -> f64>(
    f: F,
    nodes: &[f64],
    opts: &QuadOptions,
) -> Result<Vec<f64>, QuadratureError> {
    let mut out = Vec::with_capacity(nodes.len());
    let mut acc = 0.0;
    for (k, &x) in nodes.iter().enumerate() {
        if k > 0 {
            acc += integrate(&f, nodes[k - 1], x, opts)?;
        }
        out.push(acc);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        let v = integrate(|x| x.powi(5) - 3.0 * x * x, -1.0, 2.0, &QuadOptions::default()).unwrap();
        assert!((v - (64.0 / 6.0 - 1.0 / 6.0 - 9.0)).abs() < 1e-13);
    }

    #[test]
    fn adaptive_on_sharp_peak() {
        let v = integrate(|x| 1.0 / (1e-4 + x * x), -1.0, 1.0, &QuadOptions::default()).unwrap();
        let want = 2.0 * (1.0f64 / 1e-2).atan() / 1e-2;
        assert!((v - want).abs() < 1e-9 * want);
    }

    #[test]
    fn cumulative_matches_antiderivative() {
        let xs = [0.0, 0.5, 1.0, 3.0];
        let c = cumulative(f64::cos, &xs, &QuadOptions::default()).unwrap();
        for (x, v) in xs.iter().zip(c) {
            assert!((v - x.sin()).abs() < 1e-14);
        }
    }

    #[test]
    fn non_finite_integrand_is_reported() {
        let r = integrate(|x| 1.0 / x, 0.0, 1.0, &QuadOptions::default());
        assert!(r.is_err());
    }
}
