//! Dormand–Prince 5(4) with adaptive step size and FSAL.

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RkError {
    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },
    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },
    #[error("integration stopped at t = {t}: {reason}")]
    Rejected { t: f64, reason: String },
}

#[derive(Debug, Clone, Copy)]
pub struct RkOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: Option<f64>,
    pub h_max: f64,
    /// Steps smaller than `h_min_rel * |t|` count as underflow.
    pub h_min_rel: f64,
}

impl Default for RkOptions {
    fn default() -> Self {
        RkOptions {
            rtol: 1e-10,
            atol: 1e-12,
            h_init: None,
            h_max: 0.05,
            h_min_rel: 1e-13,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, serde::Serialize)]
pub struct RkStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A21: f64 = 0.2;
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [
    19372.0 / 6561.0,
    -25360.0 / 2187.0,
    64448.0 / 6561.0,
    -212.0 / 729.0,
];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
const B: [f64; 6] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
];
/// Difference between the 5th- and 4th-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

fn combo<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (w, k) in terms {
        for i in 0..N {
            out[i] += h * w * k[i];
        }
    }
    out
}

/// Integrates `y' = f(t, y)` from `t0` to `t_end`.
///
/// `on_step(t, y, f(t, y))` is called at `t0` and after every accepted step;
/// returning `Err` stops the integration.
pub fn integrate<const N: usize, F, S>(
    f: F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    opts: &RkOptions,
    mut on_step: S,
) -> Result<RkStats, RkError>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
    S: FnMut(f64, &[f64; N], &[f64; N]) -> Result<(), String>,
{
    let mut stats = RkStats::default();
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y);
    stats.evaluations += 1;
    on_step(t, &y, &k1).map_err(|reason| RkError::Rejected { t, reason })?;

    let span = t_end - t0;
    if span <= 0.0 {
        return Ok(stats);
    }
    let mut h = opts.h_init.unwrap_or_else(|| {
        let norm = |v: &[f64; N]| {
            let s: f64 = v
                .iter()
                .zip(&y)
                .map(|(vi, yi)| (vi / (opts.atol + opts.rtol * yi.abs())).powi(2))
                .sum();
            (s / N as f64).sqrt()
        };
        let (d0, d1) = (norm(&y), norm(&k1));
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        h0.min(opts.h_max).min(span)
    });

    while t < t_end {
        let last = t + h >= t_end;
        if last {
            h = t_end - t;
        }
        let k2 = f(t + C[1] * h, &combo(&y, h, &[(A21, &k1)]));
        let k3 = f(t + C[2] * h, &combo(&y, h, &[(A3[0], &k1), (A3[1], &k2)]));
        let k4 = f(
            t + C[3] * h,
            &combo(&y, h, &[(A4[0], &k1), (A4[1], &k2), (A4[2], &k3)]),
        );
        let k5 = f(
            t + C[4] * h,
            &combo(&y, h, &[(A5[0], &k1), (A5[1], &k2), (A5[2], &k3), (A5[3], &k4)]),
        );
        let k6 = f(
            t + C[5] * h,
            &combo(
                &y,
                h,
                &[(A6[0], &k1), (A6[1], &k2), (A6[2], &k3), (A6[3], &k4), (A6[4], &k5)],
            ),
        );
        let y_new = combo(
            &y,
            h,
            &[(B[0], &k1), (B[2], &k3), (B[3], &k4), (B[4], &k5), (B[5], &k6)],
        );
        let t_new = if last { t_end } else { t + h };
        let k7 = f(t_new, &y_new);
        stats.evaluations += 6;

        let mut err = 0.0;
        for i in 0..N {
            let e = h
                * (E[0] * k1[i] + E[2] * k3[i] + E[3] * k4[i] + E[4] * k5[i] + E[5] * k6[i]
                    + E[6] * k7[i]);
            let sc = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
            err += (e / sc).powi(2);
        }
        let err = (err / N as f64).sqrt();
        if !err.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
            // Treat as a failed step and shrink hard.
            stats.rejected += 1;
            h *= 0.2;
            if h < opts.h_min_rel * t.abs().max(1.0) {
                return Err(RkError::NonFinite { t });
            }
            continue;
        }

        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        if err <= 1.0 {
            t = t_new;
            y = y_new;
            k1 = k7;
            stats.accepted += 1;
            on_step(t, &y, &k1).map_err(|reason| RkError::Rejected { t, reason })?;
            h = (h * factor).min(opts.h_max);
        } else {
            stats.rejected += 1;
            h *= factor.min(1.0);
        }
        if h < opts.h_min_rel * t.abs().max(1.0) {
            return Err(RkError::StepUnderflow { t, h });
        }
    }
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let mut last = (0.0, [0.0]);
        integrate(
            |_, y: &[f64; 1]| [-y[0]],
            0.0,
            [1.0],
            3.0,
            &RkOptions::default(),
            |t, y, _| {
                last = (t, *y);
                Ok(())
            },
        )
        .unwrap();
        assert_eq!(last.0, 3.0);
        assert!((last.1[0] - (-3.0f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn harmonic_oscillator_high_accuracy() {
        let mut end = [0.0; 2];
        let stats = integrate(
            |_, y: &[f64; 2]| [y[1], -y[0]],
            0.0,
            [0.0, 1.0],
            10.0,
            &RkOptions::default(),
            |_, y, _| {
                end = *y;
                Ok(())
            },
        )
        .unwrap();
        assert!((end[0] - 10f64.sin()).abs() < 1e-9);
        assert!(stats.accepted > 10);
    }

    #[test]
    fn callback_can_abort() {
        let r = integrate(
            |_, _: &[f64; 1]| [1.0],
            0.0,
            [0.0],
            1.0,
            &RkOptions::default(),
            |t, _, _| if t > 0.5 { Err("stop".into()) } else { Ok(()) },
        );
        assert!(matches!(r, Err(RkError::Rejected { .. })));
    }

    #[test]
    fn blow_up_underflows() {
        let r = integrate(
            |_, y: &[f64; 1]| [y[0] * y[0]],
            0.0,
            [1.0],
            2.0,
            &RkOptions::default(),
            |_, _, _| Ok(()),
        );
        assert!(matches!(
            r,
            Err(RkError::StepUnderflow { .. }) | Err(RkError::NonFinite { .. })
        ));
    }
}
