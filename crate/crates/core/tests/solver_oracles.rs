mod common;

use g2c_core::ode::{rhs, series_coefficients, AProfile, CoclosedSystem};
use num_bigint::BigInt;
use num_rational::BigRational;

fn mul(a: &[f64], b: &[f64], len: usize) -> Vec<f64> {
    let mut out = vec![0.0; len];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            if i + j < len {
                out[i + j] += x * y;
            }
        }
    }
    out
}

/// Residual coefficient of `t^q` in `P·Ḋ_i − P² + A_i²D_i − A_j²D_j − A_k²D_k`.
fn residual(a: &[Vec<f64>; 3], d: &[Vec<f64>; 3], q: usize) -> [f64; 3] {
    let len = q + 1;
    let p = mul(&mul(&a[0], &a[1], len), &a[2], len);
    let p2 = mul(&p, &p, len);
    std::array::from_fn(|i| {
        let dd: Vec<f64> = (0..len).map(|k| if k + 1 < d[i].len() { (k + 1) as f64 * d[i][k + 1] } else { 0.0 }).collect();
        let mut r = mul(&p, &dd, len)[q] - p2[q];
        for j in 0..3 {
            let s = if j == i { 1.0 } else { -1.0 };
            r += s * mul(&mul(&a[j], &a[j], len), &d[j], len)[q];
        }
        r
    })
}

fn det3(m: [[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Even Taylor coefficients through `t^order`, found by probing the residual
/// at each order and solving the resulting 3×3 system with Cramer's rule.
fn oracle_series(a: &[Vec<f64>; 3], b0: f64, order: usize) -> [Vec<f64>; 3] {
    let mut d: [Vec<f64>; 3] = std::array::from_fn(|_| vec![0.0; order + 1]);
    for di in d.iter_mut() {
        di[2] = b0 * b0 / 4.0;
    }
    for n in (4..=order).step_by(2) {
        // d_{·,n} first enters at t^{n+2}
        let q = n + 2;
        let r0 = residual(a, &d, q);
        let mut m = [[0.0; 3]; 3];
        for j in 0..3 {
            let mut probe = d.clone();
            probe[j][n] = 1.0;
            let rj = residual(a, &probe, q);
            for i in 0..3 {
                m[i][j] = rj[i] - r0[i];
            }
        }
        let det = det3(m);
        for j in 0..3 {
            let mut mj = m;
            for i in 0..3 {
                mj[i][j] = -r0[i];
            }
            d[j][n] = det3(mj) / det;
        }
    }
    d
}

fn generic_system() -> (CoclosedSystem, [Vec<f64>; 3]) {
    let odd = [[0.5, 0.1], [0.5, -0.05], [0.5, 0.0]];
    let a = odd.map(|c| AProfile::odd_poly(&c));
    let taylor = odd.map(|c| vec![0.0, c[0], 0.0, c[1]]);
    (CoclosedSystem::new(a, 1.0, f64::INFINITY).unwrap(), taylor)
}

#[test]
fn solver_matches_series_plus_rk4_oracle() {
    let (sys, taylor) = generic_system();
    let coeffs = oracle_series(&taylor, 1.0, 12);
    let t0 = 0.01f64;
    let mut y: [f64; 3] = std::array::from_fn(|i| {
        coeffs[i].iter().enumerate().map(|(k, c)| c * t0.powi(k as i32)).sum()
    });
    let h = 1e-4f64;
    let steps = ((1.0 - t0) / h).round() as usize;
    let f = |t: f64, y: [f64; 3]| rhs(&sys, t, y).unwrap();
    let add = |y: [f64; 3], k: [f64; 3], s: f64| -> [f64; 3] { std::array::from_fn(|i| y[i] + s * k[i]) };
    for n in 0..steps {
        let t = t0 + n as f64 * h;
        let k1 = f(t, y);
        let k2 = f(t + h / 2.0, add(y, k1, h / 2.0));
        let k3 = f(t + h / 2.0, add(y, k2, h / 2.0));
        let k4 = f(t + h, add(y, k3, h));
        y = std::array::from_fn(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
    }
    let sol = common::solve_to(&sys, 1.0);
    let got = sol.d(1.0);
    for i in 0..3 {
        let rel = (got[i] - y[i]).abs() / y[i];
        assert!(rel <= 1e-7, "D{} = {} vs oracle {} ({rel:e})", i + 1, got[i], y[i]);
    }
}

#[test]
fn bootstrap_agrees_with_probed_series() {
    let (sys, taylor) = generic_system();
    let sol = common::solve_to(&sys, 0.1);
    let oracle = oracle_series(&taylor, 1.0, 8);
    for i in 0..3 {
        for k in (2..=8).step_by(2) {
            let got = sol.bootstrap().coeffs[i][k];
            assert!((got - oracle[i][k]).abs() <= 1e-13 * oracle[i][k].abs().max(1.0), "d_{},{k}", i + 1);
        }
    }
    let d4 = sol.bootstrap().d4();
    for (got, want) in d4.iter().zip([0.0125, 0.0875, 0.0625]) {
        assert!((got - want).abs() < 1e-15);
    }
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

#[test]
fn fourth_order_coefficient_is_exact() {
    for milli in common::random_cubics(20, 7) {
        for (bn, bd) in [(1, 2), (-1, 2), (1, 1), (-1, 1), (2, 1), (-2, 1)] {
            let b0 = rat(bn, bd);
            let b0_sq = &b0 * &b0;
            let a: Vec<Vec<BigRational>> = milli
                .iter()
                .map(|&m| {
                    let mut v = vec![rat(0, 1); 8];
                    v[1] = rat(1, 2);
                    v[3] = rat(m, 1000);
                    v
                })
                .collect();
            let d = series_coefficients([&a[0][..], &a[1][..], &a[2][..]], b0_sq.clone(), 8).unwrap();
            for i in 0..3 {
                assert_eq!(d[i][2], &b0_sq / rat(4, 1));
                let want = rat(1, 16) - &b0_sq * &a[i][3] / rat(2, 1);
                assert_eq!(d[i][4], want, "a3 = {milli:?}, b0 = {b0}");
            }
        }
    }
}
