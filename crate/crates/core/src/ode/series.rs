//! Power-series solution of the coclosed system at the singular orbit.
//!
//! Matching powers of `t` in `P·Ḋ_i = P² − A_i²D_i + A_j²D_j + A_k²D_k`,
//! `P = A₁A₂A₃`, the coefficients `d_{·,2n}` of `t^{2n}` solve
//! `((n + 2)I − J)/4 · d_{·,2n} = R_n`, where `J` is the all-ones matrix and
//! `R_n` depends only on lower orders. At `n = 1` the system is singular and
//! its kernel `(1,1,1)` is fixed by `D_i ~ b0² t²/4`; for `n ≥ 2` it is
//! invertible.

use num_traits::{Num, Signed};

use super::OdeError;

/// Truncated product of two ascending coefficient lists.
pub fn series_mul<T: Num + Clone>(a: &[T], b: &[T], len: usize) -> Vec<T> {
    let mut out = vec![T::zero(); len];
    for (i, x) in a.iter().enumerate().take(len) {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(len - i) {
            out[i + j] = out[i + j].clone() + x.clone() * y.clone();
        }
    }
    out
}

fn coeff<T: Num + Clone>(c: &[T], k: usize) -> T {
    c.get(k).cloned().unwrap_or_else(T::zero)
}

fn small<T: Num + Clone>(n: usize) -> T {
    (0..n).fold(T::zero(), |acc, _| acc + T::one())
}

/// Solves a 3×3 system by Gaussian elimination with partial pivoting.
fn solve3<T>(mut m: [[T; 3]; 3], mut r: [T; 3]) -> Option<[T; 3]>
where
    T: Num + Signed + PartialOrd + Clone,
{
    for col in 0..3 {
        let piv = (col..3)
            .max_by(|&x, &y| m[x][col].abs().partial_cmp(&m[y][col].abs()).unwrap())
            .unwrap();
        if m[piv][col].is_zero() {
            return None;
        }
        m.swap(col, piv);
        r.swap(col, piv);
        for row in col + 1..3 {
            let w = m[row][col].clone() / m[col][col].clone();
            for k in col..3 {
                m[row][k] = m[row][k].clone() - w.clone() * m[col][k].clone();
            }
            r[row] = r[row].clone() - w * r[col].clone();
        }
    }
    let mut x = [T::zero(), T::zero(), T::zero()];
    for row in (0..3).rev() {
        let mut acc = r[row].clone();
        for k in row + 1..3 {
            acc = acc - m[row][k].clone() * x[k].clone();
        }
        x[row] = acc / m[row][row].clone();
    }
    Some(x)
}

/// Even Taylor coefficients of `D_i` through `t^order`, indexed by power.
///
/// `a[i]` holds the Taylor coefficients of `A_i` by power and must reach
/// `t^{order-1}`. Works over any ordered field, so exactness can be checked
/// with rationals.
pub fn series_coefficients<T>(a: [&[T]; 3], b0_sq: T, order: usize) -> Result<[Vec<T>; 3], OdeError>
where
    T: Num + Signed + PartialOrd + Clone,
{
    if order < 2 || order % 2 == 1 {
        return Err(OdeError::InvalidSystem(format!(
            "series order must be even and at least 2, got {order}"
        )));
    }
    if let Some(i) = (0..3).find(|&i| a[i].len() < order) {
        return Err(OdeError::InvalidSystem(format!(
            "A{} needs Taylor coefficients through t^{}",
            i + 1,
            order - 1
        )));
    }
    let len = order + 3;
    let trunc = |c: &[T]| c[..order].to_vec();
    let a: [Vec<T>; 3] = [trunc(a[0]), trunc(a[1]), trunc(a[2])];
    let p = series_mul(&series_mul(&a[0], &a[1], len), &a[2], len);
    let p2 = series_mul(&p, &p, len);
    let sq: Vec<Vec<T>> = a.iter().map(|x| series_mul(x, x, len)).collect();

    let four: T = small(4);
    let mut d: [Vec<T>; 3] = std::array::from_fn(|_| vec![T::zero(); order + 1]);
    for di in d.iter_mut() {
        di[2] = b0_sq.clone() / four.clone();
    }
    let sign = |i: usize, j: usize| if i == j { -T::one() } else { T::one() };
    for n in 2..=order / 2 {
        let q = 2 * n + 2;
        let mut r: [T; 3] = std::array::from_fn(|_| coeff(&p2, q));
        for (i, ri) in r.iter_mut().enumerate() {
            for m in 1..n {
                for j in 0..3 {
                    let term = coeff(&sq[j], q - 2 * m) * d[j][2 * m].clone();
                    *ri = ri.clone() + sign(i, j) * term;
                }
                let lhs = coeff(&p, q + 1 - 2 * m) * small::<T>(2 * m) * d[i][2 * m].clone();
                *ri = ri.clone() - lhs;
            }
        }
        let diag = small::<T>(n + 1) / four.clone();
        let off = -T::one() / four.clone();
        let mat = std::array::from_fn(|i| {
            std::array::from_fn(|j| if i == j { diag.clone() } else { off.clone() })
        });
        let x = solve3(mat, r).ok_or(OdeError::SingularSeries { order: 2 * n })?;
        for i in 0..3 {
            d[i][2 * n] = x[i].clone();
        }
    }
    Ok(d)
}

/// `a / b` as truncated power series; `b[0] ≠ 0`.
pub fn series_div(a: &[f64], b: &[f64], len: usize) -> Vec<f64> {
    let mut q = vec![0.0; len];
    for n in 0..len {
        let mut acc = coeff(a, n);
        for k in 1..=n {
            acc -= coeff(b, k) * q[n - k];
        }
        q[n] = acc / b[0];
    }
    q
}

/// Square root of a power series with `c[0] > 0`.
pub fn series_sqrt(c: &[f64], len: usize) -> Vec<f64> {
    let mut s = vec![0.0; len];
    s[0] = c[0].sqrt();
    for n in 1..len {
        let mut acc = coeff(c, n);
        for m in 1..n {
            acc -= s[m] * s[n - m];
        }
        s[n] = acc / (2.0 * s[0]);
    }
    s
}

/// Taylor coefficients of `B_i = sign(b0)·sqrt(D_jD_k/(D_iA_i²))` through
/// `t^len-1`, from the series of `D` and `A`.
pub fn b_series(d: &[Vec<f64>; 3], a: [&[f64]; 3], b0: f64, len: usize) -> [Vec<f64>; 3] {
    let e: Vec<Vec<f64>> = d.iter().map(|di| di.iter().skip(2).copied().collect()).collect();
    let alpha: Vec<Vec<f64>> = a.iter().map(|ai| ai.iter().skip(1).copied().collect()).collect();
    std::array::from_fn(|i| {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        let num = series_mul(&e[j], &e[k], len);
        let den = series_mul(&e[i], &series_mul(&alpha[i], &alpha[i], len), len);
        let sq = series_div(&num, &den, len);
        series_sqrt(&sq, len)
            .into_iter()
            .map(|x| x * b0.signum())
            .collect()
    })
}
