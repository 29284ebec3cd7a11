//! Verification grids.

/// Chebyshev–Gauss points on each decade `[10^k, 10^{k+1}]` intersecting
/// `[t_min, t_max]`, `per_decade` points per full decade. Endpoints are not
/// included.
pub fn chebyshev_per_decade(t_min: f64, t_max: f64, per_decade: usize) -> Vec<f64> {
    assert!(t_min > 0.0 && t_max > t_min, "bad grid range [{t_min}, {t_max}]");
    let mut out = Vec::new();
    let mut k = t_min.log10().floor() as i32;
    loop {
        let lo = 10f64.powi(k).max(t_min);
        let hi = 10f64.powi(k + 1).min(t_max);
        if lo >= t_max {
            break;
        }
        if hi > lo {
            let frac = (hi.log10() - lo.log10()).clamp(0.0, 1.0);
            let n = ((per_decade as f64 * frac).ceil() as usize).max(2);
            for j in (0..n).rev() {
                let x = ((2 * j + 1) as f64 * std::f64::consts::PI / (2 * n) as f64).cos();
                out.push(0.5 * (lo + hi) + 0.5 * (hi - lo) * x);
            }
        }
        k += 1;
    }
    out
}

/// `n` equispaced points on `[a, b]`, both ends included.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n)
            .map(|i| if i == n - 1 { b } else { a + (b - a) * i as f64 / (n - 1) as f64 })
            .collect(),
    }
}

/// `n` geometrically spaced points on `[a, b]`, `a > 0`.
pub fn geomspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    let (la, lb) = (a.ln(), b.ln());
    linspace(la, lb, n)
        .into_iter()
        .enumerate()
        .map(|(i, x)| if i == 0 { a } else if i + 1 == n { b } else { x.exp() })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn per_decade_counts_and_order() {
        let g = chebyshev_per_decade(1e-3, 10.0, 40);
        assert_eq!(g.len(), 160);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert!(g[0] > 1e-3 && *g.last().unwrap() < 10.0);
    }

    #[test]
    fn partial_decade() {
        let g = chebyshev_per_decade(1e-3, 5.0, 10);
        assert!(g.iter().all(|&t| t < 5.0));
        assert!(g.iter().filter(|&&t| t > 1.0).count() >= 7);
    }

    #[test]
    fn spaced_endpoints() {
        assert_eq!(linspace(0.0, 1.0, 3), vec![0.0, 0.5, 1.0]);
        let g = geomspace(1.0, 1000.0, 4);
        assert_eq!(g[0], 1.0);
        assert_eq!(g[3], 1000.0);
        assert!((g[1] - 10.0).abs() < 1e-12);
    }
}
