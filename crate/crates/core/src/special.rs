//! Special functions and fixed quadrature nodes shared by the numerical modules.

use std::f64::consts::PI;

pub use statrs::function::gamma::{gamma_lr, gamma_ur, ln_gamma};

/// `ln(k!)`, exact summation for small `k`.
pub fn ln_factorial(k: u32) -> f64 {
    if k < 32 {
        (2..=k).map(|i| (i as f64).ln()).sum()
    } else {
        ln_gamma(k as f64 + 1.0)
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, ascending.
pub fn gauss_legendre(order: usize) -> Vec<(f64, f64)> {
    assert!(order > 0);
    let n = order;
    let mut out = vec![(0.0, 0.0); n];
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out[i] = (-x, w);
        out[n - 1 - i] = (x, w);
    }
    if n % 2 == 1 {
        out[n / 2].0 = 0.0;
    }
    out
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Smallest `u` with `Q(shape, u) <= target`, by bisection.
pub fn upper_gamma_quantile(shape: f64, target: f64) -> f64 {
    let mut lo = 0.0;
    let mut hi = shape + 10.0;
    while gamma_ur(shape, hi) > target {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if gamma_ur(shape, mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 * hi {
            break;
        }
    }
    hi
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for order in [1, 2, 5, 16, 33] {
            let rule = gauss_legendre(order);
            let total: f64 = rule.iter().map(|&(_, w)| w).sum();
            assert!((total - 2.0).abs() < 1e-14, "order {order}");
            for k in 0..(2 * order) {
                let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
                let approx: f64 = rule.iter().map(|&(x, w)| w * x.powi(k as i32)).sum();
                assert!((approx - exact).abs() < 1e-14, "order {order} k {k}");
            }
            assert!(rule.windows(2).all(|p| p[0].0 < p[1].0));
        }
    }

    #[test]
    fn ln_factorial_matches_products() {
        let mut acc = 0.0f64;
        for k in 1..60u32 {
            acc += (k as f64).ln();
            assert!((ln_factorial(k) - acc).abs() < 1e-12 * acc.max(1.0));
        }
    }

    #[test]
    fn gamma_quantile_hits_target() {
        let u = upper_gamma_quantile(201.0, 1e-16);
        assert!(gamma_ur(201.0, u) <= 1e-16);
        assert!(gamma_ur(201.0, u * 0.99) > 1e-16);
    }
}
