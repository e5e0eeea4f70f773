//! Quadrature oracles written independently of the library's integrator.
#![allow(dead_code)]

use std::f64::consts::FRAC_PI_2;

/// Composite Simpson rule with `n` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// `K(k)` by the trapezoid rule on a full period, which converges
/// geometrically for this analytic periodic integrand.
pub fn k_trapezoid(k: f64) -> f64 {
    let n = 8000;
    let h = FRAC_PI_2 / n as f64;
    let f = |t: f64| 1.0 / (1.0 - (k * t.sin()).powi(2)).sqrt();
    let mut s = 0.5 * (f(0.0) + f(FRAC_PI_2));
    for i in 1..n {
        s += f(i as f64 * h);
    }
    s * h
}

/// Incomplete integral `F(φ, k)`.
pub fn incomplete_f(phi: f64, k: f64) -> f64 {
    simpson(|t| 1.0 / (1.0 - (k * t.sin()).powi(2)).sqrt(), 0.0, phi, 20_000)
}

/// `∫₀^r dt/√(1−t⁴)` after `t = 1 − s²`, which leaves a smooth integrand.
pub fn b_substituted(r: f64) -> f64 {
    let g = |s: f64| {
        let s2 = s * s;
        2.0 / ((2.0 - s2) * (1.0 + (1.0 - s2).powi(2))).sqrt()
    };
    simpson(g, (1.0 - r).sqrt(), 1.0, 20_000)
}

/// `∫₀¹ dt/√(1+t⁴)`.
pub fn c_simpson() -> f64 {
    simpson(|t| 1.0 / (1.0 + t.powi(4)).sqrt(), 0.0, 1.0, 20_000)
}
