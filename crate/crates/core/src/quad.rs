//! Globally adaptive Gauss–Kronrod (7/15) quadrature on a finite interval.
//!
//! Works for any integrand value that forms a vector space over `f64`
//! (real and complex integrands along a parametrised path).

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Values that can be integrated.
pub trait Integrand:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
}

impl Integrand for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl Integrand for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
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
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5, 7).
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Maximum number of subintervals before giving up.
pub const MAX_SEGMENTS: usize = 4000;

struct Segment<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
}

fn gk15<T: Integrand, F: FnMut(f64) -> T>(f: &mut F, a: f64, b: f64) -> (T, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod = kronrod + pair * WGK[j];
        if j % 2 == 1 {
            gauss = gauss + pair * WG[j / 2];
        }
    }
    let kronrod = kronrod * half;
    let gauss = gauss * half;
    (kronrod, (kronrod - gauss).magnitude())
}

/// Integrates `f` over `[a, b]` to absolute tolerance `abs_tol` (or relative
/// tolerance `rel_tol`, whichever is looser).
pub fn integrate<T, F>(mut f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<T>
where
    T: Integrand,
    F: FnMut(f64) -> T,
{
    if a == b {
        return Ok(T::zero());
    }
    let (value, error) = gk15(&mut f, a, b);
    let mut segments = vec![Segment { a, b, value, error }];
    loop {
        let total = segments.iter().fold(T::zero(), |acc, s| acc + s.value);
        let err: f64 = segments.iter().map(|s| s.error).sum();
        let target = abs_tol.max(rel_tol * total.magnitude());
        if err <= target {
            return Ok(total);
        }
        if segments.len() >= MAX_SEGMENTS {
            return Err(Error::Integration(format!(
                "error estimate {err:.3e} above target {target:.3e} after {MAX_SEGMENTS} segments"
            )));
        }
        let (worst, _) = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .expect("at least one segment");
        let seg = segments.swap_remove(worst);
        let mid = 0.5 * (seg.a + seg.b);
        if mid <= seg.a || mid >= seg.b {
            return Err(Error::Integration(format!(
                "interval [{}, {}] cannot be bisected further",
                seg.a, seg.b
            )));
        }
        let (v1, e1) = gk15(&mut f, seg.a, mid);
        let (v2, e2) = gk15(&mut f, mid, seg.b);
        segments.push(Segment { a: seg.a, b: mid, value: v1, error: e1 });
        segments.push(Segment { a: mid, b: seg.b, value: v2, error: e2 });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn polynomial_is_exact() {
        let v: f64 = integrate(|x| x.powi(5) - 3.0 * x * x, 0.0, 2.0, 1e-14, 0.0).unwrap();
        assert_abs_diff_eq!(v, 64.0 / 6.0 - 8.0, epsilon = 1e-13);
    }

    #[test]
    fn complex_exponential() {
        // ∫₀^π e^{ix} dx = 2i
        let v: Complex64 =
            integrate(|x| Complex64::new(0.0, x).exp(), 0.0, std::f64::consts::PI, 1e-13, 0.0)
                .unwrap();
        assert_abs_diff_eq!(v.re, 0.0, epsilon = 1e-13);
        assert_abs_diff_eq!(v.im, 2.0, epsilon = 1e-13);
    }

    #[test]
    fn endpoint_singularity_converges_adaptively() {
        // ∫₀¹ x^{-1/2} dx = 2
        let v: f64 = integrate(|x| 1.0 / x.sqrt(), 0.0, 1.0, 1e-9, 0.0).unwrap();
        assert_abs_diff_eq!(v, 2.0, epsilon = 1e-8);
    }

    #[test]
    fn empty_interval() {
        let v: f64 = integrate(|x| x, 1.0, 1.0, 1e-12, 0.0).unwrap();
        assert_eq!(v, 0.0);
    }
}
