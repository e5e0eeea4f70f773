//! Elliptic integrals and functions at binary64 precision.
//!
//! `K(k)` comes from the arithmetic–geometric mean, the Jacobi functions from
//! the descending Landen (AGM) recursion, and the rectangle constant `C(λ)`
//! from real-argument Jacobi functions through the imaginary transformation.
//! The modulus convention (not the parameter `m = k²`) is used everywhere.

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::quad;

/// Modulus of the square `[-1,1]²`: the λ with `2K(λ)/K(λ') = 1`.
pub const LAMBDA_0: f64 = 3.0 - 2.0 * SQRT_2;

/// Elliptic modulus `k` together with its complement `k' = √(1−k²)`.
///
/// Both are stored so that moduli close to 0 or 1 keep full relative
/// precision in whichever of the two is small.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Modulus {
    k: f64,
    k_prime: f64,
}

impl Modulus {
    pub fn new(k: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&k) {
            return domain(format!("modulus k = {k} outside [0, 1]"));
        }
        Ok(Self { k, k_prime: ((1.0 - k) * (1.0 + k)).sqrt() })
    }

    /// Modulus `sin θ` with complement `cos θ`, for `θ ∈ [0, π/2]`.
    pub fn from_angle(theta: f64) -> Result<Self> {
        if !(0.0..=FRAC_PI_2).contains(&theta) {
            return domain(format!("modular angle {theta} outside [0, π/2]"));
        }
        Ok(Self { k: theta.sin(), k_prime: theta.cos() })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn k_prime(&self) -> f64 {
        self.k_prime
    }

    /// The complementary modulus `k'` (with complement `k`).
    pub fn complement(&self) -> Self {
        Self { k: self.k_prime, k_prime: self.k }
    }
}

/// Numerical tolerances shared by the quadrature and root-finding routines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Absolute tolerance for adaptive quadrature.
    pub quad_tol: f64,
    /// Residual tolerance for Newton / bisection.
    pub newton_tol: f64,
    pub max_iter: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { quad_tol: 1e-12, newton_tol: 1e-11, max_iter: 100 }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        if !(self.quad_tol > 0.0 && self.newton_tol > 0.0) || self.max_iter == 0 {
            return domain(format!("invalid tolerances {self:?}"));
        }
        Ok(())
    }

    /// Same settings with both tolerances replaced by `tol`.
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.quad_tol = tol;
        self.newton_tol = tol;
        self
    }
}

const AGM_MAX_ITER: usize = 64;

/// Arithmetic–geometric mean of two positive numbers.
pub fn agm(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) || !a.is_finite() || !b.is_finite() {
        return domain(format!("agm requires positive finite arguments, got ({a}, {b})"));
    }
    // Order the pair so agm(a, b) and agm(b, a) run the identical iteration.
    let (mut a, mut b) = if a >= b { (a, b) } else { (b, a) };
    for _ in 0..AGM_MAX_ITER {
        if a - b <= 4.0 * f64::EPSILON * a {
            return Ok(0.5 * (a + b));
        }
        let next = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = next;
    }
    Err(Error::Iteration { what: "agm".into(), iterations: AGM_MAX_ITER })
}

/// Complete elliptic integral of the first kind, `K(k) = π / (2·agm(1, k'))`.
pub fn elliptic_k(m: Modulus) -> Result<f64> {
    if m.k_prime == 0.0 {
        return Err(Error::Divergence("K(k) diverges at k = 1".into()));
    }
    Ok(PI / (2.0 * agm(1.0, m.k_prime)?))
}

const LANDEN_STOP: f64 = 1e-14;
const LANDEN_MAX_STEPS: usize = 32;

/// Jacobi elliptic functions `(sn, cn, dn)` of real argument.
pub fn jacobi_sn_cn_dn(u: f64, m: Modulus) -> Result<(f64, f64, f64)> {
    if m.k_prime == 0.0 {
        return domain("Jacobi functions require k < 1");
    }
    if !u.is_finite() {
        return domain(format!("non-finite argument {u}"));
    }
    let k = m.k;
    if k < LANDEN_STOP {
        let (sn, cn) = u.sin_cos();
        return Ok((sn, cn, (1.0 - k * k * sn * sn).sqrt()));
    }

    // Descending Landen sequence: a_n, c_n with c_n / a_n → 0 quadratically.
    let mut a = vec![1.0];
    let mut c = vec![k];
    let mut b = m.k_prime;
    while c.last().unwrap() / a.last().unwrap() >= LANDEN_STOP {
        if a.len() > LANDEN_MAX_STEPS {
            return Err(Error::Iteration {
                what: "descending Landen recursion".into(),
                iterations: LANDEN_MAX_STEPS,
            });
        }
        let an = *a.last().unwrap();
        a.push(0.5 * (an + b));
        c.push(0.5 * (an - b));
        b = (an * b).sqrt();
    }

    let n = a.len() - 1;
    let mut phi = (1u64 << n) as f64 * a[n] * u;
    for j in (1..=n).rev() {
        phi = 0.5 * (phi + (c[j] / a[j] * phi.sin()).asin());
    }
    let (sn, cn) = phi.sin_cos();
    // dn² = k'² + k² cn² keeps full precision near sn = ±1.
    let dn = if sn * sn < 0.5 {
        (1.0 - k * k * sn * sn).sqrt()
    } else {
        (m.k_prime * m.k_prime + k * k * cn * cn).sqrt()
    };
    Ok((sn, cn, dn))
}

/// Solves `2K(λ)/K(λ') = kappa` for the modulus λ of the rectangle
/// `[-kappa, kappa] × [-1, 1]`.
pub fn lambda_for_aspect(kappa: f64, tol: &Tolerances) -> Result<Modulus> {
    tol.validate()?;
    if kappa.is_nan() || kappa < 1.0 || !kappa.is_finite() {
        return domain(format!("aspect ratio {kappa} must be finite and ≥ 1"));
    }
    let aspect = |theta: f64| -> Result<f64> {
        let m = Modulus::from_angle(theta)?;
        Ok(2.0 * elliptic_k(m)? / elliptic_k(m.complement())?)
    };
    // The aspect ratio increases monotonically in the modular angle.
    let (mut lo, mut hi) = (f64::EPSILON, FRAC_PI_2 - f64::EPSILON);
    for _ in 0..tol.max_iter.max(1) * 2 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= 1e-3 * tol.newton_tol * mid || mid <= lo || mid >= hi {
            return Modulus::from_angle(mid);
        }
        if aspect(mid)? < kappa {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::Iteration { what: "aspect-ratio bisection".into(), iterations: tol.max_iter * 2 })
}

/// The rectangle constant
/// `C(λ) = K(λ)·|cn(iK, λ)·dn(iK, λ) / sn(iK, λ)|`, the maximum of `2d/r`
/// over the rectangle with modulus λ.
///
/// With `sn(iu,k) = i·sc(u,k')`, `cn(iu,k) = nc(u,k')` and
/// `dn(iu,k) = dc(u,k')` the modulus collapses to `dn / (sn·cn)` at the real
/// argument `K(λ)` and complementary modulus.
pub fn rect_constant(m: Modulus) -> Result<f64> {
    if m.k <= 0.0 || m.k_prime <= 0.0 {
        return domain(format!("rect_constant requires 0 < λ < 1, got {}", m.k));
    }
    let kk = elliptic_k(m)?;
    let (sn, cn, dn) = jacobi_sn_cn_dn(kk, m.complement())?;
    // K(λ) = K(λ') at λ = √2/2, a zero of cn.
    if cn.abs() < 1e-12 {
        return Err(Error::Singularity(format!("rect_constant has a pole at λ = {}", m.k)));
    }
    Ok((kk * dn / (sn * cn)).abs())
}

/// `B(r) = ∫₀^r dt/√(1−t⁴)` with default tolerances.
pub fn b_integral(r: f64) -> Result<f64> {
    b_integral_with(r, &Tolerances::default())
}

/// `B(r) = ∫₀^r dt/√(1−t⁴)`.
///
/// Evaluated as `∫₀^{asin r} dθ/√(1+sin²θ)` (substituting `t = sin θ`), whose
/// integrand is smooth up to and including `r = 1`.
pub fn b_integral_with(r: f64, tol: &Tolerances) -> Result<f64> {
    if !(0.0..=1.0).contains(&r) {
        return domain(format!("B(r) requires 0 ≤ r ≤ 1, got {r}"));
    }
    let upper = r.asin();
    quad::integrate(
        |theta: f64| {
            let s = theta.sin();
            1.0 / (1.0 + s * s).sqrt()
        },
        0.0,
        upper,
        tol.quad_tol,
        0.0,
    )
}

/// Integrand derivative `B'(r) = 1/√(1−r⁴)`.
pub fn b_integral_derivative(r: f64) -> f64 {
    let r2 = r * r;
    1.0 / ((1.0 - r2) * (1.0 + r2)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn agm_fixed_point_and_symmetry() {
        assert_eq!(agm(1.0, 1.0).unwrap(), 1.0);
        assert_eq!(agm(1.0, 0.5).unwrap(), agm(0.5, 1.0).unwrap());
        // One step of the iteration lands on the same limit.
        let v = agm(1.0, 0.5).unwrap();
        assert_abs_diff_eq!(v, agm(0.75, 0.5f64.sqrt()).unwrap(), epsilon = 1e-15);
    }

    #[test]
    fn agm_rejects_non_positive() {
        assert!(matches!(agm(0.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(agm(1.0, -2.0), Err(Error::Domain(_))));
    }

    #[test]
    fn k_at_zero_and_one() {
        assert_abs_diff_eq!(elliptic_k(Modulus::new(0.0).unwrap()).unwrap(), FRAC_PI_2);
        assert!(matches!(
            elliptic_k(Modulus::new(1.0).unwrap()),
            Err(Error::Divergence(_))
        ));
        assert!(matches!(Modulus::new(1.5), Err(Error::Domain(_))));
    }

    #[test]
    fn k_of_sqrt_half() {
        let k = elliptic_k(Modulus::new(SQRT_2 / 2.0).unwrap()).unwrap();
        assert_abs_diff_eq!(k, 1.854_074_677_301_371_9, epsilon = 1e-14);
    }

    #[test]
    fn jacobi_identity_values() {
        let m = Modulus::new(0.5).unwrap();
        assert_eq!(jacobi_sn_cn_dn(0.0, m).unwrap(), (0.0, 1.0, 1.0));
        let kk = elliptic_k(m).unwrap();
        let (sn, cn, dn) = jacobi_sn_cn_dn(kk, m).unwrap();
        assert_abs_diff_eq!(sn, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(cn, 0.0, epsilon = 1e-13);
        assert_abs_diff_eq!(dn, m.k_prime(), epsilon = 1e-13);
    }

    #[test]
    fn jacobi_small_modulus_is_trigonometric() {
        let (sn, cn, dn) = jacobi_sn_cn_dn(1.2, Modulus::new(0.0).unwrap()).unwrap();
        assert_eq!((sn, cn, dn), (1.2f64.sin(), 1.2f64.cos(), 1.0));
    }

    #[test]
    fn lambda_for_square_and_symmetric_rectangle() {
        let tol = Tolerances::default();
        let l0 = lambda_for_aspect(1.0, &tol).unwrap();
        assert_abs_diff_eq!(l0.k(), LAMBDA_0, epsilon = 1e-12);
        let l2 = lambda_for_aspect(2.0, &tol).unwrap();
        assert_abs_diff_eq!(l2.k(), SQRT_2 / 2.0, epsilon = 1e-12);
        assert!(matches!(lambda_for_aspect(0.5, &tol), Err(Error::Domain(_))));
    }

    #[test]
    fn rect_constant_endpoints_rejected() {
        assert!(rect_constant(Modulus::new(0.0).unwrap()).is_err());
        assert!(rect_constant(Modulus::new(1.0).unwrap()).is_err());
    }

    #[test]
    fn rect_constant_of_square() {
        let c = rect_constant(Modulus::new(LAMBDA_0).unwrap()).unwrap();
        assert_abs_diff_eq!(c, 1.854_074_677_301_371_9, epsilon = 1e-12);
    }

    #[test]
    fn b_integral_basics() {
        assert_eq!(b_integral(0.0).unwrap(), 0.0);
        assert!(matches!(b_integral(1.01), Err(Error::Domain(_))));
        assert!(matches!(b_integral(-0.1), Err(Error::Domain(_))));
        // B(1) = K(1/√2)/√2
        let k = elliptic_k(Modulus::new(SQRT_2 / 2.0).unwrap()).unwrap();
        assert_abs_diff_eq!(b_integral(1.0).unwrap(), k / SQRT_2, epsilon = 1e-13);
    }

    #[test]
    fn tolerances_validation() {
        assert!(Tolerances::default().validate().is_ok());
        let bad = Tolerances { max_iter: 0, ..Default::default() };
        assert!(bad.validate().is_err());
        assert!(Tolerances::default().with_tol(-1.0).validate().is_err());
    }
}
