//! The Schwarz–Christoffel map of the unit disc onto the square `[-1,1]²`,
//!
//! ```text
//! f(z) = C⁻¹ ∫₀^z dζ / √(1+ζ⁴),     C = ∫₀¹ dt / √(1+t⁴),
//! ```
//!
//! its inverse `g = f⁻¹`, the `a ↔ r` correspondence `√2·C·a = B(r)` between
//! concentric sub-squares and discs, and the conformal radius.
//!
//! The prevertices `e^{i(π/4 + jπ/2)}` map to the corners `(1+i)·iʲ`. Inside
//! the closed disc `Re(1+ζ⁴) ≥ 0`, so the principal square root is the
//! continuous branch with value 1 at the origin along any straight path.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};
use std::fmt;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::quad;
use crate::special_fn::{b_integral_derivative, b_integral_with, Tolerances};

/// Slack allowed when validating membership of the closed disc / square.
pub const MEMBERSHIP_SLACK: f64 = 1e-12;

/// Points closer than this to ∂K are rejected where the hyperbolic metric is
/// needed.
pub const BOUNDARY_MARGIN: f64 = 1e-9;

/// Within this distance of a prevertex, `f` is evaluated from the corner.
pub const CORNER_RADIUS: f64 = 1e-3;

const CONTINUATION_STEPS: usize = 16;
const RESIDUAL_FLOOR_CAP: f64 = 1e-8;
const MAX_CONTINUATION_STEPS: usize = 1 << 12;

/// A point of the closed unit disc.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscPoint(Complex64);

impl DiscPoint {
    pub fn new(z: Complex64) -> Result<Self> {
        if !z.is_finite() || z.norm() > 1.0 + MEMBERSHIP_SLACK {
            return domain(format!("{z} is outside the closed unit disc"));
        }
        Ok(Self(z))
    }

    pub fn from_polar(r: f64, theta: f64) -> Result<Self> {
        Self::new(Complex64::from_polar(r, theta))
    }

    pub fn z(&self) -> Complex64 {
        self.0
    }
}

impl fmt::Display for DiscPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

/// A point of the closed square `K = [-1,1]²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SquarePoint(Complex64);

impl SquarePoint {
    pub fn new(w: Complex64) -> Result<Self> {
        if !w.is_finite() || w.re.abs().max(w.im.abs()) > 1.0 + MEMBERSHIP_SLACK {
            return domain(format!("{w} is outside the square [-1,1]²"));
        }
        Ok(Self(w))
    }

    pub fn from_xy(re: f64, im: f64) -> Result<Self> {
        Self::new(Complex64::new(re, im))
    }

    // Rounding can push images of boundary points a hair outside K.
    pub(crate) fn clamped(w: Complex64) -> Self {
        Self(Complex64::new(w.re.clamp(-1.0, 1.0), w.im.clamp(-1.0, 1.0)))
    }

    pub fn w(&self) -> Complex64 {
        self.0
    }

    pub fn re(&self) -> f64 {
        self.0.re
    }

    pub fn im(&self) -> f64 {
        self.0.im
    }

    /// Euclidean distance `d_K(x)` to the boundary of the square.
    pub fn boundary_distance(&self) -> f64 {
        (1.0 - self.0.re.abs().max(self.0.im.abs())).max(0.0)
    }

    /// Errors unless the point is at least [`BOUNDARY_MARGIN`] inside K.
    pub fn require_interior(&self) -> Result<()> {
        if self.boundary_distance() < BOUNDARY_MARGIN {
            return domain(format!("{} lies on (or within {BOUNDARY_MARGIN:e} of) ∂K", self.0));
        }
        Ok(())
    }
}

impl fmt::Display for SquarePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

/// Prevertex `e^{i(π/4 + jπ/2)}` for `j = 0..4`.
pub fn prevertex(j: usize) -> Complex64 {
    Complex64::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2) * Complex64::i().powi((j % 4) as i32)
}

/// Corner `(1+i)·iʲ` of K, the image of [`prevertex`]`(j)`.
pub fn vertex(j: usize) -> Complex64 {
    Complex64::new(1.0, 1.0) * Complex64::i().powi((j % 4) as i32)
}

/// `C = ∫₀¹ dt/√(1+t⁴) ≈ 0.927037`; computed once.
pub fn schwarz_christoffel_c() -> f64 {
    static C: OnceLock<f64> = OnceLock::new();
    *C.get_or_init(|| {
        quad::integrate(|t: f64| 1.0 / (1.0 + t.powi(4)).sqrt(), 0.0, 1.0, 1e-15, 0.0)
            .expect("smooth integrand on [0, 1]")
    })
}

fn nearest_prevertex(z: Complex64) -> (usize, f64) {
    (0..4)
        .map(|j| (j, (z - prevertex(j)).norm()))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("four prevertices")
}

/// `f(z)` by quadrature along the radial path, without corner handling.
///
/// Fails with [`Error::Singularity`] within [`CORNER_RADIUS`] of a prevertex.
pub fn forward_map_radial(z: DiscPoint, tol: &Tolerances) -> Result<SquarePoint> {
    let z = z.z();
    let (j, dist) = nearest_prevertex(z);
    if dist < CORNER_RADIUS {
        return Err(Error::Singularity(format!(
            "{z} is within {dist:.3e} of prevertex {}",
            prevertex(j)
        )));
    }
    Ok(SquarePoint::clamped(radial_image(z, tol)?))
}

fn radial_image(z: Complex64, tol: &Tolerances) -> Result<Complex64> {
    if z == Complex64::new(0.0, 0.0) {
        return Ok(z);
    }
    let c = schwarz_christoffel_c();
    let z4 = z.powi(4);
    let integral: Complex64 = quad::integrate(
        |t: f64| (Complex64::new(1.0, 0.0) + z4 * t.powi(4)).sqrt().inv(),
        0.0,
        1.0,
        tol.quad_tol,
        0.0,
    )?;
    Ok(z * integral / c)
}

// Integrates from the prevertex along the chord ζ = ζv + τ²(z−ζv). Writing
// 1+ζ⁴ = (ζ−ζv)·h(ζ) with h(ζ) = ζ³ + ζvζ² + ζv²ζ + ζv³ cancels the
// inverse square-root singularity exactly.
fn corner_image(z: Complex64, j: usize, tol: &Tolerances) -> Result<Complex64> {
    let zv = prevertex(j);
    let delta = z - zv;
    if delta.norm() == 0.0 {
        return Ok(vertex(j));
    }
    let c = schwarz_christoffel_c();
    let integral: Complex64 = quad::integrate(
        |tau: f64| {
            let zeta = zv + delta * (tau * tau);
            let h = ((zeta + zv) * zeta + zv * zv) * zeta + zv * zv * zv;
            (delta * h).sqrt().inv() * (delta * 2.0)
        },
        0.0,
        1.0,
        tol.quad_tol,
        0.0,
    )?;
    Ok(vertex(j) + integral / c)
}

/// The Schwarz–Christoffel map `f : U → K`.
pub fn forward_map(z: DiscPoint, tol: &Tolerances) -> Result<SquarePoint> {
    let z = z.z();
    let (j, dist) = nearest_prevertex(z);
    let w = if dist < CORNER_RADIUS { corner_image(z, j, tol)? } else { radial_image(z, tol)? };
    Ok(SquarePoint::clamped(w))
}

/// `f'(z) = C⁻¹ (1+z⁴)^{-1/2}`.
pub fn forward_derivative(z: DiscPoint) -> Result<Complex64> {
    let z = z.z();
    let s = Complex64::new(1.0, 0.0) + z.powi(4);
    if s.norm() < 1e-14 {
        return Err(Error::Singularity(format!("f' is singular at prevertex {z}")));
    }
    Ok(s.sqrt().inv() / schwarz_christoffel_c())
}

// g'(w) = C √(1+z⁴) at z = g(w).
fn inverse_derivative(z: Complex64) -> Complex64 {
    (Complex64::new(1.0, 0.0) + z.powi(4)).sqrt() * schwarz_christoffel_c()
}

fn project_to_disc(z: Complex64) -> Complex64 {
    let r = z.norm();
    if r > 1.0 {
        z / r
    } else {
        z
    }
}

// Smallest residual resolvable at z: rounding of z itself is amplified by
// |f'(z)|, which blows up at the prevertices. Capped so that a corner target is
// never declared solved at an unrelated point.
fn residual_floor(z: Complex64) -> f64 {
    let s = (Complex64::new(1.0, 0.0) + z.powi(4)).norm().sqrt();
    (8.0 * f64::EPSILON / (schwarz_christoffel_c() * s)).min(RESIDUAL_FLOOR_CAP)
}

// Damped Newton for f(z) = target, starting at `z`. Returns the iterate once
// the residual is below `target_tol` (relaxed to the rounding floor near
// corners).
fn newton_solve(
    mut z: Complex64,
    target: Complex64,
    target_tol: f64,
    max_iter: usize,
    tol: &Tolerances,
) -> Option<Complex64> {
    // Interior targets have interior preimages; only boundary targets may
    // have iterates pulled back onto the circle.
    let on_boundary = target.re.abs().max(target.im.abs()) >= 1.0;
    let mut residual = forward_map(DiscPoint(project_to_disc(z)), tol).ok()?.w() - target;
    for _ in 0..max_iter {
        if residual.norm() <= target_tol.max(residual_floor(z)) {
            return Some(z);
        }
        let step = residual * inverse_derivative(z);
        let mut damping = 1.0;
        loop {
            let raw = z - step * damping;
            let candidate = if on_boundary { project_to_disc(raw) } else { raw };
            let inside = candidate.norm() < 1.0 || (on_boundary && candidate.norm() <= 1.0);
            let r = if inside {
                forward_map(DiscPoint(candidate), tol).ok()?.w() - target
            } else {
                Complex64::new(f64::INFINITY, 0.0)
            };
            if r.norm() < residual.norm() {
                z = candidate;
                residual = r;
                break;
            }
            damping *= 0.5;
            if damping < 1e-6 {
                // Stagnation at the floor of the quadrature accuracy counts as
                // converged only if it is already within the requested slack.
                let slack = 2.0 * target_tol.max(residual_floor(z));
                return (residual.norm() <= slack).then_some(z);
            }
        }
    }
    (residual.norm() <= target_tol.max(residual_floor(z))).then_some(z)
}

fn continuation(w: Complex64, steps: usize, tol: &Tolerances) -> Option<Complex64> {
    let dw = w / steps as f64;
    let mut z = Complex64::new(0.0, 0.0);
    let loose = (1e3 * tol.newton_tol).max(1e-8);
    for k in 1..=steps {
        let target = dw * k as f64;
        // Euler predictor along the path; for k = 1 this is z₀ = C·w₁.
        let mut predicted = z + inverse_derivative(z) * dw;
        if predicted.norm() >= 1.0 {
            predicted = 0.5 * (z + predicted / predicted.norm());
        }
        z = if k == steps {
            newton_solve(predicted, target, tol.newton_tol, tol.max_iter, tol)?
        } else {
            newton_solve(predicted, target, loose, 8, tol)?
        };
    }
    Some(z)
}

/// The inverse map `g = f⁻¹ : K → U`.
///
/// Newton iteration with linear continuation from the origin: 16 steps, doubled
/// on failure. Boundary points are handled by keeping iterates in the closed
/// disc; corners map exactly onto their prevertices.
pub fn inverse_map(w: SquarePoint, tol: &Tolerances) -> Result<DiscPoint> {
    tol.validate()?;
    let w = w.w();
    if w == Complex64::new(0.0, 0.0) {
        return Ok(DiscPoint(w));
    }
    if let Some(j) = (0..4).find(|&j| (w - vertex(j)).norm() < 1e-14) {
        return Ok(DiscPoint(prevertex(j)));
    }
    let mut steps = CONTINUATION_STEPS;
    while steps <= MAX_CONTINUATION_STEPS {
        if let Some(z) = continuation(w, steps, tol) {
            return Ok(DiscPoint(project_to_disc(z)));
        }
        steps *= 2;
    }
    Err(Error::Iteration {
        what: format!("inverse map at {w} with up to {MAX_CONTINUATION_STEPS} continuation steps"),
        iterations: tol.max_iter,
    })
}

/// Solves `B(r) = √2·C·a` for the radius `r` whose disc maps onto the
/// concentric sub-square of half-side `a`.
pub fn r_of_a(a: f64, tol: &Tolerances) -> Result<f64> {
    if !(0.0..=1.0).contains(&a) {
        return domain(format!("r_of_a requires 0 ≤ a ≤ 1, got {a}"));
    }
    if a == 0.0 {
        return Ok(0.0);
    }
    if a == 1.0 {
        return Ok(1.0);
    }
    let target = SQRT_2 * schwarz_christoffel_c() * a;
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    let mut r = target.min(0.999);
    for _ in 0..tol.max_iter.max(64) {
        let residual = b_integral_with(r, tol)? - target;
        if residual.abs() <= 1e-13 {
            return Ok(r);
        }
        if residual > 0.0 {
            hi = r;
        } else {
            lo = r;
        }
        let newton = r - residual / b_integral_derivative(r);
        let next = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if (next - r).abs() <= 1e-16 || hi - lo <= 1e-16 {
            return Ok(next);
        }
        r = next;
    }
    Err(Error::Iteration { what: "r_of_a".into(), iterations: tol.max_iter.max(64) })
}

/// Conformal radius `r_K(x) = (1−|z|²)·|f'(z)|` with `z = g(x)`.
pub fn conformal_radius(x: SquarePoint, tol: &Tolerances) -> Result<f64> {
    x.require_interior()?;
    let z = inverse_map(x, tol)?;
    Ok((1.0 - z.z().norm_sqr()) * forward_derivative(z)?.norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_4;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn fwd(z: Complex64) -> Complex64 {
        forward_map(DiscPoint::new(z).unwrap(), &tol()).unwrap().w()
    }

    #[test]
    fn c_value() {
        assert_abs_diff_eq!(schwarz_christoffel_c(), 0.927_037_338_650_686, epsilon = 1e-14);
    }

    #[test]
    fn normalisation() {
        assert_eq!(fwd(Complex64::new(0.0, 0.0)), Complex64::new(0.0, 0.0));
        assert_abs_diff_eq!(fwd(Complex64::new(1.0, 0.0)).re, 1.0, epsilon = 1e-13);
    }

    #[test]
    fn prevertices_map_to_corners() {
        for j in 0..4 {
            let w = fwd(prevertex(j));
            assert_abs_diff_eq!((w - vertex(j)).norm(), 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn corner_and_radial_routes_agree() {
        // Just outside the corner radius both routes apply.
        let z = prevertex(1) * 0.998;
        let radial = radial_image(z, &tol()).unwrap();
        let corner = corner_image(z, 1, &tol()).unwrap();
        assert_abs_diff_eq!((radial - corner).norm(), 0.0, epsilon = 1e-11);
    }

    #[test]
    fn radial_route_rejects_prevertex() {
        let z = DiscPoint::new(prevertex(2) * 0.9999).unwrap();
        assert!(matches!(forward_map_radial(z, &tol()), Err(Error::Singularity(_))));
        assert!(matches!(forward_derivative(DiscPoint(prevertex(0))), Err(Error::Singularity(_))));
    }

    #[test]
    fn diagonal_maps_to_diagonal() {
        let a = 0.485087;
        let r = r_of_a(a, &tol()).unwrap();
        let w = fwd(Complex64::from_polar(r, FRAC_PI_4));
        let expected = Complex64::from_polar(a * SQRT_2, FRAC_PI_4);
        assert_abs_diff_eq!((w - expected).norm(), 0.0, epsilon = 1e-11);
    }

    #[test]
    fn derivative_at_origin() {
        let d = forward_derivative(DiscPoint(Complex64::new(0.0, 0.0))).unwrap();
        assert_abs_diff_eq!(d.re, 1.0 / schwarz_christoffel_c(), epsilon = 1e-15);
    }

    #[test]
    fn derivative_matches_central_difference() {
        let h = 1e-6;
        let z = Complex64::new(0.3, 0.0);
        let fd = (fwd(z + h) - fwd(z - h)) / (2.0 * h);
        let d = forward_derivative(DiscPoint(z)).unwrap();
        assert_abs_diff_eq!((fd - d).norm(), 0.0, epsilon = 1e-8);
        let iz = DiscPoint(z * Complex64::i());
        assert_abs_diff_eq!(forward_derivative(iz).unwrap().norm(), d.norm(), epsilon = 1e-15);
    }

    #[test]
    fn inverse_of_origin_and_corner() {
        let z = inverse_map(SquarePoint::from_xy(0.0, 0.0).unwrap(), &tol()).unwrap();
        assert_eq!(z.z(), Complex64::new(0.0, 0.0));
        let z = inverse_map(SquarePoint::from_xy(-1.0, 1.0).unwrap(), &tol()).unwrap();
        assert_abs_diff_eq!((z.z() - prevertex(1)).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn inverse_near_corner_and_on_side() {
        // Within δ of a corner, |z − ζv| ~ δ², so rounding of z limits the
        // attainable residual to about √ε.
        for (w, eps) in [
            (Complex64::new(0.999, 0.999), 1e-10),
            (Complex64::new(-0.9999999, 0.9999999), 1e-8),
            (Complex64::new(1.0, 0.3), 1e-10),
            (Complex64::new(0.2, -1.0), 1e-10),
        ] {
            let z = inverse_map(SquarePoint::new(w).unwrap(), &tol()).unwrap();
            assert!(z.z().norm() <= 1.0);
            assert_abs_diff_eq!((fwd(z.z()) - w).norm(), 0.0, epsilon = eps);
        }
    }

    #[test]
    fn inverse_of_printed_sub_square_corner() {
        // Preimage of a√2·e^{iπ/4}, a = 0.485087, lies on the diagonal at
        // r(a) = 0.62569987307653674 (30-digit quadrature oracle).
        let w = Complex64::from_polar(0.485087 * SQRT_2, FRAC_PI_4);
        let z = inverse_map(SquarePoint::new(w).unwrap(), &tol()).unwrap().z();
        assert_abs_diff_eq!(z.norm(), 0.625_699_873_076_536_7, epsilon = 1e-10);
        assert_abs_diff_eq!(z.arg(), FRAC_PI_4, epsilon = 1e-10);
    }

    #[test]
    fn r_of_a_endpoints_and_value() {
        assert_eq!(r_of_a(0.0, &tol()).unwrap(), 0.0);
        assert_eq!(r_of_a(1.0, &tol()).unwrap(), 1.0);
        assert_abs_diff_eq!(r_of_a(0.485087, &tol()).unwrap(), 0.625_699_873_076_536_7, epsilon = 1e-12);
        // Just below 1 the derivative of B blows up; bisection keeps it bracketed.
        let r = r_of_a(0.999_999, &tol()).unwrap();
        assert!(r < 1.0 && r > 0.99);
        assert!(r_of_a(1.5, &tol()).is_err());
    }

    #[test]
    fn conformal_radius_at_centre_and_symmetry() {
        let c = schwarz_christoffel_c();
        let r0 = conformal_radius(SquarePoint::from_xy(0.0, 0.0).unwrap(), &tol()).unwrap();
        assert_abs_diff_eq!(r0, 1.0 / c, epsilon = 1e-14);
        let a = conformal_radius(SquarePoint::from_xy(0.5, 0.0).unwrap(), &tol()).unwrap();
        let b = conformal_radius(SquarePoint::from_xy(0.0, 0.5).unwrap(), &tol()).unwrap();
        let d = conformal_radius(SquarePoint::from_xy(-0.5, 0.0).unwrap(), &tol()).unwrap();
        assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        assert_abs_diff_eq!(a, d, epsilon = 1e-12);
    }

    #[test]
    fn conformal_radius_near_side_is_twice_distance() {
        let x = SquarePoint::from_xy(0.0, -0.99).unwrap();
        let r = conformal_radius(x, &tol()).unwrap();
        assert!((2.0 * x.boundary_distance() / r - 1.0).abs() < 0.01);
        assert!(conformal_radius(SquarePoint::from_xy(1.0, 0.0).unwrap(), &tol()).is_err());
    }

    #[test]
    fn membership_checks() {
        assert!(DiscPoint::new(Complex64::new(0.8, 0.7)).is_err());
        assert!(SquarePoint::from_xy(1.0, -1.0).is_ok());
        assert!(SquarePoint::from_xy(1.01, 0.0).is_err());
        assert!(SquarePoint::from_xy(f64::NAN, 0.0).is_err());
    }
}
