//! Hyperbolic distance in the unit disc and, through the conformal map, in the
//! square. `th(ρ/2)` is the primary quantity; `ρ` is derived from it.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::conformal::{inverse_map, DiscPoint, SquarePoint};
use crate::error::{domain, Result};
use crate::special_fn::Tolerances;

/// A hyperbolic distance together with `th(ρ/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HypDistance {
    pub rho: f64,
    pub th_half: f64,
}

impl HypDistance {
    pub fn from_th_half(th_half: f64) -> Self {
        Self { rho: 2.0 * th_half.atanh(), th_half }
    }
}

/// Pseudo-hyperbolic distance `|z₁−z₂| / |1−z₁z̄₂| = th(ρ_U(z₁,z₂)/2)`.
pub fn pseudo_hyp_disc(z1: DiscPoint, z2: DiscPoint) -> Result<f64> {
    let (a, b) = (z1.z(), z2.z());
    if a.norm() >= 1.0 || b.norm() >= 1.0 {
        return domain("pseudo-hyperbolic distance needs points of the open disc");
    }
    Ok(pseudo_hyp(a, b))
}

pub(crate) fn pseudo_hyp(a: Complex64, b: Complex64) -> f64 {
    let num = (a - b).norm();
    if num == 0.0 {
        return 0.0;
    }
    (num / (Complex64::new(1.0, 0.0) - a * b.conj()).norm()).min(1.0)
}

/// `th(ρ_K(x,y)/2)` via the preimages of `x` and `y` in the disc.
pub fn th_half_rho_square(x: SquarePoint, y: SquarePoint, tol: &Tolerances) -> Result<f64> {
    x.require_interior()?;
    y.require_interior()?;
    if x == y {
        return Ok(0.0);
    }
    let zx = inverse_map(x, tol)?;
    let zy = inverse_map(y, tol)?;
    pseudo_hyp_disc(zx, zy)
}

/// Hyperbolic distance `ρ_K(x, y)` in the square.
pub fn rho_square(x: SquarePoint, y: SquarePoint, tol: &Tolerances) -> Result<HypDistance> {
    Ok(HypDistance::from_th_half(th_half_rho_square(x, y, tol)?))
}
