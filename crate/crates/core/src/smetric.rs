//! The triangular ratio metric of the square,
//!
//! ```text
//! s_K(x, y) = |x − y| / min_{z ∈ ∂K} (|x − z| + |z − y|),    s_K(x, x) = 0,
//! ```
//!
//! together with the dihedral canonicalisation of a pair, the points `p`, `q`
//! and segments `Σ₁…Σ₅` induced by a base point in the lower triangle `AOD`,
//! and the region classification driven by the four reflected denominators.
//!
//! Vertices are `A = −1−i`, `B = −1+i`, `C = 1+i`, `D = 1−i`; `DA` is the
//! lower side.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::conformal::{SquarePoint, MEMBERSHIP_SLACK};
use crate::error::{domain, Result};

pub const VERTEX_A: Complex64 = Complex64::new(-1.0, -1.0);
pub const VERTEX_B: Complex64 = Complex64::new(-1.0, 1.0);
pub const VERTEX_C: Complex64 = Complex64::new(1.0, 1.0);
pub const VERTEX_D: Complex64 = Complex64::new(1.0, -1.0);

/// Default tie tolerance for [`classify_region`].
pub const TIE_TOL: f64 = 1e-10;

/// A side of the square, in the order used by [`reflected_denominators`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    /// Lower side, `Im = −1`.
    DA,
    /// Left side, `Re = −1`.
    AB,
    /// Upper side, `Im = 1`.
    BC,
    /// Right side, `Re = 1`.
    CD,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::DA, Side::AB, Side::BC, Side::CD];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn endpoints(self) -> (Complex64, Complex64) {
        match self {
            Side::DA => (VERTEX_D, VERTEX_A),
            Side::AB => (VERTEX_A, VERTEX_B),
            Side::BC => (VERTEX_B, VERTEX_C),
            Side::CD => (VERTEX_C, VERTEX_D),
        }
    }

    // Exact rotation taking this side onto the lower side Im = −1.
    fn to_lower(self) -> Complex64 {
        match self {
            Side::DA => Complex64::new(1.0, 0.0),
            Side::AB => Complex64::new(0.0, 1.0),
            Side::BC => Complex64::new(-1.0, 0.0),
            Side::CD => Complex64::new(0.0, -1.0),
        }
    }

    /// Point of the side at parameter `t ∈ [0, 1]` from its first endpoint.
    pub fn point_at(self, t: f64) -> Complex64 {
        let (p, q) = self.endpoints();
        p + (q - p) * t
    }

    /// Mirror image of `y` in the line containing this side.
    pub fn reflect(self, y: Complex64) -> Complex64 {
        match self {
            Side::DA => y.conj() - Complex64::new(0.0, 2.0),
            Side::AB => -y.conj() - 2.0,
            Side::BC => y.conj() + Complex64::new(0.0, 2.0),
            Side::CD => -y.conj() + 2.0,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Side::DA => "DA",
            Side::AB => "AB",
            Side::BC => "BC",
            Side::CD => "CD",
        };
        f.write_str(name)
    }
}

/// One of the eight symmetries `w ↦ iʳ·w` or `w ↦ iʳ·w̄` of the square.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Symmetry {
    /// Quarter turns applied after the optional conjugation.
    pub rotation: u8,
    pub conjugate: bool,
}

impl Symmetry {
    pub const IDENTITY: Symmetry = Symmetry { rotation: 0, conjugate: false };

    /// All eight elements; the identity comes first, then conjugation.
    pub fn all() -> [Symmetry; 8] {
        let mut out = [Self::IDENTITY; 8];
        for (i, s) in out.iter_mut().enumerate() {
            *s = Symmetry { rotation: (i / 2) as u8, conjugate: i % 2 == 1 };
        }
        out
    }

    pub fn apply(&self, w: Complex64) -> Complex64 {
        let w = if self.conjugate { w.conj() } else { w };
        // Quarter turns by swapping/negating components stay exact.
        match self.rotation % 4 {
            0 => w,
            1 => Complex64::new(-w.im, w.re),
            2 => Complex64::new(-w.re, -w.im),
            _ => Complex64::new(w.im, -w.re),
        }
    }

    pub fn apply_point(&self, w: SquarePoint) -> SquarePoint {
        SquarePoint::clamped(self.apply(w.w()))
    }

    pub fn inverse(&self) -> Symmetry {
        if self.conjugate {
            *self
        } else {
            Symmetry { rotation: (4 - self.rotation % 4) % 4, conjugate: false }
        }
    }
}

/// Whether `x` lies in the closed triangle `AOD`: `Im x ≤ 0`, `|Re x| ≤ −Im x`.
pub fn in_triangle_aod(x: Complex64) -> bool {
    x.im <= MEMBERSHIP_SLACK && x.re.abs() <= -x.im + MEMBERSHIP_SLACK
}

/// Moves `x` into triangle `AOD` by a symmetry of the square, applied to both
/// points.
pub fn canonicalize(x: SquarePoint, y: SquarePoint) -> (SquarePoint, SquarePoint, Symmetry) {
    let sym = Symmetry::all()
        .into_iter()
        .find(|s| in_triangle_aod(s.apply(x.w())))
        .expect("the triangles of the diagonals tile the square");
    (sym.apply_point(x), sym.apply_point(y), sym)
}

/// A straight segment between two points of the square.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub start: Complex64,
    pub end: Complex64,
}

impl Segment {
    pub fn point_at(&self, t: f64) -> Complex64 {
        self.start + (self.end - self.start) * t
    }

    pub fn length(&self) -> f64 {
        (self.end - self.start).norm()
    }
}

/// The points `p`, `q` and separating segments induced by a base point `x`
/// in triangle `AOD`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub x: SquarePoint,
    pub p: SquarePoint,
    pub q: SquarePoint,
    /// `Σ₁ = Ap`, `Σ₂ = Bp`, `Σ₃ = Cq`, `Σ₄ = Dq`, `Σ₅ = pq`.
    pub segments: [Segment; 5],
}

impl Decomposition {
    pub fn new(x: SquarePoint) -> Result<Self> {
        let (p, q) = compute_pq(x)?;
        let seg = |start, end| Segment { start, end };
        Ok(Self {
            x,
            p,
            q,
            segments: [
                seg(VERTEX_A, p.w()),
                seg(VERTEX_B, p.w()),
                seg(VERTEX_C, q.w()),
                seg(VERTEX_D, q.w()),
                seg(p.w(), q.w()),
            ],
        })
    }
}

/// For `x = t − ia` in triangle `AOD`:
/// `p = −(a²+t)/(1+t) + ia`, `q = (a²−t)/(1−t) + ia`.
pub fn compute_pq(x: SquarePoint) -> Result<(SquarePoint, SquarePoint)> {
    let (t, a) = (x.re(), -x.im());
    if !in_triangle_aod(x.w()) {
        return domain(format!("{x} is not in triangle AOD"));
    }
    if a >= 1.0 {
        return domain(format!("compute_pq requires Im x > −1, got {x}"));
    }
    let a2 = a * a;
    let p = Complex64::new(-(a2 + t) / (1.0 + t), a);
    let q = Complex64::new((a2 - t) / (1.0 - t), a);
    Ok((SquarePoint::clamped(p), SquarePoint::clamped(q)))
}

/// `(|x−ȳ+2i|, |x+ȳ+2|, |x−ȳ−2i|, |x+ȳ−2|)`: distances from `x` to the
/// mirror images of `y` in the lines of `DA`, `AB`, `BC`, `CD`.
pub fn reflected_denominators(x: SquarePoint, y: SquarePoint) -> [f64; 4] {
    Side::ALL.map(|side| (x.w() - side.reflect(y.w())).norm())
}

/// Which side realises the boundary infimum for `y`, relative to `x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegionLabel {
    /// Minimum on `DA`.
    G1,
    /// Minimum on `AB`.
    G2,
    /// Minimum on `BC`.
    G3,
    /// Minimum on `CD`.
    G4,
    /// `y` lies on one of the segments `Σₖ`: two sides tie.
    Separator(Side, Side),
}

impl RegionLabel {
    pub fn for_side(side: Side) -> Self {
        match side {
            Side::DA => RegionLabel::G1,
            Side::AB => RegionLabel::G2,
            Side::BC => RegionLabel::G3,
            Side::CD => RegionLabel::G4,
        }
    }

    pub fn side(&self) -> Option<Side> {
        match self {
            RegionLabel::G1 => Some(Side::DA),
            RegionLabel::G2 => Some(Side::AB),
            RegionLabel::G3 => Some(Side::BC),
            RegionLabel::G4 => Some(Side::CD),
            RegionLabel::Separator(..) => None,
        }
    }
}

impl fmt::Display for RegionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegionLabel::G1 => f.write_str("G1"),
            RegionLabel::G2 => f.write_str("G2"),
            RegionLabel::G3 => f.write_str("G3"),
            RegionLabel::G4 => f.write_str("G4"),
            RegionLabel::Separator(a, b) => write!(f, "SEPARATOR({a}|{b})"),
        }
    }
}

/// Classifies `y` by the smallest reflected denominator; `x` must be in
/// triangle `AOD`.
pub fn classify_region(x: SquarePoint, y: SquarePoint, tie_tol: f64) -> Result<RegionLabel> {
    if !in_triangle_aod(x.w()) {
        return domain(format!("{x} is not in triangle AOD"));
    }
    let d = reflected_denominators(x, y);
    let mut order = Side::ALL;
    order.sort_by(|a, b| d[a.index()].total_cmp(&d[b.index()]));
    let (first, second) = (order[0], order[1]);
    if d[second.index()] - d[first.index()] <= tie_tol {
        let (lo, hi) = if first < second { (first, second) } else { (second, first) };
        Ok(RegionLabel::Separator(lo, hi))
    } else {
        Ok(RegionLabel::for_side(first))
    }
}

/// `min_{z ∈ side} |x−z| + |z−y|` by reflection, clamped to the side's
/// endpoints when the reflected segment misses the side. Symmetric in
/// `(x, y)` bit for bit.
pub fn side_detour(side: Side, x: Complex64, y: Complex64) -> f64 {
    let rot = side.to_lower();
    let (xl, yl) = (x * rot, y * rot);
    // Heights above the line Im = −1.
    let (hx, hy) = ((xl.im + 1.0).max(0.0), (yl.im + 1.0).max(0.0));
    let h = hx + hy;
    let along = if h > 0.0 { (xl.re * hy + yl.re * hx) / h } else { 0.5 * (xl.re + yl.re) };
    if along.abs() <= 1.0 {
        (xl.re - yl.re).hypot(h)
    } else {
        let (p, q) = side.endpoints();
        let via_p = (x - p).norm() + (p - y).norm();
        let via_q = (x - q).norm() + (q - y).norm();
        via_p.min(via_q)
    }
}

/// Minimal boundary detour and the side realising it.
pub fn boundary_detour(x: SquarePoint, y: SquarePoint) -> (f64, Side) {
    Side::ALL
        .into_iter()
        .map(|side| (side_detour(side, x.w(), y.w()), side))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .expect("four sides")
}

/// The triangular ratio metric `s_K(x, y) ∈ [0, 1]`.
pub fn s_metric(x: SquarePoint, y: SquarePoint) -> f64 {
    if x == y {
        return 0.0;
    }
    let (detour, _) = boundary_detour(x, y);
    ((x.w() - y.w()).norm() / detour).min(1.0)
}

/// Result of the brute-force boundary minimisation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub s: f64,
    pub detour: f64,
    pub side: Side,
    /// Refined minimum of `|x−z|+|z−y|` on each side, in [`Side::ALL`] order.
    pub per_side: [f64; 4],
}

const GOLDEN: f64 = 0.618_033_988_749_894_8;

fn golden_section_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut c = hi - GOLDEN * (hi - lo);
    let mut d = lo + GOLDEN * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    while hi - lo > 1e-12 {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - GOLDEN * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + GOLDEN * (hi - lo);
            fd = f(d);
        }
    }
    fc.min(fd).min(f(lo)).min(f(hi))
}

/// Brute-force boundary oracle: `n` uniformly spaced samples on ∂K, then
/// golden-section refinement on each side (the detour is convex along a
/// side).
pub fn boundary_oracle(x: SquarePoint, y: SquarePoint, n: usize) -> Result<OracleResult> {
    if n < 100 {
        return domain(format!("boundary oracle needs n ≥ 100 samples, got {n}"));
    }
    let (x, y) = (x.w(), y.w());
    let detour = |z: Complex64| (x - z).norm() + (z - y).norm();
    let per_edge = n.div_ceil(4);
    let mut per_side = [f64::INFINITY; 4];
    for side in Side::ALL {
        let sampled = (0..=per_edge)
            .map(|i| detour(side.point_at(i as f64 / per_edge as f64)))
            .fold(f64::INFINITY, f64::min);
        let refined = golden_section_min(|t| detour(side.point_at(t)), 0.0, 1.0);
        per_side[side.index()] = sampled.min(refined);
    }
    let (best, side) = Side::ALL
        .into_iter()
        .map(|s| (per_side[s.index()], s))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .expect("four sides");
    let s = if x == y { 0.0 } else { ((x - y).norm() / best).min(1.0) };
    Ok(OracleResult { s, detour: best, side, per_side })
}

/// `s_K(x, y)` from [`boundary_oracle`].
pub fn boundary_oracle_s(x: SquarePoint, y: SquarePoint, n: usize) -> Result<f64> {
    Ok(boundary_oracle(x, y, n)?.s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn pt(re: f64, im: f64) -> SquarePoint {
        SquarePoint::from_xy(re, im).unwrap()
    }

    #[test]
    fn canonicalize_examples() {
        let (x, y, s) = canonicalize(pt(0.0, 0.5), pt(0.2, 0.0));
        assert_eq!((x, y), (pt(0.0, -0.5), pt(0.2, 0.0)));
        assert_eq!(s, Symmetry { rotation: 0, conjugate: true });

        let y = pt(0.7, 0.1);
        let (x2, y2, s2) = canonicalize(pt(-0.3, -0.4), y);
        assert_eq!((x2, y2, s2), (pt(-0.3, -0.4), y, Symmetry::IDENTITY));
    }

    #[test]
    fn symmetry_inverse_round_trips() {
        let w = Complex64::new(0.3, -0.7);
        for s in Symmetry::all() {
            assert_eq!(s.inverse().apply(s.apply(w)), w);
        }
    }

    #[test]
    fn pq_examples() {
        let (p, q) = compute_pq(pt(0.0, 0.0)).unwrap();
        assert_eq!((p.w(), q.w()), (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)));

        let (p, q) = compute_pq(pt(0.0, -0.5)).unwrap();
        assert_abs_diff_eq!(p.re(), -0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(q.re(), 0.25, epsilon = 1e-15);
        assert_eq!((p.im(), q.im()), (0.5, 0.5));

        let (p, q) = compute_pq(pt(0.2, -0.3)).unwrap();
        assert_abs_diff_eq!(p.re(), -0.29 / 1.2, epsilon = 1e-15);
        assert_abs_diff_eq!(q.re(), -0.1375, epsilon = 1e-15);
        assert_abs_diff_eq!(p.im(), 0.3, epsilon = 1e-15);
    }

    #[test]
    fn pq_rejects_outside_aod() {
        assert!(compute_pq(pt(0.0, 0.5)).is_err());
        assert!(compute_pq(pt(0.0, -1.0)).is_err());
    }

    #[test]
    fn pq_satisfy_product_relations() {
        for (t, a) in [(0.1, 0.3), (-0.4, 0.6), (0.0, 0.9), (0.5, 0.5)] {
            let (p, q) = compute_pq(pt(t, -a)).unwrap();
            assert_abs_diff_eq!((1.0 + t) * (1.0 + p.re()), 1.0 - a * a, epsilon = 1e-12);
            assert_abs_diff_eq!((1.0 - t) * (1.0 - q.re()), 1.0 - a * a, epsilon = 1e-12);
            assert!(p.re() <= q.re() + 1e-15);
        }
    }

    #[test]
    fn denominators_examples() {
        assert_eq!(reflected_denominators(pt(0.0, 0.0), pt(0.0, 0.0)), [2.0; 4]);
        let d = reflected_denominators(pt(0.0, 0.0), pt(0.5, 0.0));
        assert_abs_diff_eq!(d[0], 4.25f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(d[3], 1.5, epsilon = 1e-15);
        let x = pt(0.1, -0.6);
        let (p, _) = compute_pq(x).unwrap();
        let d = reflected_denominators(x, p);
        assert_abs_diff_eq!(d[0], d[1], epsilon = 1e-14);
    }

    #[test]
    fn classify_examples() {
        let x = pt(0.0, -0.5);
        assert_eq!(classify_region(x, pt(-0.1, -0.8), TIE_TOL).unwrap(), RegionLabel::G1);
        assert_eq!(classify_region(x, pt(0.0, 0.9), TIE_TOL).unwrap(), RegionLabel::G3);
        let p = pt(-0.25, 0.5);
        assert!(matches!(
            classify_region(x, p, TIE_TOL).unwrap(),
            RegionLabel::Separator(Side::DA, Side::AB) | RegionLabel::Separator(Side::DA, Side::BC)
                | RegionLabel::Separator(Side::AB, Side::BC)
        ));
        assert!(classify_region(pt(0.0, 0.5), p, TIE_TOL).is_err());
    }

    #[test]
    fn s_examples() {
        assert_eq!(s_metric(pt(0.3, 0.2), pt(0.3, 0.2)), 0.0);
        assert_abs_diff_eq!(s_metric(pt(0.0, -0.5), pt(0.0, 0.5)), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(s_metric(pt(0.0, 0.0), pt(0.5, 0.0)), 1.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn s_on_one_side_is_one() {
        assert_abs_diff_eq!(s_metric(pt(-0.5, -1.0), pt(0.5, -1.0)), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn clamped_detour_uses_corner() {
        // Near opposite corners the reflection in DA misses the side.
        let x = pt(-0.95, -0.2);
        let y = pt(0.95, 0.1);
        let exact = side_detour(Side::DA, x.w(), y.w());
        let oracle = golden_section_min(
            |t| (x.w() - Side::DA.point_at(t)).norm() + (Side::DA.point_at(t) - y.w()).norm(),
            0.0,
            1.0,
        );
        assert_abs_diff_eq!(exact, oracle, epsilon = 1e-12);
    }

    #[test]
    fn oracle_matches_examples() {
        assert_eq!(boundary_oracle_s(pt(0.1, 0.1), pt(0.1, 0.1), 400).unwrap(), 0.0);
        let s = boundary_oracle_s(pt(0.0, -0.5), pt(0.0, 0.5), 400).unwrap();
        assert_abs_diff_eq!(s, 0.5, epsilon = 1e-9);
        let s = boundary_oracle_s(pt(0.0, 0.0), pt(0.5, 0.0), 400).unwrap();
        assert_abs_diff_eq!(s, 1.0 / 3.0, epsilon = 1e-9);
        assert!(boundary_oracle_s(pt(0.0, 0.0), pt(0.5, 0.0), 99).is_err());
    }
}
