//! The comparison ratio `th(ρ_K/2) / s_K`, its diagonal limit `2d_K/r_K`,
//! and numerical searches and sampling that exercise the sharp bound
//! `1 ≤ th(ρ_K/2)/s_K ≤ C(λ₀)`.
//!
//! Extremal search works on the three-parameter family of pairs
//! `w₁ = u₁ − ia`, `w₂ = u₂ + ia` on opposite sides of a concentric
//! sub-square, with `|u₁+u₂| ≤ a² + u₁u₂`; an unstructured search over
//! `K × K` is run alongside as a witness. The supremum `C(λ₀)` is only
//! approached as both points collapse onto the centre.

use std::cmp::Ordering;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conformal::{
    conformal_radius, inverse_map, schwarz_christoffel_c, DiscPoint, SquarePoint,
};
use crate::error::{domain, Error, Result};
use crate::hyperbolic::{pseudo_hyp, th_half_rho_square};
use crate::sampling::{chunk_range, chunks, interior_point, stream_rng};
use crate::smetric::{classify_region, s_metric, Decomposition, RegionLabel, TIE_TOL};
use crate::special_fn::Tolerances;

/// Random samples stay this far from ∂K.
pub const SAMPLE_MARGIN: f64 = 1e-6;

/// Lower bound slack: `ratio ≥ 1 − RATIO_LOWER_SLACK`.
pub const RATIO_LOWER_SLACK: f64 = 1e-9;

/// Upper bound slack: `ratio ≤ C(λ₀) + RATIO_UPPER_SLACK`.
pub const RATIO_UPPER_SLACK: f64 = 1e-6;

/// Smallest sub-square half-side visited by the structured search.
pub const MIN_HALF_SIDE: f64 = 1e-4;

/// `C(λ₀) = 2C = K(√2/2)`, the sharp upper constant.
pub fn sharp_constant() -> f64 {
    2.0 * schwarz_christoffel_c()
}

/// A point pair with both metrics and their ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioSample {
    pub x: SquarePoint,
    pub y: SquarePoint,
    pub s: f64,
    pub th_half: f64,
    pub ratio: f64,
}

impl RatioSample {
    /// Whether the ratio lies within the two-sided bound (with slack).
    pub fn within_bounds(&self) -> bool {
        self.ratio >= 1.0 - RATIO_LOWER_SLACK && self.ratio <= sharp_constant() + RATIO_UPPER_SLACK
    }
}

/// Pair `w₁ = u₁ − ia`, `w₂ = u₂ + ia` with `|u₁+u₂| ≤ a² + u₁u₂`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubSquareConfig {
    a: f64,
    u1: f64,
    u2: f64,
}

impl SubSquareConfig {
    pub fn new(a: f64, u1: f64, u2: f64) -> Result<Self> {
        if !(a > 0.0 && a < 1.0) {
            return domain(format!("half-side a = {a} must lie in (0, 1)"));
        }
        if !(u1.abs() <= a && u2.abs() <= a) {
            return domain(format!("u₁ = {u1}, u₂ = {u2} must lie in [−a, a] with a = {a}"));
        }
        if !is_feasible(a, u1, u2) {
            return domain(format!("(a, u₁, u₂) = ({a}, {u1}, {u2}) violates |u₁+u₂| ≤ a²+u₁u₂"));
        }
        Ok(Self { a, u1, u2 })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn u1(&self) -> f64 {
        self.u1
    }

    pub fn u2(&self) -> f64 {
        self.u2
    }

    pub fn w1(&self) -> SquarePoint {
        SquarePoint::clamped(Complex64::new(self.u1, -self.a))
    }

    pub fn w2(&self) -> SquarePoint {
        SquarePoint::clamped(Complex64::new(self.u2, self.a))
    }

    /// Closed-form `s_K(w₁, w₂) = √(((u₁−u₂)² + 4a²) / ((u₁−u₂)² + 4))`.
    pub fn s_closed_form(&self) -> f64 {
        let d2 = (self.u1 - self.u2).powi(2);
        ((d2 + 4.0 * self.a * self.a) / (d2 + 4.0)).sqrt()
    }

    fn key(&self) -> (f64, f64, f64) {
        (self.a, self.u1, self.u2)
    }
}

/// `|u₁+u₂| ≤ a² + u₁u₂`.
pub fn is_feasible(a: f64, u1: f64, u2: f64) -> bool {
    (u1 + u2).abs() <= a * a + u1 * u2
}

/// `th(ρ_K(x,y)/2) / s_K(x,y)` with its ingredients.
pub fn ratio_sample(x: SquarePoint, y: SquarePoint, tol: &Tolerances) -> Result<RatioSample> {
    if x == y {
        return domain("ratio is undefined for coincident points; use local_limit");
    }
    let th_half = th_half_rho_square(x, y, tol)?;
    let s = s_metric(x, y);
    Ok(RatioSample { x, y, s, th_half, ratio: th_half / s })
}

/// `th(ρ_K(x,y)/2) / s_K(x,y)` for distinct interior points.
pub fn ratio(x: SquarePoint, y: SquarePoint, tol: &Tolerances) -> Result<f64> {
    Ok(ratio_sample(x, y, tol)?.ratio)
}

// Ratio for a fixed base point whose preimage is already known.
fn ratio_from(x: SquarePoint, zx: DiscPoint, y: SquarePoint, tol: &Tolerances) -> Result<f64> {
    y.require_interior()?;
    let zy = inverse_map(y, tol)?;
    Ok(pseudo_hyp(zx.z(), zy.z()) / s_metric(x, y))
}

/// `lim_{y→x} th(ρ_K/2)/s_K = 2·d_K(x) / r_K(x)`.
pub fn local_limit(x: SquarePoint, tol: &Tolerances) -> Result<f64> {
    x.require_interior()?;
    Ok(2.0 * x.boundary_distance() / conformal_radius(x, tol)?)
}

/// Ratio for a sub-square configuration, with `s` in closed form.
pub fn ratio_sub_square(cfg: &SubSquareConfig, tol: &Tolerances) -> Result<f64> {
    Ok(th_half_rho_square(cfg.w1(), cfg.w2(), tol)? / cfg.s_closed_form())
}

fn sub_square_sample(cfg: &SubSquareConfig, tol: &Tolerances) -> Result<RatioSample> {
    let th_half = th_half_rho_square(cfg.w1(), cfg.w2(), tol)?;
    let s = cfg.s_closed_form();
    Ok(RatioSample { x: cfg.w1(), y: cfg.w2(), s, th_half, ratio: th_half / s })
}

// Larger ratio wins; ties go to the lexicographically smaller key.
fn better(a: f64, ka: (f64, f64, f64, f64), b: f64, kb: (f64, f64, f64, f64)) -> bool {
    match a.total_cmp(&b) {
        Ordering::Greater => true,
        Ordering::Less => false,
        Ordering::Equal => {
            let o = ka.0.total_cmp(&kb.0).then(ka.1.total_cmp(&kb.1)).then(ka.2.total_cmp(&kb.2));
            o.then(ka.3.total_cmp(&kb.3)) == Ordering::Less
        }
    }
}

fn sample_key(s: &RatioSample) -> (f64, f64, f64, f64) {
    (s.x.re(), s.x.im(), s.y.re(), s.y.im())
}

fn cfg_key(c: &SubSquareConfig) -> (f64, f64, f64, f64) {
    let (a, u1, u2) = c.key();
    (a, u1, u2, 0.0)
}

/// Outcome of [`maximize_ratio`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchReport {
    /// Best sample over the sub-square family.
    pub structured: RatioSample,
    pub structured_config: SubSquareConfig,
    /// Best sample of the unstructured search over `K × K`.
    pub unstructured: RatioSample,
    pub evaluations: usize,
}

const SEEDS_REFINED: usize = 4;

fn top_k<T: Copy + Send>(
    mut scored: Vec<(f64, T)>,
    key: impl Fn(&T) -> (f64, f64, f64, f64),
    k: usize,
) -> Vec<(f64, T)> {
    scored.sort_by(|a, b| {
        b.0.total_cmp(&a.0).then_with(|| {
            let (ka, kb) = (key(&a.1), key(&b.1));
            ka.0.total_cmp(&kb.0)
                .then(ka.1.total_cmp(&kb.1))
                .then(ka.2.total_cmp(&kb.2))
                .then(ka.3.total_cmp(&kb.3))
        })
    });
    scored.truncate(k);
    scored
}

// Compass search on (ln a, u₁/a, u₂/a), halving the steps when no move helps.
fn refine_sub_square(
    start: SubSquareConfig,
    start_value: f64,
    iters: usize,
    tol: &Tolerances,
) -> (SubSquareConfig, f64, usize) {
    let mut best = start;
    let mut value = start_value;
    let mut steps = [0.5, 0.25, 0.25];
    let mut evals = 0;
    for _ in 0..iters {
        let coords = [best.a.ln(), best.u1 / best.a, best.u2 / best.a];
        let mut improved = None;
        for dim in 0..3 {
            for sign in [1.0, -1.0] {
                let mut c = coords;
                c[dim] += sign * steps[dim];
                let a = c[0].exp();
                if !(MIN_HALF_SIDE..=0.99).contains(&a) {
                    continue;
                }
                let Ok(cfg) = SubSquareConfig::new(a, c[1] * a, c[2] * a) else { continue };
                evals += 1;
                if let Ok(v) = ratio_sub_square(&cfg, tol) {
                    let (cur, cur_key) = improved.map_or((value, cfg_key(&best)), |(v, c)| (v, cfg_key(&c)));
                    if better(v, cfg_key(&cfg), cur, cur_key) && v > value {
                        improved = Some((v, cfg));
                    }
                }
            }
        }
        match improved {
            Some((v, cfg)) => {
                value = v;
                best = cfg;
            }
            None => steps.iter_mut().for_each(|s| *s *= 0.5),
        }
    }
    (best, value, evals)
}

fn refine_pair(
    start: RatioSample,
    iters: usize,
    tol: &Tolerances,
) -> (RatioSample, usize) {
    let mut best = start;
    let mut step = 0.05;
    let mut evals = 0;
    let lim = 1.0 - SAMPLE_MARGIN;
    for _ in 0..iters {
        let coords = [best.x.re(), best.x.im(), best.y.re(), best.y.im()];
        let mut improved: Option<RatioSample> = None;
        for dim in 0..4 {
            for sign in [1.0, -1.0] {
                let mut c = coords;
                c[dim] = (c[dim] + sign * step).clamp(-lim, lim);
                let x = SquarePoint::clamped(Complex64::new(c[0], c[1]));
                let y = SquarePoint::clamped(Complex64::new(c[2], c[3]));
                if x == y {
                    continue;
                }
                evals += 1;
                if let Ok(sample) = ratio_sample(x, y, tol) {
                    let cur = improved.unwrap_or(best);
                    if better(sample.ratio, sample_key(&sample), cur.ratio, sample_key(&cur))
                        && sample.ratio > best.ratio
                    {
                        improved = Some(sample);
                    }
                }
            }
        }
        match improved {
            Some(s) => best = s,
            None => step *= 0.5,
        }
    }
    (best, evals)
}

/// Coarse grid over the sub-square family plus compass-search refinement,
/// cross-checked by a seeded random search over `K × K`.
///
/// Deterministic for fixed `(grid, refine_iters, seed)` irrespective of the
/// number of worker threads.
pub fn maximize_ratio(
    grid: usize,
    refine_iters: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<SearchReport> {
    if grid < 8 {
        return domain(format!("grid must be ≥ 8, got {grid}"));
    }
    // Half-sides on a geometric grid; offsets on a uniform grid containing 0.
    let (a_lo, a_hi) = (1e-3_f64, 0.95_f64);
    let a_values: Vec<f64> = (0..grid)
        .map(|i| (a_lo.ln() + (a_hi / a_lo).ln() * i as f64 / (grid - 1) as f64).exp())
        .collect();
    let m = (grid / 4).max(4) | 1;
    let configs: Vec<SubSquareConfig> = a_values
        .iter()
        .flat_map(|&a| {
            (0..m).flat_map(move |i| {
                (0..m).filter_map(move |j| {
                    let u = |k: usize| a * (2.0 * k as f64 / (m - 1) as f64 - 1.0);
                    SubSquareConfig::new(a, u(i), u(j)).ok()
                })
            })
        })
        .collect();
    let scored: Vec<(f64, SubSquareConfig)> = configs
        .par_iter()
        .filter_map(|cfg| ratio_sub_square(cfg, tol).ok().map(|v| (v, *cfg)))
        .collect();
    let mut evaluations = configs.len();
    let seeds = top_k(scored, cfg_key, SEEDS_REFINED);
    let refined: Vec<(SubSquareConfig, f64, usize)> = seeds
        .par_iter()
        .map(|&(v, cfg)| refine_sub_square(cfg, v, refine_iters, tol))
        .collect();
    let (best_cfg, _) = refined
        .iter()
        .fold(None::<(SubSquareConfig, f64)>, |acc, &(c, v, _)| match acc {
            Some((bc, bv)) if !better(v, cfg_key(&c), bv, cfg_key(&bc)) => Some((bc, bv)),
            _ => Some((c, v)),
        })
        .ok_or_else(|| Error::Domain("no feasible configuration evaluated".into()))?;
    evaluations += refined.iter().map(|r| r.2).sum::<usize>();
    let structured = sub_square_sample(&best_cfg, tol)?;

    // Unstructured witness at lower resolution.
    let n_random = 4 * grid * grid;
    let random: Vec<(f64, RatioSample)> = (0..chunks(n_random))
        .into_par_iter()
        .flat_map_iter(|c| {
            let mut rng = stream_rng(seed, c as u64);
            chunk_range(c, n_random)
                .filter_map(|_| {
                    let x = interior_point(&mut rng, SAMPLE_MARGIN);
                    let y = interior_point(&mut rng, SAMPLE_MARGIN);
                    ratio_sample(x, y, tol).ok()
                })
                .collect::<Vec<_>>()
        })
        .map(|s| (s.ratio, s))
        .collect();
    evaluations += n_random;
    let seeds = top_k(random, sample_key, SEEDS_REFINED);
    let refined: Vec<(RatioSample, usize)> =
        seeds.par_iter().map(|&(_, s)| refine_pair(s, refine_iters, tol)).collect();
    evaluations += refined.iter().map(|r| r.1).sum::<usize>();
    let unstructured = refined
        .iter()
        .map(|r| r.0)
        .reduce(|a, b| if better(b.ratio, sample_key(&b), a.ratio, sample_key(&a)) { b } else { a })
        .ok_or_else(|| Error::Domain("no random pair evaluated".into()))?;

    Ok(SearchReport { structured, structured_config: best_cfg, unstructured, evaluations })
}

/// Per-region and per-segment maxima of `ratio(x, ·)` for a base point in
/// triangle `AOD`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmaCheckReport {
    pub x: SquarePoint,
    pub decomposition: Decomposition,
    /// Max over interior samples classified `G1..G4` (`None` if no sample).
    pub region_max: [Option<f64>; 4],
    /// Max over `Σ₁..Σ₅` (`None` for degenerate segments).
    pub segment_max: [Option<f64>; 5],
    pub interior_max: f64,
    pub segments_max: f64,
    pub samples: usize,
    pub tolerance: f64,
}

impl SigmaCheckReport {
    /// The segments carry the maximum: `segments_max ≥ interior_max − tolerance`.
    pub fn passed(&self) -> bool {
        self.segments_max >= self.interior_max - self.tolerance
    }
}

/// Excluded neighbourhood of the base point.
const BASE_EXCLUSION: f64 = 1e-6;

fn segment_max(
    x: SquarePoint,
    zx: DiscPoint,
    seg: &crate::smetric::Segment,
    n: usize,
    tol: &Tolerances,
) -> Option<f64> {
    if seg.length() < 1e-9 {
        return None;
    }
    let eval = |t: f64| -> f64 {
        let y = SquarePoint::clamped(seg.point_at(t));
        if (y.w() - x.w()).norm() < BASE_EXCLUSION || y.boundary_distance() < SAMPLE_MARGIN {
            return f64::NEG_INFINITY;
        }
        ratio_from(x, zx, y, tol).unwrap_or(f64::NEG_INFINITY)
    };
    let ts: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
    let values: Vec<f64> = ts.par_iter().map(|&t| eval(t)).collect();
    let (best_i, best) = values
        .iter()
        .copied()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)))?;
    // Golden-section polish on the bracketing cells.
    let (mut lo, mut hi) = (ts[best_i.saturating_sub(1)], ts[(best_i + 1).min(n)]);
    let g = 0.618_033_988_749_894_8;
    let (mut c, mut d) = (hi - g * (hi - lo), lo + g * (hi - lo));
    let (mut fc, mut fd) = (eval(c), eval(d));
    for _ in 0..60 {
        if fc > fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - g * (hi - lo);
            fc = eval(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + g * (hi - lo);
            fd = eval(d);
        }
    }
    let m = best.max(fc).max(fd);
    m.is_finite().then_some(m)
}

/// Compares the maximum of `ratio(x, ·)` over dense interior samples of each
/// region with its maximum over the segments `Σ₁…Σ₅`.
pub fn sigma_restriction_check(
    x: SquarePoint,
    samples: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<SigmaCheckReport> {
    x.require_interior()?;
    let decomposition = Decomposition::new(x)?;
    let zx = inverse_map(x, tol)?;

    let interior: Vec<(RegionLabel, f64)> = (0..chunks(samples))
        .into_par_iter()
        .flat_map_iter(|c| {
            let mut rng = stream_rng(seed, c as u64);
            chunk_range(c, samples)
                .filter_map(|_| {
                    let y = interior_point(&mut rng, SAMPLE_MARGIN);
                    if (y.w() - x.w()).norm() < BASE_EXCLUSION {
                        return None;
                    }
                    let label = classify_region(x, y, TIE_TOL).ok()?;
                    Some((label, ratio_from(x, zx, y, tol).ok()?))
                })
                .collect::<Vec<_>>()
        })
        .collect();

    let mut region_max = [None; 4];
    for (label, v) in &interior {
        if let Some(side) = label.side() {
            let slot = &mut region_max[side.index()];
            *slot = Some(slot.map_or(*v, |m: f64| m.max(*v)));
        }
    }
    let interior_max = interior.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);

    let per_segment = (samples / 5).max(200);
    let segment_max: [Option<f64>; 5] = std::array::from_fn(|k| {
        segment_max(x, zx, &decomposition.segments[k], per_segment, tol)
    });
    let segments_max = segment_max.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max);

    Ok(SigmaCheckReport {
        x,
        decomposition,
        region_max,
        segment_max,
        interior_max,
        segments_max,
        samples,
        tolerance: 1e-7,
    })
}

/// Histogram bin of observed ratios.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

/// Outcome of [`verify_theorem`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub n_pairs: usize,
    pub seed: u64,
    pub evaluated: usize,
    /// Pairs whose evaluation raised an error.
    pub errors: usize,
    pub violations: usize,
    pub min: Option<RatioSample>,
    pub max: Option<RatioSample>,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub histogram: Vec<HistogramBin>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.violations == 0 && self.errors == 0 && self.evaluated > 0
    }
}

const HISTOGRAM_BINS: usize = 20;

/// Checks `1 ≤ th(ρ_K/2)/s_K ≤ C(λ₀)` on `n_pairs` seeded random interior
/// pairs.
pub fn verify_theorem(n_pairs: usize, seed: u64, tol: &Tolerances) -> Result<VerifyReport> {
    if n_pairs == 0 {
        return domain("verify_theorem needs at least one pair");
    }
    let results: Vec<Option<RatioSample>> = (0..chunks(n_pairs))
        .into_par_iter()
        .flat_map_iter(|c| {
            let mut rng = stream_rng(seed, c as u64);
            chunk_range(c, n_pairs)
                .map(|_| {
                    let x = interior_point(&mut rng, SAMPLE_MARGIN);
                    let mut y = interior_point(&mut rng, SAMPLE_MARGIN);
                    while y == x {
                        y = interior_point(&mut rng, SAMPLE_MARGIN);
                    }
                    ratio_sample(x, y, tol).ok()
                })
                .collect::<Vec<_>>()
        })
        .collect();

    let lower_bound = 1.0 - RATIO_LOWER_SLACK;
    let upper_bound = sharp_constant() + RATIO_UPPER_SLACK;
    let ok: Vec<&RatioSample> = results.iter().flatten().collect();
    let errors = results.len() - ok.len();
    let violations = ok.iter().filter(|s| !s.within_bounds()).count();
    let pick = |want: Ordering| {
        ok.iter().copied().copied().reduce(|a, b| {
            if b.ratio.total_cmp(&a.ratio) == want {
                b
            } else {
                a
            }
        })
    };
    let width = (sharp_constant() - 1.0) / HISTOGRAM_BINS as f64;
    let mut histogram: Vec<HistogramBin> = (0..HISTOGRAM_BINS)
        .map(|i| HistogramBin {
            lo: 1.0 + width * i as f64,
            hi: 1.0 + width * (i + 1) as f64,
            count: 0,
        })
        .collect();
    for s in &ok {
        let i = (((s.ratio - 1.0) / width).floor().max(0.0) as usize).min(HISTOGRAM_BINS - 1);
        histogram[i].count += 1;
    }
    Ok(VerifyReport {
        n_pairs,
        seed,
        evaluated: ok.len(),
        errors,
        violations,
        min: pick(Ordering::Less),
        max: pick(Ordering::Greater),
        lower_bound,
        upper_bound,
        histogram,
    })
}

/// Draws a uniform point of the square with the sampling margin.
pub fn random_interior_point<R: Rng>(rng: &mut R) -> SquarePoint {
    interior_point(rng, SAMPLE_MARGIN)
}
