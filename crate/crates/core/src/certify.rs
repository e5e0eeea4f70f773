//! Numerical reproduction of the inequality chain behind the bound
//! `th(ρ_K/2) ≤ 2C·s_K` for pairs on opposite sides of a concentric
//! sub-square: the functions `A`, `F`, `Φ`, the constants `r₀`, `a₀`, `γ`,
//! and seeded sampling of each intermediate inequality.

use std::f64::consts::SQRT_2;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::local_limit;
use crate::conformal::{r_of_a, schwarz_christoffel_c, SquarePoint};
use crate::error::{domain, Error, Result};
use crate::hyperbolic::th_half_rho_square;
use crate::sampling::stream_rng;
use crate::special_fn::{b_integral, elliptic_k, rect_constant, Modulus, Tolerances, LAMBDA_0};

/// Reference values the report is compared against.
pub mod reference {
    pub const C: f64 = 0.927037;
    pub const C_LAMBDA0: f64 = 1.854074677;
    pub const R0: f64 = 0.625623;
    pub const A0: f64 = 0.485087;
    pub const PHI_RATIO_AT_R0: f64 = 0.314881;
    pub const ALPHA_POS: f64 = 0.235309;
    pub const BETA_POS: f64 = 0.933029;
    pub const GAMMA_POS: f64 = 0.449368;
    pub const ALPHA_NEG: f64 = 2.0;
    pub const BETA_NEG: f64 = 1.0;
    pub const GAMMA_NEG: f64 = 0.343805;
}

/// Tolerance for printed six-digit constants.
pub const PRINTED_TOL: f64 = 1e-5;

// Roundoff allowance for sampled inequalities.
const INEQ_SLACK: f64 = 1e-14;

/// `A(r) = √(1+r⁴) − 1`, evaluated as `r⁴/(√(1+r⁴)+1)`.
pub fn a_fn(r: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&r) {
        return domain(format!("A(r) needs r in [0, 1], got {r}"));
    }
    let r4 = r.powi(4);
    Ok(r4 / ((1.0 + r4).sqrt() + 1.0))
}

/// `F(r) = √2·r / ((1+r²)·B(r))`; `F(0) = √2` by continuity.
pub fn f_fn(r: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&r) {
        return domain(format!("F(r) needs r in [0, 1), got {r}"));
    }
    if r == 0.0 {
        return Ok(SQRT_2);
    }
    Ok(SQRT_2 * r / ((1.0 + r * r) * b_integral(r)?))
}

/// `Φ(r) = A + 2AB² + A²B²`.
pub fn phi_fn(r: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&r) {
        return domain(format!("Φ(r) needs r in [0, 1), got {r}"));
    }
    let (a, b) = (a_fn(r)?, b_integral(r)?);
    Ok(a + 2.0 * a * b * b + a * a * b * b)
}

/// `A/B² + 2A + A²`; `0` at `r = 0`.
pub fn phi_ratio(r: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&r) {
        return domain(format!("lhs needs r in [0, 1), got {r}"));
    }
    if r == 0.0 {
        return Ok(0.0);
    }
    let (a, b) = (a_fn(r)?, b_integral(r)?);
    Ok(a / (b * b) + 2.0 * a + a * a)
}

/// `γ = β(C² − (α/8)(1 + A(r₀))) / (2C²)`.
pub fn gamma_fn(alpha: f64, beta: f64) -> Result<f64> {
    if !(alpha > 0.0 && beta > 0.0) {
        return domain(format!("γ needs α, β > 0, got ({alpha}, {beta})"));
    }
    let c2 = schwarz_christoffel_c().powi(2);
    Ok(beta * (c2 - alpha / 8.0 * (1.0 + a_fn(reference::R0)?)) / (2.0 * c2))
}

// Competing reading `β(C² − α/(8(1+A(r₀)))) / (2C²)`, reported for comparison.
fn gamma_alt_grouping(alpha: f64, beta: f64) -> Result<f64> {
    let c2 = schwarz_christoffel_c().powi(2);
    Ok(beta * (c2 - alpha / (8.0 * (1.0 + a_fn(reference::R0)?))) / (2.0 * c2))
}

/// `(a₀², 1 − a₀²/(1+√(1−a₀²))²)`.
pub fn pair_constants(a0: f64) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&a0) {
        return domain(format!("a₀ must lie in [0, 1], got {a0}"));
    }
    let a2 = a0 * a0;
    Ok((a2, 1.0 - a2 / (1.0 + (1.0 - a2).sqrt()).powi(2)))
}

/// `a₀ = B(r₀)/(√2·C)`.
pub fn a0_from_r0(r0: f64) -> Result<f64> {
    Ok(b_integral(r0)? / (SQRT_2 * schwarz_christoffel_c()))
}

/// `|u₁+u₂| ≤ a² + u₁u₂`.
pub fn is_feasible_pair(a: f64, u1: f64, u2: f64) -> bool {
    u1.abs() <= a && u2.abs() <= a && (u1 + u2).abs() <= a * a + u1 * u2
}

const MAX_DRAWS_PER_SAMPLE: usize = 100_000;

fn sample_feasible_with<R: Rng>(a: f64, n: usize, rng: &mut R) -> Result<Vec<(f64, f64)>> {
    if !(a > 0.0 && a < 1.0) {
        return domain(format!("a must lie in (0, 1), got {a}"));
    }
    // Half the proposals come from [−a², a²]², where same-sign pairs live.
    let small = a * a;
    let mut out = Vec::with_capacity(n);
    let mut draws = 0;
    while out.len() < n {
        draws += 1;
        if draws > MAX_DRAWS_PER_SAMPLE * n.max(1) {
            return Err(Error::Iteration { what: "sample_feasible rejection".into(), iterations: draws });
        }
        let h = if rng.random_bool(0.5) { a } else { small };
        let (u1, u2) = (rng.random_range(-h..=h), rng.random_range(-h..=h));
        if is_feasible_pair(a, u1, u2) {
            out.push((u1, u2));
        }
    }
    Ok(out)
}

/// `n` seeded pairs `(u₁, u₂) ∈ [−a, a]²` satisfying `|u₁+u₂| ≤ a² + u₁u₂`,
/// with both signs of `u₁u₂` represented.
pub fn sample_feasible(a: f64, n: usize, seed: u64) -> Result<Vec<(f64, f64)>> {
    sample_feasible_with(a, n, &mut stream_rng(seed, 0))
}

/// A named reference comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertEntry {
    pub name: String,
    pub computed: f64,
    pub reference: f64,
    pub abs_tol: f64,
    pub pass: bool,
}

impl CertEntry {
    pub fn new(name: &str, computed: f64, reference: f64, abs_tol: f64) -> Self {
        let pass = (computed - reference).abs() <= abs_tol;
        Self { name: name.to_string(), computed, reference, abs_tol, pass }
    }
}

/// A sampled inequality with its violation count and tightest margin
/// (`rhs − lhs`; negative when violated).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledCheck {
    pub name: String,
    pub samples: usize,
    pub violations: usize,
    pub min_margin: f64,
}

impl SampledCheck {
    fn new(name: &str) -> Self {
        Self { name: name.to_string(), samples: 0, violations: 0, min_margin: f64::INFINITY }
    }

    fn record(&mut self, margin: f64) {
        self.samples += 1;
        if margin.is_nan() || margin < -INEQ_SLACK {
            self.violations += 1;
        }
        self.min_margin = self.min_margin.min(margin);
    }

    fn merge(&mut self, other: &SampledCheck) {
        self.samples += other.samples;
        self.violations += other.violations;
        self.min_margin = self.min_margin.min(other.min_margin);
    }

    pub fn passed(&self) -> bool {
        self.violations == 0 && self.samples > 0
    }
}

fn merge_sections(parts: Vec<Vec<SampledCheck>>, names: &[&str]) -> Vec<SampledCheck> {
    let mut out: Vec<SampledCheck> = names.iter().map(|n| SampledCheck::new(n)).collect();
    for part in &parts {
        for (acc, p) in out.iter_mut().zip(part) {
            acc.merge(p);
        }
    }
    out
}

fn check_grid(a_grid: &[f64], hi: f64, inclusive: bool) -> Result<()> {
    if a_grid.is_empty() {
        return domain("empty a-grid");
    }
    for &a in a_grid {
        let ok = a > 0.0 && if inclusive { a <= hi } else { a < hi };
        if !ok {
            return domain(format!("grid value a = {a} outside (0, {hi}{}", if inclusive { "]" } else { ")" }));
        }
    }
    Ok(())
}

const PAIR_NAMES: [&str; 3] = ["pair_spread_same_sign", "pair_gap_same_sign", "pair_spread_opposite_sign"];

/// For `a ≤ a₀` and feasible pairs: same-sign pairs satisfy
/// `(u₁−u₂)² ≤ α(a²−u₁u₂)` and `a²−u₁u₂ ≥ βa²` with `(α, β)` from
/// [`pair_constants`] at the reference `a₀`; opposite-sign pairs satisfy
/// `(u₁−u₂)² ≤ 2(a²−u₁u₂)`.
pub fn check_pair_bounds(a_grid: &[f64], n: usize, seed: u64) -> Result<Vec<SampledCheck>> {
    check_grid(a_grid, reference::A0, true)?;
    let (alpha, beta) = pair_constants(reference::A0)?;
    let parts = a_grid
        .par_iter()
        .enumerate()
        .map(|(i, &a)| {
            let mut checks = PAIR_NAMES.map(SampledCheck::new);
            for (u1, u2) in sample_feasible_with(a, n, &mut stream_rng(seed, i as u64))? {
                let (d2, g) = ((u1 - u2).powi(2), a * a - u1 * u2);
                if u1 * u2 >= 0.0 {
                    checks[0].record(alpha * g - d2);
                    checks[1].record(g - beta * a * a);
                } else {
                    checks[2].record((2.0 * g - d2).min(g - a * a));
                }
            }
            Ok(checks.to_vec())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(merge_sections(parts, &PAIR_NAMES))
}

const CHAIN_NAMES: [&str; 4] = ["chain_main", "chain_denominator_positive", "abc_hypotheses", "chain_phi_bound"];

/// For `a < a₀`, `r = r(a)` and feasible pairs, samples the main inequality
/// `(1+A)√(1+(u₁−u₂)²/4) ≤ |1−C²w₁w̄₂| − 2AB² − A²B²`, positivity of the
/// right-hand side, the `(α, β)` hypotheses and
/// `Φ(r) ≤ (C² − (α/8)(1+A(r₀)))(a²−u₁u₂)`.
pub fn check_chain(
    a_grid: &[f64],
    n: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<Vec<SampledCheck>> {
    check_grid(a_grid, reference::A0, false)?;
    let c = schwarz_christoffel_c();
    let c2 = c * c;
    let a_r0 = a_fn(reference::R0)?;
    let pos = pair_constants(reference::A0)?;
    let neg = (reference::ALPHA_NEG, reference::BETA_NEG);
    let parts = a_grid
        .par_iter()
        .enumerate()
        .map(|(i, &a)| {
            let r = r_of_a(a, tol)?;
            let (am, b) = (a_fn(r)?, b_integral(r)?);
            let phi = phi_fn(r)?;
            let loss = 2.0 * am * b * b + am * am * b * b;
            let mut checks = CHAIN_NAMES.map(SampledCheck::new);
            for (u1, u2) in sample_feasible_with(a, n, &mut stream_rng(seed, i as u64))? {
                let (d2, g) = ((u1 - u2).powi(2), a * a - u1 * u2);
                let w1 = Complex64::new(u1, -a);
                let w2 = Complex64::new(u2, a);
                let denom = (Complex64::new(1.0, 0.0) - c2 * w1 * w2.conj()).norm() - loss;
                let lhs = (1.0 + am) * (1.0 + d2 / 4.0).sqrt();
                checks[0].record(denom - lhs);
                checks[1].record(if denom > 0.0 { denom } else { -1.0 });
                let (alpha, beta) = if u1 * u2 >= 0.0 { pos } else { neg };
                checks[2].record((alpha * g - d2).min(g - beta * a * a));
                checks[3].record((c2 - alpha / 8.0 * (1.0 + a_r0)) * g - phi);
            }
            Ok(checks.to_vec())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(merge_sections(parts, &CHAIN_NAMES))
}

/// Samples `th(ρ_K(w₁,w₂)/2) ≤ C(1+A)|w₁−w₂| / (|1−C²w₁w̄₂| − 2AB² − A²B²)`
/// through the inverse conformal map.
pub fn check_distance_bound(
    a_grid: &[f64],
    n: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<SampledCheck> {
    check_grid(a_grid, reference::A0, false)?;
    let c = schwarz_christoffel_c();
    let parts = a_grid
        .par_iter()
        .enumerate()
        .map(|(i, &a)| {
            let r = r_of_a(a, tol)?;
            let (am, b) = (a_fn(r)?, b_integral(r)?);
            let loss = 2.0 * am * b * b + am * am * b * b;
            let mut check = SampledCheck::new("distance_bound");
            for (u1, u2) in sample_feasible_with(a, n, &mut stream_rng(seed, i as u64))? {
                let w1 = Complex64::new(u1, -a);
                let w2 = Complex64::new(u2, a);
                let th = th_half_rho_square(SquarePoint::new(w1)?, SquarePoint::new(w2)?, tol)?;
                let denom = (Complex64::new(1.0, 0.0) - c * c * w1 * w2.conj()).norm() - loss;
                let bound = c * (1.0 + am) * (w1 - w2).norm() / denom;
                // The hyperbolic side carries the inversion error.
                check.record(bound - th + 1e-10);
            }
            Ok(vec![check])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(merge_sections(parts, &["distance_bound"]).remove(0))
}

/// The constants of the inequality chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProofConstants {
    pub c: f64,
    pub c_lambda0: f64,
    pub r0: f64,
    /// `B(r₀)/(√2·C)` at the reference `r₀`.
    pub a0: f64,
    pub phi_ratio_at_r0: f64,
    pub alpha_pos: f64,
    pub beta_pos: f64,
    pub gamma_pos: f64,
    pub alpha_neg: f64,
    pub beta_neg: f64,
    pub gamma_neg: f64,
}

impl ProofConstants {
    /// `(α, β)` for same-sign pairs come from the reference `a₀`.
    pub fn compute() -> Result<Self> {
        let c = schwarz_christoffel_c();
        let (alpha_pos, beta_pos) = pair_constants(reference::A0)?;
        let (alpha_neg, beta_neg) = (reference::ALPHA_NEG, reference::BETA_NEG);
        Ok(Self {
            c,
            c_lambda0: elliptic_k(Modulus::new(std::f64::consts::FRAC_1_SQRT_2)?)?,
            r0: reference::R0,
            a0: a0_from_r0(reference::R0)?,
            phi_ratio_at_r0: phi_ratio(reference::R0)?,
            alpha_pos,
            beta_pos,
            gamma_pos: gamma_fn(alpha_pos, beta_pos)?,
            alpha_neg,
            beta_neg,
            gamma_neg: gamma_fn(alpha_neg, beta_neg)?,
        })
    }
}

/// Knobs for [`full_certify`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertifyConfig {
    pub seed: u64,
    pub grid: usize,
    pub samples: usize,
    /// Samples per grid value for the inverse-map check (every 5th grid value).
    pub bound_samples: usize,
}

impl Default for CertifyConfig {
    fn default() -> Self {
        Self { seed: 0, grid: 50, samples: 1000, bound_samples: 20 }
    }
}

/// Reference comparisons plus sampled inequality checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertReport {
    pub entries: Vec<CertEntry>,
    pub sampled: Vec<SampledCheck>,
    pub notes: Vec<String>,
}

impl CertReport {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.pass) && self.sampled.iter().all(|s| s.passed())
    }

    pub fn entry(&self, name: &str) -> Option<&CertEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    pub fn check(&self, name: &str) -> Option<&SampledCheck> {
        self.sampled.iter().find(|s| s.name == name)
    }
}

/// `n` evenly spaced points of `[lo, hi]`.
pub fn uniform_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

fn grid_check(name: &str, xs: &[f64], margin: impl Fn(f64) -> Result<f64>) -> Result<SampledCheck> {
    let mut check = SampledCheck::new(name);
    for &x in xs {
        check.record(margin(x)?);
    }
    Ok(check)
}

fn monotone_check(
    name: &str,
    xs: &[f64],
    f: impl Fn(f64) -> Result<f64>,
    increasing: bool,
) -> Result<SampledCheck> {
    let values = xs.iter().map(|&x| f(x)).collect::<Result<Vec<_>>>()?;
    let mut check = SampledCheck::new(name);
    for w in values.windows(2) {
        let step = if increasing { w[1] - w[0] } else { w[0] - w[1] };
        // Strict: a flat step counts as a violation.
        check.record(if step > 0.0 { step } else { -1.0 });
    }
    Ok(check)
}

/// Every constant and sampled inequality of the chain in one report.
pub fn full_certify(cfg: &CertifyConfig, tol: &Tolerances) -> Result<CertReport> {
    let k = ProofConstants::compute()?;
    let lambda0 = Modulus::new(LAMBDA_0)?;
    let centre = local_limit(SquarePoint::from_xy(0.0, 0.0)?, tol)?;
    let r_of_a0 = r_of_a(reference::A0, tol)?;

    let entries = vec![
        CertEntry::new("C", k.c, reference::C, 1e-6),
        CertEntry::new("C_lambda0", k.c_lambda0, reference::C_LAMBDA0, 1e-8),
        CertEntry::new("rect_constant_lambda0", rect_constant(lambda0)?, reference::C_LAMBDA0, 1e-6),
        CertEntry::new("C_lambda0_minus_2C", k.c_lambda0 - 2.0 * k.c, 0.0, 1e-9),
        CertEntry::new("local_limit_center", centre, reference::C_LAMBDA0, 1e-6),
        CertEntry::new("a0", k.a0, reference::A0, PRINTED_TOL),
        CertEntry::new("r_of_a0", r_of_a0, reference::R0, PRINTED_TOL),
        CertEntry::new("phi_ratio_at_r0", k.phi_ratio_at_r0, reference::PHI_RATIO_AT_R0, PRINTED_TOL),
        CertEntry::new("alpha_pos", k.alpha_pos, reference::ALPHA_POS, PRINTED_TOL),
        CertEntry::new("beta_pos", k.beta_pos, reference::BETA_POS, PRINTED_TOL),
        CertEntry::new("gamma_pos", k.gamma_pos, reference::GAMMA_POS, PRINTED_TOL),
        CertEntry::new("alpha_neg", k.alpha_neg, reference::ALPHA_NEG, PRINTED_TOL),
        CertEntry::new("beta_neg", k.beta_neg, reference::BETA_NEG, PRINTED_TOL),
        CertEntry::new("gamma_neg", k.gamma_neg, reference::GAMMA_NEG, PRINTED_TOL),
    ];

    let r0 = reference::R0;
    let f_grid = uniform_grid(0.01, 0.99, 1000);
    let above_r0: Vec<f64> = f_grid.iter().copied().filter(|&r| r > r0).collect();
    let to_r0 = uniform_grid(r0 / 100.0, r0, 100);
    let gamma_min = k.gamma_pos.min(k.gamma_neg);
    let mut sampled = vec![
        monotone_check("F_strictly_decreasing", &f_grid, f_fn, false)?,
        grid_check("F_r0_below_one", &[r0], |r| Ok(1.0 - f_fn(r)?))?,
        grid_check("F_below_one_above_r0", &above_r0, |r| Ok(1.0 - f_fn(r)?))?,
        grid_check("2C_F_below_C_lambda0_above_r0", &above_r0, |r| {
            Ok(k.c_lambda0 - 2.0 * k.c * f_fn(r)?)
        })?,
        monotone_check("phi_ratio_increasing_to_r0", &to_r0, phi_ratio, true)?,
        monotone_check("phi_increasing_to_r0", &to_r0, phi_fn, true)?,
        grid_check("gamma_exceeds_phi_ratio_to_r0", &to_r0, |r| Ok(gamma_min - phi_ratio(r)?))?,
        grid_check("gamma_exceeds_reference_phi_ratio", &[k.gamma_pos, k.gamma_neg], |g| {
            Ok(g - reference::PHI_RATIO_AT_R0)
        })?,
    ];

    let pair_grid = uniform_grid(reference::A0 / cfg.grid as f64, reference::A0, cfg.grid);
    let chain_grid = uniform_grid(0.01, 0.48, cfg.grid);
    sampled.extend(check_pair_bounds(&pair_grid, cfg.samples, cfg.seed)?);
    sampled.extend(check_chain(&chain_grid, cfg.samples, cfg.seed, tol)?);
    if cfg.bound_samples > 0 {
        let sub: Vec<f64> = chain_grid.iter().copied().step_by(5).collect();
        sampled.push(check_distance_bound(&sub, cfg.bound_samples, cfg.seed, tol)?);
    }

    let notes = vec![
        format!(
            "gamma grouping: beta*(C^2 - (alpha/8)*(1+A(r0)))/(2C^2); the reading \
             beta*(C^2 - alpha/(8*(1+A(r0))))/(2C^2) gives {:.6} and {:.6}",
            gamma_alt_grouping(k.alpha_pos, k.beta_pos)?,
            gamma_alt_grouping(k.alpha_neg, k.beta_neg)?
        ),
        format!(
            "F decreases from sqrt(2) at r=0; F(r0) = {:.9}, root of F = 1 near r0",
            f_fn(r0)?
        ),
        format!(
            "phi_ratio(r0) = {:.7} stays below min(gamma) = {:.6}",
            k.phi_ratio_at_r0, gamma_min
        ),
    ];
    Ok(CertReport { entries, sampled, notes })
}
