use hypersq::analysis::{sharp_constant, RATIO_UPPER_SLACK};
use hypersq::conformal::forward_map;
use hypersq::smetric::{boundary_detour, canonicalize, TIE_TOL};
use hypersq::{
    classify_region, conformal_radius, full_certify, inverse_map, local_limit, maximize_ratio,
    rho_square, s_metric, verify_theorem, CertifyConfig, Complex64, DiscPoint, SquarePoint,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::output::{fmt_f, open, write_csv, write_json};
use crate::{CliError, Common, Direction, Format};

#[derive(Serialize)]
struct DistRecord {
    x: Complex64,
    y: Complex64,
    s: f64,
    th_half: f64,
    rho: f64,
    ratio: f64,
    local_limit: f64,
    /// Region of `y` after moving `x` into triangle AOD.
    region: String,
    /// Side realising the boundary detour, in the original frame.
    side: String,
}

pub fn dist(c: &Common, x: Complex64, y: Complex64) -> Result<bool, CliError> {
    let tol = c.tolerances()?;
    let (x, y) = (SquarePoint::new(x)?, SquarePoint::new(y)?);
    x.require_interior()?;
    y.require_interior()?;
    let limit = local_limit(x, &tol)?;
    let d = rho_square(x, y, &tol)?;
    let s = s_metric(x, y);
    let ratio = if x == y { limit } else { d.th_half / s };
    let (cx, cy, _) = canonicalize(x, y);
    let region = classify_region(cx, cy, TIE_TOL)?;
    let (_, side) = boundary_detour(x, y);
    let rec = DistRecord {
        x: x.w(),
        y: y.w(),
        s,
        th_half: d.th_half,
        rho: d.rho,
        ratio,
        local_limit: limit,
        region: region.to_string(),
        side: side.to_string(),
    };
    let mut out = open(c.output.as_deref())?;
    match c.format.unwrap_or(Format::Csv) {
        Format::Json => write_json(&mut out, &rec)?,
        Format::Csv => write_csv(
            &mut out,
            &["x_re", "x_im", "y_re", "y_im", "s", "th_half", "rho", "ratio", "local_limit", "region", "side"],
            [vec![
                fmt_f(rec.x.re),
                fmt_f(rec.x.im),
                fmt_f(rec.y.re),
                fmt_f(rec.y.im),
                fmt_f(rec.s),
                fmt_f(rec.th_half),
                fmt_f(rec.rho),
                fmt_f(rec.ratio),
                fmt_f(rec.local_limit),
                rec.region,
                rec.side,
            ]],
        )?,
    }
    Ok(true)
}

#[derive(Serialize)]
struct SweepRow {
    re: f64,
    im: f64,
    local_limit: f64,
    conformal_radius: f64,
}

#[derive(Serialize)]
struct SweepReport {
    grid: usize,
    rows: Vec<SweepRow>,
}

pub fn sweep(c: &Common) -> Result<bool, CliError> {
    let tol = c.tolerances()?;
    let n = c.grid_or(33)?;
    let coord = |i: usize| -1.0 + 2.0 * (i + 1) as f64 / (n + 1) as f64;
    let rows = (0..n * n)
        .into_par_iter()
        .map(|k| {
            let (re, im) = (coord(k % n), coord(k / n));
            let x = SquarePoint::from_xy(re, im)?;
            let r = conformal_radius(x, &tol)?;
            Ok(SweepRow { re, im, local_limit: 2.0 * x.boundary_distance() / r, conformal_radius: r })
        })
        .collect::<Result<Vec<_>, hypersq::Error>>()?;
    let mut out = open(c.output.as_deref())?;
    match c.format.unwrap_or(Format::Csv) {
        Format::Json => write_json(&mut out, &SweepReport { grid: n, rows })?,
        Format::Csv => write_csv(
            &mut out,
            &["re", "im", "local_limit", "conformal_radius"],
            rows.iter().map(|r| {
                vec![fmt_f(r.re), fmt_f(r.im), fmt_f(r.local_limit), fmt_f(r.conformal_radius)]
            }),
        )?,
    }
    Ok(true)
}

pub fn maximize(c: &Common, refine: usize) -> Result<bool, CliError> {
    let tol = c.tolerances()?;
    let report = maximize_ratio(c.grid_or(32)?, refine, c.seed, &tol)?;
    let bound = sharp_constant() + RATIO_UPPER_SLACK;
    let ok = report.structured.ratio <= bound
        && report.unstructured.ratio <= bound
        && report.structured.ratio >= report.unstructured.ratio - 1e-6;
    eprintln!(
        "maximize: structured {:.12} unstructured {:.12} C(λ₀) {:.12} evaluations {}",
        report.structured.ratio,
        report.unstructured.ratio,
        sharp_constant(),
        report.evaluations
    );
    let mut out = open(c.output.as_deref())?;
    match c.format.unwrap_or(Format::Csv) {
        Format::Json => write_json(&mut out, &report)?,
        Format::Csv => {
            let row = |name: &str, s: &hypersq::RatioSample| {
                vec![
                    name.to_string(),
                    fmt_f(s.ratio),
                    fmt_f(s.x.re()),
                    fmt_f(s.x.im()),
                    fmt_f(s.y.re()),
                    fmt_f(s.y.im()),
                    fmt_f(s.s),
                    fmt_f(s.th_half),
                ]
            };
            write_csv(
                &mut out,
                &["search", "ratio", "x_re", "x_im", "y_re", "y_im", "s", "th_half"],
                [row("structured", &report.structured), row("unstructured", &report.unstructured)],
            )?
        }
    }
    Ok(ok)
}

pub fn verify(c: &Common) -> Result<bool, CliError> {
    let tol = c.tolerances()?;
    let report = verify_theorem(c.n_or(100_000)?, c.seed, &tol)?;
    let (min, max) = (
        report.min.map_or(f64::NAN, |s| s.ratio),
        report.max.map_or(f64::NAN, |s| s.ratio),
    );
    eprintln!(
        "verify: n={} evaluated={} errors={} violations={} min={:.12} max={:.12} {}",
        report.n_pairs,
        report.evaluated,
        report.errors,
        report.violations,
        min,
        max,
        if report.passed() { "PASS" } else { "FAIL" }
    );
    let mut out = open(c.output.as_deref())?;
    match c.format.unwrap_or(Format::Csv) {
        Format::Json => write_json(&mut out, &report)?,
        Format::Csv => write_csv(
            &mut out,
            &["n", "evaluated", "errors", "violations", "min_ratio", "max_ratio", "lower_bound", "upper_bound", "pass"],
            [vec![
                report.n_pairs.to_string(),
                report.evaluated.to_string(),
                report.errors.to_string(),
                report.violations.to_string(),
                fmt_f(min),
                fmt_f(max),
                fmt_f(report.lower_bound),
                fmt_f(report.upper_bound),
                report.passed().to_string(),
            ]],
        )?,
    }
    Ok(report.passed())
}

#[derive(Serialize)]
struct EntryOut<'a> {
    name: &'a str,
    computed: f64,
    reference: f64,
    tol: f64,
    pass: bool,
}

#[derive(Serialize)]
struct SampledOut<'a> {
    name: &'a str,
    n: usize,
    violations: usize,
    min_margin: f64,
    pass: bool,
}

#[derive(Serialize)]
struct CertOut<'a> {
    pass: bool,
    entries: Vec<EntryOut<'a>>,
    sampled: Vec<SampledOut<'a>>,
    notes: &'a [String],
}

pub fn certify(c: &Common) -> Result<bool, CliError> {
    let tol = c.tolerances()?;
    let defaults = CertifyConfig::default();
    let cfg = CertifyConfig {
        seed: c.seed,
        grid: c.grid.map_or(Ok(defaults.grid), |_| c.grid_or(defaults.grid))?,
        samples: c.n_or(defaults.samples)?,
        ..defaults
    };
    let report = full_certify(&cfg, &tol)?;
    let body = CertOut {
        pass: report.passed(),
        entries: report
            .entries
            .iter()
            .map(|e| EntryOut { name: &e.name, computed: e.computed, reference: e.reference, tol: e.abs_tol, pass: e.pass })
            .collect(),
        sampled: report
            .sampled
            .iter()
            .map(|s| SampledOut {
                name: &s.name,
                n: s.samples,
                violations: s.violations,
                min_margin: s.min_margin,
                pass: s.passed(),
            })
            .collect(),
        notes: &report.notes,
    };
    for e in body.entries.iter().filter(|e| !e.pass) {
        eprintln!("certify: entry {} computed {:.9} expected {} ± {:e}: FAIL", e.name, e.computed, e.reference, e.tol);
    }
    for s in body.sampled.iter().filter(|s| !s.pass) {
        eprintln!("certify: check {} has {} violations in {} samples: FAIL", s.name, s.violations, s.n);
    }
    let mut out = open(c.output.as_deref())?;
    match c.format.unwrap_or(Format::Json) {
        Format::Json => write_json(&mut out, &body)?,
        Format::Csv => {
            let entries = body.entries.iter().map(|e| {
                vec![
                    "entry".into(),
                    e.name.to_string(),
                    fmt_f(e.computed),
                    fmt_f(e.reference),
                    fmt_f(e.tol),
                    String::new(),
                    String::new(),
                    e.pass.to_string(),
                ]
            });
            let sampled = body.sampled.iter().map(|s| {
                vec![
                    "sampled".into(),
                    s.name.to_string(),
                    fmt_f(s.min_margin),
                    String::new(),
                    String::new(),
                    s.n.to_string(),
                    s.violations.to_string(),
                    s.pass.to_string(),
                ]
            });
            write_csv(
                &mut out,
                &["kind", "name", "computed", "reference", "tol", "n", "violations", "pass"],
                entries.chain(sampled),
            )?
        }
    }
    Ok(body.pass)
}

#[derive(Serialize)]
struct MapRecord {
    direction: &'static str,
    input: Complex64,
    image: Complex64,
    residual: f64,
}

pub fn map(c: &Common, direction: Direction, point: Complex64) -> Result<bool, CliError> {
    let tol = c.tolerances()?;
    let rec = match direction {
        Direction::Fwd => {
            let z = DiscPoint::new(point)?;
            let w = forward_map(z, &tol)?;
            let residual = if w.boundary_distance() > 0.0 {
                (inverse_map(w, &tol)?.z() - point).norm()
            } else {
                0.0
            };
            MapRecord { direction: "fwd", input: point, image: w.w(), residual }
        }
        Direction::Inv => {
            let w = SquarePoint::new(point)?;
            let z = inverse_map(w, &tol)?;
            let residual = (forward_map(z, &tol)?.w() - point).norm();
            MapRecord { direction: "inv", input: point, image: z.z(), residual }
        }
    };
    let mut out = open(c.output.as_deref())?;
    match c.format.unwrap_or(Format::Csv) {
        Format::Json => write_json(&mut out, &rec)?,
        Format::Csv => write_csv(
            &mut out,
            &["direction", "in_re", "in_im", "out_re", "out_im", "residual"],
            [vec![
                rec.direction.to_string(),
                fmt_f(rec.input.re),
                fmt_f(rec.input.im),
                fmt_f(rec.image.re),
                fmt_f(rec.image.im),
                fmt_f(rec.residual),
            ]],
        )?,
    }
    Ok(true)
}
