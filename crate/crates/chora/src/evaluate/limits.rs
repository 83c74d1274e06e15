//! Numerical laboratory for the limit statements: convergence scans,
//! identity suites, tangent operations, the R3 residue and Pansu
//! derivatives.

use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use super::{io_function, EvalError};
use crate::diagram::Diagram;
use crate::models::{coord_gap, Homeo, HomeoRegistry, Model, Point};
use crate::scale::{ScaleBinding, ScaleExpr};
use crate::terms::{ColorTerm, PointBinding};

/// Exact affine identities.
pub const TOL_EXACT: f64 = 1e-12;
/// Group laws and exponential charts.
pub const TOL_GROUP: f64 = 1e-9;
/// Statements about limits.
pub const TOL_LIMIT: f64 = 1e-6;

/// Scale at which tangent operations and derivative limits are estimated.
pub const TANGENT_EPS: f64 = 1.0 / (1u64 << 26) as f64;

const FIT_WINDOW: usize = 8;
/// Steps skipped before the window when the last step serves as the limit.
const REFERENCE_GAP: usize = 4;
const DIVERGENCE_RUN: usize = 4;
const NOISE: f64 = 1e-9;
const MIN_SLOPE: f64 = 0.9;

/// `2^-k` for `k` in `k0..=k1`.
pub fn dyadic_schedule(k0: u32, k1: u32) -> Vec<f64> {
    (k0..=k1).map(|k| 0.5f64.powi(k as i32)).collect()
}

/// `2^-k` for `k = 1..16`.
pub fn default_schedule() -> Vec<f64> {
    dyadic_schedule(1, 16)
}

pub fn geometric_schedule(from: f64, factor: f64, steps: usize) -> Vec<f64> {
    (0..steps).map(|i| from * factor.powi(i as i32)).collect()
}

fn check_schedule(s: &[f64]) -> Result<(), EvalError> {
    if s.len() < 2 {
        return Err(EvalError::Invalid("a schedule needs at least two scales".into()));
    }
    if s.iter().any(|e| !(e.is_finite() && *e > 0.0)) || s.windows(2).any(|w| w[1] >= w[0]) {
        return Err(EvalError::Invalid("schedule must be positive and strictly decreasing".into()));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport {
    pub name: String,
    pub scales: Vec<f64>,
    pub sup_errors: Vec<f64>,
    /// Log-log slope over the fit window; `None` when the errors vanish.
    pub slope: Option<f64>,
    pub pass: bool,
}

impl ConvergenceReport {
    pub fn to_json(&self) -> Value {
        json!({
            "name": self.name,
            "scales": self.scales,
            "supErrors": self.sup_errors,
            "slope": self.slope,
            "pass": self.pass,
        })
    }

    pub fn max_error(&self) -> f64 {
        self.sup_errors.iter().copied().fold(0.0, f64::max)
    }

    /// True when the errors never increase beyond noise.
    pub fn is_monotone(&self) -> bool {
        self.sup_errors.windows(2).all(|w| w[1] <= w[0] || w[1] <= NOISE)
    }
}

/// Least-squares slope of `ln err` against `ln eps`, skipping zero errors.
pub fn fit_slope(scales: &[f64], errs: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = scales
        .iter()
        .zip(errs)
        .filter(|(_, e)| **e > 0.0 && e.is_finite())
        .map(|(s, e)| (s.ln(), e.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn divergence(errs: &[f64]) -> Option<usize> {
    let mut run = 0;
    for w in errs.windows(2) {
        if w[1] > w[0] && w[1] > NOISE {
            run += 1;
            if run >= DIVERGENCE_RUN {
                return Some(run);
            }
        } else {
            run = 0;
        }
    }
    None
}

/// Scans a family of sampled values along a schedule.
///
/// `at(eps)` returns one point per sample. Errors are measured against
/// `limit` when given, otherwise against the values at the last scale; in
/// that case the fit window ends a few steps before the last scale.
pub fn scan_fn(
    name: &str,
    schedule: &[f64],
    mut at: impl FnMut(f64) -> Result<Vec<Point>, EvalError>,
    limit: Option<&[Point]>,
) -> Result<ConvergenceReport, EvalError> {
    check_schedule(schedule)?;
    let values = schedule.iter().map(|e| at(*e)).collect::<Result<Vec<_>, _>>()?;
    let reference: &[Point] = match limit {
        Some(l) => l,
        None => values.last().unwrap(),
    };
    let sup_errors: Vec<f64> = values
        .iter()
        .map(|vals| {
            vals.iter()
                .zip(reference)
                .map(|(p, q)| coord_gap(p, q))
                .fold(0.0, f64::max)
        })
        .collect();
    if let Some(run) = divergence(&sup_errors) {
        return Err(EvalError::DivergenceDetected(run));
    }
    let n = schedule.len();
    let end = if limit.is_some() { n } else { n.saturating_sub(REFERENCE_GAP).max(1) };
    let start = end.saturating_sub(FIT_WINDOW);
    let window = &sup_errors[start..end];
    let slope = fit_slope(&schedule[start..end], window);
    let negligible = window.iter().all(|e| *e <= NOISE);
    let pass = negligible || slope.is_some_and(|s| s >= MIN_SLOPE);
    Ok(ConvergenceReport {
        name: name.to_string(),
        scales: schedule.to_vec(),
        sup_errors,
        slope,
        pass,
    })
}

/// Sampling region for checks: inputs within `radius` of the model origin.
#[derive(Clone, Copy, Debug)]
pub struct SampleSpec {
    pub count: usize,
    pub seed: u64,
    pub radius: f64,
}

impl SampleSpec {
    pub fn new(model: Model, count: usize, seed: u64) -> Self {
        SampleSpec {
            count,
            seed,
            radius: model.default_radius(),
        }
    }
}

/// Convergence of a diagram's io-function as the scale variable `var`
/// runs through `schedule`; the remaining scale variables come from `fixed`.
pub fn converge_scan(
    d: &Diagram,
    model: Model,
    var: &str,
    schedule: &[f64],
    fixed: &ScaleBinding,
    spec: SampleSpec,
) -> Result<ConvergenceReport, EvalError> {
    if !d.scales.contains_key(var) {
        return Err(EvalError::Invalid(format!("`{var}` is not a scale variable of `{}`", d.name)));
    }
    let homeos = HomeoRegistry::standard();
    let mut probe = fixed.clone();
    probe.insert(var.to_string(), schedule.first().copied().unwrap_or(0.5));
    let names = io_function(d, model, &probe, &homeos)?.input_names().to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let inputs: Vec<PointBinding> = (0..spec.count)
        .map(|_| names.iter().map(|n| (n.clone(), model.sample_ball(&mut rng, spec.radius))).collect())
        .collect();
    scan_fn(
        &format!("{}:{var}", d.name),
        schedule,
        |e| {
            let mut sc = fixed.clone();
            sc.insert(var.to_string(), e);
            let f = io_function(d, model, &sc, &homeos)?;
            inputs
                .iter()
                .map(|p| Ok(f.call(p)?.into_values().flatten().collect()))
                .collect()
        },
        None,
    )
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub max_error: f64,
    pub tol: f64,
    pub pass: bool,
}

impl Check {
    fn new(name: &str, max_error: f64, tol: f64) -> Self {
        Check {
            name: name.to_string(),
            max_error,
            tol,
            pass: max_error <= tol,
        }
    }

    pub fn to_json(&self) -> Value {
        json!({"name": self.name, "maxError": self.max_error, "tol": self.tol, "pass": self.pass})
    }
}

fn checks_json(cs: &[Check]) -> Value {
    Value::Array(cs.iter().map(Check::to_json).collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct IdentityReport {
    pub model: Model,
    pub samples: usize,
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl IdentityReport {
    pub fn to_json(&self) -> Value {
        json!({
            "model": self.model.to_string(),
            "samples": self.samples,
            "identities": checks_json(&self.checks),
            "pass": self.pass,
        })
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Default tolerance of the identity suite for a model.
pub fn identity_tol(model: Model) -> f64 {
    match model {
        Model::Euclid(_) => TOL_EXACT,
        _ => TOL_GROUP,
    }
}

/// Sampling radius and scale range of the identity suite. On the sphere the
/// cap and scales keep every bullet inside the injectivity radius.
pub fn identity_domain(model: Model) -> (f64, f64, f64) {
    match model {
        Model::Euclid(_) => (1.0, 0.1, 10.0),
        Model::Heis1 => (1.0, 0.1, 4.0),
        Model::Sphere => (0.25, 0.3, 0.9),
    }
}

pub const AXIOMS: [&str; 5] = ["idempotence", "cancel-bullet-circ", "cancel-circ-bullet", "composition", "unit-scale"];
pub const PROP_ITEMS: [&str; 7] = ["a", "b", "c", "d", "e", "f", "g"];

fn log_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo.ln()..=hi.ln()).exp()
}

/// The irq axioms and the difference/sum/inverse relations (a)-(g) at
/// sampled points and scales.
pub fn check_identities(model: Model, samples: usize, tol: f64, seed: u64) -> Result<IdentityReport, EvalError> {
    let (r, lo, hi) = identity_domain(model);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names: Vec<&str> = AXIOMS.iter().chain(&PROP_ITEMS).copied().collect();
    let mut worst = vec![0.0f64; names.len()];
    let m = &model;
    for _ in 0..samples {
        let (x, u, v, w) = (
            m.sample_ball(&mut rng, r),
            m.sample_ball(&mut rng, r),
            m.sample_ball(&mut rng, r),
            m.sample_ball(&mut rng, r),
        );
        let (e, mu) = (log_uniform(&mut rng, lo, hi), log_uniform(&mut rng, lo, hi));
        let sum = |b: &[f64], p: &[f64], q: &[f64]| m.approx_sum(e, b, p, q);
        let dif = |b: &[f64], p: &[f64], q: &[f64]| m.approx_difference(e, b, p, q);
        let inv = |b: &[f64], p: &[f64]| m.approx_inverse(e, b, p);
        let xu = m.circ(e, &x, &u)?;
        let errs = [
            coord_gap(&m.circ(e, &x, &x)?, &x),
            coord_gap(&m.bullet(e, &x, &xu)?, &u),
            coord_gap(&m.circ(e, &x, &m.bullet(e, &x, &u)?)?, &u),
            coord_gap(&m.circ(e, &x, &m.circ(mu, &x, &u)?)?, &m.circ(e * mu, &x, &u)?),
            coord_gap(&m.circ(1.0, &x, &u)?, &u),
            coord_gap(&dif(&x, &u, &sum(&x, &u, &v)?)?, &v),
            coord_gap(&sum(&x, &u, &dif(&x, &u, &v)?)?, &v),
            coord_gap(&dif(&x, &u, &v)?, &sum(&xu, &inv(&x, &u)?, &v)?),
            coord_gap(&inv(&xu, &inv(&x, &u)?)?, &u),
            coord_gap(&sum(&x, &u, &sum(&xu, &v, &w)?)?, &sum(&x, &sum(&x, &u, &v)?, &w)?),
            coord_gap(&inv(&x, &u)?, &dif(&x, &u, &x)?),
            coord_gap(&sum(&x, &x, &u)?, &u),
        ];
        for (k, e) in errs.iter().enumerate() {
            worst[k] = worst[k].max(*e);
        }
    }
    let checks: Vec<Check> = names.iter().zip(&worst).map(|(n, e)| Check::new(n, *e, tol)).collect();
    Ok(IdentityReport {
        model,
        samples,
        pass: checks.iter().all(|c| c.pass),
        checks,
    })
}

fn sym_sum(e: &ScaleExpr, x: &ColorTerm, u: &ColorTerm, v: &ColorTerm) -> ColorTerm {
    ColorTerm::bullet(
        e.clone(),
        x.clone(),
        ColorTerm::circ(e.clone(), ColorTerm::circ(e.clone(), x.clone(), u.clone()), v.clone()),
    )
}

fn sym_dif(e: &ScaleExpr, x: &ColorTerm, u: &ColorTerm, v: &ColorTerm) -> ColorTerm {
    ColorTerm::bullet(
        e.clone(),
        ColorTerm::circ(e.clone(), x.clone(), u.clone()),
        ColorTerm::circ(e.clone(), x.clone(), v.clone()),
    )
}

fn sym_inv(e: &ScaleExpr, x: &ColorTerm, u: &ColorTerm) -> ColorTerm {
    ColorTerm::bullet(e.clone(), ColorTerm::circ(e.clone(), x.clone(), u.clone()), x.clone())
}

/// The relations (a)-(g) as pairs of color terms in variables `x, u, v, w`
/// at the scale `eps`.
pub fn identity_terms() -> Vec<(&'static str, ColorTerm, ColorTerm)> {
    let e = ScaleExpr::var("eps");
    let [x, u, v, w] = ["x", "u", "v", "w"].map(ColorTerm::var);
    let xu = ColorTerm::circ(e.clone(), x.clone(), u.clone());
    vec![
        ("a", sym_dif(&e, &x, &u, &sym_sum(&e, &x, &u, &v)), v.clone()),
        ("b", sym_sum(&e, &x, &u, &sym_dif(&e, &x, &u, &v)), v.clone()),
        ("c", sym_dif(&e, &x, &u, &v), sym_sum(&e, &xu, &sym_inv(&e, &x, &u), &v)),
        ("d", sym_inv(&e, &xu, &sym_inv(&e, &x, &u)), u.clone()),
        (
            "e",
            sym_sum(&e, &x, &u, &sym_sum(&e, &xu, &v, &w)),
            sym_sum(&e, &x, &sym_sum(&e, &x, &u, &v), &w),
        ),
        ("f", sym_inv(&e, &x, &u), sym_dif(&e, &x, &u, &x)),
        ("g", sym_sum(&e, &x, &x, &u), u),
    ]
}

/// Which of the relations (a)-(g) the term normalizer proves.
pub fn symbolic_identities() -> Vec<(&'static str, bool)> {
    identity_terms().into_iter().map(|(n, a, b)| (n, a.equal_modulo(&b))).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct TangentReport {
    pub model: Model,
    pub scale: f64,
    pub scan: ConvergenceReport,
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl TangentReport {
    pub fn to_json(&self) -> Value {
        json!({
            "model": self.model.to_string(),
            "scale": self.scale,
            "scan": self.scan.to_json(),
            "checks": checks_json(&self.checks),
            "pass": self.pass,
        })
    }
}

/// Radius of the region sampled around the base point by tangent checks.
fn tangent_radius(model: Model) -> f64 {
    model.default_radius().min(0.5)
}

/// Group structure of the limit operations at `x`, estimated at the
/// smallest scale of `schedule`: right neutral element, inverse,
/// associativity and the dilation morphism property.
pub fn tangent_group_check(
    model: Model,
    x: &[f64],
    samples: usize,
    schedule: &[f64],
    seed: u64,
) -> Result<TangentReport, EvalError> {
    check_schedule(schedule)?;
    let m = &model;
    let e = *schedule.last().unwrap();
    let r = tangent_radius(model);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<[Point; 3]> = (0..samples)
        .map(|_| [0; 3].map(|_| m.sample_ball(&mut rng, r)))
        .collect();
    let scan = scan_fn(
        &format!("{model}:sum"),
        schedule,
        |s| pts.iter().map(|[u, v, _]| Ok(m.approx_sum(s, x, u, v)?)).collect(),
        None,
    )?;
    let sum = |p: &[f64], q: &[f64]| m.approx_sum(e, x, p, q);
    let mu = 0.5;
    let mut worst = [0.0f64; 4];
    for [u, v, w] in &pts {
        let inv = m.approx_difference(e, x, u, x)?;
        let errs = [
            coord_gap(&sum(x, u)?, u),
            coord_gap(&sum(u, &inv)?, x),
            coord_gap(&sum(&sum(u, v)?, w)?, &sum(u, &sum(v, w)?)?),
            coord_gap(&m.circ(mu, x, &sum(u, v)?)?, &sum(&m.circ(mu, x, u)?, &m.circ(mu, x, v)?)?),
        ];
        for (k, e) in errs.iter().enumerate() {
            worst[k] = worst[k].max(*e);
        }
    }
    let checks: Vec<Check> = ["neutral", "inverse", "associativity", "dilation-morphism"]
        .iter()
        .zip(worst)
        .map(|(n, e)| Check::new(n, e, TOL_LIMIT))
        .collect();
    Ok(TangentReport {
        model,
        scale: e,
        pass: scan.pass && checks.iter().all(|c| c.pass),
        scan,
        checks,
    })
}

/// The residue diagram of the approximate R3 move on the standard site,
/// with scale variables `eps`, `mu`, `lam` and inputs `x, u, v, w`.
pub fn residue_diagram() -> &'static Diagram {
    static CELL: OnceLock<Diagram> = OnceLock::new();
    CELL.get_or_init(|| {
        let site = crate::rewrite::build_r3_site();
        crate::rewrite::approx_r3(&site, 0).expect("standard R3 site").1.diagram
    })
}

/// Seeded `(u, v, w)` triples within `radius` of the model origin.
pub fn residue_samples(model: Model, count: usize, seed: u64, radius: f64) -> Vec<[Point; 3]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| [0; 3].map(|_| model.sample_ball(&mut rng, radius))).collect()
}

/// Distance of the residue `R^x_{eps mu lam}(u, v) w` from `w` along the
/// schedule, as a sup over the given triples.
pub fn residue_convergence(
    model: Model,
    x: &[f64],
    triples: &[[Point; 3]],
    mu: f64,
    lam: f64,
    schedule: &[f64],
) -> Result<ConvergenceReport, EvalError> {
    let d = residue_diagram();
    let homeos = HomeoRegistry::new();
    let limit: Vec<Point> = triples.iter().map(|t| t[2].clone()).collect();
    let mut report = scan_fn(
        &format!("{model}:residue"),
        schedule,
        |e| {
            let sc: ScaleBinding = [("eps", e), ("mu", mu), ("lam", lam)]
                .iter()
                .map(|(k, v)| (k.to_string(), *v))
                .collect();
            let f = io_function(d, model, &sc, &homeos)?;
            triples
                .iter()
                .map(|[u, v, w]| {
                    let pts: PointBinding = [("x", x), ("u", u), ("v", v), ("w", w)]
                        .iter()
                        .map(|(k, p)| (k.to_string(), p.to_vec()))
                        .collect();
                    Ok(f.call(&pts)?.remove("out").expect("residue output"))
                })
                .collect()
        },
        Some(&limit),
    )?;
    report.pass = report.max_error() <= TOL_GROUP || (report.pass && report.is_monotone());
    Ok(report)
}

/// `D_eps f(x) u = f(x) bullet_eps f(x circ_eps u)`.
pub fn pansu_finite_difference(f: &Homeo, x: &[f64], u: &[f64], eps: f64) -> Result<Point, EvalError> {
    let y = f.apply(x);
    let z = f.apply(&f.source.circ(eps, x, u)?);
    Ok(f.target.bullet(eps, &y, &z)?)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PansuReport {
    pub scan: ConvergenceReport,
    /// The finite difference at the smallest scale.
    pub estimate: Point,
    pub morphism: Vec<Check>,
    pub pass: bool,
}

impl PansuReport {
    pub fn to_json(&self) -> Value {
        json!({
            "scan": self.scan.to_json(),
            "estimate": self.estimate,
            "morphism": checks_json(&self.morphism),
            "pass": self.pass,
        })
    }
}

/// Finite differences of `f` at `x` in direction `u` along the schedule,
/// and conical-group morphism checks of the derivative estimated at
/// [`TANGENT_EPS`] on seeded directions.
pub fn pansu_derivative(
    f: &Homeo,
    x: &[f64],
    u: &[f64],
    schedule: &[f64],
    samples: usize,
    seed: u64,
) -> Result<PansuReport, EvalError> {
    let scan = scan_fn(
        &format!("pansu:{}", f.name),
        schedule,
        |e| Ok(vec![pansu_finite_difference(f, x, u, e)?]),
        None,
    )?;
    let estimate = pansu_finite_difference(f, x, u, *schedule.last().unwrap())?;
    let (src, tgt, e) = (f.source, f.target, TANGENT_EPS);
    let y = f.apply(x);
    let lin = |v: &[f64]| pansu_finite_difference(f, x, v, e);
    let r = tangent_radius(src);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mu = 0.5;
    let (mut add, mut dil) = (0.0f64, 0.0f64);
    for _ in 0..samples {
        let (v, w) = (src.sample_ball(&mut rng, r), src.sample_ball(&mut rng, r));
        let lhs = lin(&src.approx_sum(e, x, &v, &w)?)?;
        let rhs = tgt.approx_sum(e, &y, &lin(&v)?, &lin(&w)?)?;
        add = add.max(coord_gap(&lhs, &rhs));
        dil = dil.max(coord_gap(&lin(&src.circ(mu, x, &v)?)?, &tgt.circ(mu, &y, &lin(&v)?)?));
    }
    let morphism = vec![Check::new("additivity", add, TOL_LIMIT), Check::new("dilations", dil, TOL_LIMIT)];
    Ok(PansuReport {
        pass: scan.pass && morphism.iter().all(|c| c.pass),
        scan,
        estimate,
        morphism,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearityWitness {
    pub eps: f64,
    pub mu: f64,
    pub x: Point,
    pub u: Point,
    pub v: Point,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearityReport {
    pub max_violation: f64,
    /// The worst sample, kept when the check fails.
    pub witness: Option<LinearityWitness>,
    pub linear: bool,
}

impl LinearityReport {
    pub fn to_json(&self) -> Value {
        json!({
            "maxViolation": self.max_violation,
            "linear": self.linear,
            "witness": self.witness.as_ref().map(|w| json!({
                "eps": w.eps, "mu": w.mu, "x": w.x, "u": w.u, "v": w.v,
            })),
        })
    }
}

fn linearity(
    model: Model,
    samples: usize,
    tol: f64,
    seed: u64,
    mut violation: impl FnMut(f64, f64, &[f64], &[f64], &[f64]) -> Result<f64, EvalError>,
) -> Result<LinearityReport, EvalError> {
    let (_, lo, hi) = identity_domain(model);
    let r = model.default_radius();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0;
    let mut witness = None;
    for _ in 0..samples {
        let (e, mu) = (log_uniform(&mut rng, lo, hi), log_uniform(&mut rng, lo, hi));
        let [x, u, v] = [0; 3].map(|_| model.sample_ball(&mut rng, r));
        let gap = violation(e, mu, &x, &u, &v)?;
        if gap > worst || witness.is_none() {
            worst = gap;
            witness = Some(LinearityWitness { eps: e, mu, x, u, v });
        }
    }
    let linear = worst <= tol;
    Ok(LinearityReport {
        max_violation: worst,
        witness: if linear { None } else { witness },
        linear,
    })
}

/// Whether the dilations of `model` are irq morphisms:
/// `x circ_mu (u circ_eps v) = (x circ_mu u) circ_eps (x circ_mu v)`.
pub fn linearity_check(model: Model, samples: usize, tol: f64, seed: u64) -> Result<LinearityReport, EvalError> {
    let m = model;
    linearity(model, samples, tol, seed, |e, mu, x, u, v| {
        let lhs = m.circ(mu, x, &m.circ(e, u, v)?)?;
        let rhs = m.circ(e, &m.circ(mu, x, u)?, &m.circ(mu, x, v)?)?;
        Ok(coord_gap(&lhs, &rhs))
    })
}

/// Whether `f` is linear: `f(u circ_eps v) = f(u) circ_eps f(v)`.
pub fn homeo_linearity_check(f: &Homeo, samples: usize, tol: f64, seed: u64) -> Result<LinearityReport, EvalError> {
    linearity(f.source, samples, tol, seed, |e, _, _, u, v| {
        let lhs = f.apply(&f.source.circ(e, u, v)?);
        let rhs = f.target.circ(e, &f.apply(u), &f.apply(v))?;
        Ok(coord_gap(&lhs, &rhs))
    })
}
