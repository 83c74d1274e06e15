//! Acceptance suite: one pass/fail line per criterion.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use chora::atlas::{check_propacc1, gh_bound, random_propacc_instance, FiniteMetricSpace, GhMode, ZoomSequence};
use chora::catalog::{fixture_files, random_diagram};
use chora::diagram::Diagram;
use chora::evaluate::*;
use chora::models::{coord_gap, HomeoRegistry, Model, Point};
use chora::rewrite::{applicable_moves, apply_move, census, normalize_choroi};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn axioms() -> Outcome {
    let start = Instant::now();
    let mut worst = Vec::new();
    for (m, tol) in [(Model::Euclid(2), 1e-12), (Model::Heis1, 1e-9), (Model::Sphere, 1e-9)] {
        let r = check_identities(m, 1000, tol, 0).map_err(err)?;
        let mut w: f64 = 0.0;
        for name in AXIOMS {
            let c = r.get(name).ok_or(format!("{m}: no check {name}"))?;
            ensure(c.pass, || format!("{m} {name}: {:e} > {tol:e}", c.max_error))?;
            w = w.max(c.max_error);
        }
        worst.push(format!("{m} {w:.1e}"));
    }
    let t = start.elapsed();
    ensure(t < Duration::from_secs(5), || format!("took {t:?}"))?;
    Ok(format!("{} in {:.2?}", worst.join(", "), t))
}

fn relations() -> Outcome {
    for m in [Model::Euclid(2), Model::Heis1, Model::Sphere] {
        let r = check_identities(m, 1000, identity_tol(m), 1).map_err(err)?;
        for name in PROP_ITEMS {
            let c = r.get(name).ok_or(format!("{m}: no check {name}"))?;
            ensure(c.pass, || format!("{m} ({name}): {:e}", c.max_error))?;
        }
    }
    let proved: Vec<&str> = symbolic_identities().into_iter().filter(|(_, ok)| *ok).map(|(n, _)| n).collect();
    for n in ["b", "c", "e", "g"] {
        ensure(proved.contains(&n), || format!("({n}) not proved symbolically"))?;
    }
    Ok(format!("numeric a-g on 3 models, symbolic {}", proved.join("")))
}

fn slope_scan(name: &str, m: Model, trip: &[[Point; 3]], f: impl Fn(f64, &[Point; 3]) -> Point, limit: impl Fn(&[Point; 3]) -> Point) -> Outcome {
    let lim: Vec<Point> = trip.iter().map(limit).collect();
    let r = scan_fn(name, &dyadic_schedule(1, 16), |e| Ok(trip.iter().map(|t| f(e, t)).collect()), Some(&lim)).map_err(err)?;
    let s = r.slope.ok_or(format!("{name}: no slope"))?;
    ensure((s - 1.0).abs() <= 0.1, || format!("{name} on {m}: slope {s}"))?;
    Ok(format!("{name} {s:.3}"))
}

fn slopes() -> Outcome {
    let e2 = Model::Euclid(2);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let trip: Vec<[Point; 3]> = (0..50).map(|_| [0; 3].map(|_| e2.sample(&mut rng))).collect();
    let lin = |a: f64, b: f64, c: f64| move |[x, u, v]: &[Point; 3]| (0..2).map(|i| a * x[i] + b * u[i] + c * v[i]).collect();
    let d = slope_scan("euclid2 difference", e2, &trip, |e, [x, u, v]| e2.approx_difference(e, x, u, v).unwrap(), lin(1.0, -1.0, 1.0))?;
    let s = slope_scan("euclid2 sum", e2, &trip, |e, [x, u, v]| e2.approx_sum(e, x, u, v).unwrap(), lin(-1.0, 1.0, 1.0))?;
    let h = Model::Heis1;
    let trip: Vec<[Point; 3]> = (0..50)
        .map(|_| [h.origin(), h.sample_ball(&mut rng, 1.0), h.sample_ball(&mut rng, 1.0)])
        .collect();
    let g = slope_scan(
        "heis1 sum at e",
        h,
        &trip,
        |e, [x, u, v]| h.approx_sum(e, x, u, v).unwrap(),
        |[_, u, v]| chora::models::heis::mul(u, v),
    )?;
    Ok(format!("{d}, {s}, {g}"))
}

fn soundness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut moves, mut worst) = (0usize, 0.0f64);
    for i in 0..500u64 {
        let d = random_diagram(&mut rng, 15);
        let sc = sample_scales(&d, &mut rng, 0.3, 0.9);
        for (k, site) in applicable_moves(&d) {
            let e = apply_move(&d, k, &site).map_err(|e| format!("{k} {site:?}: {e}"))?;
            for m in [Model::Euclid(2), Model::Heis1] {
                let dev = io_deviation(&d, &e, m, &sc, 1.0, 20, i).map_err(err)?;
                ensure(dev <= 1e-9, || format!("{m} {k} {site:?}: {dev:e}"))?;
                worst = worst.max(dev);
            }
            moves += 1;
        }
    }
    Ok(format!("500 diagrams, {moves} moves, worst {worst:.1e}"))
}

fn normalizer() -> Outcome {
    let nested: Vec<_> = fixture_files().into_iter().filter(|(r, _)| r.starts_with("nested/")).collect();
    ensure(nested.len() >= 10, || format!("only {} fixtures", nested.len()))?;
    let mut slowest = Duration::ZERO;
    let mut worst: f64 = 0.0;
    for (rel, text) in &nested {
        let d = Diagram::from_json(text).map_err(err)?;
        let start = Instant::now();
        let n = normalize_choroi(&d).map_err(|e| format!("{rel}: {e}"))?;
        let t = start.elapsed();
        slowest = slowest.max(t);
        ensure(t <= Duration::from_secs(1), || format!("{rel}: {t:?}"))?;
        ensure(census(&n).is_normal(), || format!("{rel}: {}", census(&n)))?;
        let sc = sample_scales(&d, &mut ChaCha8Rng::seed_from_u64(2), 0.3, 0.9);
        for m in [Model::Euclid(2), Model::Heis1] {
            let dev = io_deviation(&d, &n, m, &sc, 1.0, 50, 3).map_err(err)?;
            ensure(dev <= 1e-9, || format!("{rel} {m}: {dev:e}"))?;
            worst = worst.max(dev);
        }
    }
    Ok(format!("{} fixtures, worst {worst:.1e}, slowest {slowest:.2?}", nested.len()))
}

fn residue() -> Outcome {
    let sched = dyadic_schedule(1, 12);
    let mut out = Vec::new();
    for m in [Model::Euclid(2), Model::Heis1] {
        let t = residue_samples(m, 50, 1, 1.0);
        let r = residue_convergence(m, &m.origin(), &t, 0.4, 0.7, &sched).map_err(err)?;
        ensure(r.max_error() <= 1e-9, || format!("{m}: {:e}", r.max_error()))?;
        out.push(format!("{m} {:.1e}", r.max_error()));
    }
    let m = Model::Sphere;
    let t = residue_samples(m, 50, 1, m.default_radius());
    let r = residue_convergence(m, &m.origin(), &t, 0.4, 0.7, &sched).map_err(err)?;
    let s = r.slope.unwrap_or(0.0);
    ensure(r.is_monotone(), || "sphere residue not monotone".into())?;
    ensure(s >= 0.9, || format!("sphere slope {s}"))?;
    out.push(format!("sphere slope {s:.3}"));
    Ok(out.join(", "))
}

fn pansu() -> Outcome {
    let reg = HomeoRegistry::standard();
    let shear = reg.get("shear").map_err(err)?;
    let (x, u) = ([0.3, -0.2], [0.5, 0.25]);
    let (fx, h) = ([x[0] + x[1] * x[1], x[1]], [u[0] - x[0], u[1] - x[1]]);
    let jac = [fx[0] + h[0] + 2.0 * x[1] * h[1], fx[1] + h[1]];
    let est = pansu_finite_difference(shear, &x, &u, 0.5f64.powi(16)).map_err(err)?;
    let gap = coord_gap(&est, &jac);
    ensure(gap <= 1e-4, || format!("shear off the Jacobian by {gap:e}"))?;
    let r = pansu_derivative(shear, &x, &u, &default_schedule(), 30, 0).map_err(err)?;
    ensure(r.pass, || format!("shear conical checks: {}", r.to_json()))?;

    let rot = reg.get("rot").map_err(err)?;
    let v = [0.5, -0.75, 0.25];
    let mut morph: f64 = 0.0;
    for e in default_schedule() {
        morph = morph.max(coord_gap(&pansu_finite_difference(rot, &[0.0; 3], &v, e).map_err(err)?, &rot.apply(&v)));
    }
    ensure(morph <= 1e-9, || format!("heis1 morphism: {morph:e}"))?;
    let r = pansu_derivative(rot, &[0.0; 3], &v, &default_schedule(), 30, 0).map_err(err)?;
    ensure(r.pass, || format!("rot conical checks: {}", r.to_json()))?;
    for c in &r.morphism {
        ensure(c.tol <= 1e-6, || format!("{} checked at {:e}", c.name, c.tol))?;
    }
    Ok(format!("euclid2 gap {gap:.1e}, heis1 morphism {morph:.1e}"))
}

fn propacc() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut violations = 0;
    for _ in 0..1000 {
        let (rel, eps, mu) = random_propacc_instance(&mut rng, 8);
        if !check_propacc1(&rel, eps, mu).map_err(err)?.pass {
            violations += 1;
        }
    }
    ensure(violations == 0, || format!("{violations} violations"))?;
    Ok("1000 relations, 0 violations".into())
}

fn line(xs: &[f64]) -> Arc<FiniteMetricSpace> {
    let pts: Vec<(String, f64)> = xs.iter().enumerate().map(|(i, x)| (format!("p{i}"), *x)).collect();
    Arc::new(FiniteMetricSpace::from_points(&pts, |a, b| (a - b).abs()))
}

fn gh() -> Outcome {
    let x = line(&[0.0, 0.4, 1.5]);
    let same = gh_bound(&x, &x, GhMode::ExactSmall).map_err(err)?;
    let seg = gh_bound(&line(&[0.0, 1.0]), &line(&[0.0, 1.4]), GhMode::ExactSmall).map_err(err)?;
    let tri = line(&[0.0, 0.4, 1.5, 2.25]);
    let pt = gh_bound(&tri, &Arc::new(FiniteMetricSpace::single_point("p")), GhMode::ExactSmall).map_err(err)?;
    ensure(same.abs() <= 1e-12, || format!("identical spaces: {same}"))?;
    ensure((seg - 0.4).abs() <= 1e-12, || format!("segments: {seg}"))?;
    ensure((pt - tri.diameter()).abs() <= 1e-12, || format!("point: {pt} vs {}", tri.diameter()))?;
    Ok(format!("{same}, {seg:.12}, {pt}"))
}

fn foveal() -> Outcome {
    let m = Model::Euclid(2);
    let zs = ZoomSequence::from_model(m, &m.origin(), 1e-3).map_err(err)?;
    let ks: Vec<u32> = (0..=10).collect();
    let r = zs.foveal_properties_check(&[0.5, 0.25], &ks).map_err(err)?;
    let bad: Vec<String> = r
        .rows
        .iter()
        .filter(|row| row.violations() > 0)
        .map(|row| format!("eps={} mu={}", row.eps, row.mu))
        .collect();
    ensure(r.pass(), || format!("{} violations at {}", r.violations, bad.join("; ")))?;
    Ok(format!("{} grid points, 0 violations", r.rows.len()))
}

fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn cli(args: &[&str]) -> Result<(i32, Vec<u8>), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_chora"))
        .args(args)
        .current_dir(fixtures_dir())
        .output()
        .map_err(err)?;
    Ok((out.status.code().unwrap_or(-1), out.stdout))
}

fn codec() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for i in 0..200 {
        let d = random_diagram(&mut rng, 15);
        let text = d.to_json();
        let back = Diagram::from_json(&text).map_err(err)?;
        ensure(back.to_json() == text, || format!("random diagram {i} not byte-stable"))?;
        ensure(back.validate() == d.validate(), || format!("random diagram {i}: verdict changed"))?;
    }
    for (rel, text) in fixture_files().iter().filter(|(r, _)| !r.starts_with("atlas/")) {
        let d = Diagram::from_json(text).map_err(err)?;
        ensure(d.to_json() + "\n" == *text, || format!("{rel} not byte-stable"))?;
    }
    let runs: &[&[&str]] = &[
        &["validate", "diffgate.json"],
        &["validate", "chora.json"],
        &["eval", "diffgate.json", "--model", "euclid2", "--scale", "eps=0.5", "--in", "x=0,0", "--in", "u=1,0", "--in", "v=0,1"],
        &["normalize", "nested/inner-two-crossings.json"],
        &["limits", "diffgate.json", "--model", "heis1", "--var", "eps", "--samples", "20"],
        &["identities", "--model", "sphere", "--samples", "100"],
        &["residue", "--model", "sphere", "--mu", "0.4", "--lambda", "0.7", "--samples", "10"],
        &["render", "chora.json"],
        &["atlas", "metrics", "atlas/stretch.json"],
        &["atlas", "gh", "atlas/triangle.json", "atlas/point.json"],
        &["atlas", "foveal", "--h", "1e-3", "--kmax", "3"],
    ];
    for args in runs {
        let a = cli(args)?;
        let b = cli(args)?;
        ensure(a.0 == 0, || format!("`{}` exited {}", args.join(" "), a.0))?;
        ensure(a == b, || format!("`{}` is not deterministic", args.join(" ")))?;
    }
    let (code, out) = cli(&["eval", "diffgate.json", "--model", "euclid2", "--scale", "eps=0.5", "--in", "x=0,0", "--in", "u=1,0", "--in", "v=0,1"])?;
    let v: serde_json::Value = serde_json::from_slice(&out).map_err(err)?;
    let o = &v["outputs"]["out"];
    ensure(code == 0 && o[0] == -0.5 && o[1] == 1.0, || format!("diffgate eval gave {o}"))?;
    Ok(format!("200 random diagrams, {} CLI reports", runs.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("irq axioms", axioms),
        ("relations a-g", relations),
        ("limit slopes", slopes),
        ("rewrite soundness", soundness),
        ("choroi normalizer", normalizer),
        ("approximate R3 residue", residue),
        ("Pansu derivative", pansu),
        ("generalization bounds", propacc),
        ("Gromov-Hausdorff oracles", gh),
        ("foveal maps", foveal),
        ("codec and CLI stability", codec),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let t = start.elapsed();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} [{t:.2?}]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail} [{t:.2?}]", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
