use chora::diagram::{build_crossing, GateKind};
use chora::evaluate::*;
use chora::models::{heis, HomeoRegistry, Model, Point};
use chora::rewrite::make_gate;
use chora::scale::{ScaleBinding, ScaleExpr};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const MODELS: [Model; 4] = [Model::Euclid(2), Model::Euclid(3), Model::Heis1, Model::Sphere];

fn eps() -> ScaleExpr {
    ScaleExpr::var("eps")
}

#[test]
fn schedules() {
    let s = default_schedule();
    assert_eq!(s.len(), 16);
    assert_eq!((s[0], s[15]), (0.5, 1.0 / 65536.0));
    assert_eq!(geometric_schedule(1.0, 0.5, 3), vec![1.0, 0.5, 0.25]);
}

#[test]
fn slope_of_power_law() {
    let s = default_schedule();
    let e: Vec<f64> = s.iter().map(|x| 3.0 * x * x).collect();
    assert!((fit_slope(&s, &e).unwrap() - 2.0).abs() < 1e-12);
    assert_eq!(fit_slope(&s, &[0.0; 16]), None);
}

#[test]
fn scan_rejects_bad_schedules() {
    let at = |_: f64| Ok(vec![vec![0.0]]);
    assert!(matches!(scan_fn("t", &[0.5, 0.5], at, None), Err(EvalError::Invalid(_))));
    assert!(matches!(scan_fn("t", &[0.5], at, None), Err(EvalError::Invalid(_))));
}

#[test]
fn scan_detects_divergence() {
    let s = default_schedule();
    let r = scan_fn("blowup", &s, |e| Ok(vec![vec![1.0 / e]]), Some(&[vec![0.0]]));
    assert!(matches!(r, Err(EvalError::DivergenceDetected(_))));
}

#[test]
fn euclid_difference_scan_has_unit_slope() {
    // closed form: Delta^x_eps(u, v) = x - u + v + eps (u - x)
    let m = Model::Euclid(2);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let trip: Vec<[Point; 3]> = (0..100).map(|_| [0; 3].map(|_| m.sample(&mut rng))).collect();
    let limit: Vec<Point> = trip.iter().map(|[x, u, v]| (0..2).map(|i| x[i] - u[i] + v[i]).collect()).collect();
    let r = scan_fn(
        "diff",
        &default_schedule(),
        |e| trip.iter().map(|[x, u, v]| Ok(m.approx_difference(e, x, u, v)?)).collect(),
        Some(&limit),
    )
    .unwrap();
    assert!((r.slope.unwrap() - 1.0).abs() < 0.01, "{r:?}");
    assert!(r.pass);
}

#[test]
fn converge_scan_on_difference_gate() {
    let d = make_gate(GateKind::Difference, &eps());
    let spec = SampleSpec::new(Model::Euclid(2), 20, 0);
    let r = converge_scan(&d, Model::Euclid(2), "eps", &default_schedule(), &ScaleBinding::new(), spec).unwrap();
    assert!(r.pass);
    assert!((r.slope.unwrap() - 1.0).abs() < 0.1, "{r:?}");
    let j = r.to_json();
    assert_eq!(j["supErrors"].as_array().unwrap().len(), 16);
    assert!(converge_scan(&d, Model::Euclid(2), "nu", &default_schedule(), &ScaleBinding::new(), spec).is_err());
}

#[test]
fn unit_scale_diagram_scans_to_zero() {
    let d = build_crossing(false, ScaleExpr::one());
    let mut d2 = d.clone();
    d2.scales.insert("eps".into(), chora::diagram::ScaleDecl::Var);
    let spec = SampleSpec::new(Model::Heis1, 10, 3);
    let r = converge_scan(&d2, Model::Heis1, "eps", &default_schedule(), &ScaleBinding::new(), spec).unwrap();
    assert!(r.sup_errors.iter().all(|e| *e == 0.0));
    assert!(r.pass && r.slope.is_none());
}

#[test]
fn heis_sum_at_identity_tends_to_group_law() {
    let m = Model::Heis1;
    let (e0, u, v) = (vec![0.0; 3], vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]);
    assert_eq!(heis::mul(&u, &v), vec![1.0, 1.0, 0.5]);
    let r = scan_fn(
        "heis-sum",
        &default_schedule(),
        |e| Ok(vec![m.approx_sum(e, &e0, &u, &v)?]),
        Some(&[vec![1.0, 1.0, 0.5]]),
    )
    .unwrap();
    assert!((r.slope.unwrap() - 1.0).abs() < 0.1, "{r:?}");
}

#[test]
fn map_distance_is_constant_in_euclid() {
    let m = Model::Euclid(2);
    let (x, u, v) = ([0.3, -0.2], [1.0, 0.5], [-0.4, 0.7]);
    let d0 = m.dist(&u, &v);
    for e in default_schedule() {
        // cancellation in the chart costs about one ulp divided by eps
        assert!((m.map_distance(e, &x, &u, &v).unwrap() - d0).abs() < 1e-15 / e);
    }
}

#[test]
fn identity_suites_pass_on_all_models() {
    for m in MODELS {
        let r = check_identities(m, 1000, identity_tol(m), 0).unwrap();
        for c in &r.checks {
            assert!(c.pass, "{m} {}: {}", c.name, c.max_error);
        }
        assert_eq!(r.checks.len(), 12);
    }
}

#[test]
fn identity_suite_is_deterministic() {
    let a = check_identities(Model::Heis1, 50, 1e-9, 4).unwrap();
    let b = check_identities(Model::Heis1, 50, 1e-9, 4).unwrap();
    assert_eq!(a.to_json().to_string(), b.to_json().to_string());
}

#[test]
fn normalizer_proves_relations() {
    let proved: Vec<&str> = symbolic_identities().into_iter().filter(|(_, ok)| *ok).map(|(n, _)| n).collect();
    for n in ["b", "c", "e", "g"] {
        assert!(proved.contains(&n), "{n} not proved; proved {proved:?}");
    }
}

#[test]
fn tangent_groups() {
    for m in [Model::Euclid(2), Model::Heis1, Model::Sphere] {
        let r = tangent_group_check(m, &m.origin(), 50, &dyadic_schedule(1, 26), 2).unwrap();
        for c in &r.checks {
            assert!(c.pass, "{m} {}: {}", c.name, c.max_error);
        }
        assert!(r.pass, "{m}");
    }
}

#[test]
fn heis_tangent_sum_is_group_law() {
    let m = Model::Heis1;
    let (u, v) = (vec![0.5, -0.25, 0.75], vec![-0.5, 1.0, 0.125]);
    let s = m.approx_sum(TANGENT_EPS, &m.origin(), &u, &v).unwrap();
    assert!(chora::models::coord_gap(&s, &heis::mul(&u, &v)) < 1e-6);
}

#[test]
fn residue_is_identity_in_linear_models() {
    for m in [Model::Euclid(2), Model::Heis1] {
        let t = residue_samples(m, 30, 1, 1.0);
        let r = residue_convergence(m, &m.origin(), &t, 0.4, 0.7, &dyadic_schedule(1, 12)).unwrap();
        assert!(r.max_error() <= 1e-9, "{m}: {r:?}");
        assert!(r.pass);
    }
}

#[test]
fn residue_converges_on_sphere() {
    let m = Model::Sphere;
    let t = residue_samples(m, 50, 1, m.default_radius());
    let r = residue_convergence(m, &m.origin(), &t, 0.4, 0.7, &dyadic_schedule(1, 12)).unwrap();
    assert!(r.is_monotone(), "{r:?}");
    assert!(r.slope.unwrap() >= 0.9, "{r:?}");
    assert!(r.pass);
    assert!(r.sup_errors[0] > 1e-6, "sphere residue should be visible at eps = 1/2");
}

#[test]
fn residue_is_trivial_when_u_and_v_sit_at_the_base() {
    let m = Model::Sphere;
    let x = m.origin();
    let t: Vec<[Point; 3]> = residue_samples(m, 20, 5, 0.8)
        .into_iter()
        .map(|[_, _, w]| [x.clone(), x.clone(), w])
        .collect();
    let r = residue_convergence(m, &x, &t, 0.3, 0.6, &dyadic_schedule(1, 12)).unwrap();
    assert!(r.max_error() <= 1e-9);
}

#[test]
fn residue_moves_the_base_on_the_sphere() {
    let m = Model::Sphere;
    let x = m.origin();
    let t: Vec<[Point; 3]> = residue_samples(m, 20, 5, 0.8)
        .into_iter()
        .map(|[u, v, _]| [u, v, x.clone()])
        .collect();
    let r = residue_convergence(m, &x, &t, 0.3, 0.6, &dyadic_schedule(1, 12)).unwrap();
    assert!(r.sup_errors[0] > 1e-3);
    assert!(r.is_monotone() && r.slope.unwrap() >= 0.9);
}

#[test]
fn pansu_shear_matches_jacobian() {
    let reg = HomeoRegistry::standard();
    let f = reg.get("shear").unwrap();
    // D_eps f(0)(1, 1) = (1 + eps, 1)
    for e in [0.5, 0.125] {
        let d = pansu_finite_difference(f, &[0.0, 0.0], &[1.0, 1.0], e).unwrap();
        assert!(chora::models::coord_gap(&d, &[1.0 + e, 1.0]) < 1e-14);
    }
    // the limit is f(x) + J(x)(u - x)
    let (x, u) = ([0.3, -0.2], [0.5, 0.25]);
    let (fx, h) = ([x[0] + x[1] * x[1], x[1]], [u[0] - x[0], u[1] - x[1]]);
    let jac = [fx[0] + h[0] + 2.0 * x[1] * h[1], fx[1] + h[1]];
    let r = pansu_derivative(f, &x, &u, &default_schedule(), 30, 0).unwrap();
    assert!(chora::models::coord_gap(&r.estimate, &jac) <= 1e-4);
    assert!(r.pass, "{r:?}");
}

#[test]
fn pansu_of_heis_morphism_is_exact() {
    let reg = HomeoRegistry::standard();
    let f = reg.get("rot").unwrap();
    let u = [0.5, -0.75, 0.25];
    for e in default_schedule() {
        let d = pansu_finite_difference(f, &[0.0; 3], &u, e).unwrap();
        assert!(chora::models::coord_gap(&d, &f.apply(&u)) <= 1e-9);
    }
    let r = pansu_derivative(f, &[0.0; 3], &u, &default_schedule(), 30, 0).unwrap();
    assert!(r.pass, "{r:?}");
}

#[test]
fn linearity_of_dilations() {
    assert!(linearity_check(Model::Euclid(2), 500, 1e-12, 0).unwrap().linear);
    assert!(linearity_check(Model::Heis1, 500, 1e-9, 0).unwrap().linear);
    let s = linearity_check(Model::Sphere, 500, 1e-9, 0).unwrap();
    assert!(!s.linear);
    assert!(s.max_violation > 1e-3);
    let w = s.witness.unwrap();
    let m = Model::Sphere;
    let lhs = m.circ(w.mu, &w.x, &m.circ(w.eps, &w.u, &w.v).unwrap()).unwrap();
    let rhs = m
        .circ(w.eps, &m.circ(w.mu, &w.x, &w.u).unwrap(), &m.circ(w.mu, &w.x, &w.v).unwrap())
        .unwrap();
    assert!(chora::models::coord_gap(&lhs, &rhs) > 1e-3);
}

#[test]
fn homeo_linearity() {
    let reg = HomeoRegistry::standard();
    assert!(homeo_linearity_check(reg.get("rot").unwrap(), 200, 1e-9, 0).unwrap().linear);
    assert!(homeo_linearity_check(reg.get("swap").unwrap(), 200, 1e-12, 0).unwrap().linear);
    assert!(!homeo_linearity_check(reg.get("shear").unwrap(), 200, 1e-9, 0).unwrap().linear);
}
