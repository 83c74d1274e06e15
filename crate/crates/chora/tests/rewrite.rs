use chora::catalog;
use chora::diagram::{build_crossing, Diagram, GateKind};
use chora::evaluate::{io_deviation, io_function, sample_scales, symbolic_io};
use chora::models::{coord_gap, HomeoRegistry, Model};
use chora::rewrite::*;
use chora::scale::{ScaleBinding, ScaleExpr};
use chora::terms::{ColorTerm, PointBinding};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const MODELS: [Model; 3] = [Model::Euclid(2), Model::Heis1, Model::Sphere];

fn eps() -> ScaleExpr {
    ScaleExpr::var("eps")
}

fn binding(pairs: &[(&str, f64)]) -> ScaleBinding {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn points(pairs: &[(&str, Vec<f64>)]) -> PointBinding {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

fn assert_io_preserved(a: &Diagram, b: &Diagram, models: &[Model]) {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for m in models {
        for round in 0..3 {
            let sc = sample_scales(a, &mut rng, 0.3, 0.9);
            let dev = io_deviation(a, b, *m, &sc, io_radius(*m), 20, round).unwrap();
            assert!(dev <= 1e-9, "{m}: io deviation {dev} for `{}`", a.name);
        }
    }
}

/// Sampling radius keeping rewritten intermediate points off the cut locus.
fn io_radius(m: Model) -> f64 {
    if m == Model::Sphere {
        0.3
    } else {
        1.0
    }
}

fn term(s: &str) -> ColorTerm {
    s.parse().unwrap()
}

#[test]
fn difference_gate_example_point() {
    let d = make_gate(GateKind::Difference, &eps());
    let f = io_function(&d, Model::Euclid(2), &binding(&[("eps", 0.5)]), &HomeoRegistry::new()).unwrap();
    let out = f
        .call(&points(&[("x", vec![0.0, 0.0]), ("u", vec![1.0, 0.0]), ("v", vec![0.0, 1.0])]))
        .unwrap();
    assert_eq!(out["out"], vec![-0.5, 1.0]);
}

#[test]
fn gates_match_model_closed_forms() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for m in MODELS {
        for kind in [GateKind::Difference, GateKind::Sum, GateKind::Inverse, GateKind::EpsFanOut] {
            let d = make_gate(kind, &eps());
            for e in [0.9, 0.5, 0.25] {
                let f = io_function(&d, m, &binding(&[("eps", e)]), &HomeoRegistry::new()).unwrap();
                for _ in 0..20 {
                    let (x, u, v) = (m.sample(&mut rng), m.sample(&mut rng), m.sample(&mut rng));
                    let pts = points(&[("x", x.clone()), ("u", u.clone()), ("v", v.clone())]);
                    let out = f.call(&pts).unwrap();
                    let (label, want) = match kind {
                        GateKind::Difference => ("out", m.approx_difference(e, &x, &u, &v).unwrap()),
                        GateKind::Sum => ("out", m.approx_sum(e, &x, &u, &v).unwrap()),
                        GateKind::Inverse => ("out", m.approx_inverse(e, &x, &u).unwrap()),
                        GateKind::EpsFanOut => ("x2", m.circ(e, &x, &u).unwrap()),
                    };
                    let tol = if matches!(m, Model::Euclid(_)) { 1e-12 } else { 1e-9 };
                    assert!(coord_gap(&out[label], &want) <= tol, "{m} {kind:?}");
                }
            }
        }
    }
}

#[test]
fn gate_records_verify_symbolically() {
    for kind in [GateKind::Difference, GateKind::Sum, GateKind::Inverse, GateKind::EpsFanOut] {
        let d = make_gate(kind, &eps());
        assert!(d.is_valid());
        let c = census(&d);
        assert_eq!(c.unverified_gates, 0, "{kind:?}");
        assert_eq!(c.uncovered_crossings, 0, "{kind:?}");
    }
}

#[test]
fn sum_after_difference_is_identity_in_v() {
    let x = ColorTerm::var("x");
    let d = ColorTerm::bullet(
        eps(),
        ColorTerm::circ(eps(), x.clone(), term("u")),
        ColorTerm::circ(eps(), x.clone(), term("v")),
    );
    let s = gate_formula(GateKind::Sum, &eps(), &x, &[term("u"), d]).unwrap();
    assert!(s.equal_modulo(&term("v")));
}

#[test]
fn crossing_to_difference_census_and_io() {
    let d = build_crossing(false, eps());
    let g = crossing_to_difference(&d, "G").unwrap();
    let c = census(&g);
    assert_eq!(c.gates.get("DifferenceGate"), Some(&1));
    assert_eq!((c.unverified_gates, c.uncovered_crossings), (0, 0));
    assert!(symbolic_io(&g).unwrap()["out"].equal_modulo(&term("circ[eps](x,u)")));
    assert_io_preserved(&d, &g, &MODELS);
    assert!(matches!(crossing_to_difference(&g, "G"), Err(RewriteError::SiteMismatch(_))));
}

#[test]
fn bullet_crossing_to_difference() {
    let d = build_crossing(true, eps());
    let g = crossing_to_difference(&d, "G").unwrap();
    assert_eq!(census(&g).unverified_gates, 0);
    assert_io_preserved(&d, &g, &MODELS);
}

#[test]
fn difference_is_three_differences() {
    let d = make_gate(GateKind::Difference, &eps());
    let g = difference_self_similar(&d, 0).unwrap();
    let c = census(&g);
    assert_eq!(c.gates.get("DifferenceGate"), Some(&3));
    assert_eq!(c.gates.len(), 1);
    assert_eq!((c.unverified_gates, c.uncovered_crossings), (0, 0));
    assert_io_preserved(&d, &g, &MODELS);
}

#[test]
fn elementary_chora_two_ways() {
    let d = catalog::elementary_chora();
    for second in [false, true] {
        let g = elementary_chora_decompose(&d, 0, second).unwrap();
        let c = census(&g);
        assert_eq!(c.difference_family, 2, "{c}");
        assert_eq!(c.uncovered_crossings, 1, "{c}");
        assert_eq!(c.unverified_gates, 0, "{c}");
        assert!(g.choroi.is_empty());
        assert_io_preserved(&d, &g, &MODELS);
    }
}

#[test]
fn elementary_chora_is_relative_dilation() {
    let d = catalog::elementary_chora();
    let g = elementary_chora_decompose(&d, 0, false).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for m in MODELS {
        let sc = binding(&[("eps", 0.5), ("mu", 0.3)]);
        let f = io_function(&g, m, &sc, &HomeoRegistry::new()).unwrap();
        for _ in 0..20 {
            let (x, u, v) = (m.sample(&mut rng), m.sample(&mut rng), m.sample(&mut rng));
            let out = f.call(&points(&[("x", x.clone()), ("u", u.clone()), ("v", v.clone())])).unwrap();
            let want = m.relative_dilation(0.5, 0.3, &x, &u, &v).unwrap();
            assert!(coord_gap(&out["out"], &want) <= 1e-9);
        }
    }
}

#[test]
fn chora_fixture_numeric_example() {
    let d = catalog::elementary_chora();
    let f = io_function(&d, Model::Euclid(2), &binding(&[("eps", 0.5), ("mu", 0.5)]), &HomeoRegistry::new()).unwrap();
    let out = f
        .call(&points(&[("x", vec![0.0, 0.0]), ("u", vec![1.0, 0.0]), ("v", vec![0.0, 1.0])]))
        .unwrap();
    assert!(Model::Euclid(2).dist(&out["out"], &[0.5, 0.5]) <= 1e-15);
}

#[test]
fn chora_in_chora_census() {
    let d = &catalog::nested_corpus()[0];
    let g = chora_in_chora(d, 0).unwrap();
    let c = census(&g);
    assert_eq!(g.choroi.len(), 1);
    assert_eq!(c.difference_family, 4, "{c}");
    assert_eq!((c.unverified_gates, c.uncovered_crossings, c.other_choroi), (0, 0, 0), "{c}");
    assert_eq!(g.choroi[0].scale.to_string(), ScaleExpr::var("eps").mul(&ScaleExpr::var("mu")).to_string());
    assert_io_preserved(d, &g, &MODELS);
}

#[test]
fn difference_in_chora_census() {
    let d = catalog::difference_in_chora();
    assert_eq!(census(&d).unverified_gates, 0);
    let g = difference_in_chora(&d, 0).unwrap();
    let c = census(&g);
    assert_eq!(c.difference_family, 4, "{c}");
    assert_eq!(c.elementary_choroi, 1, "{c}");
    assert_eq!(c.uncovered_crossings, 2, "{c}");
    assert_eq!(c.unverified_gates, 0, "{c}");
    assert_io_preserved(&d, &g, &MODELS);
}

#[test]
fn normalizer_on_nested_corpus() {
    for d in catalog::nested_corpus() {
        let g = normalize_choroi(&d).unwrap_or_else(|e| panic!("{}: {e}", d.name));
        let c = census(&g);
        assert!(c.is_normal(), "{}: {c}", d.name);
        assert_io_preserved(&d, &g, &MODELS);
    }
}

#[test]
fn normalizer_fixpoint_on_elementary_chora() {
    let d = catalog::elementary_chora();
    let g = normalize_choroi(&d).unwrap();
    assert_eq!(census(&g), census(&d));
}

#[test]
fn normalizer_rejects_stray_crossing() {
    let d = chora::sketch::Sketch::new("stray")
        .chora("A", "x", "eps")
        .strand("u", "[A ]A F1", "_u")
        .strand("v", "G1<F1:c:mu", "out")
        .build()
        .unwrap();
    assert!(matches!(normalize_choroi(&d), Err(RewriteError::HypothesisViolated(_))));
}

#[test]
fn approx_r3_is_exact_and_residue_is_trivial_in_linear_models() {
    let d = build_r3_site();
    let (g, res) = approx_r3(&d, 0).unwrap();
    assert_io_preserved(&d, &g, &MODELS);
    assert_eq!(res.diagram.inputs().len(), 3);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for m in [Model::Euclid(2), Model::Heis1] {
        let sc = sample_scales(&res.diagram, &mut rng, 0.2, 0.9);
        let f = io_function(&res.diagram, m, &sc, &HomeoRegistry::new()).unwrap();
        for _ in 0..20 {
            let pts: PointBinding = ["x", "u", "v", "w"].iter().map(|n| (n.to_string(), m.sample(&mut rng))).collect();
            let out = f.call(&pts).unwrap();
            assert!(coord_gap(&out["out"], &pts["w"]) <= 1e-9, "{m}");
            assert!(coord_gap(&out["_v"], &pts["v"]) <= 1e-9, "{m}");
        }
    }
}
