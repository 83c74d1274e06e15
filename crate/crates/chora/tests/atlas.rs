use std::sync::Arc;

use chora::atlas::*;
use chora::models::Model;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn line(xs: &[f64]) -> Arc<FiniteMetricSpace> {
    let pts: Vec<[f64; 2]> = xs.iter().map(|x| [*x, 0.0]).collect();
    Arc::new(plane_space(&pts))
}

fn two_points(a: f64) -> Arc<FiniteMetricSpace> {
    line(&[0.0, a])
}

#[test]
fn accuracy_of_a_stretched_pair() {
    let rel = MapRelation::new(two_points(1.0), two_points(1.2), [(0, 0), (1, 1)]).unwrap();
    let m = metrics(&rel);
    assert!((m.accuracy - 0.2).abs() < 1e-15);
    assert_eq!((m.precision, m.resolution), (0.0, 0.0));
}

#[test]
fn resolution_of_a_collapsed_pair() {
    let y = Arc::new(FiniteMetricSpace::single_point("y"));
    let rel = MapRelation::new(two_points(1.0), y, [(0, 0), (1, 0)]).unwrap();
    let m = metrics(&rel);
    assert_eq!(m.resolution, 1.0);
    assert_eq!(m.resolution_at["y"], 1.0);
    assert_eq!(m.accuracy, 1.0);
}

#[test]
fn identity_relation_is_perfect() {
    let x = line(&[0.0, 0.3, 1.7]);
    let rel = MapRelation::new(x.clone(), x, (0..3).map(|i| (i, i))).unwrap();
    let m = metrics(&rel);
    assert_eq!((m.accuracy, m.precision, m.resolution), (0.0, 0.0, 0.0));
}

#[test]
fn space_validation() {
    let l = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    assert!(FiniteMetricSpace::new(l(&["a", "b"]), vec![vec![0.0, 1.0], vec![2.0, 0.0]]).is_err());
    assert!(FiniteMetricSpace::new(l(&["a", "b"]), vec![vec![0.5, 1.0], vec![1.0, 0.0]]).is_err());
    assert!(FiniteMetricSpace::new(l(&["a", "a"]), vec![vec![0.0, 1.0], vec![1.0, 0.0]]).is_err());
    let tri = vec![vec![0.0, 1.0, 3.0], vec![1.0, 0.0, 1.0], vec![3.0, 1.0, 0.0]];
    assert!(FiniteMetricSpace::new(l(&["a", "b", "c"]), tri).is_err());
    let ok = vec![vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 1.0], vec![2.0, 1.0, 0.0]];
    let s = FiniteMetricSpace::new(l(&["a", "b", "c"]), ok).unwrap();
    assert_eq!(s.diameter(), 2.0);
    assert_eq!(FiniteMetricSpace::from_json(&s.to_json()).unwrap(), s);
}

#[test]
fn relation_json_round_trip() {
    let (x, y) = (line(&[0.0, 1.0]), line(&[0.0, 2.0, 3.0]));
    let rel = MapRelation::new(x.clone(), y.clone(), [(0, 2), (1, 0)]).unwrap();
    let v = rel.to_json("x.json", "y.json");
    assert_eq!(v["pairs"][0], serde_json::json!(["p0", "p2"]));
    assert_eq!(MapRelation::from_json(&v, x.clone(), y.clone()).unwrap(), rel);
    let bad = serde_json::json!({"pairs": [["p0", "q"]]});
    assert!(MapRelation::from_json(&bad, x, y).is_err());
}

#[test]
fn generalization_requires_density() {
    let x = line(&[0.0, 1.0, 2.0]);
    let rel = MapRelation::new(x.clone(), x.clone(), [(0, 0)]).unwrap();
    assert!(matches!(generalize(&rel, 0.5, 5.0), Err(AtlasError::DensityViolated { side: "domain", .. })));
    let rel = MapRelation::new(x.clone(), x, [(0, 0), (1, 0), (2, 0)]).unwrap();
    assert!(matches!(generalize(&rel, 0.0, 1.0), Err(AtlasError::DensityViolated { side: "image", .. })));
}

#[test]
fn zero_radius_generalization_is_identity() {
    let x = line(&[0.0, 1.0, 2.5]);
    let rel = MapRelation::new(x.clone(), x, [(0, 1), (1, 0), (2, 2), (2, 1)]).unwrap();
    assert_eq!(generalize(&rel, 0.0, 0.0).unwrap(), rel);
}

#[test]
fn propacc_on_random_relations() {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for _ in 0..1000 {
        let (rel, eps, mu) = random_propacc_instance(&mut rng, 8);
        let r = check_propacc1(&rel, eps, mu).unwrap();
        assert!(r.pass, "{}", r.to_json());
    }
}

#[test]
fn propacc_single_points() {
    let p = Arc::new(FiniteMetricSpace::single_point("p"));
    let rel = MapRelation::new(p.clone(), p, [(0, 0)]).unwrap();
    let r = check_propacc1(&rel, 0.0, 0.0).unwrap();
    assert!(r.pass);
    assert!(r.items.iter().all(|i| i.lhs == 0.0));
}

#[test]
fn propacc_extremal_chain() {
    // X = {-eps, 0, a, a + eps}, Y = {-mu, 0, mu}, rho = {(0, -mu), (a, mu)}:
    // acc = a - 2 mu = c and res(bar) = a + 2 eps = c + 2 (eps + mu)
    let (c, eps, mu) = (0.3, 0.1, 0.2);
    let a = c + 2.0 * mu;
    let x = line(&[-eps, 0.0, a, a + eps]);
    let y = line(&[-mu, 0.0, mu]);
    let rel = MapRelation::new(x, y, [(1, 0), (2, 2)]).unwrap();
    let r = check_propacc1(&rel, eps, mu).unwrap();
    assert!((r.original.accuracy - c).abs() < 1e-15);
    let item_c = r.items.iter().find(|i| i.name == "c").unwrap();
    assert!((item_c.lhs - item_c.rhs).abs() < 1e-12, "{item_c:?}");
    assert!(r.pass);
}

#[test]
fn propacc_lower_bounds_fail_on_finite_spaces() {
    let x = line(&[0.0, 1.0]);
    let rel = MapRelation::new(x.clone(), x, [(0, 0), (1, 1)]).unwrap();
    let r = check_propacc1(&rel, 1.0, 1.0).unwrap();
    assert!(r.pass);
    assert!(r.lower_bounds.iter().any(|i| !i.holds));
}

#[test]
fn gh_identical_spaces() {
    let x = line(&[0.0, 0.4, 1.5]);
    assert_eq!(gh_bound(&x, &x, GhMode::ExactSmall).unwrap(), 0.0);
}

#[test]
fn gh_two_segments() {
    // bijections give |a - b|, the full relation max(a, b)
    let g = gh_bound(&two_points(1.0), &two_points(1.4), GhMode::ExactSmall).unwrap();
    assert!((g - 0.4).abs() <= 1e-12);
}

#[test]
fn gh_against_a_point_is_the_diameter() {
    let x = line(&[0.0, 0.4, 1.5, 2.25]);
    let p = Arc::new(FiniteMetricSpace::single_point("p"));
    assert!((gh_bound(&x, &p, GhMode::ExactSmall).unwrap() - 2.25).abs() <= 1e-12);
    assert!((gh_bound(&p, &x, GhMode::ExactSmall).unwrap() - 2.25).abs() <= 1e-12);
}

#[test]
fn gh_size_limit() {
    let x = line(&[0.0, 1.0, 2.0, 3.0]);
    assert!(matches!(
        gh_bound(&x, &x, GhMode::ExactSmall),
        Err(AtlasError::SizeLimit { limit: 12, got: 16 })
    ));
}

#[test]
fn gh_stochastic_bounds_exact_and_improves_with_budget() {
    let x = line(&[0.0, 0.5, 2.0]);
    let y = line(&[0.0, 1.1, 1.9, 2.2]);
    let exact = gh_bound(&x, &y, GhMode::ExactSmall).unwrap();
    let mut last = f64::INFINITY;
    for budget in [0, 5, 50, 20000] {
        let b = gh_bound(&x, &y, GhMode::Stochastic { budget, seed: 3 }).unwrap();
        assert!(b >= exact - 1e-12 && b <= last);
        last = b;
    }
    assert!((last - exact).abs() < 1e-12);
}

fn small_space() -> impl Strategy<Value = Vec<[f64; 2]>> {
    prop::collection::vec(prop::array::uniform2(-1.0f64..1.0), 1..4)
}

proptest! {
    #[test]
    fn gh_is_symmetric(a in small_space(), b in small_space()) {
        let (x, y) = (Arc::new(plane_space(&a)), Arc::new(plane_space(&b)));
        let xy = gh_bound(&x, &y, GhMode::ExactSmall).unwrap();
        let yx = gh_bound(&y, &x, GhMode::ExactSmall).unwrap();
        prop_assert!((xy - yx).abs() <= 1e-12);
    }

    #[test]
    fn hausdorff_is_a_metric(
        a in prop::collection::vec(prop::array::uniform2(-1.0f64..1.0), 1..6),
        b in prop::collection::vec(prop::array::uniform2(-1.0f64..1.0), 1..6),
        c in prop::collection::vec(prop::array::uniform2(-1.0f64..1.0), 1..6),
    ) {
        let d = |p: &[f64; 2], q: &[f64; 2]| (p[0] - q[0]).hypot(p[1] - q[1]) * 2.0;
        prop_assert_eq!(hausdorff(&a, &a, d), 0.0);
        prop_assert_eq!(hausdorff(&a, &b, d), hausdorff(&b, &a, d));
        prop_assert!(hausdorff(&a, &c, d) <= hausdorff(&a, &b, d) + hausdorff(&b, &c, d) + 1e-12);
    }

    #[test]
    fn metrics_are_permutation_invariant(seed in 0u64..500, shift in 0usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (rel, _, _) = random_propacc_instance(&mut rng, 6);
        let n = rel.source.len();
        let perm: Vec<usize> = (0..n).map(|i| (i + shift) % n).collect();
        let labels: Vec<String> = perm.iter().map(|&i| rel.source.labels()[i].clone()).collect();
        let d: Vec<Vec<f64>> = perm.iter().map(|&i| perm.iter().map(|&j| rel.source.dist(i, j)).collect()).collect();
        let x2 = Arc::new(FiniteMetricSpace::new(labels, d).unwrap());
        let inv: Vec<usize> = (0..n).map(|i| perm.iter().position(|&p| p == i).unwrap()).collect();
        let rel2 = MapRelation::new(x2, rel.target.clone(), rel.pairs().iter().map(|&(x, y)| (inv[x], y))).unwrap();
        let (m1, m2) = (metrics(&rel), metrics(&rel2));
        prop_assert_eq!(m1.accuracy, m2.accuracy);
        prop_assert_eq!(m1.precision, m2.precision);
        prop_assert_eq!(m1.resolution, m2.resolution);
    }

    #[test]
    fn generalization_contains_the_relation(seed in 0u64..500) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (rel, eps, mu) = random_propacc_instance(&mut rng, 8);
        let bar = generalize(&rel, eps, mu).unwrap();
        prop_assert!(rel.pairs().is_subset(bar.pairs()));
        prop_assert_eq!(bar.dom().len(), rel.source.len());
        prop_assert_eq!(bar.im().len(), rel.target.len());
        let m = metrics(&rel);
        prop_assert!(m.resolution <= m.accuracy + 1e-12);
        prop_assert!(m.precision <= m.accuracy + 1e-12);
    }
}

fn grid_scales() -> Vec<f64> {
    (0..=10).map(|k| 0.5f64.powi(k)).collect()
}

#[test]
fn exact_euclid_zoom_is_isometric() {
    let zs = ZoomSequence::from_model(Model::Euclid(2), &[0.3, -0.1], 0.0).unwrap();
    for t in grid_scales() {
        assert!(zs.modulus(t).unwrap() <= 1e-12, "t = {t}");
        assert!(zs.center_is_fixed(t).unwrap());
    }
}

#[test]
fn pixelated_euclid_zoom_is_bounded_by_the_snap() {
    let h = 1e-3;
    let zs = ZoomSequence::from_model(Model::Euclid(2), &[0.0, 0.0], h).unwrap();
    for t in grid_scales() {
        let f = zs.modulus(t).unwrap();
        assert!(f <= 2.0 * h * 2f64.sqrt(), "t = {t}: {f}");
        assert!(zs.center_is_fixed(t).unwrap());
    }
    assert!(zs.modulus(0.5).unwrap() > 0.0);
}

#[test]
fn heisenberg_zoom_is_isometric() {
    let zs = ZoomSequence::from_model(Model::Heis1, &[0.2, -0.4, 0.1], 0.0).unwrap();
    for t in [1.0, 0.25, 1.0 / 64.0] {
        assert!(zs.modulus(t).unwrap() <= 1e-9);
    }
}

#[test]
fn sphere_zoom_flattens() {
    let zs = ZoomSequence::with_grid(Model::Sphere, &[0.0, 0.6, 0.8], 0.0, 60, 2, 1).unwrap();
    let f: Vec<f64> = [0.5, 0.125, 1.0 / 32.0].iter().map(|t| zs.modulus(*t).unwrap()).collect();
    assert!(f[0] > f[1] && f[1] > f[2] && f[0] > 1e-3, "{f:?}");
    assert!(zs.center_is_fixed(0.5).unwrap());
}

#[test]
fn exact_composition_is_the_dilation() {
    let zs = ZoomSequence::from_model(Model::Euclid(2), &[0.0, 0.0], 0.0).unwrap();
    for mu in [0.5, 0.25] {
        let r = zs.scale_composition(0.125, mu).unwrap();
        assert!(r.accuracy <= 1e-12);
        for (a, b) in zs.composition_pairs(0.125, mu).unwrap() {
            assert!((b[0] - a[0] / mu).abs() + (b[1] - a[1] / mu).abs() < 1e-12);
        }
    }
    assert!(matches!(zs.scale_composition(0.5, 0.3), Err(AtlasError::MissingLimit(_))));
    assert!(matches!(zs.scale_composition(0.5, 0.125), Err(AtlasError::MissingLimit(_))));
}

#[test]
fn cascading_inequality_on_pixelated_grid() {
    let zs = ZoomSequence::from_model(Model::Euclid(2), &[0.0, 0.0], 1e-3).unwrap();
    for t in grid_scales() {
        for mu in [0.5, 0.25] {
            let r = zs.scale_composition(t, mu).unwrap();
            assert!(r.holds, "{}", r.to_json());
        }
    }
}

#[test]
fn exact_zoom_is_scale_stable() {
    let zs = ZoomSequence::from_model(Model::Euclid(2), &[0.0, 0.0], 0.0).unwrap();
    let r = zs.scale_stability_check(0.5, &grid_scales()).unwrap();
    assert!(r.self_similar && r.self_similarity_defect <= 1e-12);
    assert!(r.modulus.iter().all(|m| *m <= 1e-12));
}

#[test]
fn pixelated_zoom_reports_a_floor() {
    let h = 1e-3;
    let zs = ZoomSequence::from_model(Model::Euclid(2), &[0.0, 0.0], h).unwrap();
    let r = zs.scale_stability_check(0.25, &grid_scales()).unwrap();
    assert!(r.floor > 0.0 && r.floor <= 4.0 * h / 0.25, "{}", r.to_json());
    assert!(!r.self_similar || r.self_similarity_defect <= 1e-6);
}

#[test]
fn stability_rejects_bad_schedules() {
    let zs = ZoomSequence::from_model(Model::Euclid(2), &[0.0, 0.0], 0.0).unwrap();
    assert!(zs.scale_stability_check(0.5, &[0.5, 0.5]).is_err());
    assert!(zs.scale_stability_check(0.5, &[0.5]).is_err());
}

#[test]
fn viewpoint_difference_is_an_isometry() {
    let u = [0.4, -0.3];
    let zs = ZoomSequence::from_model(Model::Euclid(2), &[0.1, 0.2], 0.0).unwrap();
    for (a, b) in zs.viewpoint_difference(0.25, &u).unwrap() {
        assert!((b[0] - (a[0] - u[0])).abs() + (b[1] - (a[1] - u[1])).abs() < 1e-12);
    }
    let r = zs.viewpoint_stability_check(&u, &grid_scales()).unwrap();
    assert!(r.isometry, "{}", r.to_json());
    let zh = ZoomSequence::from_model(Model::Heis1, &[0.0; 3], 0.0).unwrap();
    let r = zh.viewpoint_stability_check(&[0.3, 0.2, 0.05], &grid_scales()).unwrap();
    assert!(r.isometry, "{}", r.to_json());
    let zsph = ZoomSequence::from_model(Model::Sphere, &[1.0, 0.0, 0.0], 0.0).unwrap();
    assert!(matches!(zsph.viewpoint_difference(0.5, &[0.1, 0.1]), Err(AtlasError::Unsupported(_))));
}

#[test]
fn exact_foveal_map_is_the_zoom_map() {
    let zs = ZoomSequence::from_model(Model::Euclid(2), &[0.0, 0.0], 0.0).unwrap();
    for t in [0.5, 0.0625] {
        let phi = zs.foveal_chart(t, 0.5).unwrap();
        let rho = zs.pairs(t).unwrap();
        assert_eq!(phi.len(), rho.len());
        for ((u1, y1), (u2, y2)) in phi.iter().zip(&rho) {
            assert_eq!(u1, u2);
            assert!(dist(y1, y2) <= 1e-12);
        }
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt()
}

#[test]
fn foveal_properties_on_pixelated_grid() {
    let zs = ZoomSequence::from_model(Model::Euclid(2), &[0.0, 0.0], 1e-3).unwrap();
    let ks: Vec<u32> = (0..=10).collect();
    let r = zs.foveal_properties_check(&[0.5, 0.25], &ks).unwrap();
    assert_eq!(r.rows.len(), 22);
    assert_eq!(r.violations, 0, "{}", r.to_json());
    assert!(r.rows.iter().all(|row| row.inner_points > 0));
}

#[test]
fn foveal_keeps_the_center() {
    let zs = ZoomSequence::from_model(Model::Euclid(2), &[0.5, 0.5], 1e-3).unwrap();
    let phi = zs.foveal_chart(0.25, 0.5).unwrap();
    assert!(phi.contains(&(vec![0.5, 0.5], vec![0.0, 0.0])));
}
