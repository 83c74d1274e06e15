//! Named example diagrams. The `fixtures/` directory is generated from here.

use rand::Rng;

use crate::diagram::{build_crossing, Diagram, GateKind};
use crate::rewrite::{build_r3_site, make_gate};
use crate::scale::ScaleExpr;
use crate::sketch::Sketch;

fn eps() -> ScaleExpr {
    ScaleExpr::var("eps")
}

fn sk(s: Sketch) -> Diagram {
    s.build().expect("catalog sketch is well formed")
}

/// Elementary chora `(x, eps)` with parameter `u`, crossing `mu` and input `v`.
pub fn elementary_chora() -> Diagram {
    sk(Sketch::new("chora")
        .chora("A", "x", "eps")
        .strand("u", "[A F1 ]A", "_u")
        .strand("v", "[A G1<F1:c:mu ]A", "out"))
}

/// A chora around a difference gate at scale `sigma`.
pub fn difference_in_chora() -> Diagram {
    let mut d = sk(Sketch::new("diff-in-chora")
        .chora("A", "x", "eps")
        .strand("a", "[A F1 F2 ]A", "_a")
        .strand("b", "[A G1<F1:c:sigma F3 ]A", "_b")
        .strand("c", "[A G2<F2:c:sigma G3<F3:b:sigma ]A", "out"));
    d.gates.push(crate::diagram::GateRecord {
        kind: GateKind::Difference,
        scale: ScaleExpr::var("sigma"),
        nodes: ["F1", "G1", "F2", "G2", "F3", "G3"].iter().map(|s| s.to_string()).collect(),
        base: "A_e1:out".into(),
        params: vec!["A_e3:out".into(), "A_e5:out".into()],
        output: "G3:out".into(),
    });
    d
}

/// Diagrams with nested choroi, each satisfying the hypothesis of the
/// chora normalizer.
pub fn nested_corpus() -> Vec<Diagram> {
    let bx = "circ[eps](x,p)";
    let by = "circ[mu](circ[eps](x,p),circ[eps](x,q))";
    vec![
        sk(Sketch::new("nested-simple")
            .chora("A", "x", "eps")
            .chora("B", bx, "mu")
            .strand("p", "[A ]A", "_p")
            .strand("u", "[A [B F1 ]B ]A", "_u")
            .strand("v", "[A [B G1<F1:c:lam ]B ]A", "out")),
        sk(Sketch::new("nested-side-crossing")
            .chora("A", "x", "eps")
            .chora("B", bx, "mu")
            .strand("p", "[A ]A", "_p")
            .strand("u", "[A F2 [B F1 ]B ]A", "_u")
            .strand("v", "[A [B G1<F1:c:lam ]B G2<F2:b:nu ]A", "out")),
        sk(Sketch::new("three-choroi")
            .chora("A", "x", "eps")
            .chora("B", bx, "mu")
            .chora("C", by, "lam")
            .strand("p", "[A ]A", "_p")
            .strand("q", "[A [B ]B ]A", "_q")
            .strand("u", "[A [B F2 [C F1 ]C ]B ]A", "_u")
            .strand("v", "[A [B [C G1<F1:c:nu ]C G2<F2:c:nu ]B ]A", "out")),
        sk(Sketch::new("siblings")
            .chora("A", "x", "eps")
            .chora("B1", bx, "mu")
            .chora("B2", "circ[eps](x,q)", "lam")
            .strand("p", "[A ]A", "_p")
            .strand("q", "[A ]A", "_q")
            .strand("u", "[A [B1 F1 ]B1 [B2 F2 ]B2 ]A", "_u")
            .strand("v", "[A [B1 G1<F1:c:nu ]B1 [B2 G2<F2:b:nu ]B2 ]A", "out")),
        sk(Sketch::new("two-crossings")
            .chora("A", "x", "eps")
            .strand("u", "[A F1 F2 ]A", "_u")
            .strand("v", "[A G1<F1:c:mu ]A", "_v")
            .strand("w", "[A G2<F2:c:lam ]A", "out")),
        sk(Sketch::new("inner-tadpole")
            .chora("A", "x", "eps")
            .strand("u", "[A F1 G1<F1:c:mu ]A", "out")),
        sk(Sketch::new("void-chora")
            .chora("A", "x", "eps")
            .strand("u", "[A ]A", "_u")
            .strand("v", "[A ]A", "out")),
        sk(Sketch::new("three-levels-busy")
            .chora("A", "x", "eps")
            .chora("B", bx, "mu")
            .chora("C", by, "lam")
            .strand("p", "[A F4 ]A", "_p")
            .strand("q", "[A [B ]B ]A", "_q")
            .strand("u", "[A [B F2 [C F1 ]C ]B ]A", "_u")
            .strand("v", "[A [B [C G1<F1:c:nu ]C G2<F2:b:mu ]B G4<F4:c:nu ]A", "out")),
        sk(Sketch::new("param-with-fan")
            .chora("A", "x", "eps")
            .chora("B", bx, "mu")
            .strand("p", "[A F3 ]A", "_p")
            .strand("u", "[A [B F1 ]B ]A", "_u")
            .strand("v", "[A [B G1<F1:b:lam ]B ]A", "_v")
            .strand("w", "[A G3<F3:c:nu ]A", "out")),
        sk(Sketch::new("inner-two-crossings")
            .chora("A", "x", "eps")
            .chora("B", bx, "mu")
            .strand("p", "[A ]A", "_p")
            .strand("u", "[A [B F1 F2 ]B ]A", "_u")
            .strand("v", "[A [B G1<F1:c:lam ]B ]A", "_v")
            .strand("w", "[A [B G2<F2:c:nu ]B ]A", "out")),
        sk(Sketch::new("reentrant-strand")
            .chora("A", "x", "eps")
            .chora("B", bx, "mu")
            .strand("p", "[A ]A", "_p")
            .strand("u", "[A [B F1 ]B [B F2 ]B ]A", "_u")
            .strand("v", "[A [B G1<F1:c:lam G2<F2:c:nu ]B ]A", "out")),
        sk(Sketch::new("two-outer")
            .chora("A", "x", "eps")
            .chora("B", bx, "mu")
            .chora("D", "y", "lam")
            .strand("p", "[A ]A", "_p")
            .strand("u", "[A [B F1 ]B ]A [D F3 ]D", "_u")
            .strand("v", "[A [B G1<F1:c:nu ]B ]A [D G3<F3:b:nu ]D", "out")),
    ]
}

/// Every fixture, keyed by its file stem.
pub fn fixtures() -> Vec<(String, Diagram)> {
    let mut out: Vec<(String, Diagram)> = vec![
        ("crossing".into(), build_crossing(false, eps())),
        ("crossing-bullet".into(), build_crossing(true, eps())),
        ("diffgate".into(), make_gate(GateKind::Difference, &eps())),
        ("sumgate".into(), make_gate(GateKind::Sum, &eps())),
        ("invgate".into(), make_gate(GateKind::Inverse, &eps())),
        ("eps-fan-out".into(), make_gate(GateKind::EpsFanOut, &eps())),
        ("chora".into(), elementary_chora()),
        ("diff-in-chora".into(), difference_in_chora()),
        ("r3-site".into(), build_r3_site()),
    ];
    for d in nested_corpus() {
        out.push((format!("nested/{}", d.name), d));
    }
    out
}

fn space_json(labels: &[&str], d: &[&[f64]]) -> serde_json::Value {
    serde_json::json!({"points": labels, "d": d})
}

/// Every file of the `fixtures/` directory as (relative path, contents):
/// the diagrams above and small metric spaces and relations for the atlas.
pub fn fixture_files() -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = fixtures()
        .into_iter()
        .map(|(name, d)| (format!("{name}.json"), d.to_json() + "\n"))
        .collect();
    let atlas = [
        ("segment-1", space_json(&["a", "b"], &[&[0.0, 1.0], &[1.0, 0.0]])),
        ("segment-1.4", space_json(&["a", "b"], &[&[0.0, 1.4], &[1.4, 0.0]])),
        (
            "triangle",
            space_json(&["p", "q", "r"], &[&[0.0, 1.0, 1.5], &[1.0, 0.0, 2.0], &[1.5, 2.0, 0.0]]),
        ),
        ("point", space_json(&["o"], &[&[0.0]])),
        (
            "stretch",
            serde_json::json!({"source": "segment-1.json", "target": "segment-1.4.json", "pairs": [["a", "a"], ["b", "b"]]}),
        ),
        (
            "collapse",
            serde_json::json!({"source": "triangle.json", "target": "point.json", "pairs": [["p", "o"], ["q", "o"], ["r", "o"]]}),
        ),
    ];
    for (name, v) in atlas {
        out.push((format!("atlas/{name}.json"), serde_json::to_string_pretty(&v).expect("json") + "\n"));
    }
    out
}

/// A random diagram of 2 to 4 strands and at most `max_crossings`
/// crossings (at least one). Crossings are appended at strand ends, so the
/// diagram is acyclic and therefore acceptable. Some crossings are
/// tadpoles, unit-scale crossings, or are followed by a second crossing
/// with the same base, which makes R2 and composition sites.
pub fn random_diagram<R: Rng + ?Sized>(rng: &mut R, max_crossings: usize) -> Diagram {
    const SCALES: [&str; 3] = ["eps", "mu", "lam"];
    let n = rng.gen_range(2..=4);
    let mut strands: Vec<Vec<String>> = vec![Vec::new(); n];
    let target = rng.gen_range(1..=max_crossings.max(1));
    let mut made = 0;
    while made < target {
        let over = rng.gen_range(0..n);
        let roll: f64 = rng.gen();
        let under = if roll < 0.15 { over } else { rng.gen_range(0..n) };
        let scale = if rng.gen_bool(0.1) { "1" } else { SCALES[rng.gen_range(0..3)] };
        let kind = if rng.gen_bool(0.5) { 'c' } else { 'b' };
        let (f, g) = (format!("F{made}"), format!("G{made}"));
        strands[over].push(f.clone());
        strands[under].push(format!("{g}<{f}:{kind}:{scale}"));
        made += 1;
        if over != under && made < target && rng.gen_bool(0.3) {
            let (kind2, scale2) = if rng.gen_bool(0.5) {
                (if kind == 'c' { 'b' } else { 'c' }, scale)
            } else {
                (kind, SCALES[rng.gen_range(0..3)])
            };
            let (f2, g2) = (format!("F{made}"), format!("G{made}"));
            strands[over].push(f2.clone());
            strands[under].push(format!("{g2}<{f2}:{kind2}:{scale2}"));
            made += 1;
        }
    }
    let mut s = Sketch::new("random");
    for (i, toks) in strands.iter().enumerate() {
        s = s.strand(&format!("x{i}"), &toks.join(" "), &format!("y{i}"));
    }
    sk(s)
}
