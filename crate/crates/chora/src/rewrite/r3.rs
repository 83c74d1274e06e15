//! The approximate third Reidemeister move inside a chora.
//!
//! Inside a chora `(x, e)` the left side of R3 is rewritten, exactly, as the
//! residue followed by the right side. The residue is the identity in linear
//! models and tends to the identity as `e -> 0` in general.

use std::collections::BTreeSet;

use crate::diagram::{ChoraRecord, Diagram, NodeKind, Port, WireRole};
use crate::scale::ScaleExpr;
use crate::terms::ColorTerm;

use super::work::{Anchor, Work};
use super::RewriteError;

/// The residue of an approximate R3 as a standalone diagram.
///
/// Inputs `u`, `v`, `w` (and the free variables of `base`); the residue acts
/// on `w` and is read from the output `out`. The outputs `_u` and `_v`
/// return `u` and `v` unchanged.
#[derive(Clone, Debug)]
pub struct ResidueRecord {
    pub diagram: Diagram,
    pub base: ColorTerm,
    pub eps: ScaleExpr,
    pub mu: ScaleExpr,
    pub lam: ScaleExpr,
}

fn chain(d: &mut Diagram, nodes: &[&str], closed: bool) -> Option<String> {
    let n = nodes.len();
    let pairs = if closed { n } else { n - 1 };
    let mut last = None;
    for i in 0..pairs {
        let (a, b) = (nodes[i], nodes[(i + 1) % n]);
        let pa = d.nodes[a].strand_out().unwrap();
        let pb = d.nodes[b].strand_in().unwrap();
        last = Some(d.connect((a, pa), (b, pb), WireRole::Segment));
    }
    last
}

struct Site<'a> {
    name: &'a str,
    base: ColorTerm,
    eps: ScaleExpr,
    /// (fan, gate, kind) in addition to the chora boundary
    crossings: Vec<(&'a str, &'a str, NodeKind)>,
    u: Vec<&'a str>,
    v: Vec<&'a str>,
    w: Vec<&'a str>,
}

fn build(s: Site) -> Diagram {
    let mut d = Diagram::new(s.name);
    d.declare_scale_vars(&s.eps);
    for (f, g, k) in &s.crossings {
        if let Some(sc) = k.gate_scale() {
            d.declare_scale_vars(sc);
        }
        d.add_node(f, NodeKind::FanOut);
        d.add_node(g, k.clone());
    }
    let mut interior: BTreeSet<String> = BTreeSet::new();
    for (f, g, _) in &s.crossings {
        interior.insert(f.to_string());
        interior.insert(g.to_string());
    }
    let mut loop_nodes = Vec::new();
    for (strand, body, out) in [("u", &s.u, "_u"), ("v", &s.v, "_v"), ("w", &s.w, "out")] {
        let (i, o) = (format!("i_{strand}"), format!("o_{strand}"));
        let (en, ex) = (format!("E{strand}"), format!("X{strand}"));
        let (fen, fex) = (format!("fE{strand}"), format!("fX{strand}"));
        d.add_node(&i, NodeKind::Input(strand.into()));
        d.add_node(&o, NodeKind::Output(out.into()));
        d.add_node(&en, NodeKind::Circ(s.eps.clone()));
        d.add_node(&ex, NodeKind::Bullet(s.eps.clone()));
        d.add_node(&fen, NodeKind::FanOut);
        d.add_node(&fex, NodeKind::FanOut);
        d.connect((&fen, Port::OutChord), (&en, Port::InBase), WireRole::Chord);
        d.connect((&fex, Port::OutChord), (&ex, Port::InBase), WireRole::Chord);
        loop_nodes.push(fen);
        loop_nodes.push(fex);
        let mut seq: Vec<&str> = vec![&i, &en];
        seq.extend(body.iter().copied());
        seq.push(&ex);
        seq.push(&o);
        chain(&mut d, &seq, false);
    }
    for (f, g, _) in &s.crossings {
        d.connect((f, Port::OutChord), (g, Port::InBase), WireRole::Chord);
    }
    let refs: Vec<&str> = loop_nodes.iter().map(String::as_str).collect();
    let closing = chain(&mut d, &refs, true).unwrap();
    d.decorations.insert(closing.clone(), s.base.clone());
    for v in s.base.scale_vars() {
        d.scales.entry(v).or_insert(crate::diagram::ScaleDecl::Var);
    }
    d.choroi.push(ChoraRecord {
        boundary: closing,
        base: s.base,
        scale: s.eps,
        interior,
    });
    d
}

/// A chora `(x, eps)` holding the left side of R3: `v` over `w` at `lam`,
/// then `u` over `v` and `u` over `w` at `mu`.
pub fn build_r3_site() -> Diagram {
    let (mu, lam) = (ScaleExpr::var("mu"), ScaleExpr::var("lam"));
    build(Site {
        name: "r3-site",
        base: ColorTerm::var("x"),
        eps: ScaleExpr::var("eps"),
        crossings: vec![
            ("F1", "G1", NodeKind::Circ(lam)),
            ("F2", "G2", NodeKind::Circ(mu.clone())),
            ("F3", "G3", NodeKind::Circ(mu)),
        ],
        u: vec!["F2", "F3"],
        v: vec!["F1", "G2"],
        w: vec!["G1", "G3"],
    })
}

fn residue_diagram(base: ColorTerm, eps: ScaleExpr, mu: ScaleExpr, lam: ScaleExpr) -> Diagram {
    build(Site {
        name: "r3-residue",
        base,
        eps,
        crossings: vec![
            ("F1", "G1", NodeKind::Circ(lam.clone())),
            ("F2", "G2", NodeKind::Circ(mu.clone())),
            ("F3", "G3", NodeKind::Circ(mu.clone())),
            ("F4", "G4", NodeKind::Bullet(lam)),
            ("F5", "G5", NodeKind::Bullet(mu.clone())),
            ("F6", "G6", NodeKind::Bullet(mu)),
        ],
        u: vec!["F2", "F3", "F5", "F6"],
        v: vec!["F1", "G2", "F4", "G6"],
        w: vec!["G1", "G3", "G4", "G5"],
    })
}

fn circ_scale(k: &NodeKind) -> Option<&ScaleExpr> {
    match k {
        NodeKind::Circ(s) => Some(s),
        _ => None,
    }
}

/// Rewrites the left side of R3 inside chora `idx` as the residue followed
/// by the right side, and returns the residue separately.
pub fn approx_r3(d: &Diagram, idx: usize) -> Result<(Diagram, ResidueRecord), RewriteError> {
    let mut w = Work::from_diagram(d)?;
    let c = w
        .choroi
        .get(idx)
        .cloned()
        .ok_or_else(|| RewriteError::SiteMismatch(format!("no chora #{idx}")))?;
    let bad = || RewriteError::SiteMismatch("chora does not hold the left side of R3".into());
    let gates: Vec<String> = c.interior.iter().filter(|n| w.kinds[*n].is_gate()).cloned().collect();
    if gates.len() != 3 || c.interior.len() != 6 {
        return Err(bad());
    }
    // on the w strand the lambda gate comes before the second mu gate
    let pos = |n: &str| w.locate(n).unwrap();
    let mut found = None;
    for a in &gates {
        for b in &gates {
            let (pa, pb) = (pos(a), pos(b));
            if a != b && pa.0 == pb.0 && pa.1 < pb.1 {
                found = Some((a.clone(), b.clone()));
            }
        }
    }
    let (g1, g3) = found.ok_or_else(bad)?;
    let g2 = gates.iter().find(|g| **g != g1 && **g != g3).unwrap().clone();
    let fan = |g: &str| w.fan_of(g).map(str::to_string).ok_or_else(bad);
    let (f1, f2, f3) = (fan(&g1)?, fan(&g2)?, fan(&g3)?);
    let (lam, mu, mu3) = (
        circ_scale(&w.kinds[&g1]).ok_or_else(bad)?.clone(),
        circ_scale(&w.kinds[&g2]).ok_or_else(bad)?.clone(),
        circ_scale(&w.kinds[&g3]).ok_or_else(bad)?.clone(),
    );
    let (sv, su) = (pos(&f1).0, pos(&f2).0);
    let ok = mu == mu3
        && pos(&g2).0 == sv
        && pos(&f1).1 < pos(&g2).1
        && pos(&f3).0 == su
        && su != sv
        && su != pos(&g1).0
        && sv != pos(&g1).0;
    if !ok {
        return Err(bad());
    }
    let (fn1, n1) = w.add_crossing(NodeKind::Bullet(lam.clone()), Anchor::After(&g2), Anchor::After(&g3))?;
    let (fn2, n2) = w.add_crossing(NodeKind::Bullet(mu.clone()), Anchor::After(&f3), Anchor::After(&n1))?;
    let (fn3, n3) = w.add_crossing(NodeKind::Circ(mu.clone()), Anchor::After(&fn2), Anchor::After(&n2))?;
    let (fn4, n4) = w.add_crossing(NodeKind::Circ(lam.clone()), Anchor::After(&fn1), Anchor::After(&n3))?;
    let new = [fn1, n1, fn2, n2, fn3, n3, fn4, n4];
    for j in w.choroi_containing(&g1) {
        w.choroi[j].interior.extend(new.iter().cloned());
    }
    let out = w.finish()?;
    let residue = ResidueRecord {
        diagram: residue_diagram(c.base.clone(), c.scale.clone(), mu.clone(), lam.clone()),
        base: c.base,
        eps: c.scale,
        mu,
        lam,
    };
    Ok((out, residue))
}
