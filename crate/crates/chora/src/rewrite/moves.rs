//! Local moves on crossings.

use crate::diagram::{Diagram, Endpoint, NodeKind, Port};
use crate::evaluate::symbolic_colors;
use crate::scale::ScaleExpr;

use super::work::{Anchor, Work};
use super::RewriteError;

fn mismatch(msg: impl Into<String>) -> RewriteError {
    RewriteError::SiteMismatch(msg.into())
}

fn gate_kind<'a>(w: &'a Work, g: &str) -> Result<&'a NodeKind, RewriteError> {
    match w.kind(g) {
        Some(k) if k.is_gate() => Ok(k),
        _ => Err(mismatch(format!("`{g}` is not a gate"))),
    }
}

/// True when the two fan-outs sit on one strand with only fan-outs between.
fn same_base(w: &Work, f1: &str, f2: &str) -> bool {
    let (Some((s1, p1)), Some((s2, p2))) = (w.locate(f1), w.locate(f2)) else {
        return false;
    };
    if s1 != s2 {
        return false;
    }
    let nodes = &w.strands[&s1].nodes;
    let between = |a: usize, b: usize| nodes[a + 1..b].iter().all(|n| w.kinds[n] == NodeKind::FanOut);
    let open_ok = if p1 < p2 { between(p1, p2) } else { between(p2, p1) };
    if open_ok {
        return true;
    }
    if w.strands[&s1].closed {
        // around the loop the other way
        let (a, b) = if p1 < p2 { (p2, p1) } else { (p1, p2) };
        nodes[a + 1..].iter().chain(&nodes[..b]).all(|n| w.kinds[n] == NodeKind::FanOut)
    } else {
        false
    }
}

/// Decorations on open wires leaving any of `nodes`.
fn check_orphans(w: &Work, nodes: &[&str]) -> Result<(), RewriteError> {
    for ep in w.open_decorations.keys() {
        if nodes.contains(&ep.node.as_str()) {
            return Err(RewriteError::WouldOrphanDecoration(ep.wire_id()));
        }
    }
    Ok(())
}

/// Removes a tadpole: a crossing whose fan-out feeds its own gate operand.
pub fn r1(d: &Diagram, gate: &str) -> Result<Diagram, RewriteError> {
    let mut w = Work::from_diagram(d)?;
    gate_kind(&w, gate)?;
    let f = w.fan_of(gate).ok_or_else(|| mismatch("gate has no fan-out"))?.to_string();
    if w.prev_node(gate).as_deref() != Some(f.as_str()) {
        return Err(mismatch("not a tadpole: the fan-out does not feed the gate operand"));
    }
    check_orphans(&w, &[&f, gate])?;
    w.remove_crossing(gate);
    w.finish()
}

fn adjacent_pair(w: &Work, g1: &str, g2: &str) -> Result<(String, String), RewriteError> {
    gate_kind(w, g1)?;
    gate_kind(w, g2)?;
    if w.next_node(g1).as_deref() != Some(g2) {
        return Err(mismatch(format!("`{g1}` does not feed `{g2}` directly")));
    }
    let f1 = w.fan_of(g1).ok_or_else(|| mismatch("gate has no fan-out"))?.to_string();
    let f2 = w.fan_of(g2).ok_or_else(|| mismatch("gate has no fan-out"))?.to_string();
    if !same_base(w, &f1, &f2) {
        return Err(mismatch("the two crossings do not share a base value"));
    }
    Ok((f1, f2))
}

/// Cancels two consecutive crossings with a common base and inverse scales.
pub fn r2(d: &Diagram, g1: &str, g2: &str) -> Result<Diagram, RewriteError> {
    let mut w = Work::from_diagram(d)?;
    let (f1, f2) = adjacent_pair(&w, g1, g2)?;
    let e1 = w.kinds[g1].effective_scale().unwrap();
    let e2 = w.kinds[g2].effective_scale().unwrap();
    if !e1.mul(&e2).is_one() {
        return Err(RewriteError::ScaleMismatch(format!("{e1} and {e2} do not cancel")));
    }
    check_orphans(&w, &[&f1, &f2, g1, g2])?;
    w.remove_crossing(g1);
    w.remove_crossing(g2);
    w.finish()
}

/// Merges two consecutive crossings with a common base into one.
pub fn compose(d: &Diagram, g1: &str, g2: &str) -> Result<Diagram, RewriteError> {
    let mut w = Work::from_diagram(d)?;
    let (_, f2) = adjacent_pair(&w, g1, g2)?;
    check_orphans(&w, &[g1, &f2, g2])?;
    let merged = match (&w.kinds[g1], &w.kinds[g2]) {
        (NodeKind::Bullet(a), NodeKind::Bullet(b)) => NodeKind::Bullet(a.mul(b)),
        (k1, k2) => NodeKind::Circ(k1.effective_scale().unwrap().mul(&k2.effective_scale().unwrap())),
    };
    w.kinds.insert(g1.to_string(), merged);
    w.remove_crossing(g2);
    w.finish()
}

/// Inserts a unit-scale crossing: `over` is cut by a new fan-out whose chord
/// feeds a new gate cutting `under`.
pub fn virtual_insert(d: &Diagram, over: &str, under: &str) -> Result<Diagram, RewriteError> {
    let mut w = Work::from_diagram(d)?;
    let wo = d.wires.get(over).ok_or_else(|| mismatch(format!("no wire `{over}`")))?;
    let wu = d.wires.get(under).ok_or_else(|| mismatch(format!("no wire `{under}`")))?;
    if wo.role != crate::diagram::WireRole::Segment || wu.role != crate::diagram::WireRole::Segment {
        return Err(mismatch("virtual crossings cut segment wires"));
    }
    let (fo, fu) = (wo.from.node.clone(), wu.from.node.clone());
    let (f, g) = (w.fresh("vf"), w.fresh("vg"));
    w.kinds.insert(f.clone(), NodeKind::FanOut);
    w.kinds.insert(g.clone(), NodeKind::Circ(ScaleExpr::one()));
    w.chords.insert(f.clone(), g.clone());
    w.place(&f, Anchor::After(&fo))?;
    // if both wires are the same, the gate goes after the new fan-out
    let ga = if over == under { f.clone() } else { fu };
    w.place(&g, Anchor::After(&ga))?;
    w.finish()
}

/// Removes a unit-scale crossing.
pub fn virtual_remove(d: &Diagram, gate: &str) -> Result<Diagram, RewriteError> {
    let mut w = Work::from_diagram(d)?;
    let k = gate_kind(&w, gate)?;
    if !k.gate_scale().unwrap().is_one() {
        return Err(RewriteError::ScaleMismatch("virtual crossings have scale 1".into()));
    }
    let f = w.fan_of(gate).ok_or_else(|| mismatch("gate has no fan-out"))?.to_string();
    check_orphans(&w, &[&f, gate])?;
    w.remove_crossing(gate);
    w.finish()
}

/// Exchanges the targets of two segment wires carrying equal colors.
pub fn w1(d: &Diagram, a: &str, b: &str) -> Result<Diagram, RewriteError> {
    if a == b {
        return Err(mismatch("W1 needs two distinct wires"));
    }
    let colors = symbolic_colors(d).map_err(|e| mismatch(e.to_string()))?;
    let ca = colors.colors().get(a).ok_or_else(|| mismatch(format!("no color for `{a}`")))?;
    let cb = colors.colors().get(b).ok_or_else(|| mismatch(format!("no color for `{b}`")))?;
    if !ca.equal_modulo(cb) {
        return Err(mismatch("the wires carry different colors"));
    }
    let mut w = Work::from_diagram(d)?;
    let (wa, wb) = (&d.wires[a], &d.wires[b]);
    if wa.role != crate::diagram::WireRole::Segment || wb.role != crate::diagram::WireRole::Segment {
        return Err(mismatch("W1 acts on segment wires"));
    }
    let (na, nb) = (wa.from.node.clone(), wb.from.node.clone());
    let (sa, pa) = w.locate(&na).unwrap();
    let (sb, pb) = w.locate(&nb).unwrap();
    let loop_color = ca.clone();
    if sa != sb {
        let (ta, tb) = (w.strands[&sa].clone(), w.strands[&sb].clone());
        let cut = |s: &super::work::Strand, p: usize| -> (Vec<String>, Vec<String>) {
            if s.closed {
                // open the loop just after p: head is the whole loop from p+1 round to p
                let mut v = s.nodes.clone();
                v.rotate_left(p + 1);
                (v, Vec::new())
            } else {
                (s.nodes[..=p].to_vec(), s.nodes[p + 1..].to_vec())
            }
        };
        let (ha, xa) = cut(&ta, pa);
        let (hb, xb) = cut(&tb, pb);
        match (ta.closed, tb.closed) {
            (false, false) => {
                w.strands.get_mut(&sa).unwrap().nodes = [ha, xb].concat();
                w.strands.get_mut(&sb).unwrap().nodes = [hb, xa].concat();
            }
            (true, false) => {
                // the loop is spliced into b's strand
                w.strands.get_mut(&sb).unwrap().nodes = [hb, ha, xb].concat();
                w.strands.remove(&sa);
                w.choroi.retain(|c| c.strand != sa);
            }
            (false, true) => {
                w.strands.get_mut(&sa).unwrap().nodes = [ha, hb, xa].concat();
                w.strands.remove(&sb);
                w.choroi.retain(|c| c.strand != sb);
            }
            (true, true) => {
                let s = w.strands.get_mut(&sa).unwrap();
                s.nodes = [ha, hb].concat();
                w.strands.remove(&sb);
                w.choroi.retain(|c| c.strand != sb);
            }
        }
    } else {
        let s = w.strands[&sa].clone();
        let (p, q) = if pa < pb { (pa, pb) } else { (pb, pa) };
        let middle = s.nodes[p + 1..=q].to_vec();
        let rest: Vec<String> = s.nodes[..=p].iter().chain(&s.nodes[q + 1..]).cloned().collect();
        if rest.is_empty() || middle.is_empty() {
            return Err(mismatch("W1 would leave an empty strand"));
        }
        w.strands.get_mut(&sa).unwrap().nodes = rest;
        if middle.iter().any(|n| !matches!(w.kinds[n], NodeKind::FanOut)) {
            return Err(mismatch("W1 would close a loop through a gate"));
        }
        w.new_strand(middle, true, Some(loop_color));
    }
    w.finish()
}

/// Reverses a closed loop made only of fan-outs, turning each of its
/// crossings into the opposite kind at the inverse scale.
pub fn w2(d: &Diagram, wire: &str) -> Result<Diagram, RewriteError> {
    let mut w = Work::from_diagram(d)?;
    let x = d.wires.get(wire).ok_or_else(|| mismatch(format!("no wire `{wire}`")))?;
    let (sid, _) = w.locate(&x.from.node).ok_or_else(|| mismatch("wire is not on a strand"))?;
    let s = w.strands[&sid].clone();
    if !s.closed {
        return Err(mismatch("W2 acts on closed arcs"));
    }
    if s.nodes.iter().any(|n| w.kinds[n] != NodeKind::FanOut) {
        return Err(mismatch("the arc is not purely over"));
    }
    let gates: Vec<String> = s.nodes.iter().filter_map(|f| w.gate_of(f).map(str::to_string)).collect();
    for g in gates {
        let flipped = match &w.kinds[&g] {
            NodeKind::Circ(e) => NodeKind::Bullet(e.inv()),
            NodeKind::Bullet(e) => NodeKind::Circ(e.inv()),
            _ => unreachable!(),
        };
        w.kinds.insert(g, flipped);
    }
    w.strands.get_mut(&sid).unwrap().nodes.reverse();
    w.choroi.retain(|c| c.strand != sid);
    w.finish()
}

/// Gate ids forming tadpoles, for move enumeration.
pub fn r1_sites(d: &Diagram) -> Vec<String> {
    let ix = d.index();
    d.crossings()
        .into_iter()
        .filter(|(f, g)| {
            ix.by_from
                .get(&Endpoint::new(f, Port::OutThrough))
                .is_some_and(|w| d.wires[w].to == Endpoint::new(g, Port::InOperand))
        })
        .map(|(_, g)| g)
        .collect()
}

/// Consecutive gate pairs `(g1, g2)` with `g1` feeding `g2`'s operand.
pub fn consecutive_gates(d: &Diagram) -> Vec<(String, String)> {
    let ix = d.index();
    let mut out = Vec::new();
    for (id, k) in &d.nodes {
        if !k.is_gate() {
            continue;
        }
        if let Some(w) = ix.by_from.get(&Endpoint::new(id, Port::Out)) {
            let t = &d.wires[w].to;
            if t.port == Port::InOperand && d.nodes.get(&t.node).is_some_and(NodeKind::is_gate) {
                out.push((id.clone(), t.node.clone()));
            }
        }
    }
    out
}
