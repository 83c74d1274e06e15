//! Decomposition of choroi into difference-family gates.
//!
//! A chora with base `x` and scale `e` is a closed loop of fan-outs whose
//! chords enter the region with `circ e` gates and leave it with `bullet e`
//! gates. Each strand crossing the region is cut into segments
//! `entry .. exit`.

use std::collections::{BTreeMap, BTreeSet};

use crate::diagram::{Diagram, GateKind, GateRecord, NodeKind};
use crate::evaluate::symbolic_colors;
use crate::terms::ColorTerm;

use super::work::{Anchor, ChoraW, Work};
use super::RewriteError;

#[derive(Clone, Debug)]
struct Segment {
    strand: usize,
    entry: String,
    exit: String,
    between: Vec<String>,
}

fn site(msg: impl Into<String>) -> RewriteError {
    RewriteError::SiteMismatch(msg.into())
}

fn hyp(msg: impl Into<String>) -> RewriteError {
    RewriteError::HypothesisViolated(msg.into())
}

fn chora(w: &Work, idx: usize) -> Result<ChoraW, RewriteError> {
    w.choroi.get(idx).cloned().ok_or_else(|| site(format!("no chora #{idx}")))
}

fn loop_fans(w: &Work, idx: usize) -> Vec<String> {
    w.strands[&w.choroi[idx].strand].nodes.clone()
}

/// Gates paired with the fan-outs of a chora loop, with their entry flag.
fn boundary_gates(w: &Work, idx: usize) -> Result<BTreeMap<String, bool>, RewriteError> {
    let mut out = BTreeMap::new();
    for f in loop_fans(w, idx) {
        let g = w.gate_of(&f).ok_or_else(|| site(format!("loop fan-out `{f}` has no chord")))?;
        let entry = match &w.kinds[g] {
            NodeKind::Circ(_) => true,
            NodeKind::Bullet(_) => false,
            _ => return Err(site(format!("`{g}` is not a gate"))),
        };
        out.insert(g.to_string(), entry);
    }
    Ok(out)
}

fn segments(w: &Work, idx: usize) -> Result<Vec<Segment>, RewriteError> {
    let bounds = boundary_gates(w, idx)?;
    let mut seen = 0;
    let mut segs = Vec::new();
    for (sid, s) in &w.strands {
        let on: Vec<&String> = s.nodes.iter().filter(|n| bounds.contains_key(*n)).collect();
        if on.is_empty() {
            continue;
        }
        if s.closed {
            return Err(hyp("a chora boundary gate sits on a closed strand"));
        }
        let mut open: Option<(String, Vec<String>)> = None;
        for n in &s.nodes {
            match (bounds.get(n), open.take()) {
                (Some(true), None) => open = Some((n.clone(), Vec::new())),
                (Some(false), Some((entry, between))) => {
                    seen += 2;
                    segs.push(Segment {
                        strand: *sid,
                        entry,
                        exit: n.clone(),
                        between,
                    });
                }
                (Some(_), _) => return Err(hyp(format!("strand enters or leaves the chora out of turn at `{n}`"))),
                (None, Some((entry, mut between))) => {
                    between.push(n.clone());
                    open = Some((entry, between));
                }
                (None, None) => {}
            }
        }
        if open.is_some() {
            return Err(hyp("strand enters the chora and never leaves"));
        }
    }
    if seen != bounds.len() {
        return Err(hyp("unmatched chora boundary gates"));
    }
    Ok(segs)
}

fn colors(w: &Work) -> BTreeMap<String, ColorTerm> {
    symbolic_colors(&w.to_diagram())
        .map(|p| p.colors().clone())
        .unwrap_or_default()
}

/// Crossings with both ends in the chora interior, as (fan, gate).
fn interior_crossings(w: &Work, c: &ChoraW) -> Vec<(String, String)> {
    w.chords
        .iter()
        .filter(|(f, g)| c.interior.contains(*f) && c.interior.contains(*g))
        .map(|(f, g)| (f.clone(), g.clone()))
        .collect()
}

/// Choroi whose loops lie inside chora `idx` and inside no other such chora.
fn direct_children(w: &Work, idx: usize) -> Vec<usize> {
    let inside = |outer: usize, inner: usize| {
        let fans = loop_fans(w, inner);
        !fans.is_empty() && fans.iter().all(|f| w.choroi[outer].interior.contains(f))
    };
    let kids: Vec<usize> = (0..w.choroi.len()).filter(|&j| j != idx && inside(idx, j)).collect();
    kids.iter()
        .copied()
        .filter(|&j| !kids.iter().any(|&k| k != j && inside(k, j)))
        .collect()
}

/// Choroi enclosing chora `idx`.
fn enclosing(w: &Work, idx: usize) -> Vec<usize> {
    let fans = loop_fans(w, idx);
    (0..w.choroi.len())
        .filter(|&j| j != idx && fans.iter().any(|f| w.choroi[j].interior.contains(f)))
        .collect()
}

fn adopt(w: &mut Work, into: &[usize], nodes: &[String]) {
    for &j in into {
        w.choroi[j].interior.extend(nodes.iter().cloned());
    }
}

fn fan(w: &Work, g: &str) -> String {
    w.fan_of(g).expect("gate has a fan-out").to_string()
}

fn set(ids: &[&String]) -> BTreeSet<String> {
    ids.iter().map(|s| s.to_string()).collect()
}

/// Removes the entry and exit crossings of segments with nothing inside.
fn drop_empty_passes(w: &mut Work, segs: &[Segment], keep: Option<usize>) {
    for (i, s) in segs.iter().enumerate() {
        if s.between.is_empty() && Some(i) != keep {
            let before = w.wire_before(&s.entry).expect("an entry gate has a predecessor");
            w.redirect(&w.wire_after(&s.entry), &before);
            w.redirect(&w.wire_after(&s.exit), &before);
            w.remove_crossing(&s.entry);
            w.remove_crossing(&s.exit);
        }
    }
}

fn difference_record(w: &Work, e_base: &str, e_op: &str, fa: &str, ga: &str, scale: &crate::scale::ScaleExpr) -> GateRecord {
    let (fb, fo) = (fan(w, e_base), fan(w, e_op));
    GateRecord {
        kind: GateKind::Difference,
        scale: scale.clone(),
        nodes: set(&[&fb, &e_base.to_string(), &fo, &e_op.to_string(), &fa.to_string(), &ga.to_string()]),
        base: w.wire_after(&fb),
        params: vec![w.wire_before(e_base).unwrap(), w.wire_before(e_op).unwrap()],
        output: w.wire_after(ga),
    }
}

/// Sum record read as a reversed difference: the gate `gb`, then the exit
/// of the operand strand `x_op`, then the exit of the base strand `x_base`.
fn sum_record(
    w: &Work,
    e_base: &str,
    x_base: &str,
    fb: &str,
    gb: &str,
    x_op: &str,
    operand: String,
    scale: &crate::scale::ScaleExpr,
) -> GateRecord {
    let (fxb, fxo) = (fan(w, x_base), fan(w, x_op));
    GateRecord {
        kind: GateKind::Sum,
        scale: scale.clone(),
        nodes: set(&[&fb.to_string(), &gb.to_string(), &fxo, &x_op.to_string(), &fxb, &x_base.to_string()]),
        base: w.wire_after(&fxb),
        params: vec![w.wire_before(e_base).unwrap(), operand],
        output: w.wire_after(x_op),
    }
}

/// Rewrites an elementary chora (one crossing inside) as a difference, a
/// sum and the bare crossing. The second presentation uses the inverse scale
/// with the roles of the inserted gates swapped.
pub fn elementary_chora_decompose(d: &Diagram, idx: usize, second: bool) -> Result<Diagram, RewriteError> {
    let mut w = Work::from_diagram(d)?;
    let c = chora(&w, idx)?;
    if !direct_children(&w, idx).is_empty() {
        return Err(site("chora has a nested chora"));
    }
    let xs = interior_crossings(&w, &c);
    let [(fc, gc)] = xs.as_slice() else {
        return Err(site(format!("chora holds {} crossings, not one", xs.len())));
    };
    if c.interior != set(&[fc, gc]) {
        return Err(site("chora interior holds more than its crossing"));
    }
    let segs = segments(&w, idx)?;
    let find = |n: &String| segs.iter().find(|s| s.between == [n.clone()]).cloned();
    let (Some(sb), Some(st)) = (find(fc), find(gc)) else {
        return Err(site("the crossing must join two separate passes through the chora"));
    };
    if segs.iter().any(|s| !s.between.is_empty() && s.between != [fc.clone()] && s.between != [gc.clone()]) {
        return Err(site("unexpected pass through the chora"));
    }
    let eps = c.scale.clone();
    let (k1, k2) = if second {
        (NodeKind::Circ(eps.inv()), NodeKind::Bullet(eps.inv()))
    } else {
        (NodeKind::Bullet(eps.clone()), NodeKind::Circ(eps.clone()))
    };
    let outer = enclosing(&w, idx);
    let (f1, g1) = w.add_crossing(k1, Anchor::Before(fc), Anchor::Before(gc))?;
    let (f2, g2) = w.add_crossing(k2, Anchor::After(fc), Anchor::After(gc))?;
    adopt(&mut w, &outer, &[f1.clone(), g1.clone(), f2.clone(), g2.clone()]);
    w.declare(&eps.inv());
    let delta = difference_record(&w, &sb.entry, &st.entry, &f1, &g1, &eps);
    let sum = sum_record(&w, &sb.entry, &sb.exit, &f2, &g2, &st.exit, w.wire_after(gc), &eps);
    w.gates.push(delta);
    w.gates.push(sum);
    drop_empty_passes(&mut w, &segs, None);
    w.choroi.remove(idx);
    w.finish()
}

/// Rewrites a chora holding exactly one nested chora as the inner chora with
/// the product scale, surrounded by difference and sum gates that carry the
/// strands into the outer coordinates.
pub fn chora_in_chora(d: &Diagram, idx: usize) -> Result<Diagram, RewriteError> {
    let mut w = Work::from_diagram(d)?;
    let c1 = chora(&w, idx)?;
    let kids = direct_children(&w, idx);
    let [j] = kids.as_slice() else {
        return Err(site(format!("chora has {} nested choroi, not one", kids.len())));
    };
    let c2 = w.choroi[*j].clone();
    let inner_bounds = boundary_gates(&w, *j)?;
    let mut allowed = c2.interior.clone();
    allowed.extend(loop_fans(&w, *j));
    allowed.extend(inner_bounds.keys().cloned());
    if let Some(n) = c1.interior.iter().find(|n| !allowed.contains(*n)) {
        return Err(site(format!("`{n}` lies in the outer chora but outside the inner one")));
    }
    let segs = segments(&w, idx)?;
    let col = colors(&w);
    let pi = segs
        .iter()
        .position(|s| {
            s.between.iter().all(|n| w.kinds[n] == NodeKind::FanOut)
                && col.get(&w.wire_after(&s.entry)).is_some_and(|t| t.equal_modulo(&c2.base))
        })
        .ok_or_else(|| site("no strand carries the inner base through the outer chora"))?;
    let p = segs[pi].clone();
    let eps = c1.scale.clone();
    let mu = c2.scale.clone();
    let prod = eps.mul(&mu);
    w.declare(&prod);
    let outer = enclosing(&w, idx);
    let l1 = c1.strand;
    let mut added: Vec<String> = Vec::new();
    let mut records = Vec::new();
    for (si, s) in segs.iter().enumerate() {
        if si == pi {
            continue;
        }
        let mut last_entry = s.entry.clone();
        for g in s.between.iter().filter(|n| inner_bounds.contains_key(*n)) {
            if inner_bounds[g] {
                w.kinds.insert(g.clone(), NodeKind::Circ(prod.clone()));
                let (fa, ga) = w.add_crossing(NodeKind::Bullet(eps.clone()), Anchor::After(&p.entry), Anchor::Before(g))?;
                added.extend([fa.clone(), ga.clone()]);
                let e = if w.prev_node(&ga).as_deref() == Some(last_entry.as_str()) {
                    last_entry.clone()
                } else {
                    let (fx, gx) = w.add_crossing(NodeKind::Bullet(eps.clone()), Anchor::LoopEnd(l1), Anchor::Before(&ga))?;
                    let (fe, ge) = w.add_crossing(NodeKind::Circ(eps.clone()), Anchor::LoopEnd(l1), Anchor::Before(&ga))?;
                    added.extend([fx, gx, fe, ge.clone()]);
                    ge
                };
                records.push(difference_record(&w, &p.entry, &e, &fa, &ga, &eps));
            } else {
                w.kinds.insert(g.clone(), NodeKind::Bullet(prod.clone()));
                let (fb, gb) = w.add_crossing(NodeKind::Circ(eps.clone()), Anchor::After(&p.entry), Anchor::After(g))?;
                added.extend([fb.clone(), gb.clone()]);
                let x = if w.next_node(&gb).as_deref() == Some(s.exit.as_str()) {
                    s.exit.clone()
                } else {
                    let (fx, gx) = w.add_crossing(NodeKind::Bullet(eps.clone()), Anchor::LoopEnd(l1), Anchor::After(&gb))?;
                    let (fe, ge) = w.add_crossing(NodeKind::Circ(eps.clone()), Anchor::LoopEnd(l1), Anchor::After(&gx))?;
                    added.extend([fx, gx.clone(), fe, ge.clone()]);
                    last_entry = ge;
                    gx
                };
                records.push(sum_record(&w, &p.entry, &p.exit, &fb, &gb, &x, w.wire_after(g), &eps));
            }
        }
    }
    adopt(&mut w, &outer, &added);
    w.gates.extend(records);
    drop_empty_passes(&mut w, &segs, Some(pi));
    w.choroi[*j].scale = prod;
    w.choroi.remove(idx);
    w.finish()
}

/// Rewrites a chora around a single difference gate as four differences, the
/// two crossings of the gate that leave its base strand and an elementary
/// chora around the last crossing.
pub fn difference_in_chora(d: &Diagram, idx: usize) -> Result<Diagram, RewriteError> {
    let mut w = Work::from_diagram(d)?;
    let c = chora(&w, idx)?;
    if !direct_children(&w, idx).is_empty() {
        return Err(site("chora has a nested chora"));
    }
    let ri = w
        .gates
        .iter()
        .position(|g| g.kind == GateKind::Difference && g.nodes == c.interior)
        .ok_or_else(|| site("chora interior is not exactly one difference gate"))?;
    let gates: Vec<String> = c.interior.iter().filter(|n| w.kinds[*n].is_gate()).cloned().collect();
    if gates.len() != 3 {
        return Err(site("difference gate must have three crossings"));
    }
    let strand = |n: &str| w.strand_of(n).unwrap();
    let g3 = gates
        .iter()
        .find(|g| matches!(w.kinds[*g], NodeKind::Bullet(_)))
        .ok_or_else(|| site("difference gate has no closing bullet"))?
        .clone();
    let f3 = fan(&w, &g3);
    let (sb, sc) = (strand(&f3), strand(&g3));
    let g1 = gates
        .iter()
        .find(|g| **g != g3 && strand(g) == sb)
        .ok_or_else(|| site("difference gate layout not recognised"))?
        .clone();
    let g2 = gates
        .iter()
        .find(|g| **g != g3 && **g != g1)
        .unwrap()
        .clone();
    let (f1, f2) = (fan(&w, &g1), fan(&w, &g2));
    let sa = strand(&f1);
    let sigma = w.kinds[&g3].gate_scale().unwrap().clone();
    let layout_ok = strand(&f2) == sa
        && strand(&g2) == sc
        && sa != sb
        && sb != sc
        && sa != sc
        && w.kinds[&g1] == NodeKind::Circ(sigma.clone())
        && w.kinds[&g2] == NodeKind::Circ(sigma.clone());
    if !layout_ok {
        return Err(site("difference gate layout not recognised"));
    }
    let segs = segments(&w, idx)?;
    let seg_on = |s: usize| segs.iter().find(|g| g.strand == s && !g.between.is_empty()).cloned();
    let (Some(pa), Some(pb), Some(pc)) = (seg_on(sa), seg_on(sb), seg_on(sc)) else {
        return Err(site("difference strands must pass through the chora"));
    };
    let want = |seg: &Segment, nodes: &[&String]| set(&seg.between.iter().collect::<Vec<_>>()) == set(nodes);
    if !(want(&pa, &[&f1, &f2]) && pb.between == [g1.clone(), f3.clone()] && pc.between == [g2.clone(), g3.clone()]) {
        return Err(site("difference gate layout not recognised"));
    }
    if segs.iter().filter(|s| !s.between.is_empty()).count() != 3 {
        return Err(site("unexpected pass through the chora"));
    }
    let col = colors(&w);
    let a_outer = col
        .get(&w.wire_before(&pa.entry).unwrap())
        .cloned()
        .ok_or_else(|| site("base strand is not colored"))?;
    let eps = c.scale.clone();
    let outer = enclosing(&w, idx);
    let l2 = w.new_loop(ColorTerm::circ(eps.clone(), c.base.clone(), a_outer).normalize());
    let circ = || NodeKind::Circ(eps.clone());
    let bul = || NodeKind::Bullet(eps.clone());
    let (fa, ga) = w.add_crossing(bul(), Anchor::After(&pa.entry), Anchor::Before(&g1))?;
    let (fb, gb) = w.add_crossing(bul(), Anchor::After(&fa), Anchor::Before(&g2))?;
    let (fib, gib) = w.add_crossing(circ(), Anchor::LoopEnd(l2), Anchor::Before(&f3))?;
    let (fob, gob) = w.add_crossing(bul(), Anchor::LoopEnd(l2), Anchor::After(&f3))?;
    let (fic, gic) = w.add_crossing(circ(), Anchor::LoopEnd(l2), Anchor::Before(&g3))?;
    let (foc, goc) = w.add_crossing(bul(), Anchor::LoopEnd(l2), Anchor::After(&g3))?;
    let (fsb, gsb) = w.add_crossing(circ(), Anchor::Before(&pa.exit), Anchor::After(&gob))?;
    let (fsc, gsc) = w.add_crossing(circ(), Anchor::Before(&pa.exit), Anchor::After(&goc))?;
    let new = [
        &fa, &ga, &fb, &gb, &fib, &gib, &fob, &gob, &fic, &gic, &foc, &goc, &fsb, &gsb, &fsc, &gsc,
    ];
    adopt(&mut w, &outer, &new.iter().map(|s| s.to_string()).collect::<Vec<_>>());
    let records = [
        difference_record(&w, &pa.entry, &pb.entry, &fa, &ga, &eps),
        difference_record(&w, &pa.entry, &pc.entry, &fb, &gb, &eps),
        sum_record(&w, &pa.entry, &pa.exit, &fsb, &gsb, &pb.exit, w.wire_after(&gob), &eps),
        sum_record(&w, &pa.entry, &pa.exit, &fsc, &gsc, &pc.exit, w.wire_after(&goc), &eps),
    ];
    w.gates.remove(ri);
    w.gates.extend(records);
    let inner_base = w.strands[&l2].decoration.clone().unwrap();
    w.choroi.remove(idx);
    w.choroi.push(ChoraW {
        strand: l2,
        base: inner_base,
        scale: eps,
        interior: set(&[&f3, &g3]),
    });
    w.finish()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Unit {
    Child(usize),
    Crossing(usize),
}

enum Item {
    Node(String),
    Pass(usize),
}

/// Splits a chora into one chora per nested chora and per crossing directly
/// inside it. A nested chora also receives a pass of a strand carrying its
/// base, so that it can later be lifted out with [`chora_in_chora`].
pub fn split_chora(d: &Diagram, idx: usize) -> Result<Diagram, RewriteError> {
    let mut w = Work::from_diagram(d)?;
    let c = chora(&w, idx)?;
    let kids = direct_children(&w, idx);
    let mut unit: BTreeMap<String, Unit> = BTreeMap::new();
    for &j in &kids {
        let u = Unit::Child(j);
        for n in w.choroi[j].interior.iter().cloned().chain(loop_fans(&w, j)) {
            unit.insert(n, u);
        }
        for g in boundary_gates(&w, j)?.into_keys() {
            unit.insert(g, u);
        }
    }
    let chords: Vec<(String, String)> = w.chords.iter().map(|(f, g)| (f.clone(), g.clone())).collect();
    for (i, (f, g)) in chords.iter().enumerate() {
        if unit.contains_key(f) || unit.contains_key(g) {
            continue;
        }
        match (c.interior.contains(f), c.interior.contains(g)) {
            (true, true) => {
                unit.insert(f.clone(), Unit::Crossing(i));
                unit.insert(g.clone(), Unit::Crossing(i));
            }
            (false, false) => {}
            _ => return Err(hyp(format!("crossing `{g}` straddles the chora boundary"))),
        }
    }
    if let Some(n) = c.interior.iter().find(|n| !unit.contains_key(*n)) {
        return Err(hyp(format!("`{n}` is neither a crossing nor a nested chora")));
    }
    let segs = segments(&w, idx)?;
    if let Some(n) = segs.iter().flat_map(|s| &s.between).find(|n| !c.interior.contains(*n)) {
        return Err(hyp(format!("`{n}` lies on a pass through the chora but outside its interior")));
    }
    let mut items: Vec<Vec<Item>> = segs
        .iter()
        .map(|s| s.between.iter().map(|n| Item::Node(n.clone())).collect())
        .collect();
    if !kids.is_empty() {
        let col = colors(&w);
        for &j in &kids {
            let base = &w.choroi[j].base;
            let mut found = None;
            'search: for (si, s) in segs.iter().enumerate() {
                for k in 0..=s.between.len() {
                    let before = if k == 0 { &s.entry } else { &s.between[k - 1] };
                    let touches = |n: Option<&String>| n.is_some_and(|n| unit.get(n) == Some(&Unit::Child(j)));
                    if touches(k.checked_sub(1).and_then(|i| s.between.get(i))) || touches(s.between.get(k)) {
                        continue;
                    }
                    if col.get(&w.wire_after(before)).is_some_and(|t| t.equal_modulo(base)) {
                        found = Some((si, k));
                        break 'search;
                    }
                }
            }
            let (si, k) = found.ok_or_else(|| hyp("no strand carries the base of a nested chora"))?;
            let pos = items[si]
                .iter()
                .enumerate()
                .filter(|(_, it)| matches!(it, Item::Node(_)))
                .nth(k)
                .map(|(p, _)| p)
                .unwrap_or(items[si].len());
            items[si].insert(pos, Item::Pass(j));
        }
    }
    let eps = c.scale.clone();
    let outer = enclosing(&w, idx);
    let mut loops: BTreeMap<Unit, usize> = BTreeMap::new();
    for u in unit.values() {
        if !loops.contains_key(u) {
            let sid = w.new_loop(c.base.clone());
            loops.insert(*u, sid);
        }
    }
    let mut added = Vec::new();
    for (s, its) in segs.iter().zip(&items) {
        let mut seq: Vec<String> = Vec::new();
        let mut i = 0;
        while i < its.len() {
            let (u, run): (Unit, Vec<String>) = match &its[i] {
                Item::Pass(j) => {
                    i += 1;
                    (Unit::Child(*j), Vec::new())
                }
                Item::Node(n) => {
                    let u = unit[n];
                    let mut run = vec![n.clone()];
                    i += 1;
                    while let Some(Item::Node(m)) = its.get(i) {
                        if unit[m] != u {
                            break;
                        }
                        run.push(m.clone());
                        i += 1;
                    }
                    (u, run)
                }
            };
            let sid = loops[&u];
            for (kind, body) in [(NodeKind::Circ(eps.clone()), Some(run)), (NodeKind::Bullet(eps.clone()), None)] {
                let f = w.fresh("f");
                let g = w.fresh("g");
                w.kinds.insert(f.clone(), NodeKind::FanOut);
                w.kinds.insert(g.clone(), kind);
                w.chords.insert(f.clone(), g.clone());
                w.place(&f, Anchor::LoopEnd(sid))?;
                seq.push(g.clone());
                if let Some(body) = body {
                    seq.extend(body);
                }
                added.extend([f, g]);
            }
        }
        let (first, last) = match (seq.first(), seq.last()) {
            (Some(a), Some(b)) => (w.wire_after(a), w.wire_after(b)),
            _ => {
                let before = w.wire_before(&s.entry).expect("an entry gate has a predecessor");
                (before.clone(), before)
            }
        };
        w.redirect(&w.wire_after(&s.entry), &first);
        w.redirect(&w.wire_after(&s.exit), &last);
        let nodes = &mut w.strands.get_mut(&s.strand).unwrap().nodes;
        let a = nodes.iter().position(|n| *n == s.entry).unwrap();
        let b = nodes.iter().position(|n| *n == s.exit).unwrap();
        nodes.splice(a..=b, seq);
        w.remove_crossing(&s.entry);
        w.remove_crossing(&s.exit);
    }
    let mut pieces = Vec::new();
    for (u, sid) in &loops {
        let mut interior: BTreeSet<String> = unit.iter().filter(|(_, v)| *v == u).map(|(n, _)| n.clone()).collect();
        if let Unit::Child(j) = u {
            interior.extend(loop_fans(&w, *j));
        }
        pieces.push(ChoraW {
            strand: *sid,
            base: c.base.clone(),
            scale: eps.clone(),
            interior,
        });
    }
    adopt(&mut w, &outer, &added);
    w.choroi.remove(idx);
    w.choroi.extend(pieces);
    w.finish()
}

fn is_elementary(w: &Work, idx: usize) -> bool {
    let c = &w.choroi[idx];
    let xs = interior_crossings(w, c);
    xs.len() == 1 && c.interior.len() == 2 && direct_children(w, idx).is_empty()
}

/// Checks that every crossing sits inside a chora, on a chora boundary or in
/// a gate record, and that no homeomorphism nodes occur.
fn check_hypotheses(w: &Work) -> Result<(), RewriteError> {
    if let Some((n, _)) = w.kinds.iter().find(|(_, k)| matches!(k, NodeKind::Homeo { .. })) {
        return Err(hyp(format!("homeomorphism node `{n}`")));
    }
    let loops: BTreeSet<&String> = w.choroi.iter().flat_map(|c| &w.strands[&c.strand].nodes).collect();
    for (f, g) in &w.chords {
        let inside = w.choroi.iter().any(|c| c.interior.contains(f) && c.interior.contains(g));
        let gated = w.gates.iter().any(|r| r.nodes.contains(f) && r.nodes.contains(g));
        if !(inside || gated || loops.contains(f)) {
            return Err(hyp(format!("crossing `{g}` is not inside any chora")));
        }
    }
    Ok(())
}

/// Rewrites all choroi into difference-family gates and elementary choroi,
/// lifting nested choroi outermost first.
pub fn normalize_choroi(d: &Diagram) -> Result<Diagram, RewriteError> {
    check_hypotheses(&Work::from_diagram(d)?)?;
    let mut cur = d.clone();
    for _ in 0..10_000 {
        let w = Work::from_diagram(&cur)?;
        let n = w.choroi.len();
        let outermost = (0..n).filter(|&i| enclosing(&w, i).is_empty());
        if let Some(i) = outermost.clone().find(|&i| !direct_children(&w, i).is_empty()) {
            let kids = direct_children(&w, i);
            if kids.len() == 1 {
                match chora_in_chora(&cur, i) {
                    Ok(next) => {
                        cur = next;
                        continue;
                    }
                    Err(e) => {
                        let c = &w.choroi[i];
                        let kid = kids[0];
                        let mut own: BTreeSet<String> = w.choroi[kid].interior.clone();
                        own.extend(loop_fans(&w, kid));
                        own.extend(boundary_gates(&w, kid)?.into_keys());
                        if c.interior.is_subset(&own) {
                            return Err(hyp(format!("nested chora cannot be lifted: {e}")));
                        }
                    }
                }
            }
            cur = split_chora(&cur, i).map_err(|e| hyp(e.to_string()))?;
            continue;
        }
        if let Some(i) = (0..n).find(|&i| !is_elementary(&w, i)) {
            cur = split_chora(&cur, i).map_err(|e| hyp(e.to_string()))?;
            continue;
        }
        return Ok(cur);
    }
    Err(hyp("normalization did not terminate"))
}
