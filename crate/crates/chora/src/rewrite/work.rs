//! Strand view of a diagram used while rewriting.
//!
//! Every arc becomes a chain of node ids. Open chains run from an `Input`
//! to an `Output`; closed chains are loops of fan-outs with a decoration.
//! Wires are regenerated from the chains, so every wire gets the canonical
//! id of its source endpoint and the color a wire id names never changes.

use std::collections::{BTreeMap, BTreeSet};

use crate::diagram::{ChoraRecord, Diagram, Endpoint, GateRecord, NodeKind, Port, ScaleDecl, WireRole};
use crate::scale::ScaleExpr;
use crate::terms::ColorTerm;

use super::RewriteError;

#[derive(Clone, Debug)]
pub(crate) struct Strand {
    pub nodes: Vec<String>,
    pub closed: bool,
    pub decoration: Option<ColorTerm>,
}

#[derive(Clone, Debug)]
pub(crate) struct ChoraW {
    pub strand: usize,
    pub base: ColorTerm,
    pub scale: ScaleExpr,
    pub interior: BTreeSet<String>,
}

#[derive(Clone, Copy, Debug)]
pub(crate) enum Anchor<'a> {
    After(&'a str),
    Before(&'a str),
    LoopEnd(usize),
}

#[derive(Clone, Debug)]
pub(crate) struct Work {
    pub name: String,
    pub scales: BTreeMap<String, ScaleDecl>,
    pub kinds: BTreeMap<String, NodeKind>,
    pub strands: BTreeMap<usize, Strand>,
    /// fan-out id to gate id
    pub chords: BTreeMap<String, String>,
    /// decorations on open wires, keyed by the source endpoint
    pub open_decorations: BTreeMap<Endpoint, ColorTerm>,
    pub choroi: Vec<ChoraW>,
    pub gates: Vec<GateRecord>,
    next_strand: usize,
    counter: usize,
}

impl Work {
    pub fn from_diagram(d: &Diagram) -> Result<Work, RewriteError> {
        let v = d.validate();
        if !v.is_empty() {
            return Err(RewriteError::Invalid(
                v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; "),
            ));
        }
        let arcs = d.arcs();
        let arc_of = Diagram::arc_of_wire(&arcs);
        let mut strands = BTreeMap::new();
        for (i, a) in arcs.iter().enumerate() {
            let mut nodes: Vec<String>;
            let mut decoration = None;
            if a.closed {
                let start = a.wires.iter().position(|w| d.decorations.contains_key(w)).unwrap_or(0);
                let mut ws = a.wires.clone();
                ws.rotate_left(start);
                decoration = d.decorations.get(&ws[0]).cloned();
                // the decorated wire closes the loop: it ends at the first node
                nodes = ws.iter().skip(1).map(|w| d.wires[w].from.node.clone()).collect();
                nodes.push(d.wires[&ws[0]].from.node.clone());
            } else {
                nodes = vec![d.wires[&a.wires[0]].from.node.clone()];
                nodes.extend(a.wires.iter().map(|w| d.wires[w].to.node.clone()));
            }
            strands.insert(
                i,
                Strand {
                    nodes,
                    closed: a.closed,
                    decoration,
                },
            );
        }
        let chords = d
            .wires
            .values()
            .filter(|w| w.role == WireRole::Chord)
            .map(|w| (w.from.node.clone(), w.to.node.clone()))
            .collect();
        let open_decorations = d
            .decorations
            .iter()
            .filter(|(w, _)| !arc_of.get(*w).is_some_and(|&a| arcs[a].closed))
            .map(|(w, t)| (d.wires[w].from.clone(), t.clone()))
            .collect();
        let canon = |w: &String| d.wires.get(w).map(|x| x.from.wire_id()).unwrap_or_else(|| w.clone());
        let choroi = d
            .choroi
            .iter()
            .map(|c| ChoraW {
                strand: arc_of[&c.boundary],
                base: c.base.clone(),
                scale: c.scale.clone(),
                interior: c.interior.clone(),
            })
            .collect();
        let gates = d
            .gates
            .iter()
            .map(|g| GateRecord {
                base: canon(&g.base),
                params: g.params.iter().map(canon).collect(),
                output: canon(&g.output),
                ..g.clone()
            })
            .collect();
        Ok(Work {
            name: d.name.clone(),
            scales: d.scales.clone(),
            kinds: d.nodes.clone(),
            next_strand: arcs.len(),
            strands,
            chords,
            open_decorations,
            choroi,
            gates,
            counter: 0,
        })
    }

    pub fn to_diagram(&self) -> Diagram {
        let mut d = Diagram::new(&self.name);
        d.scales = self.scales.clone();
        for k in self.kinds.values() {
            if let Some(s) = k.gate_scale() {
                d.declare_scale_vars(s);
            }
        }
        d.nodes = self.kinds.clone();
        let mut closing: BTreeMap<usize, String> = BTreeMap::new();
        for (sid, s) in &self.strands {
            if s.nodes.is_empty() {
                continue;
            }
            let n = s.nodes.len();
            let pairs = if s.closed { n } else { n - 1 };
            for i in 0..pairs {
                let a = &s.nodes[i];
                let b = &s.nodes[(i + 1) % n];
                let pa = self.kinds[a].strand_out().expect("strand node has an out port");
                let pb = self.kinds[b].strand_in().expect("strand node has an in port");
                let id = d.connect((a, pa), (b, pb), WireRole::Segment);
                if s.closed && i == n - 1 {
                    if let Some(t) = &s.decoration {
                        d.decorations.insert(id.clone(), t.clone());
                        for v in t.scale_vars() {
                            d.scales.entry(v).or_insert(ScaleDecl::Var);
                        }
                    }
                    closing.insert(*sid, id);
                }
            }
        }
        for (f, g) in &self.chords {
            d.connect((f, Port::OutChord), (g, Port::InBase), WireRole::Chord);
        }
        for (ep, t) in &self.open_decorations {
            let id = ep.wire_id();
            if d.wires.contains_key(&id) {
                d.decorations.insert(id, t.clone());
            }
        }
        for c in &self.choroi {
            if let Some(b) = closing.get(&c.strand) {
                d.choroi.push(ChoraRecord {
                    boundary: b.clone(),
                    base: c.base.clone(),
                    scale: c.scale.clone(),
                    interior: c.interior.iter().filter(|n| self.kinds.contains_key(*n)).cloned().collect(),
                });
            }
        }
        d.gates = self
            .gates
            .iter()
            .filter(|g| g.nodes.iter().all(|n| self.kinds.contains_key(n)))
            .filter(|g| {
                std::iter::once(&g.base)
                    .chain(&g.params)
                    .chain(std::iter::once(&g.output))
                    .all(|w| d.wires.contains_key(w))
            })
            .cloned()
            .collect();
        d
    }

    pub fn fresh(&mut self, prefix: &str) -> String {
        loop {
            self.counter += 1;
            let id = format!("{prefix}{}", self.counter);
            if !self.kinds.contains_key(&id) {
                return id;
            }
        }
    }

    pub fn locate(&self, node: &str) -> Option<(usize, usize)> {
        self.strands
            .iter()
            .find_map(|(sid, s)| s.nodes.iter().position(|n| n == node).map(|p| (*sid, p)))
    }

    pub fn strand_of(&self, node: &str) -> Option<usize> {
        self.locate(node).map(|(s, _)| s)
    }

    pub fn kind(&self, node: &str) -> Option<&NodeKind> {
        self.kinds.get(node)
    }

    /// Gate paired with a fan-out.
    pub fn gate_of(&self, fan: &str) -> Option<&str> {
        self.chords.get(fan).map(String::as_str)
    }

    /// Fan-out paired with a gate.
    pub fn fan_of(&self, gate: &str) -> Option<&str> {
        self.chords.iter().find(|(_, g)| *g == gate).map(|(f, _)| f.as_str())
    }

    pub fn place(&mut self, node: &str, at: Anchor) -> Result<(), RewriteError> {
        match at {
            Anchor::LoopEnd(sid) => {
                self.strands
                    .get_mut(&sid)
                    .ok_or_else(|| RewriteError::Invalid(format!("no strand {sid}")))?
                    .nodes
                    .push(node.to_string());
            }
            Anchor::After(a) | Anchor::Before(a) => {
                let (sid, pos) = self
                    .locate(a)
                    .ok_or_else(|| RewriteError::Invalid(format!("anchor `{a}` is not on a strand")))?;
                let at = if matches!(at, Anchor::After(_)) { pos + 1 } else { pos };
                self.strands.get_mut(&sid).unwrap().nodes.insert(at, node.to_string());
            }
        }
        Ok(())
    }

    /// Adds a crossing whose fan-out sits at `fan_at` and gate at `gate_at`.
    pub fn add_crossing(&mut self, gate_kind: NodeKind, fan_at: Anchor, gate_at: Anchor) -> Result<(String, String), RewriteError> {
        let f = self.fresh("f");
        self.kinds.insert(f.clone(), NodeKind::FanOut);
        let g = self.fresh("g");
        self.kinds.insert(g.clone(), gate_kind);
        self.place(&f, fan_at)?;
        self.place(&g, gate_at)?;
        self.chords.insert(f.clone(), g.clone());
        Ok((f, g))
    }

    pub fn new_loop(&mut self, decoration: ColorTerm) -> usize {
        let sid = self.next_strand;
        self.next_strand += 1;
        self.strands.insert(
            sid,
            Strand {
                nodes: Vec::new(),
                closed: true,
                decoration: Some(decoration),
            },
        );
        sid
    }

    pub fn new_strand(&mut self, nodes: Vec<String>, closed: bool, decoration: Option<ColorTerm>) -> usize {
        let sid = self.next_strand;
        self.next_strand += 1;
        self.strands.insert(sid, Strand { nodes, closed, decoration });
        sid
    }

    pub fn remove_node(&mut self, node: &str) {
        if let Some((sid, pos)) = self.locate(node) {
            self.strands.get_mut(&sid).unwrap().nodes.remove(pos);
        }
        self.kinds.remove(node);
        self.chords.remove(node);
        self.chords.retain(|_, g| g != node);
        for c in &mut self.choroi {
            c.interior.remove(node);
        }
    }

    /// Removes a crossing given its gate.
    pub fn remove_crossing(&mut self, gate: &str) {
        if let Some(f) = self.fan_of(gate).map(str::to_string) {
            self.remove_node(&f);
        }
        self.remove_node(gate);
    }

    /// Canonical id of the wire leaving `node` along its strand.
    pub fn wire_after(&self, node: &str) -> String {
        let p = self.kinds[node].strand_out().expect("node has a strand output");
        Endpoint::new(node, p).wire_id()
    }

    /// Canonical id of the wire entering `node` along its strand.
    pub fn wire_before(&self, node: &str) -> Option<String> {
        let (sid, pos) = self.locate(node)?;
        let s = &self.strands[&sid];
        let prev = if pos > 0 {
            &s.nodes[pos - 1]
        } else if s.closed {
            s.nodes.last()?
        } else {
            return None;
        };
        Some(self.wire_after(prev))
    }

    pub fn prev_node(&self, node: &str) -> Option<String> {
        let (sid, pos) = self.locate(node)?;
        let s = &self.strands[&sid];
        if pos > 0 {
            Some(s.nodes[pos - 1].clone())
        } else if s.closed {
            s.nodes.last().cloned()
        } else {
            None
        }
    }

    pub fn next_node(&self, node: &str) -> Option<String> {
        let (sid, pos) = self.locate(node)?;
        let s = &self.strands[&sid];
        if pos + 1 < s.nodes.len() {
            Some(s.nodes[pos + 1].clone())
        } else if s.closed {
            s.nodes.first().cloned()
        } else {
            None
        }
    }

    /// Indices of choroi whose interior contains `node`.
    pub fn choroi_containing(&self, node: &str) -> Vec<usize> {
        (0..self.choroi.len()).filter(|i| self.choroi[*i].interior.contains(node)).collect()
    }

    /// Points gate-record references to wire `from` at wire `to` instead.
    pub fn redirect(&mut self, from: &str, to: &str) {
        for g in &mut self.gates {
            for w in std::iter::once(&mut g.base).chain(g.params.iter_mut()).chain(std::iter::once(&mut g.output)) {
                if w == from {
                    *w = to.to_string();
                }
            }
        }
    }

    pub fn declare(&mut self, s: &ScaleExpr) {
        for v in s.vars() {
            self.scales.entry(v.to_string()).or_insert(ScaleDecl::Var);
        }
    }

    /// Rebuilds and checks that the result is a valid diagram.
    pub fn finish(&self) -> Result<Diagram, RewriteError> {
        let d = self.to_diagram();
        let v = d.validate();
        if v.is_empty() {
            Ok(d)
        } else {
            Err(RewriteError::SiteMismatch(format!(
                "result is not a valid diagram: {}",
                v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
            )))
        }
    }
}
