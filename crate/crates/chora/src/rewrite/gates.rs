//! Gate fragments built from crossings, and the crossing-as-difference move.

use std::collections::BTreeSet;

use crate::diagram::{Diagram, GateKind, GateRecord, NodeKind, Port, WireRole};
use crate::scale::ScaleExpr;

use super::work::{Anchor, Work};
use super::RewriteError;

struct Builder {
    d: Diagram,
}

impl Builder {
    fn new(name: &str, scale: &ScaleExpr) -> Self {
        let mut d = Diagram::new(name);
        d.declare_scale_vars(scale);
        Builder { d }
    }

    /// A strand through the given nodes, from an input to an output.
    fn strand(&mut self, input: &str, nodes: &[&str], output: &str) {
        let i = format!("i_{input}");
        let o = format!("o_{}", output.trim_start_matches('_'));
        self.d.add_node(&i, NodeKind::Input(input.to_string()));
        self.d.add_node(&o, NodeKind::Output(output.to_string()));
        let mut chain: Vec<String> = vec![i];
        chain.extend(nodes.iter().map(|s| s.to_string()));
        chain.push(o);
        for pair in chain.windows(2) {
            let pa = self.d.nodes[&pair[0]].strand_out().unwrap();
            let pb = self.d.nodes[&pair[1]].strand_in().unwrap();
            self.d.connect((&pair[0], pa), (&pair[1], pb), WireRole::Segment);
        }
    }

    fn crossing(&mut self, f: &str, g: &str, kind: NodeKind) {
        self.d.add_node(f, NodeKind::FanOut);
        self.d.add_node(g, kind);
        self.d.connect((f, Port::OutChord), (g, Port::InBase), WireRole::Chord);
    }
}

fn nodes(ids: &[&str]) -> BTreeSet<String> {
    ids.iter().map(|s| s.to_string()).collect()
}

/// The gate fragments: difference `(x;u,v)`, sum `(x;u,v)`, inverse `(x;u)`
/// and the approximate fan-out `(x;u)`.
///
/// Inputs are labelled `x`, `u`, `v`. The gate result is the output `out`;
/// outputs whose label starts with `_` carry auxiliary values. The
/// approximate fan-out outputs `x1 = x` and `x2 = x circ u`.
pub fn make_gate(kind: GateKind, scale: &ScaleExpr) -> Diagram {
    let circ = || NodeKind::Circ(scale.clone());
    let bul = || NodeKind::Bullet(scale.clone());
    let record = |ids: &[&str], params: &[&str], output: &str| GateRecord {
        kind,
        scale: scale.clone(),
        nodes: nodes(ids),
        base: "i_x:out".into(),
        params: params.iter().map(|s| s.to_string()).collect(),
        output: output.into(),
    };
    let mut b;
    match kind {
        GateKind::Difference => {
            b = Builder::new("difference", scale);
            b.crossing("F1", "G1", circ());
            b.crossing("F2", "G2", circ());
            b.crossing("F3", "G3", bul());
            b.strand("x", &["F1", "F2"], "_x");
            b.strand("u", &["G1", "F3"], "_y");
            b.strand("v", &["G2", "G3"], "out");
            b.d.gates.push(record(&["F1", "G1", "F2", "G2", "F3", "G3"], &["i_u:out", "i_v:out"], "G3:out"));
        }
        GateKind::Sum => {
            b = Builder::new("sum", scale);
            b.crossing("F1", "G1", circ());
            b.crossing("F2", "G2", circ());
            b.crossing("F3", "G3", bul());
            b.strand("x", &["F1", "F3"], "_x");
            b.strand("u", &["G1", "F2"], "_y");
            b.strand("v", &["G2", "G3"], "out");
            b.d.gates.push(record(&["F1", "G1", "F2", "G2", "F3", "G3"], &["i_u:out", "i_v:out"], "G3:out"));
        }
        GateKind::Inverse => {
            b = Builder::new("inverse", scale);
            b.crossing("F1", "G1", circ());
            b.crossing("F2", "G2", circ());
            b.crossing("F3", "G3", bul());
            b.strand("x", &["F1", "F2", "G2", "G3"], "out");
            b.strand("u", &["G1", "F3"], "_y");
            b.d.gates.push(record(&["F1", "G1", "F2", "G2", "F3", "G3"], &["i_u:out"], "G3:out"));
        }
        GateKind::EpsFanOut => {
            b = Builder::new("eps-fan-out", scale);
            b.crossing("F1", "G1", circ());
            b.crossing("F2", "G2", bul());
            b.strand("x", &["F1"], "x1");
            b.strand("u", &["G1", "F2", "G2"], "x2");
            b.d.gates.push(record(&["F1", "G1", "F2", "G2"], &["i_u:out"], "G2:out"));
        }
    }
    b.d
}

/// Replaces the crossing at `gate` by a difference gate: a tadpole with the
/// opposite kind is appended, so the crossing reads `Delta^x(u, u)`.
pub(crate) fn tadpole_difference(w: &mut Work, gate: &str) -> Result<(), RewriteError> {
    let kind = w.kinds.get(gate).cloned().ok_or_else(|| RewriteError::SiteMismatch(format!("no node `{gate}`")))?;
    let (tadpole, record_scale) = match &kind {
        NodeKind::Circ(s) => (NodeKind::Bullet(s.clone()), s.clone()),
        NodeKind::Bullet(s) => (NodeKind::Circ(s.clone()), s.inv()),
        _ => return Err(RewriteError::SiteMismatch(format!("`{gate}` is not a gate"))),
    };
    let fan = w
        .fan_of(gate)
        .ok_or_else(|| RewriteError::SiteMismatch("gate has no fan-out".into()))?
        .to_string();
    let operand = w.wire_before(gate).ok_or_else(|| RewriteError::SiteMismatch("gate has no operand".into()))?;
    let (f2, g2) = w.add_crossing(tadpole, Anchor::After(gate), Anchor::After(gate))?;
    // add_crossing placed f2 after gate, then g2 directly after gate: swap into f2, g2 order
    let (sid, pos) = w.locate(&g2).unwrap();
    w.strands.get_mut(&sid).unwrap().nodes.swap(pos, pos + 1);
    for c in w.choroi_containing(gate) {
        w.choroi[c].interior.insert(f2.clone());
        w.choroi[c].interior.insert(g2.clone());
    }
    w.declare(&record_scale);
    w.gates.push(GateRecord {
        kind: GateKind::Difference,
        scale: record_scale,
        nodes: [fan.clone(), gate.to_string(), f2, g2.clone()].into_iter().collect(),
        base: w.wire_after(&fan),
        params: vec![operand.clone(), operand],
        output: w.wire_after(&g2),
    });
    Ok(())
}

pub fn crossing_to_difference(d: &Diagram, gate: &str) -> Result<Diagram, RewriteError> {
    let mut w = Work::from_diagram(d)?;
    if w.gates.iter().any(|g| g.nodes.contains(gate)) {
        return Err(RewriteError::SiteMismatch(format!("`{gate}` already belongs to a gate")));
    }
    tadpole_difference(&mut w, gate)?;
    w.finish()
}

/// Expresses each of the crossings of a difference gate as a difference.
pub fn difference_self_similar(d: &Diagram, record: usize) -> Result<Diagram, RewriteError> {
    let mut w = Work::from_diagram(d)?;
    let rec = w
        .gates
        .get(record)
        .cloned()
        .ok_or_else(|| RewriteError::SiteMismatch(format!("no gate record #{record}")))?;
    if rec.kind != GateKind::Difference {
        return Err(RewriteError::SiteMismatch("record is not a difference gate".into()));
    }
    let gates: Vec<String> = rec.nodes.iter().filter(|n| w.kinds[*n].is_gate()).cloned().collect();
    w.gates.remove(record);
    for g in gates {
        tadpole_difference(&mut w, &g)?;
    }
    w.finish()
}
