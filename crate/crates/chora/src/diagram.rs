//! Tangle diagrams: typed nodes joined by segment and chord wires.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use num_traits::Signed;
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::scale::{ScaleBinding, ScaleExpr};
use crate::terms::ColorTerm;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Port {
    In,
    OutThrough,
    OutChord,
    InBase,
    InOperand,
    Out,
}

impl Port {
    pub fn as_str(&self) -> &'static str {
        match self {
            Port::In => "in",
            Port::OutThrough => "outThrough",
            Port::OutChord => "outChord",
            Port::InBase => "inBase",
            Port::InOperand => "inOperand",
            Port::Out => "out",
        }
    }
}

impl fmt::Display for Port {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Port {
    type Err = ();
    fn from_str(s: &str) -> Result<Self, ()> {
        Ok(match s {
            "in" => Port::In,
            "outThrough" => Port::OutThrough,
            "outChord" => Port::OutChord,
            "inBase" => Port::InBase,
            "inOperand" => Port::InOperand,
            "out" => Port::Out,
            _ => return Err(()),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NodeKind {
    FanOut,
    Circ(ScaleExpr),
    Bullet(ScaleExpr),
    Input(String),
    Output(String),
    Homeo { name: String, inverted: bool },
}

impl NodeKind {
    pub fn in_ports(&self) -> &'static [Port] {
        match self {
            NodeKind::FanOut | NodeKind::Homeo { .. } | NodeKind::Output(_) => &[Port::In],
            NodeKind::Circ(_) | NodeKind::Bullet(_) => &[Port::InBase, Port::InOperand],
            NodeKind::Input(_) => &[],
        }
    }

    pub fn out_ports(&self) -> &'static [Port] {
        match self {
            NodeKind::FanOut => &[Port::OutThrough, Port::OutChord],
            NodeKind::Circ(_) | NodeKind::Bullet(_) | NodeKind::Homeo { .. } | NodeKind::Input(_) => &[Port::Out],
            NodeKind::Output(_) => &[],
        }
    }

    pub fn is_gate(&self) -> bool {
        matches!(self, NodeKind::Circ(_) | NodeKind::Bullet(_))
    }

    pub fn gate_scale(&self) -> Option<&ScaleExpr> {
        match self {
            NodeKind::Circ(s) | NodeKind::Bullet(s) => Some(s),
            _ => None,
        }
    }

    /// Scale of the gate read as a `Circ`: a `Bullet` at `s` counts as `1/s`.
    pub fn effective_scale(&self) -> Option<ScaleExpr> {
        match self {
            NodeKind::Circ(s) => Some(s.clone()),
            NodeKind::Bullet(s) => Some(s.inv()),
            _ => None,
        }
    }

    /// The port through which a strand enters this node.
    pub fn strand_in(&self) -> Option<Port> {
        match self {
            NodeKind::FanOut | NodeKind::Homeo { .. } | NodeKind::Output(_) => Some(Port::In),
            NodeKind::Circ(_) | NodeKind::Bullet(_) => Some(Port::InOperand),
            NodeKind::Input(_) => None,
        }
    }

    /// The port through which a strand leaves this node.
    pub fn strand_out(&self) -> Option<Port> {
        match self {
            NodeKind::FanOut => Some(Port::OutThrough),
            NodeKind::Circ(_) | NodeKind::Bullet(_) | NodeKind::Homeo { .. } | NodeKind::Input(_) => Some(Port::Out),
            NodeKind::Output(_) => None,
        }
    }

    fn kind_name(&self) -> &'static str {
        match self {
            NodeKind::FanOut => "fanout",
            NodeKind::Circ(_) => "circ",
            NodeKind::Bullet(_) => "bullet",
            NodeKind::Input(_) => "input",
            NodeKind::Output(_) => "output",
            NodeKind::Homeo { .. } => "homeo",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum WireRole {
    Segment,
    Chord,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Endpoint {
    pub node: String,
    pub port: Port,
}

impl Endpoint {
    pub fn new(node: &str, port: Port) -> Self {
        Endpoint {
            node: node.to_string(),
            port,
        }
    }

    /// Canonical id of the wire leaving this endpoint.
    pub fn wire_id(&self) -> String {
        format!("{}:{}", self.node, self.port)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Wire {
    pub from: Endpoint,
    pub to: Endpoint,
    pub role: WireRole,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ScaleDecl {
    Var,
    Const(BigRational),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChoraRecord {
    /// Any wire on the closed arc bounding the chora.
    pub boundary: String,
    pub base: ColorTerm,
    pub scale: ScaleExpr,
    pub interior: BTreeSet<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GateKind {
    Difference,
    Sum,
    Inverse,
    EpsFanOut,
}

impl GateKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            GateKind::Difference => "DifferenceGate",
            GateKind::Sum => "SumGate",
            GateKind::Inverse => "InverseGate",
            GateKind::EpsFanOut => "EpsFanOut",
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            GateKind::Difference | GateKind::Sum => 2,
            GateKind::Inverse | GateKind::EpsFanOut => 1,
        }
    }
}

impl FromStr for GateKind {
    type Err = ();
    fn from_str(s: &str) -> Result<Self, ()> {
        Ok(match s {
            "DifferenceGate" => GateKind::Difference,
            "SumGate" => GateKind::Sum,
            "InverseGate" => GateKind::Inverse,
            "EpsFanOut" => GateKind::EpsFanOut,
            _ => return Err(()),
        })
    }
}

/// A group of crossings claimed to compute one of the named gates.
///
/// `base` and `params` name wires carrying the gate inputs, `output` the
/// wire carrying its result. Verification is semantic, see
/// [`crate::rewrite::verify_gate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GateRecord {
    pub kind: GateKind,
    pub scale: ScaleExpr,
    pub nodes: BTreeSet<String>,
    pub base: String,
    pub params: Vec<String>,
    pub output: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Diagram {
    pub name: String,
    pub scales: BTreeMap<String, ScaleDecl>,
    pub nodes: BTreeMap<String, NodeKind>,
    pub wires: BTreeMap<String, Wire>,
    pub decorations: BTreeMap<String, ColorTerm>,
    pub choroi: Vec<ChoraRecord>,
    pub gates: Vec<GateRecord>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DiagramError {
    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("schema error in `{field}`: {msg}")]
    Schema { field: String, msg: String },
}

fn schema(field: &str, msg: impl Into<String>) -> DiagramError {
    DiagramError::Schema {
        field: field.to_string(),
        msg: msg.into(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ViolationKind {
    UnpairedGate,
    DanglingPort,
    UndecoratedCycle,
    BadChord,
    ChoraScaleMismatch,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub ids: Vec<String>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} [{}]: {}", self.kind, self.ids.join(", "), self.message)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArcPath {
    pub wires: Vec<String>,
    pub closed: bool,
}

impl ArcPath {
    /// Arcs are named by their first wire; closed arcs start at their least wire id.
    pub fn id(&self) -> &str {
        &self.wires[0]
    }
}

/// Lookup of wires by endpoint.
#[derive(Default)]
pub struct WireIndex {
    pub by_from: HashMap<Endpoint, String>,
    pub by_to: HashMap<Endpoint, String>,
}

impl Diagram {
    pub fn new(name: &str) -> Self {
        Diagram {
            name: name.to_string(),
            ..Default::default()
        }
    }

    pub fn index(&self) -> WireIndex {
        let mut ix = WireIndex::default();
        for (id, w) in &self.wires {
            ix.by_from.entry(w.from.clone()).or_insert_with(|| id.clone());
            ix.by_to.entry(w.to.clone()).or_insert_with(|| id.clone());
        }
        ix
    }

    pub fn add_node(&mut self, id: &str, kind: NodeKind) {
        self.nodes.insert(id.to_string(), kind);
    }

    /// Adds a wire under its canonical id and returns the id.
    pub fn connect(&mut self, from: (&str, Port), to: (&str, Port), role: WireRole) -> String {
        let from = Endpoint::new(from.0, from.1);
        let id = from.wire_id();
        self.wires.insert(
            id.clone(),
            Wire {
                from,
                to: Endpoint::new(to.0, to.1),
                role,
            },
        );
        id
    }

    /// Scale values for evaluation: declared constants plus user bindings.
    pub fn scale_binding(&self, user: &ScaleBinding) -> ScaleBinding {
        let mut out = user.clone();
        for (k, d) in &self.scales {
            if let ScaleDecl::Const(r) = d {
                out.insert(k.clone(), num_traits::ToPrimitive::to_f64(r).unwrap_or(f64::NAN));
            }
        }
        out
    }

    pub fn declare_scale_vars(&mut self, s: &ScaleExpr) {
        for v in s.vars() {
            self.scales.entry(v.to_string()).or_insert(ScaleDecl::Var);
        }
    }

    pub fn inputs(&self) -> Vec<(String, String)> {
        self.nodes
            .iter()
            .filter_map(|(id, k)| match k {
                NodeKind::Input(l) => Some((id.clone(), l.clone())),
                _ => None,
            })
            .collect()
    }

    pub fn outputs(&self) -> Vec<(String, String)> {
        self.nodes
            .iter()
            .filter_map(|(id, k)| match k {
                NodeKind::Output(l) => Some((id.clone(), l.clone())),
                _ => None,
            })
            .collect()
    }

    /// Crossings as `(fan-out, gate)` pairs, one per chord wire, sorted by gate.
    pub fn crossings(&self) -> Vec<(String, String)> {
        let mut out: Vec<(String, String)> = self
            .wires
            .values()
            .filter(|w| w.role == WireRole::Chord)
            .map(|w| (w.from.node.clone(), w.to.node.clone()))
            .collect();
        out.sort_by(|a, b| a.1.cmp(&b.1).then(a.0.cmp(&b.0)));
        out
    }

    pub fn gate_count(&self) -> usize {
        self.nodes.values().filter(|k| k.is_gate()).count()
    }

    /// Maximal strands: open arcs run from an `Input` to an `Output`,
    /// closed arcs are loops. Arcs continue through fan-outs, gate operands
    /// and homeomorphisms.
    pub fn arcs(&self) -> Vec<ArcPath> {
        let ix = self.index();
        let segs: BTreeSet<&String> = self
            .wires
            .iter()
            .filter(|(_, w)| w.role == WireRole::Segment)
            .map(|(id, _)| id)
            .collect();
        let next = |id: &str| -> Option<String> {
            let w = &self.wires[id];
            let kind = self.nodes.get(&w.to.node)?;
            if Some(w.to.port) != kind.strand_in() {
                return None;
            }
            let out = kind.strand_out()?;
            ix.by_from.get(&Endpoint::new(&w.to.node, out)).cloned()
        };
        let prev = |id: &str| -> Option<String> {
            let w = &self.wires[id];
            let kind = self.nodes.get(&w.from.node)?;
            if Some(w.from.port) != kind.strand_out() {
                return None;
            }
            let inp = kind.strand_in()?;
            ix.by_to.get(&Endpoint::new(&w.from.node, inp)).cloned()
        };
        let mut seen: BTreeSet<String> = BTreeSet::new();
        let mut arcs = Vec::new();
        for id in &segs {
            if seen.contains(*id) || prev(id).is_some_and(|p| segs.contains(&p)) {
                continue;
            }
            let mut wires = vec![(*id).clone()];
            seen.insert((*id).clone());
            let mut cur = (*id).clone();
            while let Some(n) = next(&cur) {
                if !segs.contains(&n) || !seen.insert(n.clone()) {
                    break;
                }
                wires.push(n.clone());
                cur = n;
            }
            arcs.push(ArcPath { wires, closed: false });
        }
        for id in &segs {
            if seen.contains(*id) {
                continue;
            }
            let mut wires = vec![(*id).clone()];
            seen.insert((*id).clone());
            let mut cur = (*id).clone();
            while let Some(n) = next(&cur) {
                if !seen.insert(n.clone()) {
                    break;
                }
                wires.push(n.clone());
                cur = n;
            }
            arcs.push(ArcPath { wires, closed: true });
        }
        arcs
    }

    /// Maps every segment wire to the index of its arc in [`Diagram::arcs`].
    pub fn arc_of_wire(arcs: &[ArcPath]) -> HashMap<String, usize> {
        let mut m = HashMap::new();
        for (i, a) in arcs.iter().enumerate() {
            for w in &a.wires {
                m.insert(w.clone(), i);
            }
        }
        m
    }

    /// Adjacency matrix over nodes in id order.
    pub fn connectivity_matrix(&self) -> (Vec<String>, Vec<Vec<u8>>) {
        let ids: Vec<String> = self.nodes.keys().cloned().collect();
        let pos: HashMap<&str, usize> = ids.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        let mut m = vec![vec![0u8; ids.len()]; ids.len()];
        for w in self.wires.values() {
            if let (Some(&i), Some(&j)) = (pos.get(w.from.node.as_str()), pos.get(w.to.node.as_str())) {
                m[i][j] = 1;
            }
        }
        (ids, m)
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut push = |kind, ids: Vec<String>, message: String| out.push(Violation { kind, ids, message });

        let mut used_from: HashMap<Endpoint, Vec<String>> = HashMap::new();
        let mut used_to: HashMap<Endpoint, Vec<String>> = HashMap::new();
        for (id, w) in &self.wires {
            let (Some(fk), Some(tk)) = (self.nodes.get(&w.from.node), self.nodes.get(&w.to.node)) else {
                push(ViolationKind::DanglingPort, vec![id.clone()], "wire references a missing node".into());
                continue;
            };
            if !fk.out_ports().contains(&w.from.port) || !tk.in_ports().contains(&w.to.port) {
                push(ViolationKind::DanglingPort, vec![id.clone()], "wire uses a port the node does not have".into());
                continue;
            }
            let chordish = w.from.port == Port::OutChord || w.to.port == Port::InBase;
            let proper = w.from.port == Port::OutChord && w.to.port == Port::InBase;
            if chordish != (w.role == WireRole::Chord) || (chordish && !proper) {
                push(
                    ViolationKind::BadChord,
                    vec![id.clone()],
                    "chords must run from a fan-out chord port to a gate base".into(),
                );
            }
            used_from.entry(w.from.clone()).or_default().push(id.clone());
            used_to.entry(w.to.clone()).or_default().push(id.clone());
        }
        for (nid, kind) in &self.nodes {
            for p in kind.out_ports() {
                let ep = Endpoint::new(nid, *p);
                match used_from.get(&ep).map(Vec::len).unwrap_or(0) {
                    1 => {}
                    0 if *p == Port::OutChord => push(
                        ViolationKind::UnpairedGate,
                        vec![nid.clone()],
                        "fan-out has no chord to a gate".into(),
                    ),
                    n => push(ViolationKind::DanglingPort, vec![nid.clone()], format!("port {p} has {n} wires")),
                }
            }
            for p in kind.in_ports() {
                let ep = Endpoint::new(nid, *p);
                match used_to.get(&ep).map(Vec::len).unwrap_or(0) {
                    1 => {}
                    0 if *p == Port::InBase => push(
                        ViolationKind::UnpairedGate,
                        vec![nid.clone()],
                        "gate has no chord from a fan-out".into(),
                    ),
                    n => push(ViolationKind::DanglingPort, vec![nid.clone()], format!("port {p} has {n} wires")),
                }
            }
        }

        for comp in self.cyclic_components() {
            let set: BTreeSet<&String> = comp.iter().collect();
            let internal: Vec<(&String, &Wire)> = self
                .wires
                .iter()
                .filter(|(_, w)| set.contains(&w.from.node) && set.contains(&w.to.node))
                .collect();
            let pure = comp.iter().all(|n| self.nodes[n] == NodeKind::FanOut)
                && internal.len() == comp.len()
                && internal.iter().all(|(_, w)| w.from.port == Port::OutThrough && w.to.port == Port::In);
            let decorated = internal.iter().any(|(id, _)| self.decorations.contains_key(*id));
            if !pure {
                push(
                    ViolationKind::UndecoratedCycle,
                    comp.clone(),
                    "dataflow cycle passes through something other than fan-outs of one loop".into(),
                );
            } else if !decorated {
                push(ViolationKind::UndecoratedCycle, comp.clone(), "closed arc has no decoration".into());
            }
        }

        let arcs = self.arcs();
        let arc_of = Self::arc_of_wire(&arcs);
        let ix = self.index();
        for (i, c) in self.choroi.iter().enumerate() {
            let tag = format!("chora#{i}");
            let Some(&a) = arc_of.get(&c.boundary) else {
                push(ViolationKind::ChoraScaleMismatch, vec![tag], "boundary is not a segment wire".into());
                continue;
            };
            if !arcs[a].closed {
                push(ViolationKind::ChoraScaleMismatch, vec![tag], "boundary arc is not closed".into());
                continue;
            }
            for wid in &arcs[a].wires {
                let fan = &self.wires[wid].to.node;
                if let Some(ch) = ix.by_from.get(&Endpoint::new(fan, Port::OutChord)) {
                    let g = &self.wires[ch].to.node;
                    match self.nodes.get(g) {
                        Some(NodeKind::Circ(s)) | Some(NodeKind::Bullet(s)) if *s == c.scale => {}
                        _ => push(
                            ViolationKind::ChoraScaleMismatch,
                            vec![tag.clone(), g.clone()],
                            format!("boundary crossing does not have scale {}", c.scale),
                        ),
                    }
                }
            }
            if let Some(d) = arcs[a].wires.iter().find_map(|w| self.decorations.get(w)) {
                if !d.equal_modulo(&c.base) {
                    push(
                        ViolationKind::ChoraScaleMismatch,
                        vec![tag.clone()],
                        "boundary decoration differs from the chora base".into(),
                    );
                }
            }
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    /// Strongly connected components that contain a cycle.
    fn cyclic_components(&self) -> Vec<Vec<String>> {
        let ids: Vec<&String> = self.nodes.keys().collect();
        let pos: HashMap<&str, usize> = ids.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        let n = ids.len();
        let mut adj = vec![Vec::new(); n];
        let mut self_loop = vec![false; n];
        for w in self.wires.values() {
            if let (Some(&a), Some(&b)) = (pos.get(w.from.node.as_str()), pos.get(w.to.node.as_str())) {
                adj[a].push(b);
                if a == b {
                    self_loop[a] = true;
                }
            }
        }
        let comps = tarjan(&adj);
        comps
            .into_iter()
            .filter(|c| c.len() > 1 || self_loop[c[0]])
            .map(|c| {
                let mut v: Vec<String> = c.into_iter().map(|i| ids[i].clone()).collect();
                v.sort();
                v
            })
            .collect()
    }

    pub fn to_dot(&self) -> String {
        let mut s = format!("digraph \"{}\" {{\n", self.name.replace('"', "'"));
        for (id, k) in &self.nodes {
            let label = match k {
                NodeKind::FanOut => "fan".to_string(),
                NodeKind::Circ(sc) => format!("circ {sc}"),
                NodeKind::Bullet(sc) => format!("bul {sc}"),
                NodeKind::Input(l) => format!("in {l}"),
                NodeKind::Output(l) => format!("out {l}"),
                NodeKind::Homeo { name, inverted } => {
                    format!("{name}{}", if *inverted { "^-1" } else { "" })
                }
            };
            let shape = match k {
                NodeKind::FanOut => "point",
                NodeKind::Input(_) | NodeKind::Output(_) => "plaintext",
                _ => "box",
            };
            s.push_str(&format!("  \"{id}\" [label=\"{label}\", shape={shape}];\n"));
        }
        for (id, w) in &self.wires {
            let style = match w.role {
                WireRole::Chord => ", style=dashed",
                WireRole::Segment => "",
            };
            let deco = self
                .decorations
                .get(id)
                .map(|t| format!(", label=\"{t}\""))
                .unwrap_or_default();
            s.push_str(&format!("  \"{}\" -> \"{}\" [id=\"{id}\"{style}{deco}];\n", w.from.node, w.to.node));
        }
        s.push_str("}\n");
        s
    }

    pub fn to_json_value(&self) -> Value {
        let scales: Map<String, Value> = self
            .scales
            .iter()
            .map(|(k, d)| {
                let v = match d {
                    ScaleDecl::Var => "var".to_string(),
                    ScaleDecl::Const(r) => ScaleExpr::constant(r.clone()).map(|s| s.to_string()).unwrap_or_default(),
                };
                (k.clone(), Value::String(v))
            })
            .collect();
        let nodes: Vec<Value> = self
            .nodes
            .iter()
            .map(|(id, k)| {
                let mut m = Map::new();
                m.insert("id".into(), json!(id));
                m.insert("kind".into(), json!(k.kind_name()));
                match k {
                    NodeKind::Circ(s) | NodeKind::Bullet(s) => {
                        m.insert("scale".into(), json!(s.to_string()));
                    }
                    NodeKind::Input(l) | NodeKind::Output(l) => {
                        m.insert("label".into(), json!(l));
                    }
                    NodeKind::Homeo { name, inverted } => {
                        m.insert("homeo".into(), json!(name));
                        if *inverted {
                            m.insert("inverted".into(), json!(true));
                        }
                    }
                    NodeKind::FanOut => {}
                }
                Value::Object(m)
            })
            .collect();
        let wires: Vec<Value> = self
            .wires
            .iter()
            .map(|(id, w)| {
                json!({
                    "id": id,
                    "from": [w.from.node, w.from.port.as_str()],
                    "to": [w.to.node, w.to.port.as_str()],
                    "role": match w.role { WireRole::Segment => "segment", WireRole::Chord => "chord" },
                })
            })
            .collect();
        let decorations: Map<String, Value> = self
            .decorations
            .iter()
            .map(|(k, t)| (k.clone(), Value::String(t.to_string())))
            .collect();
        let choroi: Vec<Value> = self
            .choroi
            .iter()
            .map(|c| {
                json!({
                    "boundaryArc": c.boundary,
                    "base": c.base.to_string(),
                    "scale": c.scale.to_string(),
                    "interior": c.interior.iter().collect::<Vec<_>>(),
                })
            })
            .collect();
        let mut top = Map::new();
        top.insert("name".into(), json!(self.name));
        top.insert("scales".into(), Value::Object(scales));
        top.insert("nodes".into(), Value::Array(nodes));
        top.insert("wires".into(), Value::Array(wires));
        top.insert("decorations".into(), Value::Object(decorations));
        top.insert("choroi".into(), Value::Array(choroi));
        if !self.gates.is_empty() {
            let gates: Vec<Value> = self
                .gates
                .iter()
                .map(|g| {
                    json!({
                        "kind": g.kind.as_str(),
                        "scale": g.scale.to_string(),
                        "nodes": g.nodes.iter().collect::<Vec<_>>(),
                        "base": g.base,
                        "params": g.params,
                        "output": g.output,
                    })
                })
                .collect();
            top.insert("gates".into(), Value::Array(gates));
        }
        Value::Object(top)
    }

    /// Canonical serialization: sorted keys, nodes and wires ordered by id.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json_value()).expect("json serialization");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Diagram, DiagramError> {
        let v: Value = serde_json::from_str(text).map_err(|e| DiagramError::Parse {
            line: e.line(),
            col: e.column(),
            msg: e.to_string(),
        })?;
        Self::from_json_value(&v)
    }

    pub fn from_json_value(v: &Value) -> Result<Diagram, DiagramError> {
        let top = v.as_object().ok_or_else(|| schema("", "top level must be an object"))?;
        let mut d = Diagram::new(top.get("name").and_then(Value::as_str).unwrap_or(""));

        if let Some(sc) = top.get("scales") {
            let sc = sc.as_object().ok_or_else(|| schema("scales", "must be an object"))?;
            for (k, val) in sc {
                let s = val.as_str().ok_or_else(|| schema("scales", "values must be strings"))?;
                let decl = if s == "var" {
                    ScaleDecl::Var
                } else {
                    let e: ScaleExpr = s.parse().map_err(|e| schema("scales", format!("{k}: {e}")))?;
                    if !e.exponents().is_empty() || !e.coefficient().is_positive() {
                        return Err(schema("scales", format!("{k}: constant must be a positive rational")));
                    }
                    ScaleDecl::Const(e.coefficient().clone())
                };
                d.scales.insert(k.clone(), decl);
            }
        }

        let str_field = |o: &Map<String, Value>, f: &str, ctx: &str| -> Result<String, DiagramError> {
            o.get(f)
                .and_then(Value::as_str)
                .map(str::to_string)
                .ok_or_else(|| schema(ctx, format!("missing string field `{f}`")))
        };
        let scale_field = |o: &Map<String, Value>, ctx: &str, decl: &BTreeMap<String, ScaleDecl>| {
            let s = str_field(o, "scale", ctx)?;
            let e: ScaleExpr = s.parse().map_err(|e| schema(ctx, format!("{e}")))?;
            if let Some(v) = e.vars().find(|v| !decl.contains_key(*v)) {
                return Err(schema("scales", format!("undeclared scale variable `{v}`")));
            }
            Ok(e)
        };

        let nodes = top
            .get("nodes")
            .and_then(Value::as_array)
            .ok_or_else(|| schema("nodes", "missing array"))?;
        for n in nodes {
            let o = n.as_object().ok_or_else(|| schema("nodes", "entries must be objects"))?;
            let id = str_field(o, "id", "nodes")?;
            let kind = match str_field(o, "kind", "nodes")?.as_str() {
                "fanout" => NodeKind::FanOut,
                "circ" => NodeKind::Circ(scale_field(o, "nodes.scale", &d.scales)?),
                "bullet" => NodeKind::Bullet(scale_field(o, "nodes.scale", &d.scales)?),
                "input" => NodeKind::Input(str_field(o, "label", "nodes.label")?),
                "output" => NodeKind::Output(str_field(o, "label", "nodes.label")?),
                "homeo" => NodeKind::Homeo {
                    name: str_field(o, "homeo", "nodes.homeo")?,
                    inverted: o.get("inverted").and_then(Value::as_bool).unwrap_or(false),
                },
                other => return Err(schema("nodes.kind", format!("unknown kind `{other}`"))),
            };
            if d.nodes.insert(id.clone(), kind).is_some() {
                return Err(schema("nodes.id", format!("duplicate node `{id}`")));
            }
        }

        let wires = top
            .get("wires")
            .and_then(Value::as_array)
            .ok_or_else(|| schema("wires", "missing array"))?;
        let endpoint = |v: Option<&Value>, ctx: &str| -> Result<Endpoint, DiagramError> {
            let a = v.and_then(Value::as_array).ok_or_else(|| schema(ctx, "must be [node, port]"))?;
            match (a.first().and_then(Value::as_str), a.get(1).and_then(Value::as_str), a.len()) {
                (Some(n), Some(p), 2) => Ok(Endpoint::new(
                    n,
                    p.parse().map_err(|_| schema(ctx, format!("unknown port `{p}`")))?,
                )),
                _ => Err(schema(ctx, "must be [node, port]")),
            }
        };
        for w in wires {
            let o = w.as_object().ok_or_else(|| schema("wires", "entries must be objects"))?;
            let id = str_field(o, "id", "wires")?;
            let role = match str_field(o, "role", "wires.role")?.as_str() {
                "segment" => WireRole::Segment,
                "chord" => WireRole::Chord,
                other => return Err(schema("wires.role", format!("unknown role `{other}`"))),
            };
            let wire = Wire {
                from: endpoint(o.get("from"), "wires.from")?,
                to: endpoint(o.get("to"), "wires.to")?,
                role,
            };
            if d.wires.insert(id.clone(), wire).is_some() {
                return Err(schema("wires.id", format!("duplicate wire `{id}`")));
            }
        }

        if let Some(dec) = top.get("decorations") {
            let dec = dec.as_object().ok_or_else(|| schema("decorations", "must be an object"))?;
            for (k, val) in dec {
                let s = val.as_str().ok_or_else(|| schema("decorations", "values must be strings"))?;
                let t: ColorTerm = s.parse().map_err(|e| schema("decorations", format!("{k}: {e}")))?;
                if let Some(v) = t.scale_vars().into_iter().find(|v| !d.scales.contains_key(v)) {
                    return Err(schema("scales", format!("undeclared scale variable `{v}`")));
                }
                if !d.wires.contains_key(k) {
                    return Err(schema("decorations", format!("unknown wire `{k}`")));
                }
                d.decorations.insert(k.clone(), t);
            }
        }

        if let Some(ch) = top.get("choroi") {
            let ch = ch.as_array().ok_or_else(|| schema("choroi", "must be an array"))?;
            for c in ch {
                let o = c.as_object().ok_or_else(|| schema("choroi", "entries must be objects"))?;
                let base: ColorTerm = str_field(o, "base", "choroi.base")?
                    .parse()
                    .map_err(|e| schema("choroi.base", format!("{e}")))?;
                let interior = o
                    .get("interior")
                    .and_then(Value::as_array)
                    .ok_or_else(|| schema("choroi.interior", "must be an array"))?
                    .iter()
                    .map(|x| x.as_str().map(str::to_string).ok_or_else(|| schema("choroi.interior", "ids must be strings")))
                    .collect::<Result<BTreeSet<_>, _>>()?;
                d.choroi.push(ChoraRecord {
                    boundary: str_field(o, "boundaryArc", "choroi.boundaryArc")?,
                    base,
                    scale: scale_field(o, "choroi.scale", &d.scales)?,
                    interior,
                });
            }
        }

        if let Some(gs) = top.get("gates") {
            let gs = gs.as_array().ok_or_else(|| schema("gates", "must be an array"))?;
            for g in gs {
                let o = g.as_object().ok_or_else(|| schema("gates", "entries must be objects"))?;
                let kind = str_field(o, "kind", "gates.kind")?;
                let strs = |f: &str| -> Result<Vec<String>, DiagramError> {
                    o.get(f)
                        .and_then(Value::as_array)
                        .ok_or_else(|| schema(&format!("gates.{f}"), "must be an array"))?
                        .iter()
                        .map(|x| x.as_str().map(str::to_string).ok_or_else(|| schema(&format!("gates.{f}"), "must hold strings")))
                        .collect()
                };
                d.gates.push(GateRecord {
                    kind: kind.parse().map_err(|_| schema("gates.kind", format!("unknown kind `{kind}`")))?,
                    scale: scale_field(o, "gates.scale", &d.scales)?,
                    nodes: strs("nodes")?.into_iter().collect(),
                    base: str_field(o, "base", "gates.base")?,
                    params: strs("params")?,
                    output: str_field(o, "output", "gates.output")?,
                });
            }
        }
        Ok(d)
    }
}

fn tarjan(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = adj.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comps = Vec::new();
    let mut counter = 0;
    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        let mut work: Vec<(usize, usize)> = vec![(root, 0)];
        while let Some(&(v, ei)) = work.last() {
            if ei == 0 && index[v] == usize::MAX {
                index[v] = counter;
                low[v] = counter;
                counter += 1;
                stack.push(v);
                on_stack[v] = true;
            }
            if ei < adj[v].len() {
                let w = adj[v][ei];
                work.last_mut().unwrap().1 += 1;
                if index[w] == usize::MAX {
                    work.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                work.pop();
                if let Some(&(p, _)) = work.last() {
                    low[p] = low[p].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().unwrap();
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comps.push(comp);
                }
            }
        }
    }
    comps
}

/// The single crossing: `x` passes over `u`, producing `x` and `x circ u`
/// (or `x bullet u`).
pub fn build_crossing(bullet: bool, scale: ScaleExpr) -> Diagram {
    let mut d = Diagram::new(if bullet { "bullet-crossing" } else { "crossing" });
    d.declare_scale_vars(&scale);
    d.add_node("i_x", NodeKind::Input("x".into()));
    d.add_node("i_u", NodeKind::Input("u".into()));
    d.add_node("F", NodeKind::FanOut);
    d.add_node(
        "G",
        if bullet {
            NodeKind::Bullet(scale)
        } else {
            NodeKind::Circ(scale)
        },
    );
    d.add_node("o_x", NodeKind::Output("_x".into()));
    d.add_node("o_v", NodeKind::Output("out".into()));
    d.connect(("i_x", Port::Out), ("F", Port::In), WireRole::Segment);
    d.connect(("F", Port::OutThrough), ("o_x", Port::In), WireRole::Segment);
    d.connect(("F", Port::OutChord), ("G", Port::InBase), WireRole::Chord);
    d.connect(("i_u", Port::Out), ("G", Port::InOperand), WireRole::Segment);
    d.connect(("G", Port::Out), ("o_v", Port::In), WireRole::Segment);
    d
}
