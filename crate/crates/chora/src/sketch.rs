//! Compact textual builder for diagrams with choroi.
//!
//! A strand is a list of whitespace separated tokens read from its input
//! to its output:
//!
//! * `[A` / `]A`: enter / leave chora `A` (a `circ` / `bullet` gate whose
//!   fan-out is added to the loop of `A`)
//! * `F1`: a fan-out named `F1`
//! * `G1<F1:c:mu`, `G1<F1:b:mu`: a `circ` / `bullet` gate `G1` at scale
//!   `mu` whose base comes from the fan-out `F1`
//! * `H1@shear`, `H1@shear'`: a homeomorphism node, `'` for the inverse
//!
//! The interior of a chora is everything between its entries and exits,
//! together with the loops of choroi whose boundary lies inside it.

use std::collections::{BTreeMap, BTreeSet};
use std::str::FromStr;

use crate::diagram::{ChoraRecord, Diagram, NodeKind, Port, ScaleDecl, WireRole};
use crate::scale::ScaleExpr;
use crate::terms::ColorTerm;

#[derive(Clone, Debug)]
pub struct Sketch {
    name: String,
    choroi: Vec<(String, String, String)>,
    strands: Vec<(String, String, String)>,
}

impl Sketch {
    pub fn new(name: &str) -> Self {
        Sketch {
            name: name.to_string(),
            choroi: Vec::new(),
            strands: Vec::new(),
        }
    }

    pub fn chora(mut self, name: &str, base: &str, scale: &str) -> Self {
        self.choroi.push((name.into(), base.into(), scale.into()));
        self
    }

    pub fn strand(mut self, input: &str, tokens: &str, output: &str) -> Self {
        self.strands.push((input.into(), tokens.into(), output.into()));
        self
    }

    pub fn build(&self) -> Result<Diagram, String> {
        let mut d = Diagram::new(&self.name);
        let mut loops: BTreeMap<&str, Vec<String>> = BTreeMap::new();
        let mut bounds: BTreeMap<&str, Vec<String>> = BTreeMap::new();
        let mut meta: BTreeMap<&str, (ColorTerm, ScaleExpr)> = BTreeMap::new();
        for (n, b, s) in &self.choroi {
            let base = ColorTerm::from_str(b).map_err(|e| format!("chora {n}: {e}"))?;
            let scale = ScaleExpr::from_str(s).map_err(|e| format!("chora {n}: {e}"))?;
            d.declare_scale_vars(&scale);
            for v in base.scale_vars() {
                d.scales.entry(v).or_insert(ScaleDecl::Var);
            }
            meta.insert(n, (base, scale));
            loops.insert(n, Vec::new());
            bounds.insert(n, Vec::new());
        }
        let mut interiors: BTreeMap<&str, BTreeSet<String>> = BTreeMap::new();
        let mut chords: Vec<(String, String)> = Vec::new();
        let mut counter = 0;
        for (input, tokens, output) in &self.strands {
            let i = format!("i_{input}");
            let o = format!("o_{}", output.trim_start_matches('_'));
            d.add_node(&i, NodeKind::Input(input.clone()));
            let mut seq = vec![i];
            let mut open: Vec<&str> = Vec::new();
            for tok in tokens.split_whitespace() {
                let node = if let Some(c) = tok.strip_prefix('[').or_else(|| tok.strip_prefix(']')) {
                    let (name, (_, scale)) = meta.get_key_value(c).ok_or_else(|| format!("unknown chora `{c}`"))?;
                    counter += 1;
                    let entry = tok.starts_with('[');
                    let g = format!("{c}_{}{counter}", if entry { "e" } else { "x" });
                    let f = format!("{c}_f{}{counter}", if entry { "e" } else { "x" });
                    d.add_node(&f, NodeKind::FanOut);
                    d.add_node(
                        &g,
                        if entry {
                            NodeKind::Circ(scale.clone())
                        } else {
                            NodeKind::Bullet(scale.clone())
                        },
                    );
                    chords.push((f.clone(), g.clone()));
                    loops.get_mut(name).unwrap().push(f);
                    bounds.get_mut(name).unwrap().push(g.clone());
                    if entry {
                        for a in &open {
                            interiors.entry(a).or_default().insert(g.clone());
                        }
                        open.push(name);
                    } else {
                        if open.pop() != Some(name) {
                            return Err(format!("strand `{input}` leaves `{c}` out of turn"));
                        }
                        for a in &open {
                            interiors.entry(a).or_default().insert(g.clone());
                        }
                    }
                    seq.push(g);
                    continue;
                } else if let Some((g, rest)) = tok.split_once('<') {
                    let mut parts = rest.splitn(3, ':');
                    let (f, k, s) = (parts.next(), parts.next(), parts.next());
                    let (Some(f), Some(k), Some(s)) = (f, k, s) else {
                        return Err(format!("bad gate token `{tok}`"));
                    };
                    let scale = ScaleExpr::from_str(s).map_err(|e| e.to_string())?;
                    d.declare_scale_vars(&scale);
                    let kind = match k {
                        "c" => NodeKind::Circ(scale),
                        "b" => NodeKind::Bullet(scale),
                        _ => return Err(format!("bad gate kind in `{tok}`")),
                    };
                    d.add_node(g, kind);
                    chords.push((f.to_string(), g.to_string()));
                    g.to_string()
                } else if let Some((h, name)) = tok.split_once('@') {
                    let inverted = name.ends_with('\'');
                    d.add_node(
                        h,
                        NodeKind::Homeo {
                            name: name.trim_end_matches('\'').to_string(),
                            inverted,
                        },
                    );
                    h.to_string()
                } else {
                    d.add_node(tok, NodeKind::FanOut);
                    tok.to_string()
                };
                for a in &open {
                    interiors.entry(a).or_default().insert(node.clone());
                }
                seq.push(node);
            }
            if !open.is_empty() {
                return Err(format!("strand `{input}` never leaves `{}`", open[0]));
            }
            d.add_node(&o, NodeKind::Output(output.clone()));
            seq.push(o);
            for pair in seq.windows(2) {
                let pa = d.nodes[&pair[0]].strand_out().unwrap();
                let pb = d.nodes[&pair[1]].strand_in().unwrap();
                d.connect((&pair[0], pa), (&pair[1], pb), WireRole::Segment);
            }
        }
        for (f, g) in &chords {
            if !d.nodes.contains_key(f) || !d.nodes.contains_key(g) {
                return Err(format!("chord `{f}` -> `{g}` names a missing node"));
            }
            d.connect((f, Port::OutChord), (g, Port::InBase), WireRole::Chord);
        }
        for (n, _, _) in &self.choroi {
            let n = n.as_str();
            let fans = &loops[n];
            if fans.is_empty() {
                return Err(format!("chora `{n}` is never entered"));
            }
            let mut closing = String::new();
            for k in 0..fans.len() {
                let (a, b) = (&fans[k], &fans[(k + 1) % fans.len()]);
                closing = d.connect((a, Port::OutThrough), (b, Port::In), WireRole::Segment);
            }
            let (base, scale) = meta[n].clone();
            d.decorations.insert(closing.clone(), base.clone());
            let mut interior = interiors.get(n).cloned().unwrap_or_default();
            for (m, _, _) in &self.choroi {
                if m != n && bounds[m.as_str()].iter().all(|g| interior.contains(g)) {
                    interior.extend(loops[m.as_str()].iter().cloned());
                }
            }
            d.choroi.push(ChoraRecord {
                boundary: closing,
                base,
                scale,
                interior,
            });
        }
        Ok(d)
    }
}
