//! Exact, semantics-preserving moves on diagrams, gate constructions and
//! the chora decompositions.

mod choroi;
mod gates;
mod moves;
mod r3;
pub(crate) mod work;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

pub use choroi::{chora_in_chora, difference_in_chora, elementary_chora_decompose, normalize_choroi, split_chora};
pub use gates::{crossing_to_difference, difference_self_similar, make_gate};
pub use moves::{compose, consecutive_gates, r1, r1_sites, r2, virtual_insert, virtual_remove, w1, w2};
pub use r3::{approx_r3, build_r3_site, ResidueRecord};

use crate::diagram::WireRole;

use crate::diagram::{Diagram, GateKind, GateRecord};
use crate::evaluate::symbolic_colors;
use crate::scale::ScaleExpr;
use crate::terms::ColorTerm;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RewriteError {
    #[error("site does not match the move: {0}")]
    SiteMismatch(String),
    #[error("scales do not cancel: {0}")]
    ScaleMismatch(String),
    #[error("move would orphan the decoration on `{0}`")]
    WouldOrphanDecoration(String),
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("invalid diagram: {0}")]
    Invalid(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MoveKind {
    R1RemoveTadpole,
    R2CancelPair,
    ComposeCrossings,
    W1JoinWires,
    W2ReverseOverstrand,
    VirtualInsert,
    VirtualRemove,
    CrossingToDifference,
    DifferenceSelfSimilar,
    ElementaryChoraDecompose,
    ChoraInChora,
    DifferenceInChora,
}

impl MoveKind {
    pub const ALL: [MoveKind; 12] = [
        MoveKind::R1RemoveTadpole,
        MoveKind::R2CancelPair,
        MoveKind::ComposeCrossings,
        MoveKind::W1JoinWires,
        MoveKind::W2ReverseOverstrand,
        MoveKind::VirtualInsert,
        MoveKind::VirtualRemove,
        MoveKind::CrossingToDifference,
        MoveKind::DifferenceSelfSimilar,
        MoveKind::ElementaryChoraDecompose,
        MoveKind::ChoraInChora,
        MoveKind::DifferenceInChora,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            MoveKind::R1RemoveTadpole => "R1_remove_tadpole",
            MoveKind::R2CancelPair => "R2_cancel_pair",
            MoveKind::ComposeCrossings => "Compose_crossings",
            MoveKind::W1JoinWires => "W1_join_wires",
            MoveKind::W2ReverseOverstrand => "W2_reverse_overstrand",
            MoveKind::VirtualInsert => "Virtual_insert",
            MoveKind::VirtualRemove => "Virtual_remove",
            MoveKind::CrossingToDifference => "Crossing_to_difference",
            MoveKind::DifferenceSelfSimilar => "Difference_self_similar",
            MoveKind::ElementaryChoraDecompose => "Elementary_chora_decompose",
            MoveKind::ChoraInChora => "Chora_in_chora",
            MoveKind::DifferenceInChora => "Difference_in_chora",
        }
    }

    /// What the site list names, in order.
    pub fn site_schema(&self) -> &'static str {
        match self {
            MoveKind::R1RemoveTadpole => "gate",
            MoveKind::R2CancelPair | MoveKind::ComposeCrossings => "gate gate",
            MoveKind::W1JoinWires => "wire wire",
            MoveKind::W2ReverseOverstrand => "wire on a closed over-arc",
            MoveKind::VirtualInsert => "over-wire under-wire",
            MoveKind::VirtualRemove => "gate",
            MoveKind::CrossingToDifference => "gate",
            MoveKind::DifferenceSelfSimilar => "gate-record index",
            MoveKind::ElementaryChoraDecompose => "chora index [second]",
            MoveKind::ChoraInChora => "outer chora index",
            MoveKind::DifferenceInChora => "chora index",
        }
    }
}

impl fmt::Display for MoveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MoveKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        MoveKind::ALL
            .iter()
            .find(|k| k.as_str().eq_ignore_ascii_case(s))
            .copied()
            .ok_or_else(|| format!("unknown move `{s}`"))
    }
}

fn site_arg(site: &[String], i: usize, kind: MoveKind) -> Result<&str, RewriteError> {
    site.get(i)
        .map(String::as_str)
        .ok_or_else(|| RewriteError::SiteMismatch(format!("{kind} expects site `{}`", kind.site_schema())))
}

fn index_arg(site: &[String], i: usize, kind: MoveKind) -> Result<usize, RewriteError> {
    site_arg(site, i, kind)?
        .parse()
        .map_err(|_| RewriteError::SiteMismatch(format!("{kind} expects an index")))
}

/// Applies a move at a site given as a list of ids (see [`MoveKind::site_schema`]).
pub fn apply_move(d: &Diagram, kind: MoveKind, site: &[String]) -> Result<Diagram, RewriteError> {
    use MoveKind::*;
    let a = |i| site_arg(site, i, kind);
    match kind {
        R1RemoveTadpole => r1(d, a(0)?),
        R2CancelPair => r2(d, a(0)?, a(1)?),
        ComposeCrossings => compose(d, a(0)?, a(1)?),
        W1JoinWires => w1(d, a(0)?, a(1)?),
        W2ReverseOverstrand => w2(d, a(0)?),
        VirtualInsert => virtual_insert(d, a(0)?, a(1)?),
        VirtualRemove => virtual_remove(d, a(0)?),
        CrossingToDifference => crossing_to_difference(d, a(0)?),
        DifferenceSelfSimilar => difference_self_similar(d, index_arg(site, 0, kind)?),
        ElementaryChoraDecompose => {
            let second = site.get(1).is_some_and(|s| s == "second");
            elementary_chora_decompose(d, index_arg(site, 0, kind)?, second)
        }
        ChoraInChora => chora_in_chora(d, index_arg(site, 0, kind)?),
        DifferenceInChora => difference_in_chora(d, index_arg(site, 0, kind)?),
    }
}

/// The value a gate record must carry on its output wire.
pub fn gate_formula(kind: GateKind, s: &ScaleExpr, x: &ColorTerm, params: &[ColorTerm]) -> Option<ColorTerm> {
    let c = |a: ColorTerm, b: ColorTerm| ColorTerm::circ(s.clone(), a, b);
    let b = |a: ColorTerm, b: ColorTerm| ColorTerm::bullet(s.clone(), a, b);
    if params.len() != kind.arity() {
        return None;
    }
    Some(match kind {
        GateKind::Difference => b(c(x.clone(), params[0].clone()), c(x.clone(), params[1].clone())),
        GateKind::Sum => b(x.clone(), c(c(x.clone(), params[0].clone()), params[1].clone())),
        GateKind::Inverse => b(c(x.clone(), params[0].clone()), x.clone()),
        GateKind::EpsFanOut => c(x.clone(), params[0].clone()),
    })
}

/// Checks a gate record against the symbolic colors of its wires.
pub fn verify_gate(d: &Diagram, g: &GateRecord) -> Result<(), RewriteError> {
    let colors = symbolic_colors(d).map_err(|e| RewriteError::Invalid(e.to_string()))?;
    verify_gate_with(d, g, colors.colors())
}

fn verify_gate_with(d: &Diagram, g: &GateRecord, colors: &BTreeMap<String, ColorTerm>) -> Result<(), RewriteError> {
    if let Some(n) = g.nodes.iter().find(|n| !d.nodes.contains_key(*n)) {
        return Err(RewriteError::SiteMismatch(format!("gate record names missing node `{n}`")));
    }
    let get = |w: &str| {
        colors
            .get(w)
            .cloned()
            .ok_or_else(|| RewriteError::SiteMismatch(format!("no color on wire `{w}`")))
    };
    let x = get(&g.base)?;
    let params = g.params.iter().map(|p| get(p)).collect::<Result<Vec<_>, _>>()?;
    let want = gate_formula(g.kind, &g.scale, &x, &params)
        .ok_or_else(|| RewriteError::SiteMismatch("wrong number of parameters".into()))?;
    let got = get(&g.output)?;
    if got.equal_modulo(&want) {
        Ok(())
    } else {
        Err(RewriteError::SiteMismatch(format!(
            "{} record output is {} but should be {}",
            g.kind.as_str(),
            got.normalize(),
            want.normalize()
        )))
    }
}

/// Structural census of a decomposed diagram.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Census {
    pub crossings: usize,
    pub gates: BTreeMap<String, usize>,
    /// Difference, sum and inverse records together.
    pub difference_family: usize,
    pub elementary_choroi: usize,
    pub other_choroi: usize,
    /// Crossings covered by no gate record and no chora.
    pub uncovered_crossings: usize,
    /// Gate records whose claimed function does not check out.
    pub unverified_gates: usize,
}

impl Census {
    /// Only difference-family gates and elementary choroi remain.
    pub fn is_normal(&self) -> bool {
        self.other_choroi == 0
            && self.uncovered_crossings == 0
            && self.unverified_gates == 0
            && self.gates.get("EpsFanOut").copied().unwrap_or(0) == 0
    }
}

impl fmt::Display for Census {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "crossings={} difference_family={} elementary_choroi={} other_choroi={} uncovered={} unverified={}",
            self.crossings,
            self.difference_family,
            self.elementary_choroi,
            self.other_choroi,
            self.uncovered_crossings,
            self.unverified_gates
        )?;
        for (k, v) in &self.gates {
            write!(f, " {k}={v}")?;
        }
        Ok(())
    }
}

pub fn census(d: &Diagram) -> Census {
    let mut c = Census::default();
    let crossings = d.crossings();
    c.crossings = crossings.len();
    let colors = symbolic_colors(d).ok();
    for g in &d.gates {
        *c.gates.entry(g.kind.as_str().to_string()).or_default() += 1;
        if matches!(g.kind, GateKind::Difference | GateKind::Sum | GateKind::Inverse) {
            c.difference_family += 1;
        }
        let ok = colors.as_ref().is_some_and(|col| verify_gate_with(d, g, col.colors()).is_ok());
        if !ok {
            c.unverified_gates += 1;
        }
    }
    let mut covered: BTreeSet<&str> = BTreeSet::new();
    for g in &d.gates {
        covered.extend(g.nodes.iter().map(String::as_str));
    }
    let arcs = d.arcs();
    let arc_of = Diagram::arc_of_wire(&arcs);
    for ch in &d.choroi {
        let interior_crossings = crossings
            .iter()
            .filter(|(f, g)| ch.interior.contains(f) && ch.interior.contains(g))
            .count();
        let nested = d.choroi.iter().any(|o| {
            o != ch && arc_of.get(&o.boundary).is_some_and(|&a| {
                arcs[a].wires.iter().any(|w| ch.interior.contains(&d.wires[w].from.node))
            })
        });
        if interior_crossings == 1 && !nested {
            c.elementary_choroi += 1;
        } else {
            c.other_choroi += 1;
        }
        covered.extend(ch.interior.iter().map(String::as_str));
        if let Some(&a) = arc_of.get(&ch.boundary) {
            for w in &arcs[a].wires {
                let fan = &d.wires[w].from.node;
                covered.insert(fan);
                if let Some((_, g)) = crossings.iter().find(|(f, _)| f == fan) {
                    covered.insert(g);
                }
            }
        }
    }
    c.uncovered_crossings = crossings
        .iter()
        .filter(|(f, g)| !(covered.contains(f.as_str()) && covered.contains(g.as_str())))
        .count();
    c
}

/// Sites at which each move applies, found by trying candidate sites.
/// Virtual insertion applies anywhere, so it is sampled: each segment wire
/// against itself and against the next segment wire.
pub fn applicable_moves(d: &Diagram) -> Vec<(MoveKind, Vec<String>)> {
    use MoveKind::*;
    let mut cands: Vec<(MoveKind, Vec<String>)> = Vec::new();
    for g in moves::r1_sites(d) {
        cands.push((R1RemoveTadpole, vec![g]));
    }
    for (a, b) in moves::consecutive_gates(d) {
        cands.push((R2CancelPair, vec![a.clone(), b.clone()]));
        cands.push((ComposeCrossings, vec![a, b]));
    }
    for (_, g) in d.crossings() {
        cands.push((VirtualRemove, vec![g.clone()]));
        cands.push((CrossingToDifference, vec![g]));
    }
    let segs: Vec<&String> = d
        .wires
        .iter()
        .filter(|(_, w)| w.role == WireRole::Segment)
        .map(|(id, _)| id)
        .collect();
    for (i, a) in segs.iter().enumerate() {
        cands.push((VirtualInsert, vec![a.to_string(), a.to_string()]));
        if segs.len() > 1 {
            cands.push((VirtualInsert, vec![a.to_string(), segs[(i + 1) % segs.len()].to_string()]));
        }
        cands.push((W2ReverseOverstrand, vec![a.to_string()]));
    }
    if let Ok(p) = symbolic_colors(d) {
        let colors = p.colors();
        for (i, a) in segs.iter().enumerate() {
            for b in &segs[i + 1..] {
                if let (Some(ca), Some(cb)) = (colors.get(*a), colors.get(*b)) {
                    if ca.equal_modulo(cb) {
                        cands.push((W1JoinWires, vec![a.to_string(), b.to_string()]));
                    }
                }
            }
        }
    }
    for i in 0..d.gates.len() {
        cands.push((DifferenceSelfSimilar, vec![i.to_string()]));
    }
    for i in 0..d.choroi.len() {
        cands.push((ElementaryChoraDecompose, vec![i.to_string()]));
        cands.push((ElementaryChoraDecompose, vec![i.to_string(), "second".into()]));
        cands.push((ChoraInChora, vec![i.to_string()]));
        cands.push((DifferenceInChora, vec![i.to_string()]));
    }
    cands.retain(|(k, site)| apply_move(d, *k, site).is_ok());
    cands
}
