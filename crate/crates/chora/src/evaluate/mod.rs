//! Color propagation through diagrams, io-functions, and numerical checks
//! of the limit statements in concrete models.

mod limits;

pub use limits::*;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::diagram::{Diagram, Endpoint, NodeKind, Port, ScaleDecl};
use crate::models::{coord_gap, HomeoRegistry, Model, ModelError, Point};
use crate::scale::{ScaleBinding, ScaleError};
use crate::terms::{ColorTerm, PointBinding, TermError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("propagation is stuck; uncolored wires: {0:?}")]
    Stuck(Vec<String>),
    #[error("no value for input `{0}`")]
    UnboundInput(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Scale(#[from] ScaleError),
    #[error(transparent)]
    Term(#[from] TermError),
    #[error("error increased over {0} consecutive steps")]
    DivergenceDetected(usize),
    #[error("{0}")]
    Invalid(String),
}

/// Ready-to-run firing order of a diagram.
#[derive(Clone, Debug)]
pub struct Schedule {
    /// Closed-arc wires seeded from their decorations.
    pub seeds: Vec<(String, ColorTerm)>,
    pub order: Vec<String>,
    pub uncolored: Vec<String>,
}

impl Schedule {
    pub fn is_complete(&self) -> bool {
        self.uncolored.is_empty()
    }
}

/// Kahn ordering of nodes; loops are opened at their decorated wire.
pub fn schedule(d: &Diagram) -> Schedule {
    schedule_with(d, &BTreeMap::new())
}

/// As [`schedule`], with extra wires fixed to given colors.
pub fn schedule_with(d: &Diagram, fixed: &BTreeMap<String, ColorTerm>) -> Schedule {
    let ix = d.index();
    let mut seeds: BTreeMap<String, ColorTerm> = fixed.clone();
    for arc in d.arcs().iter().filter(|a| a.closed) {
        if arc.wires.iter().any(|w| seeds.contains_key(w)) {
            continue;
        }
        if let Some((w, t)) = arc.wires.iter().find_map(|w| d.decorations.get(w).map(|t| (w, t))) {
            seeds.insert(w.clone(), t.clone());
        }
    }
    let mut pending: HashMap<&str, usize> = HashMap::new();
    for (id, k) in &d.nodes {
        let missing = k
            .in_ports()
            .iter()
            .filter(|p| match ix.by_to.get(&Endpoint::new(id, **p)) {
                Some(w) => !seeds.contains_key(w),
                None => true,
            })
            .count();
        pending.insert(id.as_str(), missing);
    }
    let mut ready: BTreeSet<&str> = pending.iter().filter(|(_, c)| **c == 0).map(|(n, _)| *n).collect();
    let mut colored: BTreeSet<String> = seeds.keys().cloned().collect();
    let mut order = Vec::new();
    while let Some(n) = ready.pop_first() {
        order.push(n.to_string());
        for p in d.nodes[n].out_ports() {
            if let Some(w) = ix.by_from.get(&Endpoint::new(n, *p)) {
                if !colored.insert(w.clone()) {
                    continue;
                }
                let t = d.wires[w].to.node.as_str();
                if let Some(c) = pending.get_mut(t) {
                    *c -= 1;
                    if *c == 0 {
                        ready.insert(t);
                    }
                }
            }
        }
    }
    let uncolored = d.wires.keys().filter(|w| !colored.contains(*w)).cloned().collect();
    Schedule {
        seeds: seeds.into_iter().collect(),
        order,
        uncolored,
    }
}

/// Colors of all wires, computed in an arbitrary color domain.
pub trait Colorer {
    type C: Clone;
    fn input(&mut self, label: &str) -> Result<Self::C, EvalError>;
    fn seed(&mut self, wire: &str, t: &ColorTerm) -> Result<Self::C, EvalError>;
    fn gate(&mut self, node: &str, kind: &NodeKind, base: &Self::C, op: &Self::C) -> Result<Self::C, EvalError>;
    fn homeo(&mut self, name: &str, inverted: bool, x: &Self::C) -> Result<Self::C, EvalError>;
}

pub enum Propagation<C> {
    Complete(BTreeMap<String, C>),
    Stuck {
        colored: BTreeMap<String, C>,
        uncolored: Vec<String>,
    },
}

impl<C> Propagation<C> {
    pub fn colors(&self) -> &BTreeMap<String, C> {
        match self {
            Propagation::Complete(c) => c,
            Propagation::Stuck { colored, .. } => colored,
        }
    }

    pub fn is_complete(&self) -> bool {
        matches!(self, Propagation::Complete(_))
    }

    pub fn complete(self) -> Result<BTreeMap<String, C>, EvalError> {
        match self {
            Propagation::Complete(c) => Ok(c),
            Propagation::Stuck { uncolored, .. } => Err(EvalError::Stuck(uncolored)),
        }
    }
}

pub fn propagate_with<K: Colorer>(d: &Diagram, sched: &Schedule, k: &mut K) -> Result<Propagation<K::C>, EvalError> {
    let ix = d.index();
    let mut colors: BTreeMap<String, K::C> = BTreeMap::new();
    for (w, t) in &sched.seeds {
        colors.insert(w.clone(), k.seed(w, t)?);
    }
    for n in &sched.order {
        let kind = &d.nodes[n];
        let get = |p: Port, colors: &BTreeMap<String, K::C>| -> K::C {
            let w = &ix.by_to[&Endpoint::new(n, p)];
            colors[w].clone()
        };
        let out = match kind {
            NodeKind::Output(_) => continue,
            NodeKind::Input(l) => k.input(l)?,
            NodeKind::FanOut => get(Port::In, &colors),
            NodeKind::Circ(_) | NodeKind::Bullet(_) => {
                let (b, o) = (get(Port::InBase, &colors), get(Port::InOperand, &colors));
                k.gate(n, kind, &b, &o)?
            }
            NodeKind::Homeo { name, inverted } => {
                let x = get(Port::In, &colors);
                k.homeo(name, *inverted, &x)?
            }
        };
        for p in kind.out_ports() {
            if let Some(w) = ix.by_from.get(&Endpoint::new(n, *p)) {
                colors.entry(w.clone()).or_insert_with(|| out.clone());
            }
        }
    }
    Ok(if sched.uncolored.is_empty() {
        Propagation::Complete(colors)
    } else {
        Propagation::Stuck {
            colored: colors,
            uncolored: sched.uncolored.clone(),
        }
    })
}

pub fn propagate<K: Colorer>(d: &Diagram, k: &mut K) -> Result<Propagation<K::C>, EvalError> {
    propagate_with(d, &schedule(d), k)
}

/// Symbolic colors: inputs become variables named by their labels.
pub struct Symbolic;

impl Colorer for Symbolic {
    type C = ColorTerm;
    fn input(&mut self, label: &str) -> Result<ColorTerm, EvalError> {
        Ok(ColorTerm::var(label))
    }
    fn seed(&mut self, _: &str, t: &ColorTerm) -> Result<ColorTerm, EvalError> {
        Ok(t.normalize())
    }
    fn gate(&mut self, _: &str, kind: &NodeKind, b: &ColorTerm, o: &ColorTerm) -> Result<ColorTerm, EvalError> {
        Ok(match kind {
            NodeKind::Circ(s) => ColorTerm::circ(s.clone(), b.clone(), o.clone()),
            NodeKind::Bullet(s) => ColorTerm::bullet(s.clone(), b.clone(), o.clone()),
            _ => unreachable!("gate colorer called on a non-gate"),
        }
        .normalize())
    }
    fn homeo(&mut self, name: &str, inverted: bool, x: &ColorTerm) -> Result<ColorTerm, EvalError> {
        Ok(if inverted {
            ColorTerm::app_inv(name, x.clone())
        } else {
            ColorTerm::app(name, x.clone())
        }
        .normalize())
    }
}

pub fn symbolic_colors(d: &Diagram) -> Result<Propagation<ColorTerm>, EvalError> {
    propagate(d, &mut Symbolic)
}

/// Symbolic value of every output, keyed by output label.
pub fn symbolic_io(d: &Diagram) -> Result<BTreeMap<String, ColorTerm>, EvalError> {
    let colors = symbolic_colors(d)?.complete()?;
    let ix = d.index();
    Ok(d.outputs()
        .into_iter()
        .map(|(id, l)| (l, colors[&ix.by_to[&Endpoint::new(&id, Port::In)]].clone()))
        .collect())
}

pub fn is_acceptable(d: &Diagram) -> bool {
    d.is_valid() && schedule(d).is_complete()
}

/// Whether fixing fresh colors on `segments` leaves every wire determined.
pub fn parameter_set_check(d: &Diagram, segments: &[String]) -> bool {
    if segments.iter().any(|w| !d.wires.contains_key(w)) {
        return false;
    }
    let fixed: BTreeMap<String, ColorTerm> = segments
        .iter()
        .map(|w| (w.clone(), ColorTerm::var(&format!("p_{}", w.replace(':', "_")))))
        .collect();
    schedule_with(d, &fixed).is_complete()
}

enum Instr {
    Input { label: String, outs: Vec<usize> },
    Copy { src: usize, outs: Vec<usize> },
    Gate { scale: f64, base: usize, op: usize, outs: Vec<usize> },
    Homeo { name: String, inverted: bool, src: usize, outs: Vec<usize> },
}

/// A diagram compiled to a numeric function from inputs to outputs.
pub struct IoFunction {
    model: Model,
    homeos: HomeoRegistry,
    scales: ScaleBinding,
    slots: usize,
    seeds: Vec<(usize, ColorTerm)>,
    prog: Vec<Instr>,
    outputs: Vec<(String, usize)>,
    inputs: Vec<String>,
}

pub fn io_function(
    d: &Diagram,
    model: Model,
    scales: &ScaleBinding,
    homeos: &HomeoRegistry,
) -> Result<IoFunction, EvalError> {
    let sched = schedule(d);
    if !sched.is_complete() {
        return Err(EvalError::Stuck(sched.uncolored));
    }
    let binding = d.scale_binding(scales);
    let ix = d.index();
    let slot: HashMap<&str, usize> = d.wires.keys().enumerate().map(|(i, w)| (w.as_str(), i)).collect();
    let seeded: BTreeSet<&str> = sched.seeds.iter().map(|(w, _)| w.as_str()).collect();
    let outs_of = |n: &str, kind: &NodeKind| -> Vec<usize> {
        kind.out_ports()
            .iter()
            .filter_map(|p| ix.by_from.get(&Endpoint::new(n, *p)))
            .filter(|w| !seeded.contains(w.as_str()))
            .map(|w| slot[w.as_str()])
            .collect()
    };
    let in_slot = |n: &str, p: Port| slot[ix.by_to[&Endpoint::new(n, p)].as_str()];
    let mut prog = Vec::new();
    let mut inputs: BTreeSet<String> = BTreeSet::new();
    for n in &sched.order {
        let kind = &d.nodes[n];
        let outs = outs_of(n, kind);
        prog.push(match kind {
            NodeKind::Output(_) => continue,
            NodeKind::Input(l) => {
                inputs.insert(l.clone());
                Instr::Input { label: l.clone(), outs }
            }
            NodeKind::FanOut => Instr::Copy {
                src: in_slot(n, Port::In),
                outs,
            },
            NodeKind::Circ(s) | NodeKind::Bullet(s) => {
                let e = s.eval(&binding)?;
                Instr::Gate {
                    scale: if matches!(kind, NodeKind::Circ(_)) { e } else { 1.0 / e },
                    base: in_slot(n, Port::InBase),
                    op: in_slot(n, Port::InOperand),
                    outs,
                }
            }
            NodeKind::Homeo { name, inverted } => {
                homeos.get(name)?;
                Instr::Homeo {
                    name: name.clone(),
                    inverted: *inverted,
                    src: in_slot(n, Port::In),
                    outs,
                }
            }
        });
    }
    for (_, t) in &sched.seeds {
        inputs.extend(t.point_vars());
        t.scale_vars().iter().try_for_each(|v| {
            binding
                .get(v)
                .map(|_| ())
                .ok_or_else(|| EvalError::Scale(ScaleError::UnboundScaleVar(v.clone())))
        })?;
    }
    let outputs = d
        .outputs()
        .into_iter()
        .map(|(id, l)| (l, in_slot(&id, Port::In)))
        .collect();
    Ok(IoFunction {
        model,
        homeos: homeos.clone(),
        scales: binding,
        slots: d.wires.len(),
        seeds: sched.seeds.iter().map(|(w, t)| (slot[w.as_str()], t.clone())).collect(),
        prog,
        outputs,
        inputs: inputs.into_iter().collect(),
    })
}

impl IoFunction {
    /// Input labels and free variables of loop decorations.
    pub fn input_names(&self) -> &[String] {
        &self.inputs
    }

    pub fn output_names(&self) -> Vec<&str> {
        self.outputs.iter().map(|(l, _)| l.as_str()).collect()
    }

    pub fn call(&self, inputs: &PointBinding) -> Result<BTreeMap<String, Point>, EvalError> {
        let mut v: Vec<Option<Point>> = vec![None; self.slots];
        for (s, t) in &self.seeds {
            v[*s] = Some(t.eval(&self.model, inputs, &self.scales, &self.homeos).map_err(|e| match e {
                TermError::UnboundVar(x) => EvalError::UnboundInput(x),
                other => other.into(),
            })?);
        }
        let put = |v: &mut Vec<Option<Point>>, outs: &[usize], p: Point| {
            for o in outs {
                v[*o] = Some(p.clone());
            }
        };
        for ins in &self.prog {
            match ins {
                Instr::Input { label, outs } => {
                    let p = inputs.get(label).ok_or_else(|| EvalError::UnboundInput(label.clone()))?;
                    self.model.check_point(p)?;
                    put(&mut v, outs, p.clone());
                }
                Instr::Copy { src, outs } => {
                    let p = v[*src].clone().expect("scheduled");
                    put(&mut v, outs, p);
                }
                Instr::Gate { scale, base, op, outs } => {
                    let p = self.model.circ(
                        *scale,
                        v[*base].as_ref().expect("scheduled"),
                        v[*op].as_ref().expect("scheduled"),
                    )?;
                    put(&mut v, outs, p);
                }
                Instr::Homeo { name, inverted, src, outs } => {
                    let h = self.homeos.get(name)?;
                    let x = v[*src].as_ref().expect("scheduled");
                    let y = if *inverted { h.apply_inv(x) } else { h.apply(x) };
                    put(&mut v, outs, y);
                }
            }
        }
        Ok(self
            .outputs
            .iter()
            .map(|(l, s)| (l.clone(), v[*s].clone().expect("scheduled")))
            .collect())
    }
}

/// Largest coordinate-wise distance between two io results on shared labels.
pub fn io_distance(a: &BTreeMap<String, Point>, b: &BTreeMap<String, Point>) -> f64 {
    let mut worst: f64 = 0.0;
    for (k, p) in a {
        match b.get(k) {
            Some(q) => worst = worst.max(coord_gap(p, q)),
            None => return f64::INFINITY,
        }
    }
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    worst
}

/// Binds every declared scale variable of `d` to a seeded value in `[lo, hi]`.
pub fn sample_scales<R: Rng + ?Sized>(d: &Diagram, rng: &mut R, lo: f64, hi: f64) -> ScaleBinding {
    d.scales
        .iter()
        .filter(|(_, decl)| matches!(decl, ScaleDecl::Var))
        .map(|(v, _)| (v.clone(), rng.gen_range(lo..=hi)))
        .collect()
}

/// Largest output deviation between two diagrams over seeded random inputs
/// drawn within `radius` of the model origin.
pub fn io_deviation(
    a: &Diagram,
    b: &Diagram,
    model: Model,
    scales: &ScaleBinding,
    radius: f64,
    samples: usize,
    seed: u64,
) -> Result<f64, EvalError> {
    let homeos = HomeoRegistry::standard();
    let fa = io_function(a, model, scales, &homeos)?;
    let fb = io_function(b, model, scales, &homeos)?;
    let names: BTreeSet<&String> = fa.input_names().iter().chain(fb.input_names()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let pts: PointBinding = names.iter().map(|n| (n.to_string(), model.sample_ball(&mut rng, radius))).collect();
        worst = worst.max(io_distance(&fa.call(&pts)?, &fb.call(&pts)?));
    }
    Ok(worst)
}
