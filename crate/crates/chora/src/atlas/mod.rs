//! Maps between finite metric spaces: relations, accuracy, precision and
//! resolution, cartographic generalization, Gromov-Hausdorff bounds, and
//! zoom sequences built from dilation structures.

mod zoom;

pub use zoom::*;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rand::Rng;
use serde_json::{json, Value};
use thiserror::Error;

/// Slack for inequalities between finite sups.
pub const SLACK: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AtlasError {
    #[error("invalid metric space: {0}")]
    InvalidSpace(String),
    #[error("invalid relation: {0}")]
    InvalidRelation(String),
    #[error("the {side} of the relation is not {radius}-dense")]
    DensityViolated { side: &'static str, radius: f64 },
    #[error("exact enumeration needs |X|·|Y| <= {limit}, got {got}")]
    SizeLimit { limit: usize, got: usize },
    #[error("Hausdorff distances increased over {0} consecutive steps")]
    DivergenceDetected(usize),
    #[error("no limit relation: {0}")]
    MissingLimit(String),
    #[error("{0}")]
    Unsupported(String),
    #[error("{0}")]
    Invalid(String),
}

/// A finite set of labelled points with a distance matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteMetricSpace {
    labels: Vec<String>,
    d: Vec<Vec<f64>>,
}

impl FiniteMetricSpace {
    /// Checks symmetry, zero diagonal, nonnegativity and the triangle
    /// inequality, each up to [`SLACK`].
    pub fn new(labels: Vec<String>, d: Vec<Vec<f64>>) -> Result<Self, AtlasError> {
        let n = labels.len();
        let bad = |m: String| Err(AtlasError::InvalidSpace(m));
        if n == 0 {
            return bad("no points".into());
        }
        if labels.iter().collect::<BTreeSet<_>>().len() != n {
            return bad("duplicate labels".into());
        }
        if d.len() != n || d.iter().any(|r| r.len() != n) {
            return bad(format!("distance matrix must be {n}x{n}"));
        }
        for i in 0..n {
            if d[i][i].abs() > SLACK {
                return bad(format!("d({0},{0}) != 0", labels[i]));
            }
            for j in 0..n {
                let v = d[i][j];
                if !v.is_finite() || v < 0.0 {
                    return bad(format!("d({},{}) = {v}", labels[i], labels[j]));
                }
                if (v - d[j][i]).abs() > SLACK {
                    return bad(format!("d is not symmetric at ({},{})", labels[i], labels[j]));
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if d[i][k] > d[i][j] + d[j][k] + SLACK {
                        return bad(format!(
                            "triangle inequality fails for ({}, {}, {})",
                            labels[i], labels[j], labels[k]
                        ));
                    }
                }
            }
        }
        Ok(FiniteMetricSpace { labels, d })
    }

    /// Space of labelled points under a metric; not re-validated.
    pub fn from_points<P>(points: &[(String, P)], metric: impl Fn(&P, &P) -> f64) -> Self {
        let n = points.len();
        let mut d = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i + 1..n {
                let v = metric(&points[i].1, &points[j].1);
                d[i][j] = v;
                d[j][i] = v;
            }
        }
        FiniteMetricSpace {
            labels: points.iter().map(|p| p.0.clone()).collect(),
            d,
        }
    }

    pub fn single_point(label: &str) -> Self {
        FiniteMetricSpace {
            labels: vec![label.to_string()],
            d: vec![vec![0.0]],
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.d[i][j]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn diameter(&self) -> f64 {
        self.d.iter().flatten().copied().fold(0.0, f64::max)
    }

    /// The same points with every distance multiplied by `c > 0`.
    pub fn scaled(&self, c: f64) -> Self {
        FiniteMetricSpace {
            labels: self.labels.clone(),
            d: self.d.iter().map(|r| r.iter().map(|v| v * c).collect()).collect(),
        }
    }

    /// Whether every point lies within `r` of some point of `subset`.
    pub fn is_dense(&self, subset: &BTreeSet<usize>, r: f64) -> bool {
        (0..self.len()).all(|i| subset.iter().any(|&j| self.d[i][j] <= r))
    }

    pub fn to_json(&self) -> Value {
        json!({"points": self.labels, "d": self.d})
    }

    pub fn from_json(v: &Value) -> Result<Self, AtlasError> {
        let bad = |m: &str| AtlasError::InvalidSpace(m.to_string());
        let labels = v
            .get("points")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("`points` must be an array of labels"))?
            .iter()
            .map(|p| match p {
                Value::String(s) => Ok(s.clone()),
                Value::Number(n) => Ok(n.to_string()),
                _ => Err(bad("point labels must be strings or numbers")),
            })
            .collect::<Result<Vec<_>, _>>()?;
        let d = v
            .get("d")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("`d` must be a matrix"))?
            .iter()
            .map(|row| {
                row.as_array()
                    .ok_or_else(|| bad("`d` rows must be arrays"))?
                    .iter()
                    .map(|x| x.as_f64().ok_or_else(|| bad("distances must be numbers")))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        FiniteMetricSpace::new(labels, d)
    }
}

/// A relation `rho ⊂ X × Y`, stored as index pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct MapRelation {
    pub source: Arc<FiniteMetricSpace>,
    pub target: Arc<FiniteMetricSpace>,
    pairs: BTreeSet<(usize, usize)>,
}

impl MapRelation {
    pub fn new(
        source: Arc<FiniteMetricSpace>,
        target: Arc<FiniteMetricSpace>,
        pairs: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, AtlasError> {
        let pairs: BTreeSet<(usize, usize)> = pairs.into_iter().collect();
        if pairs.is_empty() {
            return Err(AtlasError::InvalidRelation("a relation needs at least one pair".into()));
        }
        if pairs.iter().any(|&(x, y)| x >= source.len() || y >= target.len()) {
            return Err(AtlasError::InvalidRelation("pair index out of range".into()));
        }
        Ok(MapRelation { source, target, pairs })
    }

    /// Every pair of `X × Y`.
    pub fn full(source: Arc<FiniteMetricSpace>, target: Arc<FiniteMetricSpace>) -> Self {
        let pairs = (0..source.len())
            .flat_map(|x| (0..target.len()).map(move |y| (x, y)))
            .collect();
        MapRelation { source, target, pairs }
    }

    pub fn pairs(&self) -> &BTreeSet<(usize, usize)> {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn dom(&self) -> BTreeSet<usize> {
        self.pairs.iter().map(|p| p.0).collect()
    }

    pub fn im(&self) -> BTreeSet<usize> {
        self.pairs.iter().map(|p| p.1).collect()
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        self.pairs.contains(&(x, y))
    }

    pub fn to_json(&self, source: &str, target: &str) -> Value {
        let pairs: Vec<Value> = self
            .pairs
            .iter()
            .map(|&(x, y)| json!([self.source.labels[x], self.target.labels[y]]))
            .collect();
        json!({"source": source, "target": target, "pairs": pairs})
    }

    /// Reads the `pairs` of a relation document against given spaces.
    pub fn from_json(
        v: &Value,
        source: Arc<FiniteMetricSpace>,
        target: Arc<FiniteMetricSpace>,
    ) -> Result<Self, AtlasError> {
        let bad = |m: String| AtlasError::InvalidRelation(m);
        let label = |p: &Value| match p {
            Value::String(s) => Some(s.clone()),
            Value::Number(n) => Some(n.to_string()),
            _ => None,
        };
        let mut pairs = Vec::new();
        for p in v
            .get("pairs")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("`pairs` must be an array".into()))?
        {
            let (Some(a), Some(b)) = (p.get(0).and_then(label), p.get(1).and_then(label)) else {
                return Err(bad("each pair must be [x, y]".into()));
            };
            let x = source.index_of(&a).ok_or_else(|| bad(format!("`{a}` is not a point of the source")))?;
            let y = target.index_of(&b).ok_or_else(|| bad(format!("`{b}` is not a point of the target")))?;
            pairs.push((x, y));
        }
        MapRelation::new(source, target, pairs)
    }
}

/// Accuracy, precision and resolution of a relation, with the per-point
/// values keyed by label.
#[derive(Clone, Debug, PartialEq)]
pub struct Metrics {
    pub accuracy: f64,
    pub precision: f64,
    pub resolution: f64,
    pub precision_at: BTreeMap<String, f64>,
    pub resolution_at: BTreeMap<String, f64>,
}

impl Metrics {
    pub fn to_json(&self) -> Value {
        json!({
            "accuracy": self.accuracy,
            "precision": self.precision,
            "resolution": self.resolution,
            "precisionAt": self.precision_at,
            "resolutionAt": self.resolution_at,
        })
    }
}

/// `sup |D(y1, y2) - d(x1, x2)|` over pairs of pairs.
pub fn accuracy(rel: &MapRelation) -> f64 {
    let p: Vec<(usize, usize)> = rel.pairs.iter().copied().collect();
    let (x, y) = (&rel.source, &rel.target);
    let mut acc: f64 = 0.0;
    for (i, &(x1, y1)) in p.iter().enumerate() {
        for &(x2, y2) in &p[i + 1..] {
            acc = acc.max((y.d[y1][y2] - x.d[x1][x2]).abs());
        }
    }
    acc
}

pub fn metrics(rel: &MapRelation) -> Metrics {
    let (x, y) = (&rel.source, &rel.target);
    let mut over_x: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    let mut over_y: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &(a, b) in &rel.pairs {
        over_x.entry(a).or_default().push(b);
        over_y.entry(b).or_default().push(a);
    }
    let spread = |pts: &[usize], s: &FiniteMetricSpace| {
        let mut m: f64 = 0.0;
        for &i in pts {
            for &j in pts {
                m = m.max(s.d[i][j]);
            }
        }
        m
    };
    let precision_at: BTreeMap<String, f64> =
        over_x.iter().map(|(a, ys)| (x.labels[*a].clone(), spread(ys, y))).collect();
    let resolution_at: BTreeMap<String, f64> =
        over_y.iter().map(|(b, xs)| (y.labels[*b].clone(), spread(xs, x))).collect();
    Metrics {
        accuracy: accuracy(rel),
        precision: precision_at.values().copied().fold(0.0, f64::max),
        resolution: resolution_at.values().copied().fold(0.0, f64::max),
        precision_at,
        resolution_at,
    }
}

/// Cartographic generalization: `(x, y)` is kept when some `(x', y')` of
/// `rel` has `d(x, x') <= eps` and `D(y, y') <= mu`.
pub fn generalize(rel: &MapRelation, eps: f64, mu: f64) -> Result<MapRelation, AtlasError> {
    let (x, y) = (&rel.source, &rel.target);
    if !x.is_dense(&rel.dom(), eps) {
        return Err(AtlasError::DensityViolated { side: "domain", radius: eps });
    }
    if !y.is_dense(&rel.im(), mu) {
        return Err(AtlasError::DensityViolated { side: "image", radius: mu });
    }
    let mut pairs = BTreeSet::new();
    for a in 0..x.len() {
        for b in 0..y.len() {
            if rel.pairs.iter().any(|&(a2, b2)| x.d[a][a2] <= eps && y.d[b][b2] <= mu) {
                pairs.insert((a, b));
            }
        }
    }
    Ok(MapRelation {
        source: x.clone(),
        target: y.clone(),
        pairs,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Inequality {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl Inequality {
    fn new(name: &str, lhs: f64, rhs: f64) -> Self {
        Inequality {
            name: name.to_string(),
            lhs,
            rhs,
            holds: lhs <= rhs + SLACK,
        }
    }

    pub fn to_json(&self) -> Value {
        json!({"name": self.name, "lhs": self.lhs, "rhs": self.rhs, "holds": self.holds})
    }
}

/// The five bounds relating a relation and its generalization. The lower
/// bounds `res + 2 eps <= res(bar)` and `prec + 2 mu <= prec(bar)` need
/// balls of radius `eps` to have diameter `2 eps`, which finite spaces do
/// not provide; they are reported apart and do not affect `pass`.
#[derive(Clone, Debug, PartialEq)]
pub struct PropAccReport {
    pub original: Metrics,
    pub generalized: Metrics,
    pub items: Vec<Inequality>,
    pub lower_bounds: Vec<Inequality>,
    pub pass: bool,
}

impl PropAccReport {
    pub fn to_json(&self) -> Value {
        json!({
            "original": self.original.to_json(),
            "generalized": self.generalized.to_json(),
            "items": self.items.iter().map(Inequality::to_json).collect::<Vec<_>>(),
            "lowerBounds": self.lower_bounds.iter().map(Inequality::to_json).collect::<Vec<_>>(),
            "pass": self.pass,
        })
    }
}

pub fn check_propacc1(rel: &MapRelation, eps: f64, mu: f64) -> Result<PropAccReport, AtlasError> {
    let bar = generalize(rel, eps, mu)?;
    let (m, mb) = (metrics(rel), metrics(&bar));
    let band = m.accuracy + 2.0 * (eps + mu);
    let items = vec![
        Inequality::new("a", m.resolution, m.accuracy),
        Inequality::new("b", m.precision, m.accuracy),
        Inequality::new("c", mb.resolution, band),
        Inequality::new("d", mb.precision, band),
        Inequality::new("e", (mb.accuracy - m.accuracy).abs(), 2.0 * (eps + mu)),
    ];
    let lower_bounds = vec![
        Inequality::new("c-lower", m.resolution + 2.0 * eps, mb.resolution),
        Inequality::new("d-lower", m.precision + 2.0 * mu, mb.precision),
    ];
    Ok(PropAccReport {
        pass: items.iter().all(|i| i.holds),
        original: m,
        generalized: mb,
        items,
        lower_bounds,
    })
}

/// Points of the plane as a metric space labelled `p0, p1, ...`.
pub fn plane_space(points: &[[f64; 2]]) -> FiniteMetricSpace {
    let labelled: Vec<(String, [f64; 2])> = points.iter().enumerate().map(|(i, p)| (format!("p{i}"), *p)).collect();
    FiniteMetricSpace::from_points(&labelled, |a, b| (a[0] - b[0]).hypot(a[1] - b[1]))
}

/// A random relation between random planar spaces of at most `max_size`
/// points, with the smallest `eps`, `mu` making it generalizable, each
/// enlarged by a random factor in `[1, 2)`.
pub fn random_propacc_instance<R: Rng>(rng: &mut R, max_size: usize) -> (MapRelation, f64, f64) {
    let space = |rng: &mut R| {
        let n = rng.gen_range(1..=max_size);
        let pts: Vec<[f64; 2]> = (0..n).map(|_| [rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)]).collect();
        Arc::new(plane_space(&pts))
    };
    let (x, y) = (space(rng), space(rng));
    let mut pairs: BTreeSet<(usize, usize)> = BTreeSet::new();
    let k = rng.gen_range(1..=x.len() * y.len());
    for _ in 0..k {
        pairs.insert((rng.gen_range(0..x.len()), rng.gen_range(0..y.len())));
    }
    let rel = MapRelation::new(x.clone(), y.clone(), pairs).expect("nonempty");
    let cover = |s: &FiniteMetricSpace, sub: &BTreeSet<usize>| {
        (0..s.len())
            .map(|i| sub.iter().map(|&j| s.d[i][j]).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    let eps = cover(&x, &rel.dom()) * rng.gen_range(1.0..2.0);
    let mu = cover(&y, &rel.im()) * rng.gen_range(1.0..2.0);
    (rel, eps, mu)
}

/// Exhaustive search limit for [`gh_bound`].
pub const GH_EXACT_LIMIT: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GhMode {
    ExactSmall,
    Stochastic { budget: usize, seed: u64 },
}

/// Infimum of the accuracy of relations with full domain and image: exact
/// by enumeration for small spaces, otherwise an upper bound from seeded
/// random relations.
pub fn gh_bound(x: &Arc<FiniteMetricSpace>, y: &Arc<FiniteMetricSpace>, mode: GhMode) -> Result<f64, AtlasError> {
    let (n, m) = (x.len(), y.len());
    match mode {
        GhMode::ExactSmall => {
            let cells = n * m;
            if cells > GH_EXACT_LIMIT {
                return Err(AtlasError::SizeLimit {
                    limit: GH_EXACT_LIMIT,
                    got: cells,
                });
            }
            let mut best = f64::INFINITY;
            for mask in 1u32..(1 << cells) {
                let pairs: Vec<(usize, usize)> =
                    (0..cells).filter(|c| mask & (1 << c) != 0).map(|c| (c / m, c % m)).collect();
                let dom: BTreeSet<usize> = pairs.iter().map(|p| p.0).collect();
                let im: BTreeSet<usize> = pairs.iter().map(|p| p.1).collect();
                if dom.len() == n && im.len() == m {
                    let rel = MapRelation::new(x.clone(), y.clone(), pairs)?;
                    best = best.min(accuracy(&rel));
                }
            }
            Ok(best)
        }
        GhMode::Stochastic { budget, seed } => {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut best = accuracy(&MapRelation::full(x.clone(), y.clone()));
            for _ in 0..budget {
                let mut pairs: BTreeSet<(usize, usize)> = (0..n).map(|a| (a, rng.gen_range(0..m))).collect();
                pairs.extend((0..m).map(|b| (rng.gen_range(0..n), b)));
                let rel = MapRelation::new(x.clone(), y.clone(), pairs)?;
                best = best.min(accuracy(&rel));
            }
            Ok(best)
        }
    }
}

/// Hausdorff distance between nonempty finite sets; infinite if either
/// set is empty.
pub fn hausdorff<T>(a: &[T], b: &[T], dist: impl Fn(&T, &T) -> f64) -> f64 {
    if a.is_empty() || b.is_empty() {
        return f64::INFINITY;
    }
    let one_way = |p: &[T], q: &[T]| {
        p.iter()
            .map(|s| q.iter().map(|t| dist(s, t)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    one_way(a, b).max(one_way(b, a))
}
