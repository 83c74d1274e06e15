//! Zoom sequences built from the rescaling charts of a model, optionally
//! pixelated, with their scale compositions, stability moduli and foveal
//! maps.

use std::collections::HashMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use super::{accuracy, hausdorff, AtlasError, FiniteMetricSpace, MapRelation, SLACK};
use crate::models::{heis, sphere, Model, Point};

pub const DEFAULT_GRID_POINTS: usize = 200;
pub const DEFAULT_LEVELS: u32 = 2;
/// Self-similarity tolerance on limit relations.
pub const TOL_SELF_SIMILAR: f64 = 1e-6;
/// Isometry tolerance for viewpoint differences.
pub const TOL_ISOMETRY: f64 = 1e-9;
const DIVERGENCE_RUN: usize = 4;

/// A pair of map points `(u', u'')` in the target.
pub type ChartPair = (Point, Point);

/// Sample point of a zoom sequence: the tangent vector `delta_{2^-k} g` for
/// a grid vector `g` of the unit tangent ball.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct Key {
    g: usize,
    k: u32,
}

/// The zoom sequence `t -> rho_t` of a model at a center: domain points are
/// the images of a seeded tangent grid under dilations by `2^-k`, charted by
/// `delta_{1/t}` and snapped to a grid of side `h`.
#[derive(Clone, Debug)]
pub struct ZoomSequence {
    pub model: Model,
    pub center: Point,
    pub h: f64,
    pub levels: u32,
    grid: Vec<Point>,
    frame: Option<[[f64; 3]; 2]>,
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn dyadic_exponent(mu: f64) -> Option<u32> {
    (1..=60).find(|m| mu == (0.5f64).powi(*m as i32))
}

fn check_scale(t: f64) -> Result<(), AtlasError> {
    if t.is_finite() && t > 0.0 && t <= 1.0 {
        Ok(())
    } else {
        Err(AtlasError::Invalid(format!("scale must lie in (0, 1], got {t}")))
    }
}

/// Points as a finite metric space, merging bitwise-equal coordinates.
/// Returns the space and the index of every input point.
fn point_space(points: &[Point], prefix: &str, metric: impl Fn(&[f64], &[f64]) -> f64) -> (Arc<FiniteMetricSpace>, Vec<usize>) {
    let mut seen: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut uniq: Vec<(String, Point)> = Vec::new();
    let idx = points
        .iter()
        .map(|p| {
            let key: Vec<u64> = p.iter().map(|c| (c + 0.0).to_bits()).collect();
            *seen.entry(key).or_insert_with(|| {
                uniq.push((format!("{prefix}{}", uniq.len()), p.clone()));
                uniq.len() - 1
            })
        })
        .collect();
    (Arc::new(FiniteMetricSpace::from_points(&uniq, |a, b| metric(a, b))), idx)
}

fn relation_of(
    pairs: &[ChartPair],
    src: impl Fn(&[f64], &[f64]) -> f64,
    tgt: impl Fn(&[f64], &[f64]) -> f64,
) -> Result<MapRelation, AtlasError> {
    let (a, b): (Vec<Point>, Vec<Point>) = pairs.iter().cloned().unzip();
    let (x, ix) = point_space(&a, "u", src);
    let (y, iy) = point_space(&b, "y", tgt);
    MapRelation::new(x, y, ix.into_iter().zip(iy))
}

impl ZoomSequence {
    /// The default sequence: 200 grid points, seed 0, two extra levels.
    pub fn from_model(model: Model, center: &[f64], h: f64) -> Result<Self, AtlasError> {
        Self::with_grid(model, center, h, DEFAULT_GRID_POINTS, DEFAULT_LEVELS, 0)
    }

    pub fn with_grid(model: Model, center: &[f64], h: f64, points: usize, levels: u32, seed: u64) -> Result<Self, AtlasError> {
        model.check_point(center).map_err(|e| AtlasError::Invalid(e.to_string()))?;
        if !(h.is_finite() && h >= 0.0) {
            return Err(AtlasError::Invalid(format!("quantization must be >= 0, got {h}")));
        }
        if points == 0 {
            return Err(AtlasError::Invalid("the grid needs at least one point".into()));
        }
        let frame = (model == Model::Sphere).then(|| {
            let axis = (0..3)
                .min_by(|&i, &j| center[i].abs().total_cmp(&center[j].abs()))
                .unwrap();
            let mut a = [0.0; 3];
            a[axis] = 1.0;
            let c: f64 = (0..3).map(|i| a[i] * center[i]).sum();
            let mut e1 = [0.0; 3];
            for i in 0..3 {
                e1[i] = a[i] - c * center[i];
            }
            let n = norm2(&e1);
            e1.iter_mut().for_each(|v| *v /= n);
            let e2 = [
                center[1] * e1[2] - center[2] * e1[1],
                center[2] * e1[0] - center[0] * e1[2],
                center[0] * e1[1] - center[1] * e1[0],
            ];
            [e1, e2]
        });
        let mut zs = ZoomSequence {
            model,
            center: center.to_vec(),
            h,
            levels,
            grid: Vec::with_capacity(points),
            frame,
        };
        let n = zs.tangent_dim();
        zs.grid.push(vec![0.0; n]);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        while zs.grid.len() < points {
            let mut g: Point = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            if model == Model::Heis1 {
                g[2] *= 0.25;
            }
            if zs.tnorm(&g) <= 1.0 {
                zs.grid.push(g);
            }
        }
        Ok(zs)
    }

    pub fn tangent_dim(&self) -> usize {
        match self.model {
            Model::Sphere => 2,
            m => m.dim(),
        }
    }

    pub fn grid(&self) -> &[Point] {
        &self.grid
    }

    /// Intrinsic dilation of tangent vectors.
    pub fn tdil(&self, s: f64, g: &[f64]) -> Point {
        match self.model {
            Model::Heis1 => heis::dil(s, g),
            _ => g.iter().map(|a| s * a).collect(),
        }
    }

    /// Homogeneous norm of tangent vectors.
    pub fn tnorm(&self, g: &[f64]) -> f64 {
        match self.model {
            Model::Heis1 => heis::norm(g),
            _ => norm2(g),
        }
    }

    /// The target distance `D`.
    pub fn ydist(&self, a: &[f64], b: &[f64]) -> f64 {
        match self.model {
            Model::Heis1 => heis::norm(&heis::mul(&heis::inv(a), b)),
            _ => a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt(),
        }
    }

    pub fn snap(&self, p: &[f64]) -> Point {
        if self.h == 0.0 {
            return p.to_vec();
        }
        p.iter().map(|c| (c / self.h).round() * self.h + 0.0).collect()
    }

    /// The model point with tangent coordinates `g` at the center.
    pub fn to_model(&self, g: &[f64]) -> Point {
        let x = &self.center;
        match self.model {
            Model::Euclid(_) => x.iter().zip(g).map(|(a, b)| a + b).collect(),
            Model::Heis1 => heis::mul(x, g),
            Model::Sphere => {
                let [e1, e2] = self.frame.expect("sphere frame");
                let v: Point = (0..3).map(|i| g[0] * e1[i] + g[1] * e2[i]).collect();
                sphere::exp(x, &v)
            }
        }
    }

    fn vector(&self, key: Key) -> Point {
        self.tdil((0.5f64).powi(key.k as i32), &self.grid[key.g])
    }

    fn chart(&self, key: Key, t: f64) -> Point {
        self.snap(&self.tdil((0.5f64).powi(key.k as i32) / t, &self.grid[key.g]))
    }

    fn ideal_chart(&self, key: Key, t: f64) -> Point {
        self.tdil((0.5f64).powi(key.k as i32) / t, &self.grid[key.g])
    }

    /// Keys sampled by `rho_t`: levels `k` with `2^-k >= t 2^-J` whose
    /// point lies in the ball of radius `t`.
    fn domain(&self, t: f64) -> Vec<Key> {
        let floor = t * (0.5f64).powi(self.levels as i32);
        let mut keys = vec![Key { g: 0, k: 0 }];
        let mut k = 0u32;
        while (0.5f64).powi(k as i32) >= floor {
            let s = (0.5f64).powi(k as i32);
            for g in 1..self.grid.len() {
                if s * self.tnorm(&self.grid[g]) <= t {
                    keys.push(Key { g, k });
                }
            }
            k += 1;
        }
        keys
    }

    fn src_metric(&self, t: f64) -> impl Fn(&[f64], &[f64]) -> f64 + '_ {
        move |a, b| self.model.dist(a, b) / t
    }

    /// `rho_t` as a relation between the sampled ball with distance `d / t`
    /// and the target with `D`.
    pub fn relation(&self, t: f64) -> Result<MapRelation, AtlasError> {
        relation_of(&self.pairs(t)?, self.src_metric(t), |a, b| self.ydist(a, b))
    }

    /// `rho_t` as (model point, chart) pairs.
    pub fn pairs(&self, t: f64) -> Result<Vec<ChartPair>, AtlasError> {
        check_scale(t)?;
        Ok(self
            .domain(t)
            .into_iter()
            .map(|key| (self.to_model(&self.vector(key)), self.chart(key, t)))
            .collect())
    }

    /// The measured zoom modulus `F(t) = acc(rho_t)`.
    pub fn modulus(&self, t: f64) -> Result<f64, AtlasError> {
        Ok(accuracy(&self.relation(t)?))
    }

    /// Whether `rho_t` relates the center to the base point of the target.
    pub fn center_is_fixed(&self, t: f64) -> Result<bool, AtlasError> {
        check_scale(t)?;
        let zero = vec![0.0; self.tangent_dim()];
        Ok(self
            .domain(t)
            .into_iter()
            .any(|key| self.to_model(&self.vector(key)) == self.center && self.chart(key, t) == zero))
    }

    fn require_dyadic(&self, mu: f64) -> Result<u32, AtlasError> {
        match dyadic_exponent(mu) {
            Some(m) if m <= self.levels => Ok(m),
            _ => Err(AtlasError::MissingLimit(format!(
                "mu must be 2^-m with 1 <= m <= {}, got {mu}",
                self.levels
            ))),
        }
    }

    /// Keys sampled by both `rho_eps` and `rho_{eps mu}`.
    fn shared(&self, eps: f64, mu: f64) -> Vec<Key> {
        let inner: std::collections::BTreeSet<Key> = self.domain(eps * mu).into_iter().collect();
        self.domain(eps).into_iter().filter(|k| inner.contains(k)).collect()
    }

    /// The composed map `{(u', u'')}` over points charted at both `eps` and
    /// `eps mu`.
    pub fn composition_pairs(&self, eps: f64, mu: f64) -> Result<Vec<ChartPair>, AtlasError> {
        check_scale(eps)?;
        self.require_dyadic(mu)?;
        Ok(self
            .shared(eps, mu)
            .into_iter()
            .map(|k| (self.chart(k, eps), self.chart(k, eps * mu)))
            .collect())
    }

    /// The limit `rho-bar_mu = {(delta_mu c, c)}` over the ideal inner
    /// charts.
    pub fn limit_pairs(&self, eps: f64, mu: f64) -> Result<Vec<ChartPair>, AtlasError> {
        check_scale(eps)?;
        self.require_dyadic(mu)?;
        Ok(self
            .shared(eps, mu)
            .into_iter()
            .map(|k| {
                let c = self.ideal_chart(k, eps * mu);
                (self.tdil(mu, &c), c)
            })
            .collect())
    }

    pub fn d_mu(&self, mu: f64) -> impl Fn(&ChartPair, &ChartPair) -> f64 + '_ {
        move |a, b| self.ydist(&a.0, &b.0) / mu + self.ydist(&a.1, &b.1)
    }

    /// `max |D(u'', v'') - D(u', v') / mu|` over pairs of pairs.
    pub fn self_similarity_defect(&self, pairs: &[ChartPair], mu: f64) -> f64 {
        let mut m: f64 = 0.0;
        for (i, a) in pairs.iter().enumerate() {
            for b in &pairs[i + 1..] {
                m = m.max((self.ydist(&a.1, &b.1) - self.ydist(&a.0, &b.0) / mu).abs());
            }
        }
        m
    }

    pub fn scale_composition(&self, eps: f64, mu: f64) -> Result<CompositionReport, AtlasError> {
        let pairs = self.composition_pairs(eps, mu)?;
        let relation = relation_of(&pairs, |a, b| self.ydist(a, b) / mu, |a, b| self.ydist(a, b))?;
        let acc = accuracy(&relation);
        let (f_eps, f_inner) = (self.modulus(eps)?, self.modulus(eps * mu)?);
        let bound = f_eps / mu + f_inner;
        Ok(CompositionReport {
            eps,
            mu,
            relation,
            accuracy: acc,
            f_eps,
            f_eps_mu: f_inner,
            bound,
            holds: acc <= bound + SLACK,
        })
    }

    /// Scale stability along a decreasing schedule: Hausdorff distances in
    /// `D_mu` between consecutive compositions and to the limit.
    pub fn scale_stability_check(&self, mu: f64, schedule: &[f64]) -> Result<StabilityReport, AtlasError> {
        check_schedule(schedule)?;
        let dm = self.d_mu(mu);
        let mut rels = Vec::with_capacity(schedule.len());
        let mut modulus = Vec::with_capacity(schedule.len());
        for &e in schedule {
            let r = self.composition_pairs(e, mu)?;
            modulus.push(hausdorff(&r, &self.limit_pairs(e, mu)?, &dm));
            rels.push(r);
        }
        let consecutive: Vec<f64> = rels.windows(2).map(|w| hausdorff(&w[0], &w[1], &dm)).collect();
        check_divergence(&consecutive, 4.0 * self.h / mu + 1e-9)?;
        let last = rels.last().expect("schedule is nonempty");
        let defect = self.self_similarity_defect(last, mu);
        let floor = modulus.last().copied().unwrap_or(0.0);
        Ok(StabilityReport {
            mu,
            schedule: schedule.to_vec(),
            consecutive,
            modulus,
            floor,
            self_similarity_defect: defect,
            self_similar: defect <= TOL_SELF_SIMILAR,
        })
    }

    fn check_viewpoint_model(&self) -> Result<(), AtlasError> {
        match self.model {
            Model::Euclid(_) | Model::Heis1 => Ok(()),
            m => Err(AtlasError::Unsupported(format!(
                "viewpoint differences need a group model, not {m}"
            ))),
        }
    }

    /// Tangent coordinates of `p` at base `b` in a group model.
    fn coords_at(&self, b: &[f64], p: &[f64]) -> Point {
        match self.model {
            Model::Heis1 => heis::mul(&heis::inv(b), p),
            _ => p.iter().zip(b).map(|(a, c)| a - c).collect(),
        }
    }

    /// The difference at scale `eps` from the center to the point charted
    /// as `u'`, as pairs `(v', v'')`.
    pub fn viewpoint_difference(&self, eps: f64, u: &[f64]) -> Result<Vec<ChartPair>, AtlasError> {
        check_scale(eps)?;
        self.check_viewpoint_model()?;
        if u.len() != self.tangent_dim() || self.tnorm(u) > 1.0 {
            return Err(AtlasError::Invalid("u' must be a point of the unit ball of the target".into()));
        }
        let x1 = self.to_model(&self.tdil(eps, u));
        Ok(self
            .domain(eps)
            .into_iter()
            .filter_map(|key| {
                let v = self.to_model(&self.vector(key));
                (self.model.dist(&v, &x1) <= eps).then(|| {
                    let second = self.snap(&self.tdil(1.0 / eps, &self.coords_at(&x1, &v)));
                    (self.chart(key, eps), second)
                })
            })
            .collect())
    }

    pub fn viewpoint_stability_check(&self, u: &[f64], schedule: &[f64]) -> Result<ViewpointReport, AtlasError> {
        check_schedule(schedule)?;
        let d1 = self.d_mu(1.0);
        let rels = schedule
            .iter()
            .map(|&e| self.viewpoint_difference(e, u))
            .collect::<Result<Vec<_>, _>>()?;
        let consecutive: Vec<f64> = rels.windows(2).map(|w| hausdorff(&w[0], &w[1], &d1)).collect();
        check_divergence(&consecutive, 4.0 * self.h + 1e-9)?;
        let defect = self.self_similarity_defect(rels.last().expect("schedule is nonempty"), 1.0);
        Ok(ViewpointReport {
            u: u.to_vec(),
            schedule: schedule.to_vec(),
            consecutive,
            isometry_defect: defect,
            isometry: defect <= TOL_ISOMETRY,
        })
    }

    /// Pairs of the `mu`-foveal map at scale `eps`, flagged when the domain
    /// point lies in the inner ball of radius `eps mu`.
    fn foveal_pairs(&self, eps: f64, mu: f64) -> Result<Vec<(bool, Point, Point, Key)>, AtlasError> {
        check_scale(eps)?;
        self.require_dyadic(mu)?;
        Ok(self
            .domain(eps)
            .into_iter()
            .map(|key| {
                let g = self.vector(key);
                let u = self.to_model(&g);
                if self.tnorm(&g) <= eps * mu {
                    (true, u, self.tdil(mu, &self.chart(key, eps * mu)), key)
                } else {
                    (false, u, self.chart(key, eps), key)
                }
            })
            .collect())
    }

    /// The `mu`-foveal map `phi_eps`.
    pub fn foveal(&self, eps: f64, mu: f64) -> Result<MapRelation, AtlasError> {
        relation_of(&self.foveal_chart(eps, mu)?, self.src_metric(eps), |a, b| self.ydist(a, b))
    }

    /// `phi_eps` as (model point, chart) pairs, in the order of `pairs`.
    pub fn foveal_chart(&self, eps: f64, mu: f64) -> Result<Vec<ChartPair>, AtlasError> {
        Ok(self.foveal_pairs(eps, mu)?.into_iter().map(|(_, u, y, _)| (u, y)).collect())
    }

    pub fn foveal_check(&self, eps: f64, mu: f64) -> Result<FovealReport, AtlasError> {
        let all = self.foveal_pairs(eps, mu)?;
        let full: Vec<ChartPair> = all.iter().map(|(_, u, y, _)| (u.clone(), y.clone())).collect();
        let restricted: Vec<&(bool, Point, Point, Key)> =
            all.iter().filter(|(inner, _, y, _)| *inner && self.tnorm(y) <= mu).collect();
        let src = self.src_metric(eps);
        let yd = |a: &[f64], b: &[f64]| self.ydist(a, b);
        let acc_full = accuracy(&relation_of(&full, &src, yd)?);
        let rpairs: Vec<ChartPair> = restricted.iter().map(|(_, u, y, _)| (u.clone(), y.clone())).collect();
        let acc_restricted = if rpairs.is_empty() { 0.0 } else { accuracy(&relation_of(&rpairs, &src, yd)?) };
        let cpairs: Vec<ChartPair> = restricted
            .iter()
            .map(|(_, _, y, key)| (y.clone(), self.chart(*key, eps * mu)))
            .collect();
        let acc_cascade = if cpairs.is_empty() {
            0.0
        } else {
            accuracy(&relation_of(&cpairs, |a, b| self.ydist(a, b) / mu, yd)?)
        };
        let f_eps = self.modulus(eps)?;
        let f_inner = self.modulus(eps * mu)?;
        let f_mu = hausdorff(&self.composition_pairs(eps, mu)?, &self.limit_pairs(eps, mu)?, self.d_mu(mu));
        let composition = self.scale_composition(eps, mu)?;
        Ok(FovealReport {
            eps,
            mu,
            inner_points: restricted.len(),
            accuracy: acc_full,
            modulus_bound: f_eps + mu * f_mu,
            restricted_accuracy: acc_restricted,
            restricted_bound: mu * f_inner,
            cascade_accuracy: acc_cascade,
            cascade_bound: 2.0 * f_inner,
            composition_accuracy: composition.accuracy,
            composition_bound: composition.bound,
        })
    }

    /// Foveal checks over every `(2^-k, mu)` with `k` in `ks` and `mu` in
    /// `mus`.
    pub fn foveal_properties_check(&self, mus: &[f64], ks: &[u32]) -> Result<FovealGridReport, AtlasError> {
        let mut rows = Vec::new();
        for &k in ks {
            for &mu in mus {
                rows.push(self.foveal_check((0.5f64).powi(k as i32), mu)?);
            }
        }
        let violations = rows.iter().map(FovealReport::violations).sum();
        Ok(FovealGridReport { rows, violations })
    }
}

fn check_schedule(schedule: &[f64]) -> Result<(), AtlasError> {
    if schedule.len() < 2 {
        return Err(AtlasError::Invalid("a schedule needs at least two scales".into()));
    }
    if schedule.iter().any(|t| !(t.is_finite() && *t > 0.0 && *t <= 1.0)) || schedule.windows(2).any(|w| w[1] >= w[0]) {
        return Err(AtlasError::Invalid("a schedule must decrease strictly within (0, 1]".into()));
    }
    Ok(())
}

fn check_divergence(values: &[f64], noise: f64) -> Result<(), AtlasError> {
    let mut run = 0;
    for w in values.windows(2) {
        if w[1] > w[0] + SLACK && w[1] > noise {
            run += 1;
            if run >= DIVERGENCE_RUN {
                return Err(AtlasError::DivergenceDetected(run));
            }
        } else {
            run = 0;
        }
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct CompositionReport {
    pub eps: f64,
    pub mu: f64,
    pub relation: MapRelation,
    pub accuracy: f64,
    pub f_eps: f64,
    pub f_eps_mu: f64,
    pub bound: f64,
    pub holds: bool,
}

impl CompositionReport {
    pub fn to_json(&self) -> Value {
        json!({
            "eps": self.eps,
            "mu": self.mu,
            "pairs": self.relation.len(),
            "accuracy": self.accuracy,
            "F(eps)": self.f_eps,
            "F(eps*mu)": self.f_eps_mu,
            "bound": self.bound,
            "holds": self.holds,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StabilityReport {
    pub mu: f64,
    pub schedule: Vec<f64>,
    pub consecutive: Vec<f64>,
    pub modulus: Vec<f64>,
    pub floor: f64,
    pub self_similarity_defect: f64,
    pub self_similar: bool,
}

impl StabilityReport {
    pub fn to_json(&self) -> Value {
        json!({
            "mu": self.mu,
            "schedule": self.schedule,
            "consecutive": self.consecutive,
            "modulus": self.modulus,
            "floor": self.floor,
            "selfSimilarityDefect": self.self_similarity_defect,
            "selfSimilar": self.self_similar,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ViewpointReport {
    pub u: Point,
    pub schedule: Vec<f64>,
    pub consecutive: Vec<f64>,
    pub isometry_defect: f64,
    pub isometry: bool,
}

impl ViewpointReport {
    pub fn to_json(&self) -> Value {
        json!({
            "u": self.u,
            "schedule": self.schedule,
            "consecutive": self.consecutive,
            "isometryDefect": self.isometry_defect,
            "isometry": self.isometry,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FovealReport {
    pub eps: f64,
    pub mu: f64,
    pub inner_points: usize,
    pub accuracy: f64,
    pub modulus_bound: f64,
    pub restricted_accuracy: f64,
    pub restricted_bound: f64,
    pub cascade_accuracy: f64,
    pub cascade_bound: f64,
    pub composition_accuracy: f64,
    pub composition_bound: f64,
}

impl FovealReport {
    pub fn modulus_holds(&self) -> bool {
        self.accuracy <= self.modulus_bound + SLACK
    }

    pub fn restricted_holds(&self) -> bool {
        self.restricted_accuracy <= self.restricted_bound + SLACK
    }

    pub fn cascade_holds(&self) -> bool {
        self.cascade_accuracy <= self.cascade_bound + SLACK
    }

    pub fn composition_holds(&self) -> bool {
        self.composition_accuracy <= self.composition_bound + SLACK
    }

    /// Failures among the restricted, cascade and composition bounds.
    pub fn violations(&self) -> usize {
        [self.restricted_holds(), self.cascade_holds(), self.composition_holds()]
            .iter()
            .filter(|ok| !**ok)
            .count()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "eps": self.eps,
            "mu": self.mu,
            "innerPoints": self.inner_points,
            "accuracy": self.accuracy,
            "modulusBound": self.modulus_bound,
            "modulusHolds": self.modulus_holds(),
            "restrictedAccuracy": self.restricted_accuracy,
            "restrictedBound": self.restricted_bound,
            "restrictedHolds": self.restricted_holds(),
            "cascadeAccuracy": self.cascade_accuracy,
            "cascadeBound": self.cascade_bound,
            "cascadeHolds": self.cascade_holds(),
            "compositionAccuracy": self.composition_accuracy,
            "compositionBound": self.composition_bound,
            "compositionHolds": self.composition_holds(),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FovealGridReport {
    pub rows: Vec<FovealReport>,
    pub violations: usize,
}

impl FovealGridReport {
    pub fn pass(&self) -> bool {
        self.violations == 0
    }

    pub fn to_json(&self) -> Value {
        json!({
            "rows": self.rows.iter().map(FovealReport::to_json).collect::<Vec<_>>(),
            "violations": self.violations,
            "pass": self.pass(),
        })
    }
}
