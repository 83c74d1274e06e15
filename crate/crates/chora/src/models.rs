//! Concrete dilation structures: Euclidean spaces, the first Heisenberg
//! group and the unit sphere in R^3.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::Rng;
use thiserror::Error;

pub type Point = Vec<f64>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("scale must be positive and finite, got {0}")]
    InvalidScale(f64),
    #[error("expected a point with {expected} coordinates, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("log is undefined at antipodal points")]
    UndefinedLog,
    #[error("point is not on the unit sphere (norm {0})")]
    NotOnSphere(f64),
    #[error("unknown model `{0}`")]
    UnknownModel(String),
    #[error("unknown homeomorphism `{0}`")]
    UnknownHomeo(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Model {
    Euclid(usize),
    Heis1,
    Sphere,
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Model::Euclid(n) => write!(f, "euclid{n}"),
            Model::Heis1 => f.write_str("heis1"),
            Model::Sphere => f.write_str("sphere"),
        }
    }
}

impl FromStr for Model {
    type Err = ModelError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "heis1" => Ok(Model::Heis1),
            "sphere" => Ok(Model::Sphere),
            _ => s
                .strip_prefix("euclid")
                .and_then(|n| n.parse::<usize>().ok())
                .filter(|n| *n >= 1)
                .map(Model::Euclid)
                .ok_or_else(|| ModelError::UnknownModel(s.to_string())),
        }
    }
}

const SPHERE_TOL: f64 = 1e-9;

fn check_scale(eps: f64) -> Result<(), ModelError> {
    if eps.is_finite() && eps > 0.0 {
        Ok(())
    } else {
        Err(ModelError::InvalidScale(eps))
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn cross(a: &[f64], b: &[f64]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

pub mod heis {
    //! Group law of the first Heisenberg group in exponential coordinates.

    use super::Point;

    pub fn mul(p: &[f64], q: &[f64]) -> Point {
        vec![
            p[0] + q[0],
            p[1] + q[1],
            p[2] + q[2] + 0.5 * (p[0] * q[1] - p[1] * q[0]),
        ]
    }

    pub fn inv(p: &[f64]) -> Point {
        vec![-p[0], -p[1], -p[2]]
    }

    pub fn dil(eps: f64, p: &[f64]) -> Point {
        vec![eps * p[0], eps * p[1], eps * eps * p[2]]
    }

    /// Homogeneous (Koranyi) norm.
    pub fn norm(p: &[f64]) -> f64 {
        let h = p[0] * p[0] + p[1] * p[1];
        (h * h + 16.0 * p[2] * p[2]).sqrt().sqrt()
    }
}

pub mod sphere {
    //! Exponential and logarithm on the unit sphere.

    use super::{cross, dot, norm, ModelError, Point};

    pub fn log(x: &[f64], y: &[f64]) -> Result<Point, ModelError> {
        let c = dot(x, y);
        let s = norm(&cross(x, y));
        if s < 1e-12 && c < 0.0 {
            return Err(ModelError::UndefinedLog);
        }
        let theta = s.atan2(c);
        let v: Point = y.iter().zip(x).map(|(a, b)| a - c * b).collect();
        let nv = norm(&v);
        if nv == 0.0 {
            return Ok(vec![0.0; 3]);
        }
        Ok(v.iter().map(|a| a * theta / nv).collect())
    }

    pub fn exp(x: &[f64], v: &[f64]) -> Point {
        let t = norm(v);
        if t == 0.0 {
            return x.to_vec();
        }
        let (s, c) = t.sin_cos();
        let p: Point = x.iter().zip(v).map(|(a, b)| c * a + s * b / t).collect();
        let n = norm(&p);
        p.iter().map(|a| a / n).collect()
    }

    pub fn dist(x: &[f64], y: &[f64]) -> f64 {
        norm(&cross(x, y)).atan2(dot(x, y))
    }
}

impl Model {
    pub fn dim(&self) -> usize {
        match self {
            Model::Euclid(n) => *n,
            Model::Heis1 | Model::Sphere => 3,
        }
    }

    pub fn is_linear(&self) -> bool {
        !matches!(self, Model::Sphere)
    }

    pub fn check_point(&self, p: &[f64]) -> Result<(), ModelError> {
        if p.len() != self.dim() {
            return Err(ModelError::DimensionMismatch {
                expected: self.dim(),
                got: p.len(),
            });
        }
        if *self == Model::Sphere {
            let n = norm(p);
            if (n - 1.0).abs() > SPHERE_TOL {
                return Err(ModelError::NotOnSphere(n));
            }
        }
        Ok(())
    }

    /// The base point used as origin of samplers and tangent checks.
    pub fn origin(&self) -> Point {
        match self {
            Model::Sphere => vec![1.0, 0.0, 0.0],
            _ => vec![0.0; self.dim()],
        }
    }

    /// The dilation `x circ_eps u`.
    pub fn circ(&self, eps: f64, x: &[f64], u: &[f64]) -> Result<Point, ModelError> {
        check_scale(eps)?;
        self.check_point(x)?;
        self.check_point(u)?;
        Ok(match self {
            Model::Euclid(_) => x.iter().zip(u).map(|(a, b)| a + eps * (b - a)).collect(),
            Model::Heis1 => heis::mul(x, &heis::dil(eps, &heis::mul(&heis::inv(x), u))),
            Model::Sphere => {
                let v = sphere::log(x, u)?;
                let w: Point = v.iter().map(|a| eps * a).collect();
                sphere::exp(x, &w)
            }
        })
    }

    /// The inverse dilation `x bullet_eps u = x circ_{1/eps} u`.
    pub fn bullet(&self, eps: f64, x: &[f64], u: &[f64]) -> Result<Point, ModelError> {
        check_scale(eps)?;
        self.circ(1.0 / eps, x, u)
    }

    pub fn dist(&self, x: &[f64], y: &[f64]) -> f64 {
        match self {
            Model::Euclid(_) => x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt(),
            Model::Heis1 => heis::norm(&heis::mul(&heis::inv(x), y)),
            Model::Sphere => sphere::dist(x, y),
        }
    }

    /// Radius of the default sampling region: the unit ball, or the polar
    /// cap of angle pi/3 on the sphere.
    pub fn default_radius(&self) -> f64 {
        match self {
            Model::Sphere => std::f64::consts::FRAC_PI_3,
            _ => 1.0,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        self.sample_ball(rng, self.default_radius())
    }

    /// A seeded point within `r` of the origin (a box of half-side `r` in
    /// heis1 coordinates, a polar cap of angle `r` on the sphere).
    pub fn sample_ball<R: Rng + ?Sized>(&self, rng: &mut R, r: f64) -> Point {
        match self {
            Model::Euclid(n) => loop {
                let p: Point = (0..*n).map(|_| rng.gen_range(-r..=r)).collect();
                if norm(&p) <= r {
                    break p;
                }
            },
            Model::Heis1 => (0..3).map(|_| rng.gen_range(-r..=r)).collect(),
            Model::Sphere => {
                let cmin = r.min(std::f64::consts::PI).cos();
                let c: f64 = rng.gen_range(cmin..=1.0);
                let s = (1.0 - c * c).max(0.0).sqrt();
                let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                vec![c, s * phi.cos(), s * phi.sin()]
            }
        }
    }

    /// Approximate difference `Delta^x_eps(u, v) = (x circ u) bullet (x circ v)`.
    pub fn approx_difference(&self, eps: f64, x: &[f64], u: &[f64], v: &[f64]) -> Result<Point, ModelError> {
        let a = self.circ(eps, x, u)?;
        let b = self.circ(eps, x, v)?;
        self.bullet(eps, &a, &b)
    }

    /// Approximate sum `Sigma^x_eps(u, v) = x bullet ((x circ u) circ v)`.
    pub fn approx_sum(&self, eps: f64, x: &[f64], u: &[f64], v: &[f64]) -> Result<Point, ModelError> {
        let a = self.circ(eps, x, u)?;
        let b = self.circ(eps, &a, v)?;
        self.bullet(eps, x, &b)
    }

    /// Approximate inverse `inv^x_eps(u) = (x circ u) bullet x`.
    pub fn approx_inverse(&self, eps: f64, x: &[f64], u: &[f64]) -> Result<Point, ModelError> {
        let a = self.circ(eps, x, u)?;
        self.bullet(eps, &a, x)
    }

    /// Relative dilation `x bullet ((x circ u) circ_mu (x circ v))`.
    pub fn relative_dilation(
        &self,
        eps: f64,
        mu: f64,
        x: &[f64],
        u: &[f64],
        v: &[f64],
    ) -> Result<Point, ModelError> {
        let a = self.circ(eps, x, u)?;
        let b = self.circ(eps, x, v)?;
        let c = self.circ(mu, &a, &b)?;
        self.bullet(eps, x, &c)
    }

    /// Rescaled distance `(1/eps) d(x circ u, x circ v)`.
    pub fn map_distance(&self, eps: f64, x: &[f64], u: &[f64], v: &[f64]) -> Result<f64, ModelError> {
        let a = self.circ(eps, x, u)?;
        let b = self.circ(eps, x, v)?;
        Ok(self.dist(&a, &b) / eps)
    }

    /// Closed form of the tangent sum at `x`, where one is known.
    pub fn tangent_sum(&self, x: &[f64], u: &[f64], v: &[f64]) -> Option<Point> {
        match self {
            Model::Euclid(_) => Some(u.iter().zip(v).zip(x).map(|((a, b), c)| a + b - c).collect()),
            Model::Heis1 => Some(heis::mul(&heis::mul(u, &heis::inv(x)), v)),
            Model::Sphere => None,
        }
    }
}

/// Largest coordinate difference between two points in the ambient chart.
pub fn coord_gap(p: &[f64], q: &[f64]) -> f64 {
    if p.len() != q.len() {
        return f64::INFINITY;
    }
    p.iter().zip(q).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

/// A named homeomorphism between models together with its inverse.
#[derive(Clone)]
pub struct Homeo {
    pub name: String,
    pub source: Model,
    pub target: Model,
    forward: Arc<dyn Fn(&[f64]) -> Point + Send + Sync>,
    inverse: Arc<dyn Fn(&[f64]) -> Point + Send + Sync>,
}

impl fmt::Debug for Homeo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Homeo({}: {} -> {})", self.name, self.source, self.target)
    }
}

impl Homeo {
    pub fn new(
        name: &str,
        source: Model,
        target: Model,
        forward: impl Fn(&[f64]) -> Point + Send + Sync + 'static,
        inverse: impl Fn(&[f64]) -> Point + Send + Sync + 'static,
    ) -> Self {
        Homeo {
            name: name.to_string(),
            source,
            target,
            forward: Arc::new(forward),
            inverse: Arc::new(inverse),
        }
    }

    pub fn apply(&self, p: &[f64]) -> Point {
        (self.forward)(p)
    }

    pub fn apply_inv(&self, p: &[f64]) -> Point {
        (self.inverse)(p)
    }

    pub fn inverted(&self) -> Homeo {
        Homeo {
            name: format!("{}^-1", self.name),
            source: self.target,
            target: self.source,
            forward: self.inverse.clone(),
            inverse: self.forward.clone(),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct HomeoRegistry {
    entries: BTreeMap<String, Homeo>,
}

impl HomeoRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registry with the built-in smooth maps used by tests and the CLI.
    pub fn standard() -> Self {
        let mut r = Self::new();
        let e2 = Model::Euclid(2);
        r.insert(Homeo::new(
            "shear",
            e2,
            e2,
            |p| vec![p[0] + p[1] * p[1], p[1]],
            |p| vec![p[0] - p[1] * p[1], p[1]],
        ));
        r.insert(Homeo::new(
            "swap",
            e2,
            e2,
            |p| vec![p[1], p[0]],
            |p| vec![p[1], p[0]],
        ));
        r.insert(Homeo::new(
            "cubic",
            e2,
            e2,
            |p| vec![p[0] + p[0] * p[0] * p[0], p[1] + p[0] * p[0]],
            |p| {
                let a = real_cubic_root(p[0]);
                vec![a, p[1] - a * a]
            },
        ));
        r.insert(Homeo::new(
            "rot",
            Model::Heis1,
            Model::Heis1,
            |p| vec![p[1], -p[0], p[2]],
            |p| vec![-p[1], p[0], p[2]],
        ));
        r.insert(Homeo::new(
            "heis_shift",
            Model::Heis1,
            Model::Heis1,
            |p| heis::mul(&[0.25, -0.5, 0.125], p),
            |p| heis::mul(&heis::inv(&[0.25, -0.5, 0.125]), p),
        ));
        r
    }

    pub fn insert(&mut self, h: Homeo) {
        self.entries.insert(h.name.clone(), h);
    }

    pub fn get(&self, name: &str) -> Result<&Homeo, ModelError> {
        self.entries
            .get(name)
            .ok_or_else(|| ModelError::UnknownHomeo(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(|s| s.as_str())
    }
}

/// Real root of `a^3 + a = y`, by Newton's method from a safe start.
fn real_cubic_root(y: f64) -> f64 {
    let mut a = y.cbrt().clamp(-y.abs().max(1.0), y.abs().max(1.0));
    for _ in 0..60 {
        let f = a * a * a + a - y;
        let step = f / (3.0 * a * a + 1.0);
        a -= step;
        if step.abs() <= 1e-17 * a.abs().max(1.0) {
            break;
        }
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn names_round_trip() {
        for m in [Model::Euclid(2), Model::Euclid(5), Model::Heis1, Model::Sphere] {
            assert_eq!(m.to_string().parse::<Model>().unwrap(), m);
        }
        assert!("euclid0".parse::<Model>().is_err());
        assert!("torus".parse::<Model>().is_err());
    }

    #[test]
    fn euclid_circ_is_affine() {
        let m = Model::Euclid(2);
        let p = m.circ(0.25, &[1.0, 2.0], &[5.0, -2.0]).unwrap();
        assert_eq!(p, vec![2.0, 1.0]);
    }

    #[test]
    fn heisenberg_dilation_at_identity() {
        let m = Model::Heis1;
        let p = m.circ(0.5, &[0.0; 3], &[1.0, 2.0, 4.0]).unwrap();
        assert_eq!(p, vec![0.5, 1.0, 1.0]);
    }

    #[test]
    fn sphere_antipodal_log_fails() {
        let m = Model::Sphere;
        assert_eq!(
            m.circ(0.5, &[1.0, 0.0, 0.0], &[-1.0, 0.0, 0.0]),
            Err(ModelError::UndefinedLog)
        );
    }

    #[test]
    fn rejects_bad_inputs() {
        let m = Model::Euclid(2);
        assert!(matches!(m.circ(0.0, &[0.0, 0.0], &[1.0, 1.0]), Err(ModelError::InvalidScale(_))));
        assert!(matches!(m.circ(1.0, &[0.0], &[1.0, 1.0]), Err(ModelError::DimensionMismatch { .. })));
        assert!(matches!(
            Model::Sphere.circ(0.5, &[2.0, 0.0, 0.0], &[1.0, 0.0, 0.0]),
            Err(ModelError::NotOnSphere(_))
        ));
    }

    #[test]
    fn sampler_is_seeded_and_in_domain() {
        for m in [Model::Euclid(3), Model::Heis1, Model::Sphere] {
            let mut a = ChaCha8Rng::seed_from_u64(7);
            let mut b = ChaCha8Rng::seed_from_u64(7);
            for _ in 0..50 {
                let p = m.sample(&mut a);
                assert_eq!(p, m.sample(&mut b));
                m.check_point(&p).unwrap();
                if m == Model::Sphere {
                    assert!(m.dist(&p, &m.origin()) <= std::f64::consts::PI / 3.0 + 1e-12);
                }
            }
        }
    }

    #[test]
    fn homeos_invert() {
        let r = HomeoRegistry::standard();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for name in ["shear", "swap", "cubic", "rot", "heis_shift"] {
            let h = r.get(name).unwrap();
            for _ in 0..20 {
                let p = h.source.sample(&mut rng);
                let q = h.apply_inv(&h.apply(&p));
                for (a, b) in p.iter().zip(&q) {
                    assert!((a - b).abs() < 1e-12, "{name}");
                }
            }
        }
        assert!(r.get("nope").is_err());
    }
}
