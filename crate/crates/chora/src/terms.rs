//! Symbolic colors of tangle-diagram wires and their normal forms.
//!
//! Normalization works innermost-first and leftmost-first with the rules
//!
//! * `Bullet(s, x, y) -> Circ(1/s, x, y)`
//! * `Circ(s, x, x) -> x`
//! * `Circ(s, x, Circ(t, x, y)) -> Circ(s*t, x, y)`
//! * `Circ(1, x, y) -> y`
//! * `App(f, AppInv(f, y)) -> y` and `AppInv(f, App(f, y)) -> y`
//!
//! so normal forms contain no `Bullet`. Each step lowers the pair
//! (node count, bullet count) lexicographically, hence termination.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::models::{HomeoRegistry, Model, ModelError, Point};
use crate::scale::{is_ident, ScaleBinding, ScaleError, ScaleExpr};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ColorTerm {
    Var(String),
    Circ(ScaleExpr, Box<ColorTerm>, Box<ColorTerm>),
    Bullet(ScaleExpr, Box<ColorTerm>, Box<ColorTerm>),
    App(String, Box<ColorTerm>),
    AppInv(String, Box<ColorTerm>),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TermError {
    #[error("unbound point variable `{0}`")]
    UnboundVar(String),
    #[error(transparent)]
    Scale(#[from] ScaleError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("cannot parse term at offset {offset}: {reason}")]
    Parse { offset: usize, reason: String },
}

pub type PointBinding = BTreeMap<String, Point>;

impl ColorTerm {
    pub fn var(name: &str) -> Self {
        ColorTerm::Var(name.to_string())
    }

    pub fn circ(s: ScaleExpr, x: ColorTerm, y: ColorTerm) -> Self {
        ColorTerm::Circ(s, Box::new(x), Box::new(y))
    }

    pub fn bullet(s: ScaleExpr, x: ColorTerm, y: ColorTerm) -> Self {
        ColorTerm::Bullet(s, Box::new(x), Box::new(y))
    }

    pub fn app(f: &str, x: ColorTerm) -> Self {
        ColorTerm::App(f.to_string(), Box::new(x))
    }

    pub fn app_inv(f: &str, x: ColorTerm) -> Self {
        ColorTerm::AppInv(f.to_string(), Box::new(x))
    }

    pub fn node_count(&self) -> usize {
        match self {
            ColorTerm::Var(_) => 1,
            ColorTerm::Circ(_, a, b) | ColorTerm::Bullet(_, a, b) => 1 + a.node_count() + b.node_count(),
            ColorTerm::App(_, a) | ColorTerm::AppInv(_, a) => 1 + a.node_count(),
        }
    }

    pub fn bullet_count(&self) -> usize {
        match self {
            ColorTerm::Var(_) => 0,
            ColorTerm::Circ(_, a, b) => a.bullet_count() + b.bullet_count(),
            ColorTerm::Bullet(_, a, b) => 1 + a.bullet_count() + b.bullet_count(),
            ColorTerm::App(_, a) | ColorTerm::AppInv(_, a) => a.bullet_count(),
        }
    }

    pub fn point_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            ColorTerm::Var(v) => {
                out.insert(v.clone());
            }
            ColorTerm::Circ(_, a, b) | ColorTerm::Bullet(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            ColorTerm::App(_, a) | ColorTerm::AppInv(_, a) => a.collect_vars(out),
        }
    }

    pub fn scale_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_scale_vars(&mut out);
        out
    }

    fn collect_scale_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            ColorTerm::Var(_) => {}
            ColorTerm::Circ(s, a, b) | ColorTerm::Bullet(s, a, b) => {
                out.extend(s.vars().map(str::to_string));
                a.collect_scale_vars(out);
                b.collect_scale_vars(out);
            }
            ColorTerm::App(_, a) | ColorTerm::AppInv(_, a) => a.collect_scale_vars(out),
        }
    }

    /// Rewrite the root once, assuming the children are already normal.
    fn root_step(&self) -> Option<ColorTerm> {
        match self {
            ColorTerm::Bullet(s, a, b) => Some(ColorTerm::Circ(s.inv(), a.clone(), b.clone())),
            ColorTerm::Circ(s, a, b) => {
                if a == b {
                    return Some((**a).clone());
                }
                if s.is_one() {
                    return Some((**b).clone());
                }
                if let ColorTerm::Circ(t, a2, c) = &**b {
                    if a2 == a {
                        return Some(ColorTerm::Circ(s.mul(t), a.clone(), c.clone()));
                    }
                }
                None
            }
            ColorTerm::App(f, a) => match &**a {
                ColorTerm::AppInv(g, y) if g == f => Some((**y).clone()),
                _ => None,
            },
            ColorTerm::AppInv(f, a) => match &**a {
                ColorTerm::App(g, y) if g == f => Some((**y).clone()),
                _ => None,
            },
            ColorTerm::Var(_) => None,
        }
    }

    /// One innermost-leftmost rewrite step, or `None` at a normal form.
    pub fn rewrite_step(&self) -> Option<ColorTerm> {
        match self {
            ColorTerm::Var(_) => None,
            ColorTerm::Circ(s, a, b) | ColorTerm::Bullet(s, a, b) => {
                let rebuild = |a: ColorTerm, b: ColorTerm| match self {
                    ColorTerm::Circ(..) => ColorTerm::circ(s.clone(), a, b),
                    _ => ColorTerm::bullet(s.clone(), a, b),
                };
                if let Some(a2) = a.rewrite_step() {
                    return Some(rebuild(a2, (**b).clone()));
                }
                if let Some(b2) = b.rewrite_step() {
                    return Some(rebuild((**a).clone(), b2));
                }
                self.root_step()
            }
            ColorTerm::App(f, a) => match a.rewrite_step() {
                Some(a2) => Some(ColorTerm::app(f, a2)),
                None => self.root_step(),
            },
            ColorTerm::AppInv(f, a) => match a.rewrite_step() {
                Some(a2) => Some(ColorTerm::app_inv(f, a2)),
                None => self.root_step(),
            },
        }
    }

    /// Every intermediate term of the innermost-leftmost reduction.
    pub fn normalize_trace(&self) -> Vec<ColorTerm> {
        let mut out = vec![self.clone()];
        while let Some(next) = out.last().unwrap().rewrite_step() {
            out.push(next);
        }
        out
    }

    pub fn normalize(&self) -> ColorTerm {
        match self {
            ColorTerm::Var(_) => self.clone(),
            ColorTerm::Circ(s, a, b) | ColorTerm::Bullet(s, a, b) => {
                let (a, b) = (a.normalize(), b.normalize());
                let t = match self {
                    ColorTerm::Circ(..) => ColorTerm::circ(s.clone(), a, b),
                    _ => ColorTerm::bullet(s.clone(), a, b),
                };
                normalize_root(t)
            }
            ColorTerm::App(f, a) => normalize_root(ColorTerm::app(f, a.normalize())),
            ColorTerm::AppInv(f, a) => normalize_root(ColorTerm::app_inv(f, a.normalize())),
        }
    }

    pub fn equal_modulo(&self, other: &ColorTerm) -> bool {
        self == other || self.normalize() == other.normalize()
    }

    pub fn eval(
        &self,
        model: &Model,
        points: &PointBinding,
        scales: &ScaleBinding,
        homeos: &HomeoRegistry,
    ) -> Result<Point, TermError> {
        Ok(match self {
            ColorTerm::Var(v) => points.get(v).cloned().ok_or_else(|| TermError::UnboundVar(v.clone()))?,
            ColorTerm::Circ(s, a, b) => {
                let e = s.eval(scales)?;
                model.circ(e, &a.eval(model, points, scales, homeos)?, &b.eval(model, points, scales, homeos)?)?
            }
            ColorTerm::Bullet(s, a, b) => {
                let e = s.eval(scales)?;
                model.bullet(e, &a.eval(model, points, scales, homeos)?, &b.eval(model, points, scales, homeos)?)?
            }
            ColorTerm::App(f, a) => homeos.get(f)?.apply(&a.eval(model, points, scales, homeos)?),
            ColorTerm::AppInv(f, a) => homeos.get(f)?.apply_inv(&a.eval(model, points, scales, homeos)?),
        })
    }
}

/// Normalize a term whose children are already in normal form.
fn normalize_root(mut t: ColorTerm) -> ColorTerm {
    while let Some(next) = t.root_step() {
        t = next;
    }
    t
}

pub fn normalize(t: &ColorTerm) -> ColorTerm {
    t.normalize()
}

pub fn equal_modulo(a: &ColorTerm, b: &ColorTerm) -> bool {
    a.equal_modulo(b)
}

pub fn eval_term(
    t: &ColorTerm,
    model: &Model,
    points: &PointBinding,
    scales: &ScaleBinding,
    homeos: &HomeoRegistry,
) -> Result<Point, TermError> {
    t.eval(model, points, scales, homeos)
}

impl fmt::Display for ColorTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ColorTerm::Var(v) => f.write_str(v),
            ColorTerm::Circ(s, a, b) => write!(f, "circ[{s}]({a},{b})"),
            ColorTerm::Bullet(s, a, b) => write!(f, "bul[{s}]({a},{b})"),
            ColorTerm::App(h, a) => write!(f, "app[{h}]({a})"),
            ColorTerm::AppInv(h, a) => write!(f, "appinv[{h}]({a})"),
        }
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, reason: &str) -> TermError {
        TermError::Parse {
            offset: self.pos,
            reason: reason.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.src[self.pos..].starts_with(char::is_whitespace) {
            self.pos += self.src[self.pos..].chars().next().unwrap().len_utf8();
        }
    }

    fn expect(&mut self, c: char) -> Result<(), TermError> {
        self.skip_ws();
        if self.src[self.pos..].starts_with(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(&format!("expected `{c}`")))
        }
    }

    fn ident(&mut self) -> Result<String, TermError> {
        self.skip_ws();
        let rest = &self.src[self.pos..];
        let len = rest
            .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
            .unwrap_or(rest.len());
        let name = &rest[..len];
        if !is_ident(name) {
            return Err(self.err("expected identifier"));
        }
        self.pos += len;
        Ok(name.to_string())
    }

    fn bracket(&mut self) -> Result<&'a str, TermError> {
        self.expect('[')?;
        let rest = &self.src[self.pos..];
        let end = rest.find(']').ok_or_else(|| self.err("unclosed `[`"))?;
        self.pos += end + 1;
        Ok(&rest[..end])
    }

    fn term(&mut self) -> Result<ColorTerm, TermError> {
        let head = self.ident()?;
        self.skip_ws();
        match head.as_str() {
            "circ" | "bul" if self.src[self.pos..].starts_with('[') => {
                let start = self.pos;
                let s: ScaleExpr = self.bracket()?.parse().map_err(|e: ScaleError| TermError::Parse {
                    offset: start,
                    reason: e.to_string(),
                })?;
                self.expect('(')?;
                let a = self.term()?;
                self.expect(',')?;
                let b = self.term()?;
                self.expect(')')?;
                Ok(if head == "circ" {
                    ColorTerm::circ(s, a, b)
                } else {
                    ColorTerm::bullet(s, a, b)
                })
            }
            "app" | "appinv" if self.src[self.pos..].starts_with('[') => {
                let name = self.bracket()?.trim().to_string();
                if !is_ident(&name) {
                    return Err(self.err("bad homeomorphism name"));
                }
                self.expect('(')?;
                let a = self.term()?;
                self.expect(')')?;
                Ok(if head == "app" {
                    ColorTerm::app(&name, a)
                } else {
                    ColorTerm::app_inv(&name, a)
                })
            }
            _ => Ok(ColorTerm::Var(head)),
        }
    }
}

impl FromStr for ColorTerm {
    type Err = TermError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut p = Parser { src: s, pos: 0 };
        let t = p.term()?;
        p.skip_ws();
        if p.pos != s.len() {
            return Err(p.err("trailing input"));
        }
        Ok(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: &str) -> ColorTerm {
        s.parse().unwrap()
    }

    #[test]
    fn parse_print_round_trip() {
        for s in [
            "x",
            "circ[eps](x,u)",
            "bul[3/4*eps^2](x,circ[mu](y,z))",
            "app[f](appinv[f](u))",
        ] {
            assert_eq!(t(s).to_string(), s);
        }
        assert!("circ[eps](x,".parse::<ColorTerm>().is_err());
        assert!("circ[0](x,y)".parse::<ColorTerm>().is_err());
        assert!("x y".parse::<ColorTerm>().is_err());
    }

    #[test]
    fn rule_examples() {
        assert_eq!(t("circ[eps](x,x)").normalize(), t("x"));
        assert_eq!(t("circ[eps](x,circ[mu](x,y))").normalize(), t("circ[eps*mu](x,y)"));
        assert_eq!(t("circ[1](x,y)").normalize(), t("y"));
        assert_eq!(t("circ[eps](x,circ[eps^-1](x,y))").normalize(), t("y"));
        assert_eq!(t("circ[eps](x,bul[eps](x,y))").normalize(), t("y"));
        assert_eq!(t("bul[eps](x,circ[eps](x,y))").normalize(), t("y"));
        assert_eq!(t("app[f](appinv[f](y))").normalize(), t("y"));
        assert_eq!(t("appinv[f](app[f](y))").normalize(), t("y"));
        assert_eq!(t("app[f](appinv[g](y))").normalize(), t("app[f](appinv[g](y))"));
    }

    #[test]
    fn composition_needs_equal_bases() {
        let n = t("circ[eps](x,circ[mu](z,y))").normalize();
        assert_eq!(n, t("circ[eps](x,circ[mu](z,y))"));
    }

    #[test]
    fn trace_agrees_with_normalize() {
        let a = t("bul[eps](x,circ[eps](circ[eps](x,u),bul[eps](circ[eps](x,u),circ[eps](x,v))))");
        let trace = a.normalize_trace();
        assert_eq!(trace.last().unwrap(), &a.normalize());
        assert_eq!(a.normalize(), t("v"));
    }

    #[test]
    fn eval_matches_model() {
        let m = Model::Euclid(1);
        let mut pts = PointBinding::new();
        pts.insert("x".into(), vec![0.0]);
        pts.insert("u".into(), vec![4.0]);
        let mut sc = ScaleBinding::new();
        sc.insert("eps".into(), 0.5);
        let r = t("bul[eps](x,circ[eps^2](x,u))").eval(&m, &pts, &sc, &HomeoRegistry::new()).unwrap();
        assert_eq!(r, vec![2.0]);
        assert!(matches!(
            t("y").eval(&m, &pts, &sc, &HomeoRegistry::new()),
            Err(TermError::UnboundVar(_))
        ));
    }
}
