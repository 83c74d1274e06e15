//! Exact arithmetic in the multiplicative scale group.
//!
//! A scale is a positive rational coefficient times a monomial in named
//! scale variables with integer exponents, e.g. `3/4*eps^2*mu^-1`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScaleError {
    #[error("exponent overflow")]
    Overflow,
    #[error("unbound scale variable `{0}`")]
    UnboundScaleVar(String),
    #[error("scale variable `{0}` bound to non-positive or non-finite value {1}")]
    InvalidScaleValue(String, f64),
    #[error("scale coefficient must be positive")]
    NonPositive,
    #[error("cannot parse scale `{input}`: {reason}")]
    Parse { input: String, reason: String },
}

/// Values bound to scale variables.
pub type ScaleBinding = BTreeMap<String, f64>;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ScaleExpr {
    coef: BigRational,
    exps: BTreeMap<String, i64>,
}

impl Default for ScaleExpr {
    fn default() -> Self {
        Self::one()
    }
}

impl ScaleExpr {
    pub fn one() -> Self {
        ScaleExpr {
            coef: BigRational::one(),
            exps: BTreeMap::new(),
        }
    }

    pub fn var(name: &str) -> Self {
        let mut exps = BTreeMap::new();
        exps.insert(name.to_string(), 1);
        ScaleExpr {
            coef: BigRational::one(),
            exps,
        }
    }

    pub fn constant(coef: BigRational) -> Result<Self, ScaleError> {
        if !coef.is_positive() {
            return Err(ScaleError::NonPositive);
        }
        Ok(ScaleExpr {
            coef,
            exps: BTreeMap::new(),
        })
    }

    pub fn ratio(num: i64, den: i64) -> Result<Self, ScaleError> {
        if den == 0 {
            return Err(ScaleError::NonPositive);
        }
        Self::constant(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn coefficient(&self) -> &BigRational {
        &self.coef
    }

    pub fn exponents(&self) -> &BTreeMap<String, i64> {
        &self.exps
    }

    pub fn vars(&self) -> impl Iterator<Item = &str> {
        self.exps.keys().map(|s| s.as_str())
    }

    pub fn is_one(&self) -> bool {
        self.coef.is_one() && self.exps.is_empty()
    }

    pub fn checked_mul(&self, other: &ScaleExpr) -> Result<ScaleExpr, ScaleError> {
        let mut exps = self.exps.clone();
        for (k, e) in &other.exps {
            let slot = exps.entry(k.clone()).or_insert(0);
            *slot = slot.checked_add(*e).ok_or(ScaleError::Overflow)?;
            if *slot == 0 {
                exps.remove(k);
            }
        }
        Ok(ScaleExpr {
            coef: &self.coef * &other.coef,
            exps,
        })
    }

    /// Product in the scale group. Panics only on exponent overflow past `i64`.
    pub fn mul(&self, other: &ScaleExpr) -> ScaleExpr {
        self.checked_mul(other).expect("scale exponent overflow")
    }

    pub fn inv(&self) -> ScaleExpr {
        ScaleExpr {
            coef: self.coef.recip(),
            exps: self.exps.iter().map(|(k, e)| (k.clone(), -e)).collect(),
        }
    }

    pub fn pow(&self, n: i64) -> Result<ScaleExpr, ScaleError> {
        let coef = if self.coef.is_one() {
            BigRational::one()
        } else {
            self.coef.pow(i32::try_from(n).map_err(|_| ScaleError::Overflow)?)
        };
        let mut exps = BTreeMap::new();
        if n != 0 {
            for (k, e) in &self.exps {
                exps.insert(k.clone(), e.checked_mul(n).ok_or(ScaleError::Overflow)?);
            }
        }
        Ok(ScaleExpr { coef, exps })
    }

    pub fn eval(&self, binding: &ScaleBinding) -> Result<f64, ScaleError> {
        let mut out = self.coef.to_f64().ok_or(ScaleError::Overflow)?;
        for (k, e) in &self.exps {
            let v = *binding
                .get(k)
                .ok_or_else(|| ScaleError::UnboundScaleVar(k.clone()))?;
            if !(v.is_finite() && v > 0.0) {
                return Err(ScaleError::InvalidScaleValue(k.clone(), v));
            }
            let e = i32::try_from(*e).map_err(|_| ScaleError::Overflow)?;
            out *= v.powi(e);
        }
        Ok(out)
    }
}

pub fn eval_scale(s: &ScaleExpr, binding: &ScaleBinding) -> Result<f64, ScaleError> {
    s.eval(binding)
}

fn write_rational(f: &mut fmt::Formatter<'_>, r: &BigRational) -> fmt::Result {
    if r.denom().is_one() {
        write!(f, "{}", r.numer())
    } else {
        write!(f, "{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for ScaleExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        if !self.coef.is_one() || self.exps.is_empty() {
            write_rational(f, &self.coef)?;
            first = false;
        }
        for (k, e) in &self.exps {
            if !first {
                f.write_str("*")?;
            }
            first = false;
            if *e == 1 {
                write!(f, "{k}")?;
            } else {
                write!(f, "{k}^{e}")?;
            }
        }
        Ok(())
    }
}

pub(crate) fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl FromStr for ScaleExpr {
    type Err = ScaleError;

    fn from_str(input: &str) -> Result<Self, Self::Err> {
        let err = |reason: &str| ScaleError::Parse {
            input: input.to_string(),
            reason: reason.to_string(),
        };
        let trimmed = input.trim();
        if trimmed.is_empty() {
            return Err(err("empty"));
        }
        let mut acc = ScaleExpr::one();
        for factor in trimmed.split('*') {
            let factor = factor.trim();
            if factor.is_empty() {
                return Err(err("empty factor"));
            }
            let first = factor.chars().next().unwrap();
            if first.is_ascii_digit() {
                let r = match factor.split_once('/') {
                    Some((n, d)) => {
                        let n: BigInt = n.trim().parse().map_err(|_| err("bad numerator"))?;
                        let d: BigInt = d.trim().parse().map_err(|_| err("bad denominator"))?;
                        if d.is_zero() {
                            return Err(err("zero denominator"));
                        }
                        BigRational::new(n, d)
                    }
                    None => BigRational::from_integer(
                        factor.parse::<BigInt>().map_err(|_| err("bad integer"))?,
                    ),
                };
                if !r.is_positive() {
                    return Err(err("coefficient must be positive"));
                }
                acc = acc.mul(&ScaleExpr::constant(r)?);
            } else {
                let (name, exp) = match factor.split_once('^') {
                    Some((n, e)) => (
                        n.trim(),
                        e.trim().parse::<i64>().map_err(|_| err("bad exponent"))?,
                    ),
                    None => (factor, 1),
                };
                if !is_ident(name) {
                    return Err(err("bad variable name"));
                }
                acc = acc.checked_mul(&ScaleExpr::var(name).pow(exp)?)?;
            }
        }
        Ok(acc)
    }
}
