use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// A scalar coefficient field of the ambient coordinates, written as
/// `const:c`, `coord:i` or `affine:c:i:a` (meaning `c + a·xᵢ`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScalarField<T> {
    Const(T),
    Coord(usize),
    Affine { c: T, i: usize, a: T },
}

impl<T: Real> ScalarField<T> {
    pub fn eval(&self, x: &[T]) -> T {
        let coord = |i: usize| x.get(i).copied().unwrap_or_else(T::zero);
        match *self {
            ScalarField::Const(c) => c,
            ScalarField::Coord(i) => coord(i),
            ScalarField::Affine { c, i, a } => c + a * coord(i),
        }
    }

    pub fn constant_value(&self) -> Option<T> {
        match *self {
            ScalarField::Const(c) => Some(c),
            ScalarField::Affine { c, a, .. } if a == T::zero() => Some(c),
            _ => None,
        }
    }

    /// Lower bound over points whose coordinates lie in `[−bound, bound]`.
    pub fn lower_bound(&self, bound: T) -> T {
        match *self {
            ScalarField::Const(c) => c,
            ScalarField::Coord(_) => -bound,
            ScalarField::Affine { c, a, .. } => c - a.abs() * bound,
        }
    }
}

impl<T: Real> fmt::Display for ScalarField<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            ScalarField::Const(c) => write!(f, "const:{}", c.to_f64_lossy()),
            ScalarField::Coord(i) => write!(f, "coord:{i}"),
            ScalarField::Affine { c, i, a } => write!(f, "affine:{}:{i}:{}", c.to_f64_lossy(), a.to_f64_lossy()),
        }
    }
}

impl<T: Real> FromStr for ScalarField<T> {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("invalid scalar field `{s}` (expected const:c, coord:i or affine:c:i:a)"));
        let num = |t: &str| t.trim().parse::<f64>().map(T::lit).map_err(|_| bad());
        let idx = |t: &str| t.trim().parse::<usize>().map_err(|_| bad());
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            ["const", c] => Ok(ScalarField::Const(num(c)?)),
            ["coord", i] => Ok(ScalarField::Coord(idx(i)?)),
            ["affine", c, i, a] => Ok(ScalarField::Affine { c: num(c)?, i: idx(i)?, a: num(a)? }),
            _ => Err(bad()),
        }
    }
}

impl<T: Real> Serialize for ScalarField<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de, T: Real> Deserialize<'de> for ScalarField<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Number(f64),
        }
        match Raw::deserialize(d)? {
            Raw::Text(t) => t.parse().map_err(serde::de::Error::custom),
            Raw::Number(c) => Ok(ScalarField::Const(T::lit(c))),
        }
    }
}
