use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A Lebesgue exponent: a finite real or `+inf`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Inf,
}

impl Exponent {
    pub fn finite(self) -> Option<f64> {
        match self {
            Exponent::Finite(p) => Some(p),
            Exponent::Inf => None,
        }
    }

    pub fn is_inf(self) -> bool {
        matches!(self, Exponent::Inf)
    }

    /// `p / (p - 1)`, with `inf -> 1` and `1 -> inf`.
    pub fn conjugate(self) -> Exponent {
        match self {
            Exponent::Inf => Exponent::Finite(1.0),
            Exponent::Finite(1.0) => Exponent::Inf,
            Exponent::Finite(p) => Exponent::Finite(p / (p - 1.0)),
        }
    }

    /// `1/p`, zero for `inf`.
    pub fn reciprocal(self) -> f64 {
        match self {
            Exponent::Finite(p) => 1.0 / p,
            Exponent::Inf => 0.0,
        }
    }

    /// `p / r`; `inf` stays `inf`.
    pub fn divided(self, r: f64) -> Exponent {
        match self {
            Exponent::Finite(p) => Exponent::Finite(p / r),
            Exponent::Inf => Exponent::Inf,
        }
    }

    /// Errors unless the exponent is `inf` or a finite real strictly above `lower`.
    pub fn require_above(self, lower: f64, reason: &'static str) -> Result<()> {
        match self {
            Exponent::Finite(p) if !(p > lower && p.is_finite()) => {
                Err(Error::InvalidExponent { value: p, reason })
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Inf => f.write_str("inf"),
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s.to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(Exponent::Inf),
            _ => {
                let p: f64 = s
                    .parse()
                    .map_err(|_| Error::InvalidParam(format!("not an exponent: `{s}`")))?;
                if p.is_infinite() && p > 0.0 {
                    Ok(Exponent::Inf)
                } else if p.is_nan() {
                    Err(Error::InvalidParam(format!("not an exponent: `{s}`")))
                } else {
                    Ok(Exponent::Finite(p))
                }
            }
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Exponent::Finite(p) => serializer.serialize_f64(*p),
            Exponent::Inf => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Num(p) => Ok(Exponent::Finite(p)),
            Raw::Str(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Anisotropic exponent tuple `(u_1, ..., u_n)`; every finite entry is `> 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Exponent>", into = "Vec<Exponent>")]
pub struct ExponentVector(Vec<Exponent>);

impl ExponentVector {
    pub fn new(entries: Vec<Exponent>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidParam("exponent vector is empty".into()));
        }
        for e in &entries {
            e.require_above(1.0, "finite exponents must exceed 1")?;
        }
        Ok(Self(entries))
    }

    pub fn finite(entries: &[f64]) -> Result<Self> {
        Self::new(entries.iter().map(|&p| Exponent::Finite(p)).collect())
    }

    pub fn isotropic(p: f64, dim: usize) -> Result<Self> {
        Self::finite(&vec![p; dim])
    }

    #[cfg(test)]
    pub(crate) fn unchecked(entries: Vec<Exponent>) -> Self {
        Self(entries)
    }

    pub fn entries(&self) -> &[Exponent] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn conjugate(&self) -> Self {
        Self(self.0.iter().map(|e| e.conjugate()).collect())
    }

    /// `u / r` componentwise.
    pub fn divided(&self, r: f64) -> Self {
        Self(self.0.iter().map(|e| e.divided(r)).collect())
    }

    /// `sum_i 1/u_i`.
    pub fn sum_reciprocals(&self) -> f64 {
        self.0.iter().map(|e| e.reciprocal()).sum()
    }

    pub fn min_finite(&self) -> Option<f64> {
        self.0.iter().filter_map(|e| e.finite()).reduce(f64::min)
    }

    /// `Some(p)` when every entry equals the same finite `p`.
    pub fn as_isotropic(&self) -> Option<f64> {
        let first = self.0[0].finite()?;
        self.0.iter().all(|e| *e == Exponent::Finite(first)).then_some(first)
    }

    pub fn all_finite(&self) -> bool {
        self.0.iter().all(|e| !e.is_inf())
    }

    /// Componentwise `self <= other` (`inf` is the largest value).
    pub fn le(&self, other: &Self) -> bool {
        self.dim() == other.dim()
            && self.0.iter().zip(&other.0).all(|(a, b)| match (a, b) {
                (_, Exponent::Inf) => true,
                (Exponent::Inf, Exponent::Finite(_)) => false,
                (Exponent::Finite(p), Exponent::Finite(q)) => p <= q,
            })
    }

    pub(crate) fn validate(&self, dim: usize) -> Result<()> {
        if self.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: self.dim() });
        }
        for e in &self.0 {
            e.require_above(1.0, "finite exponents must exceed 1")?;
        }
        Ok(())
    }
}

impl TryFrom<Vec<Exponent>> for ExponentVector {
    type Error = Error;

    fn try_from(v: Vec<Exponent>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<ExponentVector> for Vec<Exponent> {
    fn from(v: ExponentVector) -> Self {
        v.0
    }
}

impl FromStr for ExponentVector {
    type Err = Error;

    /// Comma-separated entries, e.g. `2,4` or `3,inf`.
    fn from_str(s: &str) -> Result<Self> {
        let entries = s.split(',').map(str::parse).collect::<Result<Vec<Exponent>>>()?;
        Self::new(entries)
    }
}

impl fmt::Display for ExponentVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}
