//! The flow exponent r (equivalently λ = 1/r).
//!
//! All flow formulas come in two branches: real powers for finite nonzero r
//! and exponentials for r = ∞ (λ = 0). `Exponent` makes the infinite case a
//! first-class value instead of a large-r approximation.

use std::fmt;
use std::str::FromStr;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinite,
}

impl Exponent {
    /// A finite nonzero exponent. r = 0 has no meaning in any of the flow
    /// formulas and is rejected.
    pub fn finite(r: f64) -> Result<Self> {
        if !r.is_finite() {
            return Err(Error::InvalidInput(format!("exponent r = {r} is not finite")));
        }
        if r == 0.0 {
            return Err(Error::InvalidInput("exponent r must be nonzero".into()));
        }
        Ok(Exponent::Finite(r))
    }

    pub fn infinite() -> Self {
        Exponent::Infinite
    }

    /// Build from λ = 1/r; λ = 0 maps to r = ∞.
    pub fn from_lambda(lambda: f64) -> Result<Self> {
        if !lambda.is_finite() {
            return Err(Error::InvalidInput(format!("lambda = {lambda} is not finite")));
        }
        if lambda == 0.0 {
            Ok(Exponent::Infinite)
        } else {
            Exponent::finite(1.0 / lambda)
        }
    }

    /// λ = 1/r (0 for r = ∞).
    pub fn lambda(&self) -> f64 {
        match self {
            Exponent::Finite(r) => 1.0 / r,
            Exponent::Infinite => 0.0,
        }
    }

    pub fn as_finite(&self) -> Option<f64> {
        match self {
            Exponent::Finite(r) => Some(*r),
            Exponent::Infinite => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Exponent::Infinite)
    }

    /// r as f64, +∞ for the infinite branch. Handy for reporting.
    pub fn value(&self) -> f64 {
        match self {
            Exponent::Finite(r) => *r,
            Exponent::Infinite => f64::INFINITY,
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(r) => write!(f, "{r}"),
            Exponent::Infinite => write!(f, "inf"),
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("inf") || t.eq_ignore_ascii_case("infinity") {
            return Ok(Exponent::Infinite);
        }
        let r: f64 = t
            .parse()
            .map_err(|_| Error::InvalidInput(format!("cannot parse exponent '{s}'")))?;
        if r.is_infinite() && r > 0.0 {
            return Ok(Exponent::Infinite);
        }
        Exponent::finite(r)
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Exponent::Finite(r) => ser.serialize_f64(*r),
            Exponent::Infinite => ser.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(de)? {
            Raw::Num(r) => Exponent::finite(r).map_err(D::Error::custom),
            Raw::Str(s) => s.parse().map_err(D::Error::custom),
        }
    }
}
