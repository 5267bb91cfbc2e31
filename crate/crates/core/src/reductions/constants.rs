use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use super::TheoremTag;
use crate::error::{Error, Result};

/// A derived scalar of a reduction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Constant {
    Int(BigInt),
    Rational(BigRational),
    /// Exponents of a binary decomposition, strictly decreasing.
    Exponents(Vec<u64>),
}

/// Named constants of a built instance, in insertion order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ReductionConstants {
    theorem: Option<TheoremTag>,
    entries: Vec<(String, Constant)>,
}

impl ReductionConstants {
    pub fn new(theorem: TheoremTag) -> Self {
        ReductionConstants {
            theorem: Some(theorem),
            entries: Vec::new(),
        }
    }

    pub fn theorem(&self) -> Option<TheoremTag> {
        self.theorem
    }

    pub fn entries(&self) -> &[(String, Constant)] {
        &self.entries
    }

    pub fn insert(&mut self, name: impl Into<String>, value: Constant) {
        let name = name.into();
        match self.entries.iter_mut().find(|(n, _)| *n == name) {
            Some(slot) => slot.1 = value,
            None => self.entries.push((name, value)),
        }
    }

    pub fn set_int(&mut self, name: impl Into<String>, value: impl Into<BigInt>) {
        self.insert(name, Constant::Int(value.into()));
    }

    pub fn set_rational(&mut self, name: impl Into<String>, value: BigRational) {
        self.insert(name, Constant::Rational(value));
    }

    pub fn set_exponents(&mut self, name: impl Into<String>, value: Vec<u64>) {
        self.insert(name, Constant::Exponents(value));
    }

    pub fn get(&self, name: &str) -> Option<&Constant> {
        self.entries.iter().find(|(n, _)| n == name).map(|(_, c)| c)
    }

    fn missing(name: &str) -> Error {
        Error::InvalidInstance(format!("constant `{name}` is missing or has the wrong type"))
    }

    pub fn int(&self, name: &str) -> Result<BigInt> {
        match self.get(name) {
            Some(Constant::Int(v)) => Ok(v.clone()),
            Some(Constant::Rational(r)) if r.is_integer() => Ok(r.to_integer()),
            _ => Err(Self::missing(name)),
        }
    }

    pub fn uint(&self, name: &str) -> Result<BigUint> {
        self.int(name)?
            .to_biguint()
            .ok_or_else(|| Error::InvalidInstance(format!("constant `{name}` is negative")))
    }

    pub fn small(&self, name: &str) -> Result<usize> {
        self.int(name)?
            .to_usize()
            .ok_or_else(|| Error::InvalidInstance(format!("constant `{name}` is out of range")))
    }

    pub fn rational(&self, name: &str) -> Result<BigRational> {
        match self.get(name) {
            Some(Constant::Rational(r)) => Ok(r.clone()),
            Some(Constant::Int(v)) => Ok(BigRational::from_integer(v.clone())),
            _ => Err(Self::missing(name)),
        }
    }

    pub fn exponents(&self, name: &str) -> Result<&[u64]> {
        match self.get(name) {
            Some(Constant::Exponents(v)) => Ok(v),
            _ => Err(Self::missing(name)),
        }
    }

    pub(crate) fn to_json_map(&self) -> serde_json::Map<String, serde_json::Value> {
        use serde_json::Value;
        self.entries
            .iter()
            .map(|(name, c)| {
                let v = match c {
                    Constant::Int(v) => Value::String(v.to_string()),
                    Constant::Rational(r) => Value::String(format!("{}/{}", r.numer(), r.denom())),
                    Constant::Exponents(e) => {
                        Value::Array(e.iter().map(|x| Value::String(x.to_string())).collect())
                    }
                };
                (name.clone(), v)
            })
            .collect()
    }

    pub(crate) fn from_json_map(
        theorem: Option<TheoremTag>,
        map: &serde_json::Map<String, serde_json::Value>,
    ) -> std::result::Result<Self, String> {
        use serde_json::Value;
        let mut out = ReductionConstants {
            theorem,
            entries: Vec::new(),
        };
        for (name, value) in map {
            let c = match value {
                Value::String(s) => parse_scalar(s).ok_or_else(|| {
                    format!("constant `{name}`: `{s}` is not an integer or rational")
                })?,
                Value::Array(items) => {
                    let mut exps = Vec::with_capacity(items.len());
                    for item in items {
                        let e = match item {
                            Value::String(s) => s.parse().ok(),
                            Value::Number(n) => n.as_u64(),
                            _ => None,
                        };
                        exps.push(e.ok_or_else(|| format!("constant `{name}`: bad exponent"))?);
                    }
                    Constant::Exponents(exps)
                }
                _ => return Err(format!("constant `{name}` must be a string or a list")),
            };
            out.entries.push((name.clone(), c));
        }
        Ok(out)
    }
}

fn parse_scalar(s: &str) -> Option<Constant> {
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(Constant::Rational(BigRational::new(n, d)))
        }
        None => s.trim().parse().ok().map(Constant::Int),
    }
}

/// Exponents of the set bits of `v`, from most to least significant.
pub(crate) fn binary_exponents(v: &BigUint) -> Vec<u64> {
    (0..v.bits()).rev().filter(|&b| v.bit(b)).collect()
}
