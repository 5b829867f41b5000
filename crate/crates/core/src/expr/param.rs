use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::Scalar;

/// Number of free parameter symbols known to the coefficient ring.
pub const NPARAMS: usize = 12;

/// Free constants that may appear symbolically in coefficients.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Param {
    C1,
    C2,
    L0,
    Omega,
    A,
    A1,
    A2,
    B,
    Alpha1,
    Alpha2,
    F0,
    H0,
}

impl Param {
    pub const ALL: [Param; NPARAMS] = [
        Param::C1,
        Param::C2,
        Param::L0,
        Param::Omega,
        Param::A,
        Param::A1,
        Param::A2,
        Param::B,
        Param::Alpha1,
        Param::Alpha2,
        Param::F0,
        Param::H0,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Param::C1 => "c1",
            Param::C2 => "c2",
            Param::L0 => "L0",
            Param::Omega => "omega",
            Param::A => "A",
            Param::A1 => "a1",
            Param::A2 => "a2",
            Param::B => "b",
            Param::Alpha1 => "alpha1",
            Param::Alpha2 => "alpha2",
            Param::F0 => "f0",
            Param::H0 => "h0",
        }
    }

    pub fn from_name(s: &str) -> Option<Param> {
        Param::ALL.iter().copied().find(|p| p.name() == s).or(match s {
            "l0" => Some(Param::L0),
            "w" => Some(Param::Omega),
            _ => None,
        })
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Exact numeric values bound to parameter symbols at evaluation time.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ParamValues(BTreeMap<Param, Scalar>);

impl ParamValues {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, p: Param, v: Scalar) -> Self {
        self.0.insert(p, v);
        self
    }

    pub fn set(&mut self, p: Param, v: Scalar) {
        self.0.insert(p, v);
    }

    pub fn get(&self, p: Param) -> Option<&Scalar> {
        self.0.get(&p)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Param, &Scalar)> {
        self.0.iter()
    }

    /// Overlay `other` on top of `self`.
    pub fn merged(&self, other: &ParamValues) -> ParamValues {
        let mut out = self.clone();
        for (p, v) in other.iter() {
            out.0.insert(*p, v.clone());
        }
        out
    }
}

impl Serialize for ParamValues {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let m: BTreeMap<&str, String> = self.0.iter().map(|(p, v)| (p.name(), v.to_string())).collect();
        m.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ParamValues {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Float(f64),
            Text(String),
        }
        let m: BTreeMap<String, Raw> = BTreeMap::deserialize(d)?;
        let mut out = ParamValues::new();
        for (k, v) in m {
            let p = Param::from_name(&k).ok_or_else(|| serde::de::Error::custom(format!("unknown parameter `{k}`")))?;
            let text = match v {
                Raw::Int(i) => i.to_string(),
                Raw::Float(x) => x.to_string(),
                Raw::Text(t) => t,
            };
            let q = super::parse_scalar(&text).map_err(serde::de::Error::custom)?;
            out.set(p, q);
        }
        Ok(out)
    }
}
