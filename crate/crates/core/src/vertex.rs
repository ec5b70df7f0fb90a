//! Hierarchical vertex identifiers.
//!
//! A vertex is named by the recursion branch it was created in, the role it
//! plays in the algorithm and a small index disambiguating it within that role.
//! The rendered form is `r.<d1>.<d2>.../<role>[/<i>.<j>...]`, e.g.
//! `r.3.1/enc-A-out/5.0.1` or `r/input-B/0.1`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;
use thiserror::Error;

/// The part a vertex plays in a matrix-multiplication CDAG.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Role {
    #[serde(rename = "input-A")]
    InputA,
    #[serde(rename = "input-B")]
    InputB,
    #[serde(rename = "enc-A-out")]
    EncA,
    #[serde(rename = "enc-B-out")]
    EncB,
    #[serde(rename = "product")]
    Product,
    #[serde(rename = "dec-out")]
    DecOut,
    /// Partial sum of the definition-based algorithm.
    #[serde(rename = "sum")]
    Sum,
}

impl Role {
    pub const ALL: [Role; 7] = [
        Role::InputA,
        Role::InputB,
        Role::EncA,
        Role::EncB,
        Role::Product,
        Role::DecOut,
        Role::Sum,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Role::InputA => "input-A",
            Role::InputB => "input-B",
            Role::EncA => "enc-A-out",
            Role::EncB => "enc-B-out",
            Role::Product => "product",
            Role::DecOut => "dec-out",
            Role::Sum => "sum",
        }
    }

    pub fn is_input(self) -> bool {
        matches!(self, Role::InputA | Role::InputB)
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Role {
    type Err = VertexIdError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Role::ALL
            .iter()
            .copied()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| VertexIdError::UnknownRole(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VertexIdError {
    #[error("unknown role `{0}`")]
    UnknownRole(String),
    #[error("malformed vertex id `{0}`")]
    Malformed(String),
}

pub type Path = SmallVec<[u16; 8]>;
pub type Index = SmallVec<[u32; 3]>;

/// Identifier of a CDAG vertex. Ordering is lexicographic on
/// `(path, role, index)` and therefore deterministic.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId {
    pub path: Path,
    pub role: Role,
    pub index: Index,
}

impl VertexId {
    pub fn new(path: &[u16], role: Role, index: &[u32]) -> Self {
        VertexId {
            path: Path::from_slice(path),
            role,
            index: Index::from_slice(index),
        }
    }

    pub fn depth(&self) -> usize {
        self.path.len()
    }

    /// Same id with `prefix` prepended to its recursion path.
    pub fn with_prefix(&self, prefix: u16) -> Self {
        let mut path = Path::with_capacity(self.path.len() + 1);
        path.push(prefix);
        path.extend_from_slice(&self.path);
        VertexId {
            path,
            role: self.role,
            index: self.index.clone(),
        }
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("r")?;
        for d in &self.path {
            write!(f, ".{d}")?;
        }
        write!(f, "/{}", self.role)?;
        if !self.index.is_empty() {
            f.write_str("/")?;
            for (k, i) in self.index.iter().enumerate() {
                if k > 0 {
                    f.write_str(".")?;
                }
                write!(f, "{i}")?;
            }
        }
        Ok(())
    }
}

impl FromStr for VertexId {
    type Err = VertexIdError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || VertexIdError::Malformed(s.to_string());
        let mut parts = s.split('/');
        let path_part = parts.next().ok_or_else(bad)?;
        let role_part = parts.next().ok_or_else(bad)?;
        let index_part = parts.next();
        if parts.next().is_some() {
            return Err(bad());
        }

        let mut digits = path_part.split('.');
        if digits.next() != Some("r") {
            return Err(bad());
        }
        let path = digits
            .map(|d| d.parse::<u16>().map_err(|_| bad()))
            .collect::<Result<Path, _>>()?;
        let role = role_part.parse::<Role>()?;
        let index = match index_part {
            None => Index::new(),
            Some(ix) => ix
                .split('.')
                .map(|d| d.parse::<u32>().map_err(|_| bad()))
                .collect::<Result<Index, _>>()?,
        };
        Ok(VertexId { path, role, index })
    }
}

impl Serialize for VertexId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for VertexId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn renders_root_and_nested() {
        let a = VertexId::new(&[], Role::InputA, &[0, 1]);
        assert_eq!(a.to_string(), "r/input-A/0.1");
        let e = VertexId::new(&[3, 1], Role::EncA, &[5, 0, 1]);
        assert_eq!(e.to_string(), "r.3.1/enc-A-out/5.0.1");
        let p = VertexId::new(&[7], Role::Product, &[]);
        assert_eq!(p.to_string(), "r.7/product");
    }

    #[test]
    fn rejects_garbage() {
        assert!("x/input-A/0".parse::<VertexId>().is_err());
        assert!(matches!(
            "r/bogus/0".parse::<VertexId>(),
            Err(VertexIdError::UnknownRole(_))
        ));
        assert!("r/product/1/2".parse::<VertexId>().is_err());
        assert!("r.a/product".parse::<VertexId>().is_err());
    }

    fn arb_id() -> impl Strategy<Value = VertexId> {
        (
            prop::collection::vec(1u16..30, 0..6),
            0usize..7,
            prop::collection::vec(0u32..100, 0..4),
        )
            .prop_map(|(p, r, i)| VertexId::new(&p, Role::ALL[r], &i))
    }

    proptest! {
        #[test]
        fn display_parse_roundtrip(id in arb_id()) {
            let s = id.to_string();
            prop_assert_eq!(s.parse::<VertexId>().unwrap(), id);
        }

        #[test]
        fn rendering_is_injective(a in arb_id(), b in arb_id()) {
            prop_assert_eq!(a == b, a.to_string() == b.to_string());
        }
    }
}
