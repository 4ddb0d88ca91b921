//! Configuration keys of interior edges and vertices.

use std::fmt;

use crate::chemgraph::{ElementSpec, ElementTable};

use super::DescriptorError;

/// `(a, b, m)`: the element pair and multiplicity of an interior edge.
/// Canonical when `a <= b`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AdjacencyConfiguration {
    pub a: ElementSpec,
    pub b: ElementSpec,
    pub m: u8,
}

impl AdjacencyConfiguration {
    pub fn canonical(a: ElementSpec, b: ElementSpec, m: u8) -> Self {
        if a <= b {
            Self { a, b, m }
        } else {
            Self { a: b, b: a, m }
        }
    }

    /// ν̄ = (b, a, m).
    pub fn reversed(&self) -> Self {
        Self {
            a: self.b.clone(),
            b: self.a.clone(),
            m: self.m,
        }
    }

    pub fn is_canonical(&self) -> bool {
        self.a <= self.b
    }

    /// `C.O.1`
    pub fn key(&self) -> String {
        format!("{}.{}.{}", self.a.label(), self.b.label(), self.m)
    }

    pub fn parse(key: &str, table: &ElementTable) -> Result<Self, DescriptorError> {
        let parts: Vec<&str> = key.split('.').collect();
        if parts.len() != 3 {
            return Err(DescriptorError::BadKey(key.to_string()));
        }
        let a = table.resolve(parts[0])?.clone();
        let b = table.resolve(parts[1])?.clone();
        let m = parse_multiplicity(parts[2], key)?;
        Ok(Self { a, b, m })
    }
}

impl fmt::Display for AdjacencyConfiguration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.key())
    }
}

/// `a d`: an element together with its degree in the hydrogen-suppressed
/// graph.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ChemicalSymbol {
    pub element: ElementSpec,
    pub degree: u8,
}

impl ChemicalSymbol {
    /// `C2`, `S(6)3`
    pub fn key(&self) -> String {
        format!("{}{}", self.element.label(), self.degree)
    }

    pub fn parse(key: &str, table: &ElementTable) -> Result<Self, DescriptorError> {
        let split = key
            .char_indices()
            .rev()
            .take_while(|(_, c)| c.is_ascii_digit())
            .last()
            .map(|(i, _)| i)
            .ok_or_else(|| DescriptorError::BadKey(key.to_string()))?;
        let degree: u8 = key[split..]
            .parse()
            .map_err(|_| DescriptorError::BadKey(key.to_string()))?;
        if !(1..=6).contains(&degree) {
            return Err(DescriptorError::BadKey(key.to_string()));
        }
        Ok(Self {
            element: table.resolve(&key[..split])?.clone(),
            degree,
        })
    }
}

impl fmt::Display for ChemicalSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.key())
    }
}

/// `(μ, μ', m)`: the chemical symbols of both ends and the multiplicity of
/// an interior edge. Canonical when `μ <= μ'`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeConfiguration {
    pub mu: ChemicalSymbol,
    pub mu_prime: ChemicalSymbol,
    pub m: u8,
}

impl EdgeConfiguration {
    pub fn canonical(mu: ChemicalSymbol, mu_prime: ChemicalSymbol, m: u8) -> Self {
        if mu <= mu_prime {
            Self { mu, mu_prime, m }
        } else {
            Self {
                mu: mu_prime,
                mu_prime: mu,
                m,
            }
        }
    }

    pub fn reversed(&self) -> Self {
        Self {
            mu: self.mu_prime.clone(),
            mu_prime: self.mu.clone(),
            m: self.m,
        }
    }

    pub fn is_canonical(&self) -> bool {
        self.mu <= self.mu_prime
    }

    /// The adjacency-configuration of `(a d, b d', m)` is `(a, b, m)`;
    /// orientation is kept.
    pub fn adjacency(&self) -> AdjacencyConfiguration {
        AdjacencyConfiguration {
            a: self.mu.element.clone(),
            b: self.mu_prime.element.clone(),
            m: self.m,
        }
    }

    /// `C2.O1.1`
    pub fn key(&self) -> String {
        format!("{}.{}.{}", self.mu.key(), self.mu_prime.key(), self.m)
    }

    pub fn parse(key: &str, table: &ElementTable) -> Result<Self, DescriptorError> {
        let parts: Vec<&str> = key.split('.').collect();
        if parts.len() != 3 {
            return Err(DescriptorError::BadKey(key.to_string()));
        }
        Ok(Self {
            mu: ChemicalSymbol::parse(parts[0], table)?,
            mu_prime: ChemicalSymbol::parse(parts[1], table)?,
            m: parse_multiplicity(parts[2], key)?,
        })
    }
}

impl fmt::Display for EdgeConfiguration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.key())
    }
}

fn parse_multiplicity(text: &str, key: &str) -> Result<u8, DescriptorError> {
    match text.parse::<u8>() {
        Ok(m) if (1..=3).contains(&m) => Ok(m),
        _ => Err(DescriptorError::BadKey(key.to_string())),
    }
}
