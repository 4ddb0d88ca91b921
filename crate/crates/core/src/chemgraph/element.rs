//! Chemical elements and element tables.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::hash::{Hash, Hasher};

use super::GraphError;

/// A chemical element with a fixed valence.
///
/// Elements that occur with several valences (sulfur, for example) are
/// distinct `ElementSpec`s and are labeled `S(2)`, `S(4)`, `S(6)`.
/// Identity and ordering use `(symbol, valence)` only; the mass is data.
#[derive(Debug, Clone)]
pub struct ElementSpec {
    symbol: String,
    valence: u8,
    mass: f64,
    label: String,
}

impl ElementSpec {
    /// Creates an element whose label carries an explicit valence suffix.
    pub fn new(symbol: &str, valence: u8, mass: f64) -> Result<Self, GraphError> {
        Self::with_label(symbol, valence, mass, format!("{symbol}({valence})"))
    }

    fn with_label(symbol: &str, valence: u8, mass: f64, label: String) -> Result<Self, GraphError> {
        if symbol.is_empty() || !symbol.chars().all(|c| c.is_ascii_alphabetic()) {
            return Err(GraphError::InvalidElement(format!("bad symbol {symbol:?}")));
        }
        if !(1..=6).contains(&valence) {
            return Err(GraphError::InvalidElement(format!(
                "valence of {symbol} must lie in [1,6], got {valence}"
            )));
        }
        if !(mass.is_finite() && mass >= 0.0) {
            return Err(GraphError::InvalidElement(format!(
                "bad mass for {symbol}: {mass}"
            )));
        }
        Ok(Self {
            symbol: symbol.to_string(),
            valence,
            mass,
            label,
        })
    }

    pub fn symbol(&self) -> &str {
        &self.symbol
    }

    pub fn valence(&self) -> u8 {
        self.valence
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// `C` for single-valence elements, `S(6)` otherwise.
    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_hydrogen(&self) -> bool {
        self.symbol == "H"
    }
}

impl PartialEq for ElementSpec {
    fn eq(&self, other: &Self) -> bool {
        self.symbol == other.symbol && self.valence == other.valence
    }
}

impl Eq for ElementSpec {}

impl Hash for ElementSpec {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.symbol.hash(state);
        self.valence.hash(state);
    }
}

impl PartialOrd for ElementSpec {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ElementSpec {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.symbol.as_str(), self.valence).cmp(&(other.symbol.as_str(), other.valence))
    }
}

impl fmt::Display for ElementSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

/// The element set Λ together with valences and masses.
#[derive(Debug, Clone)]
pub struct ElementTable {
    by_symbol: BTreeMap<String, Vec<ElementSpec>>,
}

const BUILTIN: &[(&str, u8, f64)] = &[
    ("H", 1, 1.008),
    ("B", 3, 10.81),
    ("C", 4, 12.011),
    ("N", 3, 14.007),
    ("O", 2, 15.999),
    ("F", 1, 18.998),
    ("Si", 4, 28.085),
    ("P", 5, 30.974),
    ("S", 2, 32.06),
    ("S", 4, 32.06),
    ("S", 6, 32.06),
    ("Cl", 1, 35.45),
    ("Br", 1, 79.904),
    ("I", 1, 126.904),
];

impl Default for ElementTable {
    fn default() -> Self {
        Self::from_entries(BUILTIN.iter().map(|&(s, v, m)| (s.to_string(), v, m)))
            .expect("builtin element table is valid")
    }
}

impl ElementTable {
    /// Builds a table from `(symbol, valence, mass)` triples.
    pub fn from_entries<I>(entries: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (String, u8, f64)>,
    {
        let mut raw: BTreeMap<String, Vec<(u8, f64)>> = BTreeMap::new();
        for (symbol, valence, mass) in entries {
            let slot = raw.entry(symbol.clone()).or_default();
            if slot.iter().any(|&(v, _)| v == valence) {
                return Err(GraphError::InvalidElement(format!(
                    "duplicate element {symbol}({valence})"
                )));
            }
            slot.push((valence, mass));
        }
        let mut by_symbol = BTreeMap::new();
        for (symbol, mut variants) in raw {
            variants.sort_by_key(|&(v, _)| v);
            let single = variants.len() == 1;
            let specs = variants
                .into_iter()
                .map(|(valence, mass)| {
                    let label = if single {
                        symbol.clone()
                    } else {
                        format!("{symbol}({valence})")
                    };
                    ElementSpec::with_label(&symbol, valence, mass, label)
                })
                .collect::<Result<Vec<_>, _>>()?;
            by_symbol.insert(symbol, specs);
        }
        Ok(Self { by_symbol })
    }

    /// Parses an element table file: one `symbol valence mass` per line.
    pub fn parse(text: &str) -> Result<Self, GraphError> {
        let mut entries = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = strip_comment(line);
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let err = |msg: &str| GraphError::Syntax {
                line: lineno + 1,
                column: 1,
                message: msg.to_string(),
            };
            if fields.len() != 3 {
                return Err(err("expected `symbol valence mass`"));
            }
            let valence: u8 = fields[1].parse().map_err(|_| err("bad valence"))?;
            let mass: f64 = fields[2].parse().map_err(|_| err("bad mass"))?;
            entries.push((fields[0].to_string(), valence, mass));
        }
        Self::from_entries(entries)
    }

    /// Looks up an element. Without a valence the symbol must be unambiguous.
    pub fn get(&self, symbol: &str, valence: Option<u8>) -> Result<&ElementSpec, GraphError> {
        let variants = self
            .by_symbol
            .get(symbol)
            .ok_or_else(|| GraphError::UnknownElement(symbol.to_string()))?;
        match valence {
            Some(v) => variants
                .iter()
                .find(|e| e.valence == v)
                .ok_or_else(|| GraphError::UnknownElement(format!("{symbol}({v})"))),
            None if variants.len() == 1 => Ok(&variants[0]),
            None => Err(GraphError::UnknownElement(format!(
                "{symbol} has several valences; write e.g. {symbol}({})",
                variants[0].valence
            ))),
        }
    }

    /// Resolves a label as written in graph files: `C`, `S(6)`.
    pub fn resolve(&self, label: &str) -> Result<&ElementSpec, GraphError> {
        match label.find('(') {
            Some(open) if label.ends_with(')') => {
                let valence: u8 = label[open + 1..label.len() - 1]
                    .parse()
                    .map_err(|_| GraphError::UnknownElement(label.to_string()))?;
                self.get(&label[..open], Some(valence))
            }
            Some(_) => Err(GraphError::UnknownElement(label.to_string())),
            None => self.get(label, None),
        }
    }

    pub fn hydrogen(&self) -> Result<&ElementSpec, GraphError> {
        self.get("H", Some(1))
    }

    pub fn iter(&self) -> impl Iterator<Item = &ElementSpec> {
        self.by_symbol.values().flatten()
    }
}

pub(crate) fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(pos) => &line[..pos],
        None => line,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_labels() {
        let table = ElementTable::default();
        assert_eq!(table.resolve("C").unwrap().label(), "C");
        assert_eq!(table.resolve("S(6)").unwrap().label(), "S(6)");
        assert_eq!(table.resolve("S(6)").unwrap().valence(), 6);
        assert!(table.resolve("S").is_err());
        assert!(table.resolve("Xx").is_err());
    }

    #[test]
    fn parse_table_file() {
        let table = ElementTable::parse("# symbol valence mass\nC 4 12\nS 2 32\nS 6 32\n").unwrap();
        assert_eq!(table.resolve("C").unwrap().mass(), 12.0);
        assert_eq!(table.resolve("S(2)").unwrap().label(), "S(2)");
        assert!(ElementTable::parse("C 4 12\nC 4 13\n").is_err());
        assert!(ElementTable::parse("C 9 12\n").is_err());
    }

    #[test]
    fn ordering_is_symbol_then_valence() {
        let table = ElementTable::default();
        let c = table.resolve("C").unwrap();
        let n = table.resolve("N").unwrap();
        let s2 = table.resolve("S(2)").unwrap();
        let s6 = table.resolve("S(6)").unwrap();
        assert!(c < n && n < s2 && s2 < s6);
    }
}
