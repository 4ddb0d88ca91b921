//! Topological specifications: slot limits and count bounds.
//!
//! ```text
//! n_interior_max = 4
//! n_interior_min = 1
//!
//! [elements]
//! C = 0 12
//! O = 0 2
//!
//! [ac]
//! C.O.1 = 1
//!
//! [fringe]
//! C[1C] = 0 4
//!
//! [bonds]
//! 3 = 0 0
//! ```
//!
//! A bound is `lower upper` or a single value for both. `[elements]` lists
//! the elements allowed on interior vertices and bounds their total count.
//! Without a `[fringe]` section every fringe class of the registry is
//! allowed; with one, only the listed classes are. `[bonds]` bounds the
//! number of interior edges of each multiplicity.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::chemgraph::{ElementSpec, ElementTable};
use crate::descriptors::{AdjacencyConfiguration, ChemicalSymbol, EdgeConfiguration, FringeClass};

use super::EncodeError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CountBounds {
    pub lower: u32,
    pub upper: u32,
}

impl CountBounds {
    pub fn new(lower: u32, upper: u32) -> Self {
        Self { lower, upper }
    }

    pub fn exactly(v: u32) -> Self {
        Self { lower: v, upper: v }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopologySpec {
    pub n_interior_min: usize,
    pub n_interior_max: usize,
    pub elements: BTreeMap<ElementSpec, CountBounds>,
    pub ac: BTreeMap<AdjacencyConfiguration, CountBounds>,
    pub ec: BTreeMap<EdgeConfiguration, CountBounds>,
    pub ns: BTreeMap<ChemicalSymbol, CountBounds>,
    /// Whitelisted fringe class codes; `None` allows all registry classes.
    pub fringe: Option<BTreeMap<String, CountBounds>>,
    pub bonds: BTreeMap<u8, CountBounds>,
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    Top,
    Elements,
    Ac,
    Ec,
    Ns,
    Fringe,
    Bonds,
}

impl TopologySpec {
    /// A spec with `n_interior_max` slots over `elements`, otherwise unbounded.
    pub fn new(n_interior_max: usize, elements: impl IntoIterator<Item = ElementSpec>) -> Self {
        Self {
            n_interior_min: 1,
            n_interior_max,
            elements: elements
                .into_iter()
                .map(|e| (e, CountBounds::new(0, u32::MAX)))
                .collect(),
            ac: BTreeMap::new(),
            ec: BTreeMap::new(),
            ns: BTreeMap::new(),
            fringe: None,
            bonds: BTreeMap::new(),
        }
    }

    pub fn parse(text: &str, table: &ElementTable) -> Result<Self, EncodeError> {
        let mut spec = Self::new(0, []);
        let mut have_max = false;
        let mut section = Section::Top;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let err = |message: String| EncodeError::Spec {
                line: line_no,
                message,
            };
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if line.starts_with('[') && line.ends_with(']') {
                section = match &line[1..line.len() - 1] {
                    "elements" => Section::Elements,
                    "ac" => Section::Ac,
                    "ec" => Section::Ec,
                    "ns" => Section::Ns,
                    "fringe" => {
                        spec.fringe.get_or_insert_with(BTreeMap::new);
                        Section::Fringe
                    }
                    "bonds" => Section::Bonds,
                    other => return Err(err(format!("unknown section [{other}]"))),
                };
                continue;
            }
            let (key, value) = line
                .rsplit_once('=')
                .ok_or_else(|| err("expected `key = value`".into()))?;
            let (key, value) = (key.trim(), value.trim());
            if section == Section::Top {
                let n: usize = value
                    .parse()
                    .map_err(|_| err(format!("`{value}` is not a count")))?;
                match key {
                    "n_interior_max" => {
                        spec.n_interior_max = n;
                        have_max = true;
                    }
                    "n_interior_min" => spec.n_interior_min = n,
                    _ => return Err(err(format!("unknown key `{key}`"))),
                }
                continue;
            }
            let bounds = parse_bounds(value).ok_or_else(|| err(format!("bad bounds `{value}`")))?;
            let descr = |e: crate::descriptors::DescriptorError| err(e.to_string());
            let duplicate = |fresh: bool| {
                if fresh {
                    Ok(())
                } else {
                    Err(err(format!("`{key}` listed twice")))
                }
            };
            match section {
                Section::Top => unreachable!(),
                Section::Elements => {
                    let e = table.resolve(key).map_err(|e| err(e.to_string()))?.clone();
                    duplicate(spec.elements.insert(e, bounds).is_none())?;
                }
                Section::Ac => {
                    let ac = AdjacencyConfiguration::parse(key, table).map_err(descr)?;
                    if !ac.is_canonical() {
                        return Err(err(format!("`{key}` is not canonical; write `{}`", ac.reversed())));
                    }
                    duplicate(spec.ac.insert(ac, bounds).is_none())?;
                }
                Section::Ec => {
                    let ec = EdgeConfiguration::parse(key, table).map_err(descr)?;
                    if !ec.is_canonical() {
                        return Err(err(format!("`{key}` is not canonical; write `{}`", ec.reversed())));
                    }
                    duplicate(spec.ec.insert(ec, bounds).is_none())?;
                }
                Section::Ns => {
                    let ns = ChemicalSymbol::parse(key, table).map_err(descr)?;
                    duplicate(spec.ns.insert(ns, bounds).is_none())?;
                }
                Section::Fringe => {
                    let class = FringeClass::parse(key, table).map_err(descr)?;
                    let map = spec.fringe.as_mut().expect("created with the section");
                    duplicate(map.insert(class.code().to_string(), bounds).is_none())?;
                }
                Section::Bonds => {
                    let m: u8 = key
                        .parse()
                        .ok()
                        .filter(|m| (1..=3).contains(m))
                        .ok_or_else(|| err(format!("bond multiplicity `{key}` not in 1..3")))?;
                    duplicate(spec.bonds.insert(m, bounds).is_none())?;
                }
            }
        }
        if !have_max {
            return Err(EncodeError::Spec {
                line: 0,
                message: "missing `n_interior_max`".into(),
            });
        }
        spec.validate()?;
        Ok(spec)
    }

    /// Rejects bounds that are provably unsatisfiable before any solve.
    pub fn validate(&self) -> Result<(), EncodeError> {
        let bad = |m: String| Err(EncodeError::Inconsistent(m));
        if self.n_interior_min < 1 || self.n_interior_min > self.n_interior_max {
            return bad(format!(
                "interior slots [{}, {}] must satisfy 1 <= min <= max",
                self.n_interior_min, self.n_interior_max
            ));
        }
        if self.elements.is_empty() {
            return bad("no interior elements allowed".into());
        }
        let all = self
            .elements
            .values()
            .chain(self.ac.values())
            .chain(self.ec.values())
            .chain(self.ns.values())
            .chain(self.bonds.values())
            .chain(self.fringe.iter().flat_map(|f| f.values()));
        for b in all {
            if b.lower > b.upper {
                return bad(format!("lower bound {} exceeds upper bound {}", b.lower, b.upper));
            }
        }
        let edges = self.n_interior_max as u64 - 1;
        let lower_sum = |it: &mut dyn Iterator<Item = &CountBounds>| it.map(|b| u64::from(b.lower)).sum::<u64>();
        if lower_sum(&mut self.ac.values()) > edges
            || lower_sum(&mut self.ec.values()) > edges
            || lower_sum(&mut self.bonds.values()) > edges
        {
            return bad(format!("edge lower bounds exceed the {edges} available interior edges"));
        }
        if lower_sum(&mut self.ns.values()) > self.n_interior_max as u64 {
            return bad("symbol lower bounds exceed the interior slots".into());
        }
        for ac in self.ac.keys() {
            if !self.elements.contains_key(&ac.a) || !self.elements.contains_key(&ac.b) {
                if self.ac[ac].lower > 0 {
                    return bad(format!("ac:{ac} requires an element that is not allowed"));
                }
            }
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "n_interior_max = {}\nn_interior_min = {}\n",
            self.n_interior_max, self.n_interior_min
        );
        fn section<K>(out: &mut String, title: &str, items: impl Iterator<Item = (K, CountBounds)>)
        where
            K: std::fmt::Display,
        {
            let mut first = true;
            for (k, b) in items {
                if first {
                    write!(out, "\n[{title}]\n").unwrap();
                    first = false;
                }
                writeln!(out, "{k} = {} {}", b.lower, b.upper).unwrap();
            }
        }
        section(&mut out, "elements", self.elements.iter().map(|(e, b)| (e.label(), *b)));
        section(&mut out, "ac", self.ac.iter().map(|(k, b)| (k, *b)));
        section(&mut out, "ec", self.ec.iter().map(|(k, b)| (k, *b)));
        section(&mut out, "ns", self.ns.iter().map(|(k, b)| (k, *b)));
        if let Some(f) = &self.fringe {
            out.push_str("\n[fringe]\n");
            for (k, b) in f {
                writeln!(out, "{k} = {} {}", b.lower, b.upper).unwrap();
            }
        }
        section(&mut out, "bonds", self.bonds.iter().map(|(k, b)| (k, *b)));
        out
    }
}

fn parse_bounds(value: &str) -> Option<CountBounds> {
    let nums: Vec<u32> = value
        .split_whitespace()
        .map(str::parse)
        .collect::<Result<_, _>>()
        .ok()?;
    match nums.as_slice() {
        [v] => Some(CountBounds::exactly(*v)),
        [lo, hi] => Some(CountBounds::new(*lo, *hi)),
        _ => None,
    }
}
