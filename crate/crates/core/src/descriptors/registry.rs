//! The descriptor index space and the feature function.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::chemgraph::{rank, ChemicalGraph, ElementSpec, ElementTable, TwoLayerDecomposition};

use super::config::{AdjacencyConfiguration, ChemicalSymbol, EdgeConfiguration};
use super::count::{
    count_adjacency_configs, count_chemical_symbols, count_edge_configs, count_fringe_classes,
};
use super::fringe::FringeClass;
use super::DescriptorError;

/// One coordinate of the feature vector. The derived order is the
/// canonical registry order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Descriptor {
    /// Number of non-hydrogen atoms.
    AtomCount,
    ElementCount(ElementSpec),
    Rank,
    InteriorCount,
    InteriorEdgeCount,
    Adjacency(AdjacencyConfiguration),
    Edge(EdgeConfiguration),
    Symbol(ChemicalSymbol),
    Fringe(String),
    /// Total mass, implicit hydrogens included, per non-hydrogen atom.
    MassAverage,
    ImplicitHydrogens,
}

impl Descriptor {
    pub fn id(&self) -> String {
        match self {
            Descriptor::AtomCount => "n_atoms".into(),
            Descriptor::ElementCount(e) => format!("count:{}", e.label()),
            Descriptor::Rank => "rank".into(),
            Descriptor::InteriorCount => "n_int".into(),
            Descriptor::InteriorEdgeCount => "n_int_edges".into(),
            Descriptor::Adjacency(ac) => format!("ac:{ac}"),
            Descriptor::Edge(ec) => format!("ec:{ec}"),
            Descriptor::Symbol(cs) => format!("ns:{cs}"),
            Descriptor::Fringe(code) => format!("fc:{code}"),
            Descriptor::MassAverage => "mass_avg".into(),
            Descriptor::ImplicitHydrogens => "n_h".into(),
        }
    }

    pub fn parse(id: &str, table: &ElementTable) -> Result<Self, DescriptorError> {
        let d = match id {
            "n_atoms" => Descriptor::AtomCount,
            "rank" => Descriptor::Rank,
            "n_int" => Descriptor::InteriorCount,
            "n_int_edges" => Descriptor::InteriorEdgeCount,
            "mass_avg" => Descriptor::MassAverage,
            "n_h" => Descriptor::ImplicitHydrogens,
            _ => {
                let (kind, key) = id
                    .split_once(':')
                    .ok_or_else(|| DescriptorError::BadKey(id.to_string()))?;
                match kind {
                    "count" => Descriptor::ElementCount(table.resolve(key)?.clone()),
                    "ac" => Descriptor::Adjacency(AdjacencyConfiguration::parse(key, table)?),
                    "ec" => Descriptor::Edge(EdgeConfiguration::parse(key, table)?),
                    "ns" => Descriptor::Symbol(ChemicalSymbol::parse(key, table)?),
                    "fc" => Descriptor::Fringe(FringeClass::parse(key, table)?.code().to_string()),
                    _ => return Err(DescriptorError::BadKey(id.to_string())),
                }
            }
        };
        Ok(d)
    }

    /// Integer-valued descriptors; only the mass average is fractional.
    pub fn is_count(&self) -> bool {
        !matches!(self, Descriptor::MassAverage)
    }
}

impl fmt::Display for Descriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

/// Ordered descriptor list for a fixed branch parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct DescriptorRegistry {
    rho: u32,
    hydrogen_mass: f64,
    descriptors: Vec<Descriptor>,
    index: HashMap<Descriptor, usize>,
}

impl DescriptorRegistry {
    pub fn new(
        rho: u32,
        hydrogen_mass: f64,
        descriptors: Vec<Descriptor>,
    ) -> Result<Self, DescriptorError> {
        let mut index = HashMap::new();
        for (i, d) in descriptors.iter().enumerate() {
            if index.insert(d.clone(), i).is_some() {
                return Err(DescriptorError::DuplicateDescriptor(d.id()));
            }
        }
        Ok(Self {
            rho,
            hydrogen_mass,
            descriptors,
            index,
        })
    }

    /// Registry of every configuration and class occurring in `dataset`.
    pub fn build(
        dataset: &[ChemicalGraph],
        rho: u32,
        table: &ElementTable,
    ) -> Result<Self, DescriptorError> {
        if dataset.is_empty() {
            return Err(DescriptorError::EmptyDataset);
        }
        let mut set = BTreeSet::from([
            Descriptor::AtomCount,
            Descriptor::Rank,
            Descriptor::InteriorCount,
            Descriptor::InteriorEdgeCount,
            Descriptor::MassAverage,
            Descriptor::ImplicitHydrogens,
        ]);
        for g in dataset {
            let d = TwoLayerDecomposition::new(g, rho)?;
            let sg = d.graph();
            set.extend(sg.atoms().iter().cloned().map(Descriptor::ElementCount));
            set.extend(
                count_adjacency_configs(&d)
                    .into_keys()
                    .map(Descriptor::Adjacency),
            );
            set.extend(count_edge_configs(&d).into_keys().map(Descriptor::Edge));
            set.extend(
                count_chemical_symbols(&d)
                    .into_keys()
                    .map(Descriptor::Symbol),
            );
            set.extend(count_fringe_classes(&d).into_keys().map(Descriptor::Fringe));
        }
        Self::new(rho, table.hydrogen()?.mass(), set.into_iter().collect())
    }

    pub fn rho(&self) -> u32 {
        self.rho
    }

    pub fn hydrogen_mass(&self) -> f64 {
        self.hydrogen_mass
    }

    /// K, the feature dimension.
    pub fn len(&self) -> usize {
        self.descriptors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.descriptors.is_empty()
    }

    pub fn descriptors(&self) -> &[Descriptor] {
        &self.descriptors
    }

    pub fn ids(&self) -> Vec<String> {
        self.descriptors.iter().map(Descriptor::id).collect()
    }

    pub fn index_of(&self, d: &Descriptor) -> Option<usize> {
        self.index.get(d).copied()
    }

    pub fn index_of_id(&self, id: &str) -> Option<usize> {
        self.descriptors.iter().position(|d| d.id() == id)
    }

    /// |Γ|, the number of edge-configurations.
    pub fn edge_configuration_count(&self) -> usize {
        self.descriptors
            .iter()
            .filter(|d| matches!(d, Descriptor::Edge(_)))
            .count()
    }

    /// |F|, the number of fringe-tree classes.
    pub fn fringe_class_count(&self) -> usize {
        self.descriptors
            .iter()
            .filter(|d| matches!(d, Descriptor::Fringe(_)))
            .count()
    }

    pub fn fringe_classes(
        &self,
        table: &ElementTable,
    ) -> Result<Vec<FringeClass>, DescriptorError> {
        self.descriptors
            .iter()
            .filter_map(|d| match d {
                Descriptor::Fringe(code) => Some(FringeClass::parse(code, table)),
                _ => None,
            })
            .collect()
    }

    /// The feature vector of `g` in registry order.
    pub fn featurize(&self, g: &ChemicalGraph, rho: u32) -> Result<Vec<f64>, DescriptorError> {
        if rho != self.rho {
            return Err(DescriptorError::RhoMismatch {
                registry: self.rho,
                requested: rho,
            });
        }
        let d = TwoLayerDecomposition::new(g, rho)?;
        let sg = d.graph();
        let n = sg.atom_count();
        let hydrogens: u32 = (0..n).map(|v| sg.implicit_hydrogens(v)).sum();
        let mut element_counts: BTreeMap<&ElementSpec, u32> = BTreeMap::new();
        for e in sg.atoms() {
            *element_counts.entry(e).or_insert(0) += 1;
        }
        // summed per element so the value does not depend on atom order
        let mass: f64 = element_counts
            .iter()
            .map(|(e, &c)| e.mass() * f64::from(c))
            .sum::<f64>()
            + self.hydrogen_mass * f64::from(hydrogens);

        let mut values: BTreeMap<Descriptor, f64> = BTreeMap::new();
        values.insert(Descriptor::AtomCount, n as f64);
        values.insert(Descriptor::Rank, rank(sg) as f64);
        values.insert(Descriptor::InteriorCount, d.interior().len() as f64);
        values.insert(
            Descriptor::InteriorEdgeCount,
            d.interior_edges().len() as f64,
        );
        values.insert(Descriptor::MassAverage, mass / n as f64);
        values.insert(Descriptor::ImplicitHydrogens, f64::from(hydrogens));
        for (e, c) in element_counts {
            values.insert(Descriptor::ElementCount(e.clone()), f64::from(c));
        }
        let counted = count_adjacency_configs(&d)
            .into_iter()
            .map(|(k, c)| (Descriptor::Adjacency(k), c))
            .chain(
                count_edge_configs(&d)
                    .into_iter()
                    .map(|(k, c)| (Descriptor::Edge(k), c)),
            )
            .chain(
                count_chemical_symbols(&d)
                    .into_iter()
                    .map(|(k, c)| (Descriptor::Symbol(k), c)),
            )
            .chain(
                count_fringe_classes(&d)
                    .into_iter()
                    .map(|(k, c)| (Descriptor::Fringe(k), c)),
            );
        for (k, c) in counted {
            values.insert(k, f64::from(c));
        }

        let unknown: Vec<String> = values
            .keys()
            .filter(|k| !self.index.contains_key(k))
            .map(Descriptor::id)
            .collect();
        if !unknown.is_empty() {
            return Err(DescriptorError::Unknown(unknown));
        }
        let mut x = vec![0.0; self.len()];
        for (k, v) in values {
            x[self.index[&k]] = v;
        }
        Ok(x)
    }

    /// ```text
    /// rho 2
    /// hydrogen_mass 1.008
    /// n_atoms
    /// count:C
    /// ...
    /// ```
    pub fn to_text(&self) -> String {
        let mut out = format!("rho {}\nhydrogen_mass {}\n", self.rho, self.hydrogen_mass);
        for d in &self.descriptors {
            out.push_str(&d.id());
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str, table: &ElementTable) -> Result<Self, DescriptorError> {
        let mut rho = None;
        let mut hydrogen_mass = None;
        let mut descriptors = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |message: String| DescriptorError::Registry {
                line: i + 1,
                message,
            };
            if let Some(v) = line.strip_prefix("rho ") {
                rho = Some(v.trim().parse::<u32>().map_err(|e| bad(e.to_string()))?);
            } else if let Some(v) = line.strip_prefix("hydrogen_mass ") {
                hydrogen_mass = Some(v.trim().parse::<f64>().map_err(|e| bad(e.to_string()))?);
            } else {
                descriptors.push(Descriptor::parse(line, table).map_err(|e| bad(e.to_string()))?);
            }
        }
        let missing = |what: &str| DescriptorError::Registry {
            line: 0,
            message: format!("missing `{what}` header"),
        };
        Self::new(
            rho.ok_or_else(|| missing("rho"))?,
            hydrogen_mass.ok_or_else(|| missing("hydrogen_mass"))?,
            descriptors,
        )
    }
}
