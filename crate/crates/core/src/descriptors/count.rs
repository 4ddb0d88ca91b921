//! Configuration counting over a two-layered decomposition.

use std::collections::BTreeMap;

use crate::chemgraph::TwoLayerDecomposition;

use super::config::{AdjacencyConfiguration, ChemicalSymbol, EdgeConfiguration};
use super::fringe::fringe_code;

pub fn chemical_symbol(d: &TwoLayerDecomposition, v: usize) -> ChemicalSymbol {
    let g = d.graph();
    ChemicalSymbol {
        element: g.element(v).clone(),
        degree: g.degree(v) as u8,
    }
}

pub fn count_adjacency_configs(d: &TwoLayerDecomposition) -> BTreeMap<AdjacencyConfiguration, u32> {
    let g = d.graph();
    let mut counts = BTreeMap::new();
    for &e in d.interior_edges() {
        let b = g.bond(e);
        let key = AdjacencyConfiguration::canonical(
            g.element(b.u).clone(),
            g.element(b.v).clone(),
            b.multiplicity,
        );
        *counts.entry(key).or_insert(0) += 1;
    }
    counts
}

pub fn count_edge_configs(d: &TwoLayerDecomposition) -> BTreeMap<EdgeConfiguration, u32> {
    let g = d.graph();
    let mut counts = BTreeMap::new();
    for &e in d.interior_edges() {
        let b = g.bond(e);
        let key = EdgeConfiguration::canonical(
            chemical_symbol(d, b.u),
            chemical_symbol(d, b.v),
            b.multiplicity,
        );
        *counts.entry(key).or_insert(0) += 1;
    }
    counts
}

pub fn count_chemical_symbols(d: &TwoLayerDecomposition) -> BTreeMap<ChemicalSymbol, u32> {
    let mut counts = BTreeMap::new();
    for &v in d.interior() {
        *counts.entry(chemical_symbol(d, v)).or_insert(0) += 1;
    }
    counts
}

/// Fringe trees grouped by canonical code.
pub fn count_fringe_classes(d: &TwoLayerDecomposition) -> BTreeMap<String, u32> {
    let mut counts = BTreeMap::new();
    for t in d.fringe_trees() {
        *counts.entry(fringe_code(d.graph(), t)).or_insert(0) += 1;
    }
    counts
}
