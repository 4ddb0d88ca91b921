//! Canonical codes of rooted chemical trees.
//!
//! A node is written as its element label, followed by its children in
//! brackets when it has any: `C[1C;2O]`. Each child carries the
//! multiplicity of the bond to its parent as a leading digit. Children are
//! sorted as strings, so two rooted trees share a code iff they are
//! isomorphic as rooted, labeled trees.

use std::collections::BTreeMap;

use crate::chemgraph::{ChemicalGraph, ElementSpec, ElementTable, FringeTree};

use super::DescriptorError;

/// Code of the subtree at `root`; `children[v]` lists `(child, multiplicity)`.
pub fn tree_code<L: AsRef<str>>(
    labels: &[L],
    children: &[Vec<(usize, u8)>],
    root: usize,
) -> String {
    let mut parts: Vec<String> = children[root]
        .iter()
        .map(|&(c, m)| format!("{}{}", m, tree_code(labels, children, c)))
        .collect();
    let mut code = labels[root].as_ref().to_string();
    if !parts.is_empty() {
        parts.sort();
        code.push('[');
        code.push_str(&parts.join(";"));
        code.push(']');
    }
    code
}

/// Code of a fringe tree of `g`, its interior root included.
pub fn fringe_code(g: &ChemicalGraph, tree: &FringeTree) -> String {
    let n = g.atom_count();
    let labels: Vec<&str> = g.atoms().iter().map(ElementSpec::label).collect();
    let mut children = vec![Vec::new(); n];
    for &(child, parent, bond) in &tree.parent_links {
        children[parent].push((child, g.bond(bond).multiplicity));
    }
    tree_code(&labels, &children, tree.root)
}

/// Canonical code of an acyclic graph: the smallest rooted code over all
/// choices of root. `None` for graphs with a cycle.
pub fn graph_code(g: &ChemicalGraph) -> Option<String> {
    let n = g.atom_count();
    if g.bond_count() + 1 != n {
        return None;
    }
    let labels: Vec<&str> = g.atoms().iter().map(ElementSpec::label).collect();
    (0..n)
        .map(|root| {
            let mut children = vec![Vec::new(); n];
            let mut seen = vec![false; n];
            seen[root] = true;
            let mut stack = vec![root];
            while let Some(v) = stack.pop() {
                for &(w, bond) in g.incident(v) {
                    if !seen[w] {
                        seen[w] = true;
                        children[v].push((w, g.bond(bond).multiplicity));
                        stack.push(w);
                    }
                }
            }
            tree_code(&labels, &children, root)
        })
        .min()
}

/// A fringe-tree class reconstructed from its code. Node 0 is the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FringeClass {
    code: String,
    nodes: Vec<ElementSpec>,
    /// `(child, parent, multiplicity)` in preorder.
    links: Vec<(usize, usize, u8)>,
}

impl FringeClass {
    pub fn parse(code: &str, table: &ElementTable) -> Result<Self, DescriptorError> {
        let mut parser = Parser {
            text: code,
            pos: 0,
            table,
            nodes: Vec::new(),
            links: Vec::new(),
        };
        parser.node()?;
        if parser.pos != code.len() {
            return Err(parser.error("trailing characters"));
        }
        let class = Self {
            code: code.to_string(),
            nodes: parser.nodes,
            links: parser.links,
        };
        if class.canonical_code() != code {
            return Err(DescriptorError::BadKey(format!("{code} (not canonical)")));
        }
        Ok(class)
    }

    fn canonical_code(&self) -> String {
        let labels: Vec<&str> = self.nodes.iter().map(ElementSpec::label).collect();
        tree_code(&labels, &self.children(), 0)
    }

    fn children(&self) -> Vec<Vec<(usize, u8)>> {
        let mut children = vec![Vec::new(); self.nodes.len()];
        for &(c, p, m) in &self.links {
            children[p].push((c, m));
        }
        children
    }

    pub fn code(&self) -> &str {
        &self.code
    }

    pub fn root_element(&self) -> &ElementSpec {
        &self.nodes[0]
    }

    pub fn nodes(&self) -> &[ElementSpec] {
        &self.nodes
    }

    pub fn links(&self) -> &[(usize, usize, u8)] {
        &self.links
    }

    /// Number of exterior vertices.
    pub fn size(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Number of children of the root.
    pub fn root_degree(&self) -> u32 {
        self.links.iter().filter(|l| l.1 == 0).count() as u32
    }

    /// Sum of bond multiplicities between the root and its children.
    pub fn root_bond_sum(&self) -> u32 {
        self.links
            .iter()
            .filter(|l| l.1 == 0)
            .map(|l| u32::from(l.2))
            .sum()
    }

    fn bond_sums(&self) -> Vec<u32> {
        let mut sums = vec![0u32; self.nodes.len()];
        for &(c, p, m) in &self.links {
            sums[c] += u32::from(m);
            sums[p] += u32::from(m);
        }
        sums
    }

    /// Implicit hydrogens on the exterior vertices.
    pub fn exterior_hydrogens(&self) -> u32 {
        let sums = self.bond_sums();
        (1..self.nodes.len())
            .map(|v| u32::from(self.nodes[v].valence()).saturating_sub(sums[v]))
            .sum()
    }

    /// True when every exterior vertex respects its valence.
    pub fn is_valence_feasible(&self) -> bool {
        let sums = self.bond_sums();
        (1..self.nodes.len()).all(|v| sums[v] <= u32::from(self.nodes[v].valence()))
    }

    pub fn exterior_element_counts(&self) -> BTreeMap<ElementSpec, u32> {
        let mut counts = BTreeMap::new();
        for e in &self.nodes[1..] {
            *counts.entry(e.clone()).or_insert(0) += 1;
        }
        counts
    }

    pub fn exterior_mass(&self) -> f64 {
        self.nodes[1..].iter().map(ElementSpec::mass).sum()
    }

    /// Height of every node in the rooted tree.
    fn node_heights(&self) -> Vec<u32> {
        let mut h = vec![0u32; self.nodes.len()];
        // links are in preorder, so children follow parents
        for &(c, p, _) in self.links.iter().rev() {
            h[p] = h[p].max(h[c] + 1);
        }
        h
    }

    pub fn height(&self) -> u32 {
        self.node_heights()[0]
    }

    /// The root reaches height `rho`, which keeps an interior vertex with a
    /// single interior neighbor from being stripped.
    pub fn is_deep(&self, rho: u32) -> bool {
        self.height() >= rho
    }

    /// At least two root children of height `rho - 1`, which keeps a lone
    /// interior vertex from being stripped.
    pub fn is_doubly_deep(&self, rho: u32) -> bool {
        let h = self.node_heights();
        self.links
            .iter()
            .filter(|l| l.1 == 0 && h[l.0] + 1 >= rho)
            .count()
            >= 2
    }
}

struct Parser<'a> {
    text: &'a str,
    pos: usize,
    table: &'a ElementTable,
    nodes: Vec<ElementSpec>,
    links: Vec<(usize, usize, u8)>,
}

impl Parser<'_> {
    fn error(&self, message: &str) -> DescriptorError {
        DescriptorError::BadKey(format!(
            "{} (at offset {}: {})",
            self.text, self.pos, message
        ))
    }

    fn peek(&self) -> Option<u8> {
        self.text.as_bytes().get(self.pos).copied()
    }

    fn node(&mut self) -> Result<usize, DescriptorError> {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if matches!(c, b'[' | b']' | b';') {
                break;
            }
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected element label"));
        }
        let element = self.table.resolve(&self.text[start..self.pos])?.clone();
        let id = self.nodes.len();
        self.nodes.push(element);
        if self.peek() == Some(b'[') {
            self.pos += 1;
            loop {
                let m = match self.peek() {
                    Some(c @ b'1'..=b'3') => c - b'0',
                    _ => return Err(self.error("expected bond multiplicity")),
                };
                self.pos += 1;
                let child_slot = self.links.len();
                self.links.push((usize::MAX, id, m));
                let child = self.node()?;
                self.links[child_slot].0 = child;
                match self.peek() {
                    Some(b';') => self.pos += 1,
                    Some(b']') => {
                        self.pos += 1;
                        break;
                    }
                    _ => return Err(self.error("expected ';' or ']'")),
                }
            }
        }
        Ok(id)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> ElementTable {
        ElementTable::default()
    }

    #[test]
    fn graph_codes_identify_trees_up_to_isomorphism() {
        let t = table();
        let parse = |s: &str| ChemicalGraph::parse(s, &t).unwrap();
        let a = parse("4 3\n1 C\n2 C\n3 O\n4 N\n1 2 1\n2 3 1\n2 4 1\n");
        let b = parse("4 3\n1 N\n2 O\n3 C\n4 C\n3 1 1\n3 2 1\n3 4 1\n");
        let c = parse("4 3\n1 C\n2 C\n3 O\n4 N\n1 2 1\n2 3 1\n3 4 1\n");
        assert_eq!(graph_code(&a), graph_code(&b));
        assert_ne!(graph_code(&a), graph_code(&c));
        let ring = parse("3 3\n1 C\n2 C\n3 C\n1 2 1\n2 3 1\n3 1 1\n");
        assert_eq!(graph_code(&ring), None);
    }

    #[test]
    fn children_are_sorted() {
        let labels = ["C", "O", "C", "N"];
        let children = vec![vec![(1, 2), (2, 1)], vec![], vec![(3, 1)], vec![]];
        assert_eq!(tree_code(&labels, &children, 0), "C[1C[1N];2O]");
        let children = vec![vec![(2, 1), (1, 2)], vec![], vec![(3, 1)], vec![]];
        assert_eq!(tree_code(&labels, &children, 0), "C[1C[1N];2O]");
    }

    #[test]
    fn label_and_multiplicity_change_the_code() {
        let children = vec![vec![(1, 1)], vec![]];
        let a = tree_code(&["C", "C"], &children, 0);
        let b = tree_code(&["C", "O"], &children, 0);
        let c = tree_code(&["C", "C"], &[vec![(1, 2)], vec![]], 0);
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_ne!(b, c);
    }

    #[test]
    fn class_statistics() {
        let f = FringeClass::parse("C[1C;1C[1C];2O]", &table()).unwrap();
        assert_eq!(f.size(), 4);
        assert_eq!(f.root_degree(), 3);
        assert_eq!(f.root_bond_sum(), 4);
        assert_eq!(f.height(), 2);
        assert!(f.is_deep(2));
        assert!(!f.is_doubly_deep(2));
        assert!(f.is_doubly_deep(1));
        // CH2, CH3, CH3, =O
        assert_eq!(f.exterior_hydrogens(), 2 + 3 + 3);
        let counts = f.exterior_element_counts();
        assert_eq!(counts.values().sum::<u32>(), 4);
        assert_eq!(f.code(), "C[1C;1C[1C];2O]");
    }

    #[test]
    fn parse_rejects_malformed_and_unsorted_codes() {
        let t = table();
        assert!(FringeClass::parse("C[1O;1C]", &t).is_err());
        assert!(FringeClass::parse("C[4C]", &t).is_err());
        assert!(FringeClass::parse("C[1C", &t).is_err());
        assert!(FringeClass::parse("C]", &t).is_err());
        assert!(FringeClass::parse("Xx[1C]", &t).is_err());
        assert!(FringeClass::parse("S(6)[2O;2O]", &t).is_ok());
    }
}
