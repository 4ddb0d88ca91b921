use std::collections::{HashSet, VecDeque};
use std::fmt::Write as _;

use super::element::{strip_comment, ElementSpec, ElementTable};
use super::GraphError;

/// A bond between atoms `u < v` with multiplicity 1..=3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Bond {
    pub u: usize,
    pub v: usize,
    pub multiplicity: u8,
}

impl Bond {
    pub fn new(a: usize, b: usize, multiplicity: u8) -> Self {
        Self {
            u: a.min(b),
            v: a.max(b),
            multiplicity,
        }
    }

    pub fn other(&self, w: usize) -> usize {
        if w == self.u {
            self.v
        } else {
            self.u
        }
    }
}

/// A chemical graph `(H, α, β)`: a simple connected graph with element
/// labels on vertices and bond multiplicities on edges.
///
/// Hydrogens may be present as vertices or left implicit; an implicit
/// hydrogen count is always `val(α(v)) − β_C(v)`.
#[derive(Debug, Clone)]
pub struct ChemicalGraph {
    atoms: Vec<ElementSpec>,
    bonds: Vec<Bond>,
    adjacency: Vec<Vec<(usize, usize)>>,
}

impl ChemicalGraph {
    /// Builds and validates a graph.
    pub fn new(atoms: Vec<ElementSpec>, bonds: Vec<Bond>) -> Result<Self, GraphError> {
        if atoms.is_empty() {
            return Err(GraphError::Empty);
        }
        let n = atoms.len();
        let mut adjacency = vec![Vec::new(); n];
        let mut seen = HashSet::new();
        let mut normalized = Vec::with_capacity(bonds.len());
        for (idx, bond) in bonds.into_iter().enumerate() {
            let bond = Bond::new(bond.u, bond.v, bond.multiplicity);
            if bond.v >= n {
                return Err(GraphError::VertexOutOfRange {
                    vertex: bond.v,
                    count: n,
                });
            }
            if bond.u == bond.v {
                return Err(GraphError::SelfLoop(bond.u));
            }
            if !(1..=3).contains(&bond.multiplicity) {
                return Err(GraphError::BadMultiplicity(bond.multiplicity));
            }
            if !seen.insert((bond.u, bond.v)) {
                return Err(GraphError::DuplicateEdge(bond.u, bond.v));
            }
            adjacency[bond.u].push((bond.v, idx));
            adjacency[bond.v].push((bond.u, idx));
            normalized.push(bond);
        }
        let graph = Self {
            atoms,
            bonds: normalized,
            adjacency,
        };
        for v in 0..n {
            let sum = graph.bond_sum(v);
            if sum > u32::from(graph.atoms[v].valence()) {
                return Err(GraphError::Valence {
                    vertex: v,
                    element: graph.atoms[v].label().to_string(),
                    bond_sum: sum,
                    valence: graph.atoms[v].valence(),
                });
            }
        }
        if !graph.is_connected() {
            return Err(GraphError::Disconnected);
        }
        Ok(graph)
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn bond_count(&self) -> usize {
        self.bonds.len()
    }

    pub fn element(&self, v: usize) -> &ElementSpec {
        &self.atoms[v]
    }

    pub fn atoms(&self) -> &[ElementSpec] {
        &self.atoms
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    pub fn bond(&self, idx: usize) -> Bond {
        self.bonds[idx]
    }

    /// `(neighbor, bond index)` pairs of `v`.
    pub fn incident(&self, v: usize) -> &[(usize, usize)] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn neighbor_lists(&self) -> Vec<Vec<usize>> {
        self.adjacency
            .iter()
            .map(|nbrs| nbrs.iter().map(|&(w, _)| w).collect())
            .collect()
    }

    /// β_C(v): the sum of multiplicities of bonds at `v`.
    pub fn bond_sum(&self, v: usize) -> u32 {
        self.adjacency[v]
            .iter()
            .map(|&(_, b)| u32::from(self.bonds[b].multiplicity))
            .sum()
    }

    /// β_C(v) − val(α(v)). Zero for a saturated vertex of a
    /// hydrogen-complete graph.
    pub fn electron_degree(&self, v: usize) -> i32 {
        self.bond_sum(v) as i32 - i32::from(self.atoms[v].valence())
    }

    /// Hydrogens needed to saturate `v`.
    pub fn implicit_hydrogens(&self, v: usize) -> u32 {
        u32::from(self.atoms[v].valence()) - self.bond_sum(v)
    }

    pub fn has_hydrogen_vertices(&self) -> bool {
        self.atoms.iter().any(ElementSpec::is_hydrogen)
    }

    fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.atoms.len()];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = queue.pop_front() {
            for &(w, _) in &self.adjacency[v] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    queue.push_back(w);
                }
            }
        }
        count == self.atoms.len()
    }

    /// Returns a copy with vertices renumbered: vertex `v` becomes `perm[v]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut atoms = self.atoms.clone();
        for (v, &p) in perm.iter().enumerate() {
            atoms[p] = self.atoms[v].clone();
        }
        let bonds = self
            .bonds
            .iter()
            .map(|b| Bond::new(perm[b.u], perm[b.v], b.multiplicity))
            .collect();
        Self::new(atoms, bonds).expect("permutation preserves validity")
    }

    /// Removes hydrogen vertices, recording how many each remaining vertex lost.
    pub fn hydrogen_suppress(&self) -> Result<SuppressedGraph, GraphError> {
        let keep: Vec<usize> = (0..self.atom_count())
            .filter(|&v| !self.atoms[v].is_hydrogen())
            .collect();
        if keep.is_empty() {
            return Err(GraphError::OnlyHydrogen);
        }
        let mut new_index = vec![usize::MAX; self.atom_count()];
        for (i, &v) in keep.iter().enumerate() {
            new_index[v] = i;
        }
        let mut removed = vec![0u32; keep.len()];
        let mut bonds = Vec::new();
        for b in &self.bonds {
            match (self.atoms[b.u].is_hydrogen(), self.atoms[b.v].is_hydrogen()) {
                (false, false) => {
                    bonds.push(Bond::new(new_index[b.u], new_index[b.v], b.multiplicity))
                }
                (true, false) => removed[new_index[b.v]] += 1,
                (false, true) => removed[new_index[b.u]] += 1,
                (true, true) => {}
            }
        }
        let atoms = keep.iter().map(|&v| self.atoms[v].clone()).collect();
        let graph = ChemicalGraph::new(atoms, bonds)?;
        Ok(SuppressedGraph {
            graph,
            removed_hydrogens: removed,
        })
    }

    /// The canonical form used throughout: hydrogen-suppressed, with
    /// hydrogens implicit.
    pub fn suppressed(&self) -> Result<ChemicalGraph, GraphError> {
        if self.has_hydrogen_vertices() {
            Ok(self.hydrogen_suppress()?.graph)
        } else {
            Ok(self.clone())
        }
    }

    /// Parses the line-oriented graph format.
    ///
    /// ```text
    /// # ethanol
    /// 3 2
    /// 1 C
    /// 2 C
    /// 3 O
    /// 1 2 1
    /// 2 3 1
    /// ```
    ///
    /// Vertex indices are 1-based. Hydrogen vertices, if present, are
    /// suppressed in the returned graph.
    pub fn parse(text: &str, table: &ElementTable) -> Result<Self, GraphError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, strip_comment(l)))
            .filter(|(_, l)| !l.trim().is_empty());

        let (lineno, header) = lines.next().ok_or(GraphError::Syntax {
            line: 1,
            column: 1,
            message: "missing `n m` header".into(),
        })?;
        let header_fields = fields(header);
        if header_fields.len() != 2 {
            return Err(syntax(lineno, 1, "header must be `n m`"));
        }
        let n = parse_field::<usize>(lineno, header_fields[0])?;
        let m = parse_field::<usize>(lineno, header_fields[1])?;

        let mut atoms: Vec<Option<ElementSpec>> = vec![None; n];
        for _ in 0..n {
            let (lineno, line) = lines
                .next()
                .ok_or_else(|| syntax(lineno, 1, "unexpected end of file in vertex list"))?;
            let f = fields(line);
            if f.len() != 2 {
                return Err(syntax(lineno, 1, "vertex line must be `index element`"));
            }
            let index = parse_field::<usize>(lineno, f[0])?;
            if index == 0 || index > n {
                return Err(syntax(
                    lineno,
                    f[0].1,
                    &format!("vertex index {} out of range", index),
                ));
            }
            if atoms[index - 1].is_some() {
                return Err(syntax(
                    lineno,
                    f[0].1,
                    &format!("vertex {index} declared twice"),
                ));
            }
            let element = table
                .resolve(f[1].0)
                .map_err(|e| syntax(lineno, f[1].1, &e.to_string()))?;
            atoms[index - 1] = Some(element.clone());
        }
        let atoms: Vec<ElementSpec> = atoms
            .into_iter()
            .map(|a| a.expect("all declared"))
            .collect();

        let mut bonds = Vec::with_capacity(m);
        for _ in 0..m {
            let (lineno, line) = lines
                .next()
                .ok_or_else(|| syntax(lineno, 1, "unexpected end of file in edge list"))?;
            let f = fields(line);
            if f.len() != 3 {
                return Err(syntax(lineno, 1, "edge line must be `u v multiplicity`"));
            }
            let u = parse_field::<usize>(lineno, f[0])?;
            let v = parse_field::<usize>(lineno, f[1])?;
            let mult = parse_field::<u8>(lineno, f[2])?;
            for (x, col) in [(u, f[0].1), (v, f[1].1)] {
                if x == 0 || x > n {
                    return Err(syntax(
                        lineno,
                        col,
                        &format!("vertex index {x} out of range"),
                    ));
                }
            }
            bonds.push(Bond {
                u: u - 1,
                v: v - 1,
                multiplicity: mult,
            });
        }
        if let Some((lineno, _)) = lines.next() {
            return Err(syntax(lineno, 1, "trailing content after edge list"));
        }
        ChemicalGraph::new(atoms, bonds)?.suppressed()
    }

    /// Writes the graph in the format read by [`ChemicalGraph::parse`].
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {}", self.atom_count(), self.bond_count());
        for (i, a) in self.atoms.iter().enumerate() {
            let _ = writeln!(out, "{} {}", i + 1, a.label());
        }
        for b in &self.bonds {
            let _ = writeln!(out, "{} {} {}", b.u + 1, b.v + 1, b.multiplicity);
        }
        out
    }
}

/// Result of [`ChemicalGraph::hydrogen_suppress`].
#[derive(Debug, Clone)]
pub struct SuppressedGraph {
    pub graph: ChemicalGraph,
    /// deghyd(v): hydrogen neighbors removed from each remaining vertex.
    pub removed_hydrogens: Vec<u32>,
}

fn fields(line: &str) -> Vec<(&str, usize)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices() {
        match (c.is_whitespace(), start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                out.push((&line[s..i], s + 1));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((&line[s..], s + 1));
    }
    out
}

fn parse_field<T: std::str::FromStr>(line: usize, field: (&str, usize)) -> Result<T, GraphError> {
    field.0.parse().map_err(|_| {
        syntax(
            line,
            field.1,
            &format!("expected a non-negative integer, found {:?}", field.0),
        )
    })
}

fn syntax(line: usize, column: usize, message: &str) -> GraphError {
    GraphError::Syntax {
        line,
        column,
        message: message.to_string(),
    }
}
