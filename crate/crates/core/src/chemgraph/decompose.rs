//! Interior/exterior decomposition of the two-layered model.
//!
//! On the hydrogen-suppressed graph, a tree vertex (one removed by leaf
//! stripping) whose height is smaller than the branch parameter `rho` is
//! exterior; every other vertex
//! is interior. Exterior vertices hang off interior vertices as rooted
//! trees (the fringe trees), each rooted at its unique interior neighbor.
//! An interior edge has both ends interior.

use std::collections::VecDeque;

use super::topology::{heights, stripping_heights};
use super::{ChemicalGraph, GraphError};

/// A fringe tree: an interior root together with the exterior vertices
/// hanging from it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FringeTree {
    pub root: usize,
    /// Exterior vertices in breadth-first order from the root.
    pub vertices: Vec<usize>,
    /// `(child, parent, bond index)` for every exterior vertex.
    pub parent_links: Vec<(usize, usize, usize)>,
}

#[derive(Debug, Clone)]
pub struct TwoLayerDecomposition {
    graph: ChemicalGraph,
    rho: u32,
    heights: Vec<Option<u32>>,
    interior: Vec<usize>,
    exterior: Vec<usize>,
    interior_edges: Vec<usize>,
    fringe_trees: Vec<FringeTree>,
}

impl TwoLayerDecomposition {
    /// Decomposes `g` (suppressed first if it carries hydrogen vertices).
    pub fn new(g: &ChemicalGraph, rho: u32) -> Result<Self, GraphError> {
        if rho < 1 {
            return Err(GraphError::BadBranchParameter(rho));
        }
        let graph = g.suppressed()?;
        let adj = graph.neighbor_lists();
        let heights = heights(&adj, None);
        let is_exterior: Vec<bool> = stripping_heights(&adj, None)
            .iter()
            .map(|h| matches!(h, Some(h) if *h < rho))
            .collect();
        let interior: Vec<usize> = (0..graph.atom_count())
            .filter(|&v| !is_exterior[v])
            .collect();
        let exterior: Vec<usize> = (0..graph.atom_count())
            .filter(|&v| is_exterior[v])
            .collect();
        let interior_edges = graph
            .bonds()
            .iter()
            .enumerate()
            .filter(|(_, b)| !is_exterior[b.u] && !is_exterior[b.v])
            .map(|(i, _)| i)
            .collect();

        let mut fringe_trees = Vec::new();
        for &root in &interior {
            let mut vertices = Vec::new();
            let mut parent_links = Vec::new();
            let mut queue = VecDeque::new();
            for &(w, b) in graph.incident(root) {
                if is_exterior[w] {
                    parent_links.push((w, root, b));
                    vertices.push(w);
                    queue.push_back((w, root));
                }
            }
            while let Some((v, parent)) = queue.pop_front() {
                for &(w, b) in graph.incident(v) {
                    if w != parent && is_exterior[w] {
                        parent_links.push((w, v, b));
                        vertices.push(w);
                        queue.push_back((w, v));
                    }
                }
            }
            if !vertices.is_empty() {
                fringe_trees.push(FringeTree {
                    root,
                    vertices,
                    parent_links,
                });
            }
        }

        Ok(Self {
            graph,
            rho,
            heights,
            interior,
            exterior,
            interior_edges,
            fringe_trees,
        })
    }

    /// The hydrogen-suppressed graph the decomposition refers to.
    pub fn graph(&self) -> &ChemicalGraph {
        &self.graph
    }

    pub fn rho(&self) -> u32 {
        self.rho
    }

    pub fn heights(&self) -> &[Option<u32>] {
        &self.heights
    }

    pub fn interior(&self) -> &[usize] {
        &self.interior
    }

    pub fn exterior(&self) -> &[usize] {
        &self.exterior
    }

    /// Bond indices of edges with both ends interior.
    pub fn interior_edges(&self) -> &[usize] {
        &self.interior_edges
    }

    pub fn fringe_trees(&self) -> &[FringeTree] {
        &self.fringe_trees
    }

    /// True when every vertex is exterior (small acyclic graphs). No fringe
    /// trees are built in that case.
    pub fn has_empty_interior(&self) -> bool {
        self.interior.is_empty()
    }

    pub fn is_interior(&self, v: usize) -> bool {
        self.interior.binary_search(&v).is_ok()
    }
}
