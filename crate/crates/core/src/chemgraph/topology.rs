//! Structural notions on (chemical) graphs: rank, core-edges, heights and
//! k-leanness.

use std::collections::BTreeSet;

use super::ChemicalGraph;

/// r(G) = |E| − |V| + 1 for a connected graph.
pub fn rank(g: &ChemicalGraph) -> i64 {
    g.bond_count() as i64 - g.atom_count() as i64 + 1
}

/// Core-edges of a connected graph: edges on a cycle, plus bridges whose
/// removal leaves a cycle on both sides.
///
/// Returns `None` for an acyclic graph, which has no core. The core-edges
/// are exactly the edges that survive repeated removal of vertices of
/// degree at most one.
pub fn core_edges(g: &ChemicalGraph) -> Option<BTreeSet<usize>> {
    if rank(g) < 1 {
        return None;
    }
    let adj = g.neighbor_lists();
    let mut degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut removed = vec![false; adj.len()];
    let mut stack: Vec<usize> = (0..adj.len()).filter(|&v| degree[v] <= 1).collect();
    while let Some(v) = stack.pop() {
        if removed[v] {
            continue;
        }
        removed[v] = true;
        for &w in &adj[v] {
            if !removed[w] {
                degree[w] -= 1;
                if degree[w] == 1 {
                    stack.push(w);
                }
            }
        }
    }
    Some(
        g.bonds()
            .iter()
            .enumerate()
            .filter(|(_, b)| !removed[b.u] && !removed[b.v])
            .map(|(i, _)| i)
            .collect(),
    )
}

/// Heights obtained by iterated leaf stripping.
///
/// `G_0 = G`, `G_{i+1} = G_i − Vleaf(G_i)`, where a leaf is a non-root
/// vertex of degree one. A vertex stripped at step `i` has height `i`.
/// Isolated non-root vertices count as leaves, so a single vertex has
/// height 0. A remaining vertex adjacent to stripped vertices gets one
/// more than the largest adjacent height; other remaining vertices have
/// no height. The root of a single-vertex rooted tree has height 0.
pub fn heights(adj: &[Vec<usize>], root: Option<usize>) -> Vec<Option<u32>> {
    let tree_heights = stripping_heights(adj, root);
    let mut height = tree_heights.clone();
    for v in 0..adj.len() {
        if tree_heights[v].is_none() {
            height[v] = adj[v]
                .iter()
                .filter_map(|&w| tree_heights[w])
                .max()
                .map(|h| h + 1);
        }
    }
    if let Some(r) = root {
        if adj[r].is_empty() {
            height[r] = Some(0);
        }
    }
    height
}

/// Heights of the tree vertices only, i.e. the vertices removed by leaf
/// stripping; `None` for every vertex that survives it.
pub fn stripping_heights(adj: &[Vec<usize>], root: Option<usize>) -> Vec<Option<u32>> {
    let n = adj.len();
    let mut height = vec![None; n];
    let mut degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut alive = vec![true; n];
    let mut level = 0u32;
    loop {
        let leaves: Vec<usize> = (0..n)
            .filter(|&v| alive[v] && Some(v) != root && degree[v] <= 1)
            .collect();
        if leaves.is_empty() {
            break;
        }
        for &v in &leaves {
            alive[v] = false;
            height[v] = Some(level);
        }
        for &v in &leaves {
            for &w in &adj[v] {
                if alive[w] {
                    degree[w] -= 1;
                }
            }
        }
        level += 1;
    }
    height
}

/// A rooted tree is k-lean when at most one vertex has height exactly `k`.
pub fn is_k_lean(adj: &[Vec<usize>], root: usize, k: u32) -> bool {
    heights(adj, Some(root))
        .into_iter()
        .filter(|&h| h == Some(k))
        .count()
        <= 1
}
