//! Chemical graphs, structural graph algorithms and the two-layered
//! interior/exterior decomposition.

mod decompose;
mod element;
mod graph;
mod topology;

pub use decompose::{FringeTree, TwoLayerDecomposition};
pub use element::{ElementSpec, ElementTable};
pub use graph::{Bond, ChemicalGraph, SuppressedGraph};
pub use topology::{core_edges, heights, is_k_lean, rank, stripping_heights};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid element: {0}")]
    InvalidElement(String),
    #[error("unknown element {0}")]
    UnknownElement(String),
    #[error("graph has no vertices")]
    Empty,
    #[error("vertex {vertex} out of range for {count} vertices")]
    VertexOutOfRange { vertex: usize, count: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("bond multiplicity must lie in [1,3], got {0}")]
    BadMultiplicity(u8),
    #[error("duplicate edge between vertices {0} and {1}")]
    DuplicateEdge(usize, usize),
    #[error("valence violation at vertex {vertex} ({element}): bond sum {bond_sum} exceeds valence {valence}")]
    Valence {
        vertex: usize,
        element: String,
        bond_sum: u32,
        valence: u8,
    },
    #[error("graph is disconnected")]
    Disconnected,
    #[error("graph consists of hydrogen atoms only")]
    OnlyHydrogen,
    #[error("branch parameter must be at least 1, got {0}")]
    BadBranchParameter(u32),
}
