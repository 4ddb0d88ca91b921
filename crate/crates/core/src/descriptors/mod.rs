//! The feature function: configuration counts, fringe-tree classes, the
//! descriptor registry and min-max normalization.

mod config;
mod count;
mod fringe;
mod normalize;
mod registry;

pub use config::{AdjacencyConfiguration, ChemicalSymbol, EdgeConfiguration};
pub use count::{
    chemical_symbol, count_adjacency_configs, count_chemical_symbols, count_edge_configs,
    count_fringe_classes,
};
pub use fringe::{fringe_code, graph_code, tree_code, FringeClass};
pub use normalize::Normalizer;
pub use registry::{Descriptor, DescriptorRegistry};

use thiserror::Error;

use crate::chemgraph::GraphError;

#[derive(Debug, Error)]
pub enum DescriptorError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("malformed descriptor key `{0}`")]
    BadKey(String),
    #[error("duplicate descriptor `{0}`")]
    DuplicateDescriptor(String),
    #[error("descriptors missing from the registry: {}", .0.join(", "))]
    Unknown(Vec<String>),
    #[error("registry was built for rho = {registry}, not {requested}")]
    RhoMismatch { registry: u32, requested: u32 },
    #[error("empty dataset")]
    EmptyDataset,
    #[error("registry line {line}: {message}")]
    Registry { line: usize, message: String },
    #[error("expected {expected} values, got {got}")]
    Dimension { expected: usize, got: usize },
}
