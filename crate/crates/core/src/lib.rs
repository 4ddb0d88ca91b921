//! Inverse molecular design on the two-layered chemical graph model.
//!
//! The crate covers featurization of chemical graphs, training of
//! prediction functions, compilation of both into mixed-integer linear
//! programs, and the grid neighbor search that enumerates further
//! solutions around a found one.

pub mod chemgraph;
pub mod descriptors;
pub mod regression;
pub mod milp;
pub mod encode;
pub mod gridsearch;
