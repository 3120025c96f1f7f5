//! Continuous-time quantum walks and classical random walks on square-lattice
//! networks, computed spectrally from the connectivity matrix.

pub mod bloch;
pub mod dynamics;
pub mod error;
pub mod format;
pub mod lattice;
pub mod limiting;
pub mod spectral;

pub use error::{Error, Result};
pub use lattice::{
    build_adjacency, linear_to_node, mirror, node_to_linear, special_nodes, AdjacencyMatrix,
    Boundary, LatticeSpec, Node, SpecialNodes,
};
pub use num_complex::Complex64;
pub use spectral::{decompose, group_degeneracies, DegeneracyPartition, EigenSystem};
