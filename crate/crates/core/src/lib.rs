//! Self-supervised node representations for hypergraphs.
//!
//! Two stochastically masked views of a hypergraph are encoded by a shared
//! hypergraph network and trained with three contrastive objectives: between
//! views of the same node, between views of the same hyperedge, and between
//! nodes and the hyperedges that contain them. The frozen embeddings are
//! then scored with a linear probe and with k-means clustering.

pub mod augment;
pub mod dataio;
pub mod diff;
pub mod eval;
pub mod hgraph;
pub mod loss;
pub mod model;
pub mod optim;
pub mod report;
pub mod trainer;
pub mod linalg;
pub mod seed;
pub mod sparse;
