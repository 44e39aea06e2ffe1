//! Hypergraph structure, degree bookkeeping, preprocessing and splits.
//!
//! A [`Hypergraph`] is stored as a flat, ordered membership list (the
//! non-zeros of the incidence matrix `H`) together with adjacency offsets in
//! both directions, so node→hyperedge and hyperedge→node traversals are both
//! `O(K)`.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{Matrix, Real};
use crate::seed;
use crate::sparse::SparseOp;

#[derive(Debug, Error, PartialEq)]
pub enum HypergraphError {
    #[error("membership {index}: node {node} out of range (num_nodes = {num_nodes})")]
    NodeOutOfRange { index: usize, node: usize, num_nodes: usize },
    #[error("membership {index}: hyperedge {hyperedge} out of range (num_hyperedges = {num_hyperedges})")]
    HyperedgeOutOfRange { index: usize, hyperedge: usize, num_hyperedges: usize },
    #[error("duplicate membership (node {node}, hyperedge {hyperedge})")]
    DuplicateMembership { node: usize, hyperedge: usize },
    #[error("hyperedge {hyperedge} has non-positive or non-finite weight {weight}")]
    BadWeight { hyperedge: usize, weight: f64 },
    #[error("expected {expected} {what}, found {found}")]
    LengthMismatch { what: &'static str, expected: usize, found: usize },
    #[error("label {label} at node {node} is not below num_classes = {num_classes}")]
    LabelOutOfRange { node: usize, label: usize, num_classes: usize },
    #[error("invalid split ratios {0:?}: must be positive and sum to 1")]
    BadRatios([f64; 3]),
}

/// One non-zero `h_ij` of the incidence matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Membership {
    pub node: usize,
    pub hyperedge: usize,
}

/// Immutable hypergraph.
#[derive(Debug, Clone, PartialEq)]
pub struct Hypergraph {
    num_nodes: usize,
    num_hyperedges: usize,
    memberships: Vec<Membership>,
    weights: Vec<f64>,
    self_loop: Vec<bool>,
    node_offsets: Vec<usize>,
    node_hyperedges: Vec<usize>,
    edge_offsets: Vec<usize>,
    edge_nodes: Vec<usize>,
}

impl Hypergraph {
    /// Validates and indexes a membership list with unit weights and no
    /// self-loop flags.
    pub fn new(
        num_nodes: usize,
        num_hyperedges: usize,
        memberships: Vec<Membership>,
    ) -> Result<Self, HypergraphError> {
        Self::with_attributes(
            num_nodes,
            num_hyperedges,
            memberships,
            vec![1.0; num_hyperedges],
            vec![false; num_hyperedges],
        )
    }

    pub fn with_attributes(
        num_nodes: usize,
        num_hyperedges: usize,
        memberships: Vec<Membership>,
        weights: Vec<f64>,
        self_loop: Vec<bool>,
    ) -> Result<Self, HypergraphError> {
        if weights.len() != num_hyperedges {
            return Err(HypergraphError::LengthMismatch {
                what: "hyperedge weights",
                expected: num_hyperedges,
                found: weights.len(),
            });
        }
        if self_loop.len() != num_hyperedges {
            return Err(HypergraphError::LengthMismatch {
                what: "self-loop flags",
                expected: num_hyperedges,
                found: self_loop.len(),
            });
        }
        if let Some((hyperedge, &weight)) =
            weights.iter().enumerate().find(|(_, w)| !(w.is_finite() && **w > 0.0))
        {
            return Err(HypergraphError::BadWeight { hyperedge, weight });
        }
        let mut seen = HashSet::with_capacity(memberships.len());
        for (index, m) in memberships.iter().enumerate() {
            if m.node >= num_nodes {
                return Err(HypergraphError::NodeOutOfRange { index, node: m.node, num_nodes });
            }
            if m.hyperedge >= num_hyperedges {
                return Err(HypergraphError::HyperedgeOutOfRange {
                    index,
                    hyperedge: m.hyperedge,
                    num_hyperedges,
                });
            }
            if !seen.insert(*m) {
                return Err(HypergraphError::DuplicateMembership { node: m.node, hyperedge: m.hyperedge });
            }
        }
        Ok(Self::build_unchecked(num_nodes, num_hyperedges, memberships, weights, self_loop))
    }

    /// Hyperedge lists (node index sets) to a hypergraph.
    pub fn from_hyperedges(num_nodes: usize, hyperedges: &[Vec<usize>]) -> Result<Self, HypergraphError> {
        let memberships = hyperedges
            .iter()
            .enumerate()
            .flat_map(|(j, e)| e.iter().map(move |&i| Membership { node: i, hyperedge: j }))
            .collect();
        Self::new(num_nodes, hyperedges.len(), memberships)
    }

    fn build_unchecked(
        num_nodes: usize,
        num_hyperedges: usize,
        memberships: Vec<Membership>,
        weights: Vec<f64>,
        self_loop: Vec<bool>,
    ) -> Self {
        let (node_offsets, node_hyperedges) =
            csr(num_nodes, memberships.iter().map(|m| (m.node, m.hyperedge)));
        let (edge_offsets, edge_nodes) =
            csr(num_hyperedges, memberships.iter().map(|m| (m.hyperedge, m.node)));
        Self {
            num_nodes,
            num_hyperedges,
            memberships,
            weights,
            self_loop,
            node_offsets,
            node_hyperedges,
            edge_offsets,
            edge_nodes,
        }
    }

    /// Same index spaces and attributes, restricted to the kept memberships.
    pub(crate) fn retain_memberships(&self, mut keep: impl FnMut(usize, &Membership) -> bool) -> Self {
        let memberships =
            self.memberships.iter().enumerate().filter(|(k, m)| keep(*k, m)).map(|(_, m)| *m).collect();
        Self::build_unchecked(
            self.num_nodes,
            self.num_hyperedges,
            memberships,
            self.weights.clone(),
            self.self_loop.clone(),
        )
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_hyperedges(&self) -> usize {
        self.num_hyperedges
    }

    /// `K = nnz(H)`.
    pub fn num_memberships(&self) -> usize {
        self.memberships.len()
    }

    pub fn memberships(&self) -> &[Membership] {
        &self.memberships
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn is_self_loop(&self, hyperedge: usize) -> bool {
        self.self_loop[hyperedge]
    }

    pub fn self_loop_flags(&self) -> &[bool] {
        &self.self_loop
    }

    /// Hyperedges containing `node`, ascending.
    pub fn hyperedges_of(&self, node: usize) -> &[usize] {
        &self.node_hyperedges[self.node_offsets[node]..self.node_offsets[node + 1]]
    }

    /// Members of `hyperedge`, ascending.
    pub fn nodes_of(&self, hyperedge: usize) -> &[usize] {
        &self.edge_nodes[self.edge_offsets[hyperedge]..self.edge_offsets[hyperedge + 1]]
    }

    pub fn hyperedge_size(&self, hyperedge: usize) -> usize {
        self.edge_offsets[hyperedge + 1] - self.edge_offsets[hyperedge]
    }

    pub fn contains(&self, node: usize, hyperedge: usize) -> bool {
        self.hyperedges_of(node).binary_search(&hyperedge).is_ok()
    }

    /// Dense `|V| x |E|` incidence matrix. Meant for small instances and tests.
    pub fn incidence_dense<T: Real>(&self) -> Matrix<T> {
        let mut h = Matrix::zeros(self.num_nodes, self.num_hyperedges);
        for m in &self.memberships {
            h.set(m.node, m.hyperedge, T::one());
        }
        h
    }

    /// `D_E⁻¹ Hᵀ`: each hyperedge row is the mean of its members.
    pub fn node_to_hyperedge_mean<T: Real>(&self, degrees: &DegreeVectors) -> SparseOp<T> {
        let triplets = self
            .memberships
            .iter()
            .map(|m| (m.hyperedge, m.node, T::one() / T::lit(degrees.hyperedge[m.hyperedge] as f64)))
            .collect();
        SparseOp::from_triplets(self.num_hyperedges, self.num_nodes, triplets)
    }

    /// `D_V⁻¹ H W`: each node row is the weighted mean of its hyperedges.
    pub fn hyperedge_to_node_mean<T: Real>(&self, degrees: &DegreeVectors) -> SparseOp<T> {
        let triplets = self
            .memberships
            .iter()
            .map(|m| (m.node, m.hyperedge, T::lit(self.weights[m.hyperedge] / degrees.node[m.node])))
            .collect();
        SparseOp::from_triplets(self.num_nodes, self.num_hyperedges, triplets)
    }

    /// `Hᵀ D_V^{-1/2}`: hyperedge rows sum their members scaled by `1/√d_i`.
    pub fn node_to_hyperedge_hgnn<T: Real>(&self, degrees: &DegreeVectors) -> SparseOp<T> {
        let triplets = self
            .memberships
            .iter()
            .map(|m| (m.hyperedge, m.node, T::lit(1.0 / degrees.node[m.node].sqrt())))
            .collect();
        SparseOp::from_triplets(self.num_hyperedges, self.num_nodes, triplets)
    }

    /// `D_V^{-1/2} H W D_E⁻¹`.
    pub fn hyperedge_to_node_hgnn<T: Real>(&self, degrees: &DegreeVectors) -> SparseOp<T> {
        let triplets = self
            .memberships
            .iter()
            .map(|m| {
                let c = self.weights[m.hyperedge]
                    / (degrees.node[m.node].sqrt() * degrees.hyperedge[m.hyperedge] as f64);
                (m.node, m.hyperedge, T::lit(c))
            })
            .collect();
        SparseOp::from_triplets(self.num_nodes, self.num_hyperedges, triplets)
    }
}

fn csr(rows: usize, pairs: impl Iterator<Item = (usize, usize)> + Clone) -> (Vec<usize>, Vec<usize>) {
    let mut offsets = vec![0usize; rows + 1];
    for (r, _) in pairs.clone() {
        offsets[r + 1] += 1;
    }
    for r in 0..rows {
        offsets[r + 1] += offsets[r];
    }
    let mut fill = offsets.clone();
    let mut adj = vec![0usize; offsets[rows]];
    for (r, c) in pairs {
        adj[fill[r]] = c;
        fill[r] += 1;
    }
    for r in 0..rows {
        adj[offsets[r]..offsets[r + 1]].sort_unstable();
    }
    (offsets, adj)
}

/// `d_i = Σ_j w_j h_ij` and `δ_j = Σ_i h_ij`.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeVectors {
    pub node: Vec<f64>,
    pub hyperedge: Vec<usize>,
}

pub fn compute_degrees(h: &Hypergraph) -> DegreeVectors {
    let mut node = vec![0.0; h.num_nodes];
    let mut hyperedge = vec![0usize; h.num_hyperedges];
    for m in &h.memberships {
        node[m.node] += h.weights[m.hyperedge];
        hyperedge[m.hyperedge] += 1;
    }
    DegreeVectors { node, hyperedge }
}

/// Appends one single-node hyperedge per node, flagged as a self-loop.
pub fn add_self_loops(h: &Hypergraph) -> Hypergraph {
    let base = h.num_hyperedges;
    let mut memberships = h.memberships.clone();
    memberships.extend((0..h.num_nodes).map(|i| Membership { node: i, hyperedge: base + i }));
    let mut weights = h.weights.clone();
    weights.resize(base + h.num_nodes, 1.0);
    let mut self_loop = h.self_loop.clone();
    self_loop.resize(base + h.num_nodes, true);
    Hypergraph::build_unchecked(h.num_nodes, base + h.num_nodes, memberships, weights, self_loop)
}

/// A hypergraph with node features and class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub hypergraph: Hypergraph,
    pub features: Matrix<f64>,
    pub labels: Vec<usize>,
    pub num_classes: usize,
    pub class_names: Option<Vec<String>>,
}

impl LabeledDataset {
    pub fn new(
        hypergraph: Hypergraph,
        features: Matrix<f64>,
        labels: Vec<usize>,
        num_classes: usize,
    ) -> Result<Self, HypergraphError> {
        let n = hypergraph.num_nodes();
        if features.rows() != n {
            return Err(HypergraphError::LengthMismatch { what: "feature rows", expected: n, found: features.rows() });
        }
        if labels.len() != n {
            return Err(HypergraphError::LengthMismatch { what: "labels", expected: n, found: labels.len() });
        }
        if let Some((node, &label)) = labels.iter().enumerate().find(|(_, &l)| l >= num_classes) {
            return Err(HypergraphError::LabelOutOfRange { node, label, num_classes });
        }
        Ok(Self { hypergraph, features, labels, num_classes, class_names: None })
    }

    pub fn num_nodes(&self) -> usize {
        self.hypergraph.num_nodes()
    }

    pub fn num_features(&self) -> usize {
        self.features.cols()
    }
}

/// Drops nodes with zero degree, reindexing features, labels and
/// memberships. Returns the old→new index map (`None` for removed nodes).
pub fn remove_isolated_nodes(d: &LabeledDataset) -> (LabeledDataset, Vec<Option<usize>>) {
    let h = &d.hypergraph;
    let degrees = compute_degrees(h);
    let mut map = vec![None; h.num_nodes];
    let mut kept = Vec::new();
    for (i, &deg) in degrees.node.iter().enumerate() {
        if deg > 0.0 {
            map[i] = Some(kept.len());
            kept.push(i);
        }
    }
    let memberships = h
        .memberships
        .iter()
        .map(|m| Membership { node: map[m.node].expect("member nodes have positive degree"), hyperedge: m.hyperedge })
        .collect();
    let hypergraph =
        Hypergraph::build_unchecked(kept.len(), h.num_hyperedges, memberships, h.weights.clone(), h.self_loop.clone());
    let out = LabeledDataset {
        hypergraph,
        features: d.features.select_rows(&kept),
        labels: kept.iter().map(|&i| d.labels[i]).collect(),
        num_classes: d.num_classes,
        class_names: d.class_names.clone(),
    };
    (out, map)
}

/// Disjoint train/validation/test node sets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub valid: Vec<usize>,
    pub test: Vec<usize>,
}

impl Split {
    pub fn len(&self) -> usize {
        self.train.len() + self.valid.len() + self.test.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// True when the three sets are pairwise disjoint and cover `0..num_nodes`.
    pub fn is_partition_of(&self, num_nodes: usize) -> bool {
        let mut seen = vec![false; num_nodes];
        for &i in self.train.iter().chain(&self.valid).chain(&self.test) {
            if i >= num_nodes || seen[i] {
                return false;
            }
            seen[i] = true;
        }
        seen.into_iter().all(|s| s)
    }
}

/// Uniform random split. Train and validation sizes are `floor(ratio · n)`;
/// the remainder goes to the test set.
pub fn random_split(num_nodes: usize, ratios: [f64; 3], rng_seed: u64) -> Result<Split, HypergraphError> {
    let total: f64 = ratios.iter().sum();
    if ratios.iter().any(|r| !(r.is_finite() && *r > 0.0)) || (total - 1.0).abs() > 1e-9 {
        return Err(HypergraphError::BadRatios(ratios));
    }
    let mut order: Vec<usize> = (0..num_nodes).collect();
    order.shuffle(&mut seed::stream(rng_seed, &[seed::tag::SPLIT]));
    // The small offset keeps products such as 0.29 * 100 from flooring to 28.
    let size = |r: f64| (r * num_nodes as f64 + 1e-9).floor() as usize;
    let n_train = size(ratios[0]).min(num_nodes);
    let n_valid = size(ratios[1]).min(num_nodes - n_train);
    let test = order.split_off(n_train + n_valid);
    let valid = order.split_off(n_train);
    Ok(Split { train: order, valid, test })
}
