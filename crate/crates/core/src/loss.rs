//! Node-, group- and membership-level contrastive objectives.
//!
//! All three are InfoNCE losses whose denominators include the positive
//! term. Node and group contrast score pairs by cosine similarity across the
//! two views; membership contrast scores node/hyperedge pairs with the
//! bilinear discriminator `σ(zᵀ S y)`.

use std::collections::HashSet;
use std::sync::Arc;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diff::{DiffError, RowSelection, Tape, Var};
use crate::hgraph::Hypergraph;
use crate::linalg::{Matrix, Real};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LossError {
    #[error("invalid loss configuration: {0}")]
    Config(String),
    #[error("{what} needs at least 2 rows, found {found}")]
    Degenerate { what: &'static str, found: usize },
    #[error(transparent)]
    Diff(#[from] DiffError),
}

/// How the membership denominators are formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MembershipMode {
    /// One uniformly drawn negative per positive.
    #[default]
    Sampled,
    /// Every valid negative; quadratic cost, meant for small instances.
    Full,
}

/// Which loss components contribute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentSwitches {
    pub node: bool,
    pub group: bool,
    pub membership: bool,
}

impl Default for ComponentSwitches {
    fn default() -> Self {
        Self { node: true, group: true, membership: true }
    }
}

impl ComponentSwitches {
    pub const TRICL: Self = Self { node: true, group: true, membership: true };
    pub const NODE_ONLY: Self = Self { node: true, group: false, membership: false };
    pub const NODE_GROUP: Self = Self { node: true, group: true, membership: false };
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossConfig {
    pub tau_n: f64,
    pub tau_g: f64,
    pub tau_m: f64,
    pub omega_g: f64,
    pub omega_m: f64,
    /// Negatives per anchor for node and group contrast; `None` uses all.
    pub negatives_k: Option<usize>,
    pub components: ComponentSwitches,
    pub membership_mode: MembershipMode,
}

impl Default for LossConfig {
    fn default() -> Self {
        Self {
            tau_n: 0.5,
            tau_g: 0.5,
            tau_m: 1.0,
            omega_g: 4.0,
            omega_m: 1.0,
            negatives_k: None,
            components: ComponentSwitches::default(),
            membership_mode: MembershipMode::Sampled,
        }
    }
}

impl LossConfig {
    pub fn validate(&self) -> Result<(), LossError> {
        for (name, t) in [("tau_n", self.tau_n), ("tau_g", self.tau_g), ("tau_m", self.tau_m)] {
            if !(t > 0.0 && t.is_finite()) {
                return Err(LossError::Config(format!("{name} must be positive, got {t}")));
            }
        }
        for (name, w) in [("omega_g", self.omega_g), ("omega_m", self.omega_m)] {
            if !(w >= 0.0 && w.is_finite()) {
                return Err(LossError::Config(format!("{name} must be nonnegative, got {w}")));
            }
        }
        if self.negatives_k == Some(0) {
            return Err(LossError::Config("negatives_k must be at least 1".into()));
        }
        let c = self.components;
        if !(c.node || c.group || c.membership) {
            return Err(LossError::Config("at least one loss component must be enabled".into()));
        }
        Ok(())
    }
}

/// Cosine similarity with norms clamped below at `1e-12`.
pub fn cosine_similarity(u: &[f64], v: &[f64]) -> f64 {
    assert_eq!(u.len(), v.len(), "cosine_similarity length mismatch");
    let norm = |a: &[f64]| a.iter().map(|x| x * x).sum::<f64>().sqrt().max(crate::diff::NORM_EPS);
    u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>() / (norm(u) * norm(v))
}

/// `L_n + ω_g L_g + ω_m L_m` over the enabled components.
pub fn total_loss_value(l_n: f64, l_g: f64, l_m: f64, cfg: &LossConfig) -> f64 {
    let c = cfg.components;
    let mut total = 0.0;
    if c.node {
        total += l_n;
    }
    if c.group {
        total += cfg.omega_g * l_g;
    }
    if c.membership {
        total += cfg.omega_m * l_m;
    }
    total
}

/// Draws `k` distinct negatives for every anchor of an `m`-row contrast and
/// returns sorted per-row column sets that include the anchor's positive.
pub fn subsample_selection(m: usize, k: usize, rng: &mut impl Rng) -> Result<RowSelection, LossError> {
    if k == 0 || k + 1 > m {
        return Err(LossError::Config(format!("negatives_k = {k} must lie in [1, {}]", m.saturating_sub(1))));
    }
    let rows: Vec<Vec<usize>> = (0..m)
        .map(|i| {
            let mut cols: Vec<usize> = index::sample(rng, m - 1, k).into_iter().map(|c| c + usize::from(c >= i)).collect();
            cols.push(i);
            cols.sort_unstable();
            cols
        })
        .collect();
    Ok(RowSelection::new(&rows))
}

/// Symmetrized InfoNCE over matched rows of `a` and `b`.
///
/// Each row of `a` is an anchor whose positive is the same row of `b` and
/// whose negatives are the other rows of `b`, and vice versa. With
/// `negatives` set, each anchor uses the given per-row column subsets for
/// the first and second direction respectively.
pub fn contrast<T: Real>(
    tape: &mut Tape<T>,
    a: Var,
    b: Var,
    tau: f64,
    negatives: Option<(RowSelection, RowSelection)>,
) -> Result<Var, LossError> {
    let m = tape.shape(a).0;
    let na = tape.row_normalize(a)?;
    let nb = tape.row_normalize(b)?;
    let nbt = tape.transpose(nb)?;
    let sim = tape.matmul(na, nbt)?;
    let sim = tape.scale(sim, T::lit(1.0 / tau))?;
    let sim_t = tape.transpose(sim)?;
    let (sel_ab, sel_ba) = match negatives {
        Some((x, y)) => (Some(Arc::new(x)), Some(Arc::new(y))),
        None => (None, None),
    };
    let lse_ab = tape.row_logsumexp(sim, sel_ab)?;
    let lse_ba = tape.row_logsumexp(sim_t, sel_ba)?;
    let diag: Arc<[(usize, usize)]> = (0..m).map(|i| (i, i)).collect();
    let pos = tape.gather_elements(sim, diag)?;
    let lse = tape.add(lse_ab, lse_ba)?;
    let twice_pos = tape.scale(pos, T::lit(2.0))?;
    let per_anchor = tape.sub(lse, twice_pos)?;
    let total = tape.sum(per_anchor)?;
    Ok(tape.scale(total, T::lit(1.0 / (2.0 * m as f64)))?)
}

/// Node-level contrast between the projected node rows of both views.
pub fn node_loss<T: Real>(tape: &mut Tape<T>, z1: Var, z2: Var, tau_n: f64) -> Result<Var, LossError> {
    let n = tape.shape(z1).0;
    if n < 2 {
        return Err(LossError::Degenerate { what: "node contrast", found: n });
    }
    contrast(tape, z1, z2, tau_n, None)
}

/// Group-level contrast restricted to the `eligible` hyperedge rows.
pub fn group_loss<T: Real>(
    tape: &mut Tape<T>,
    y1: Var,
    y2: Var,
    eligible: &Arc<[usize]>,
    tau_g: f64,
) -> Result<Var, LossError> {
    if eligible.len() < 2 {
        return Err(LossError::Degenerate { what: "group contrast", found: eligible.len() });
    }
    let a = tape.gather_rows(y1, eligible.clone())?;
    let b = tape.gather_rows(y2, eligible.clone())?;
    contrast(tape, a, b, tau_g, None)
}

/// InfoNCE with `k` uniformly drawn negatives per anchor, redrawn each call.
pub fn subsampled_contrast<T: Real>(
    tape: &mut Tape<T>,
    a: Var,
    b: Var,
    tau: f64,
    k: usize,
    rng: &mut impl Rng,
) -> Result<Var, LossError> {
    let m = tape.shape(a).0;
    if m < 2 {
        return Err(LossError::Degenerate { what: "subsampled contrast", found: m });
    }
    let first = subsample_selection(m, k, rng)?;
    let second = subsample_selection(m, k, rng)?;
    contrast(tape, a, b, tau, Some((first, second)))
}

/// Real memberships of the original hypergraph that take part in
/// membership contrast, plus the candidate negative hyperedges.
#[derive(Debug, Clone, PartialEq)]
pub struct MembershipTargets {
    num_nodes: usize,
    /// `(node, hyperedge)` pairs whose hyperedge is eligible.
    pub memberships: Vec<(usize, usize)>,
    /// Hyperedges that are neither self-loops nor empty, ascending.
    pub eligible_hyperedges: Vec<usize>,
    node_edges: Vec<HashSet<usize>>,
    edge_sizes: Vec<usize>,
}

/// Hyperedges that are neither self-loops nor empty.
pub fn eligible_hyperedges(h: &Hypergraph) -> Vec<usize> {
    (0..h.num_hyperedges()).filter(|&j| !h.is_self_loop(j) && h.hyperedge_size(j) > 0).collect()
}

impl MembershipTargets {
    pub fn new(h: &Hypergraph) -> Self {
        let eligible = eligible_hyperedges(h);
        let is_eligible: HashSet<usize> = eligible.iter().copied().collect();
        let memberships: Vec<(usize, usize)> = h
            .memberships()
            .iter()
            .filter(|m| is_eligible.contains(&m.hyperedge))
            .map(|m| (m.node, m.hyperedge))
            .collect();
        let mut node_edges = vec![HashSet::new(); h.num_nodes()];
        let mut edge_sizes = vec![0; h.num_hyperedges()];
        for &(i, j) in &memberships {
            node_edges[i].insert(j);
            edge_sizes[j] += 1;
        }
        Self { num_nodes: h.num_nodes(), memberships, eligible_hyperedges: eligible, node_edges, edge_sizes }
    }

    pub fn len(&self) -> usize {
        self.memberships.len()
    }

    pub fn is_empty(&self) -> bool {
        self.memberships.is_empty()
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn contains(&self, node: usize, hyperedge: usize) -> bool {
        self.node_edges[node].contains(&hyperedge)
    }

    /// Whether both a negative hyperedge for the node and a negative node
    /// for the hyperedge exist.
    pub fn has_negatives(&self, node: usize, hyperedge: usize) -> bool {
        self.node_edges[node].len() < self.eligible_hyperedges.len() && self.edge_sizes[hyperedge] < self.num_nodes
    }
}

/// Negatives drawn for one view pairing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairingNegatives {
    /// Indices into [`MembershipTargets::memberships`] that are used.
    pub used: Vec<usize>,
    /// Negative hyperedge for each used membership (node as anchor).
    pub hyperedges: Vec<usize>,
    /// Negative node for each used membership (hyperedge as anchor).
    pub nodes: Vec<usize>,
}

/// Negatives for both pairings plus the number of memberships skipped
/// because no valid negative exists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MembershipSample {
    pub pairings: [PairingNegatives; 2],
    pub skipped: usize,
}

/// Draws one negative hyperedge and one negative node per membership and
/// pairing by uniform rejection sampling. `subset` restricts the
/// memberships considered (a mini-batch); `None` uses all.
pub fn sample_membership_negatives(
    targets: &MembershipTargets,
    subset: Option<&[usize]>,
    rng: &mut impl Rng,
) -> MembershipSample {
    let all: Vec<usize>;
    let chosen: &[usize] = match subset {
        Some(s) => s,
        None => {
            all = (0..targets.len()).collect();
            &all
        }
    };
    let used: Vec<usize> =
        chosen.iter().copied().filter(|&m| targets.has_negatives(targets.memberships[m].0, targets.memberships[m].1)).collect();
    let skipped = chosen.len() - used.len();
    let draw = |rng: &mut dyn rand::RngCore| {
        let mut hyperedges = Vec::with_capacity(used.len());
        let mut nodes = Vec::with_capacity(used.len());
        for &m in &used {
            let (i, j) = targets.memberships[m];
            let k = loop {
                let k = targets.eligible_hyperedges[rng.random_range(0..targets.eligible_hyperedges.len())];
                if !targets.contains(i, k) {
                    break k;
                }
            };
            let v = loop {
                let v = rng.random_range(0..targets.num_nodes);
                if !targets.contains(v, j) {
                    break v;
                }
            };
            hyperedges.push(k);
            nodes.push(v);
        }
        PairingNegatives { used: used.clone(), hyperedges, nodes }
    };
    let first = draw(rng);
    let second = draw(rng);
    MembershipSample { pairings: [first, second], skipped }
}

/// `σ(zᵢᵀ S yⱼ) / τ` for each listed `(node, hyperedge)` pair, as a column.
fn pair_scores<T: Real>(
    tape: &mut Tape<T>,
    zs: Var,
    y: Var,
    nodes: Vec<usize>,
    hyperedges: Vec<usize>,
    tau_m: f64,
) -> Result<Var, DiffError> {
    let zr = tape.gather_rows(zs, nodes.into())?;
    let yr = tape.gather_rows(y, hyperedges.into())?;
    let dot = tape.row_dot(zr, yr)?;
    let d = tape.sigmoid(dot)?;
    tape.scale(d, T::lit(1.0 / tau_m))
}

/// Sum of both anchored terms for one pairing with sampled negatives.
fn sampled_pairing<T: Real>(
    tape: &mut Tape<T>,
    z: Var,
    y: Var,
    s: Var,
    targets: &MembershipTargets,
    neg: &PairingNegatives,
    tau_m: f64,
) -> Result<Var, DiffError> {
    let zs = tape.matmul(z, s)?;
    let pos_nodes: Vec<usize> = neg.used.iter().map(|&m| targets.memberships[m].0).collect();
    let pos_edges: Vec<usize> = neg.used.iter().map(|&m| targets.memberships[m].1).collect();
    let pos = pair_scores(tape, zs, y, pos_nodes.clone(), pos_edges.clone(), tau_m)?;
    let neg_e = pair_scores(tape, zs, y, pos_nodes, neg.hyperedges.clone(), tau_m)?;
    let neg_n = pair_scores(tape, zs, y, neg.nodes.clone(), pos_edges, tau_m)?;
    let node_anchor = tape.concat_cols(pos, neg_e)?;
    let node_lse = tape.row_logsumexp(node_anchor, None)?;
    let edge_anchor = tape.concat_cols(pos, neg_n)?;
    let edge_lse = tape.row_logsumexp(edge_anchor, None)?;
    let lse = tape.add(node_lse, edge_lse)?;
    let twice_pos = tape.scale(pos, T::lit(2.0))?;
    let terms = tape.sub(lse, twice_pos)?;
    tape.sum(terms)
}

/// Sum of both anchored terms for one pairing with every valid negative.
fn full_pairing<T: Real>(
    tape: &mut Tape<T>,
    z: Var,
    y: Var,
    s: Var,
    targets: &MembershipTargets,
    used: &[usize],
    tau_m: f64,
) -> Result<Var, DiffError> {
    let eligible = &targets.eligible_hyperedges;
    let column_of: std::collections::HashMap<usize, usize> = eligible.iter().enumerate().map(|(c, &j)| (j, c)).collect();
    let ye = tape.gather_rows(y, eligible.clone().into())?;
    let zs = tape.matmul(z, s)?;
    let yet = tape.transpose(ye)?;
    let raw = tape.matmul(zs, yet)?;
    let d = tape.sigmoid(raw)?;
    let d = tape.scale(d, T::lit(1.0 / tau_m))?;
    let dt = tape.transpose(d)?;

    let mut node_rows = Vec::with_capacity(used.len());
    let mut edge_rows = Vec::with_capacity(used.len());
    let mut node_sel = Vec::with_capacity(used.len());
    let mut edge_sel = Vec::with_capacity(used.len());
    let mut positions = Vec::with_capacity(used.len());
    for &m in used {
        let (i, j) = targets.memberships[m];
        let cj = column_of[&j];
        node_rows.push(i);
        edge_rows.push(cj);
        node_sel.push(
            eligible.iter().enumerate().filter(|&(c, &k)| c == cj || !targets.contains(i, k)).map(|(c, _)| c).collect::<Vec<_>>(),
        );
        edge_sel.push((0..targets.num_nodes()).filter(|&v| v == i || !targets.contains(v, j)).collect::<Vec<_>>());
        positions.push((i, cj));
    }
    let node_block = tape.gather_rows(d, node_rows.into())?;
    let node_lse = tape.row_logsumexp(node_block, Some(Arc::new(RowSelection::new(&node_sel))))?;
    let edge_block = tape.gather_rows(dt, edge_rows.into())?;
    let edge_lse = tape.row_logsumexp(edge_block, Some(Arc::new(RowSelection::new(&edge_sel))))?;
    let pos = tape.gather_elements(d, positions.into())?;
    let lse = tape.add(node_lse, edge_lse)?;
    let twice_pos = tape.scale(pos, T::lit(2.0))?;
    let terms = tape.sub(lse, twice_pos)?;
    tape.sum(terms)
}

/// Membership contrast across the pairings `(Z1, Y2)` and `(Z2, Y1)`,
/// normalized by twice the number of memberships used.
#[allow(clippy::too_many_arguments)]
pub fn membership_loss<T: Real>(
    tape: &mut Tape<T>,
    z1: Var,
    y2: Var,
    z2: Var,
    y1: Var,
    s: Var,
    targets: &MembershipTargets,
    sample: &MembershipSample,
    tau_m: f64,
    mode: MembershipMode,
) -> Result<Var, LossError> {
    let used = sample.pairings[0].used.len();
    if used == 0 {
        return Err(LossError::Degenerate { what: "membership contrast", found: 0 });
    }
    let (a, b) = match mode {
        MembershipMode::Sampled => (
            sampled_pairing(tape, z1, y2, s, targets, &sample.pairings[0], tau_m)?,
            sampled_pairing(tape, z2, y1, s, targets, &sample.pairings[1], tau_m)?,
        ),
        MembershipMode::Full => (
            full_pairing(tape, z1, y2, s, targets, &sample.pairings[0].used, tau_m)?,
            full_pairing(tape, z2, y1, s, targets, &sample.pairings[1].used, tau_m)?,
        ),
    };
    let total = tape.add(a, b)?;
    Ok(tape.scale(total, T::lit(1.0 / (2.0 * used as f64)))?)
}

/// Recorded loss components.
#[derive(Debug, Clone, Copy)]
pub struct LossParts {
    pub total: Var,
    pub node: Option<Var>,
    pub group: Option<Var>,
    pub membership: Option<Var>,
}

/// Per-component loss values of one evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub total: f64,
    pub node: Option<f64>,
    pub group: Option<f64>,
    pub membership: Option<f64>,
}

impl LossParts {
    pub fn breakdown<T: Real>(&self, tape: &Tape<T>) -> LossBreakdown {
        let read = |v: Var| tape.scalar(v).to_f64().unwrap_or(f64::NAN);
        LossBreakdown {
            total: read(self.total),
            node: self.node.map(read),
            group: self.group.map(read),
            membership: self.membership.map(read),
        }
    }
}

/// Weighted sum of the enabled components on the tape.
pub fn total_loss<T: Real>(
    tape: &mut Tape<T>,
    node: Option<Var>,
    group: Option<Var>,
    membership: Option<Var>,
    cfg: &LossConfig,
) -> Result<LossParts, LossError> {
    let mut total: Option<Var> = node;
    for (part, weight) in [(group, cfg.omega_g), (membership, cfg.omega_m)] {
        if let Some(v) = part {
            let weighted = tape.scale(v, T::lit(weight))?;
            total = Some(match total {
                Some(t) => tape.add(t, weighted)?,
                None => weighted,
            });
        }
    }
    let total = total.ok_or_else(|| LossError::Config("no loss component was computed".into()))?;
    Ok(LossParts { total, node, group, membership })
}

/// Brute-force InfoNCE used as a reference in tests and diagnostics.
pub fn reference_contrast(a: &Matrix<f64>, b: &Matrix<f64>, tau: f64) -> f64 {
    let m = a.rows();
    let mut total = 0.0;
    for (x, y) in [(a, b), (b, a)] {
        for i in 0..m {
            let pos = (cosine_similarity(x.row(i), y.row(i)) / tau).exp();
            let denom: f64 = (0..m).map(|k| (cosine_similarity(x.row(i), y.row(k)) / tau).exp()).sum();
            total -= (pos / denom).ln();
        }
    }
    total / (2.0 * m as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed;

    fn value(build: impl FnOnce(&mut Tape<f64>) -> Result<Var, LossError>) -> f64 {
        let mut t = Tape::new();
        let v = build(&mut t).unwrap();
        t.scalar(v)
    }

    fn random(rows: usize, cols: usize, s: u64) -> Matrix<f64> {
        let mut rng = seed::stream(s, &[]);
        Matrix::from_vec(rows, cols, (0..rows * cols).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
    }

    #[test]
    fn cosine_examples() {
        assert_eq!(cosine_similarity(&[1.0, 0.0], &[1.0, 0.0]), 1.0);
        assert_eq!(cosine_similarity(&[1.0, 0.0], &[0.0, 1.0]), 0.0);
        assert!((cosine_similarity(&[3.0, 4.0], &[4.0, 3.0]) - 0.96).abs() < 1e-15);
    }

    #[test]
    fn node_loss_closed_forms() {
        let same = Matrix::filled(4, 3, 0.7);
        let l = value(|t| {
            let (a, b) = (t.constant(same.clone()), t.constant(same.clone()));
            node_loss(t, a, b, 0.5)
        });
        assert!((l - 4f64.ln()).abs() < 1e-12);

        let eye = Matrix::<f64>::identity(3);
        let l = value(|t| {
            let (a, b) = (t.constant(eye.clone()), t.constant(eye.clone()));
            node_loss(t, a, b, 1.0)
        });
        let e = std::f64::consts::E;
        assert!((l + (e / (e + 2.0)).ln()).abs() < 1e-12);
        assert!((l - 0.5514).abs() < 1e-4);
    }

    #[test]
    fn node_loss_matches_reference_and_is_symmetric() {
        let (a, b) = (random(5, 4, 1), random(5, 4, 2));
        let ab = value(|t| {
            let (x, y) = (t.constant(a.clone()), t.constant(b.clone()));
            node_loss(t, x, y, 0.5)
        });
        let ba = value(|t| {
            let (x, y) = (t.constant(b.clone()), t.constant(a.clone()));
            node_loss(t, x, y, 0.5)
        });
        assert!((ab - reference_contrast(&a, &b, 0.5)).abs() < 1e-12);
        assert!((ab - ba).abs() < 1e-12);
    }

    #[test]
    fn group_loss_uses_only_eligible_rows() {
        let y = Matrix::from_rows(&[vec![1.0, 0.0], vec![9.0, 9.0], vec![0.0, 1.0]]).unwrap();
        let eligible: Arc<[usize]> = vec![0, 2].into();
        let l = value(|t| {
            let (a, b) = (t.constant(y.clone()), t.constant(y.clone()));
            group_loss(t, a, b, &eligible, 1.0)
        });
        let e = std::f64::consts::E;
        assert!((l + (e / (e + 1.0)).ln()).abs() < 1e-12);
        let one: Arc<[usize]> = vec![0].into();
        let mut t = Tape::new();
        let a = t.constant(y.clone());
        assert!(matches!(group_loss(&mut t, a, a, &one, 1.0), Err(LossError::Degenerate { .. })));
    }

    #[test]
    fn subsample_with_all_negatives_is_bitwise_full() {
        let (a, b) = (random(6, 3, 3), random(6, 3, 4));
        let full = value(|t| {
            let (x, y) = (t.constant(a.clone()), t.constant(b.clone()));
            node_loss(t, x, y, 0.7)
        });
        let sub = value(|t| {
            let (x, y) = (t.constant(a.clone()), t.constant(b.clone()));
            subsampled_contrast(t, x, y, 0.7, 5, &mut seed::stream(1, &[]))
        });
        assert_eq!(full.to_bits(), sub.to_bits());
        let mut t = Tape::new();
        let x = t.constant(a.clone());
        assert!(subsampled_contrast(&mut t, x, x, 0.7, 6, &mut seed::stream(1, &[])).is_err());
    }

    #[test]
    fn membership_loss_is_two_ln_two_when_discriminator_is_zero() {
        let h = Hypergraph::from_hyperedges(4, &[vec![0, 1], vec![1, 2, 3], vec![0, 3]]).unwrap();
        let targets = MembershipTargets::new(&h);
        let sample = sample_membership_negatives(&targets, None, &mut seed::stream(0, &[]));
        assert_eq!(sample.skipped, 0);
        let run = |mode| {
            value(|t| {
                let z = t.constant(random(4, 2, 5));
                let y = t.constant(random(3, 2, 6));
                let s = t.constant(Matrix::zeros(2, 2));
                membership_loss(t, z, y, z, y, s, &targets, &sample, 1.0, mode)
            })
        };
        assert!((run(MembershipMode::Sampled) - 2.0 * 2f64.ln()).abs() < 1e-12);
        // Uniform scores: each anchored term is ln(1 + number of negatives).
        let expected: f64 = targets
            .memberships
            .iter()
            .map(|&(i, j)| {
                let neg_edges = (0..3).filter(|&k| !targets.contains(i, k)).count();
                let neg_nodes = (0..4).filter(|&v| !targets.contains(v, j)).count();
                ((1 + neg_edges) as f64).ln() + ((1 + neg_nodes) as f64).ln()
            })
            .sum::<f64>()
            / targets.len() as f64;
        assert!((run(MembershipMode::Full) - expected).abs() < 1e-12);
    }

    #[test]
    fn membership_skips_nodes_without_negatives() {
        let h = Hypergraph::from_hyperedges(3, &[vec![0, 1], vec![0, 2]]).unwrap();
        let targets = MembershipTargets::new(&h);
        let sample = sample_membership_negatives(&targets, None, &mut seed::stream(0, &[]));
        assert_eq!(sample.skipped, 2);
        assert_eq!(sample.pairings[0].used.len(), 2);
        for p in &sample.pairings {
            for ((&m, &k), &v) in p.used.iter().zip(&p.hyperedges).zip(&p.nodes) {
                let (i, j) = targets.memberships[m];
                assert!(!targets.contains(i, k) && !targets.contains(v, j));
            }
        }
    }

    #[test]
    fn total_loss_weights() {
        let cfg = LossConfig { omega_g: 4.0, omega_m: 1.0, ..LossConfig::default() };
        assert_eq!(total_loss_value(1.0, 2.0, 3.0, &cfg), 12.0);
        let off = LossConfig { omega_g: 0.0, omega_m: 0.0, ..cfg };
        assert_eq!(total_loss_value(1.0, 2.0, 3.0, &off), 1.0);
        let n_only = LossConfig { components: ComponentSwitches::NODE_ONLY, ..cfg };
        assert_eq!(total_loss_value(1.0, 2.0, 3.0, &n_only), 1.0);
        let mut t = Tape::<f64>::new();
        let parts: Vec<Var> = [1.0, 2.0, 3.0].iter().map(|&v| t.constant(Matrix::filled(1, 1, v))).collect();
        let l = total_loss(&mut t, Some(parts[0]), Some(parts[1]), Some(parts[2]), &cfg).unwrap();
        assert_eq!(t.scalar(l.total), 12.0);
        assert!(LossConfig { tau_n: 0.0, ..cfg }.validate().is_err());
        let none = ComponentSwitches { node: false, group: false, membership: false };
        assert!(LossConfig { components: none, ..cfg }.validate().is_err());
    }
}
