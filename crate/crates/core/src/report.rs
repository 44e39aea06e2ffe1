//! Dataset statistics and the per-run summary record.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dataio::{self, DataError, RunConfigFile};
use crate::eval::{ClassificationSummary, ClusteringSummary};
use crate::hgraph::LabeledDataset;
use crate::loss::LossBreakdown;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub nodes: usize,
    pub hyperedges: usize,
    pub memberships: usize,
    pub avg_hyperedge_size: f64,
    pub max_hyperedge_size: usize,
    pub avg_node_degree: f64,
    pub max_node_degree: usize,
    pub features: usize,
    pub classes: usize,
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Degrees here are membership counts, ignoring hyperedge weights.
pub fn dataset_stats(d: &LabeledDataset) -> DatasetStats {
    let h = &d.hypergraph;
    let (n, m, nnz) = (h.num_nodes(), h.num_hyperedges(), h.num_memberships());
    DatasetStats {
        nodes: n,
        hyperedges: m,
        memberships: nnz,
        avg_hyperedge_size: ratio(nnz, m),
        max_hyperedge_size: (0..m).map(|j| h.hyperedge_size(j)).max().unwrap_or(0),
        avg_node_degree: ratio(nnz, n),
        max_node_degree: (0..n).map(|i| h.hyperedges_of(i).len()).max().unwrap_or(0),
        features: d.num_features(),
        classes: d.num_classes,
    }
}

impl DatasetStats {
    /// Two-column text table, one statistic per line.
    pub fn to_table(&self) -> String {
        let rows = [
            ("# nodes", self.nodes.to_string()),
            ("# hyperedges", self.hyperedges.to_string()),
            ("# memberships", self.memberships.to_string()),
            ("avg. hyperedge size", format!("{:.2}", self.avg_hyperedge_size)),
            ("max. hyperedge size", self.max_hyperedge_size.to_string()),
            ("avg. node degree", format!("{:.2}", self.avg_node_degree)),
            ("max. node degree", self.max_node_degree.to_string()),
            ("# features", self.features.to_string()),
            ("# classes", self.classes.to_string()),
        ];
        rows.iter().map(|(k, v)| format!("{k:<20} {v}\n")).collect()
    }
}

/// One structured record per run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSummary {
    pub config: RunConfigFile,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub loss_trace: Vec<f64>,
    #[serde(default)]
    pub loss_breakdown: Vec<LossBreakdown>,
    #[serde(default)]
    pub skipped_memberships: usize,
    /// Mean wall-clock milliseconds per epoch.
    #[serde(default)]
    pub mean_epoch_ms: Option<f64>,
    #[serde(default)]
    pub classification: Option<ClassificationSummary>,
    #[serde(default)]
    pub clustering: Option<ClusteringSummary>,
    #[serde(default)]
    pub silhouette: Option<f64>,
    #[serde(default)]
    pub artifacts: BTreeMap<String, String>,
    /// SHA-256 of the record without timings, artifact paths or the digest itself.
    #[serde(default)]
    pub digest: String,
}

impl RunSummary {
    pub fn new(config: RunConfigFile, seeds: Vec<u64>) -> Self {
        Self {
            config,
            seeds,
            loss_trace: Vec::new(),
            loss_breakdown: Vec::new(),
            skipped_memberships: 0,
            mean_epoch_ms: None,
            classification: None,
            clustering: None,
            silhouette: None,
            artifacts: BTreeMap::new(),
            digest: String::new(),
        }
    }

    pub fn compute_digest(&self) -> String {
        let stripped =
            Self { mean_epoch_ms: None, artifacts: BTreeMap::new(), digest: String::new(), ..self.clone() };
        let bytes = serde_json::to_vec(&stripped).expect("plain data serializes");
        hex::encode(Sha256::digest(&bytes))
    }

    /// Recomputes the digest in place.
    pub fn seal(&mut self) {
        self.digest = self.compute_digest();
    }
}

pub fn parse_summary(text: &str) -> Result<RunSummary, DataError> {
    serde_json::from_str(text).map_err(DataError::from_json)
}

pub fn load_summary(path: &Path) -> Result<RunSummary, DataError> {
    parse_summary(&dataio::read_text(path)?).map_err(|e| e.at(path))
}

/// Seals the digest and writes pretty JSON.
pub fn save_summary(summary: &mut RunSummary, path: &Path) -> Result<(), DataError> {
    summary.seal();
    dataio::write_bytes(path, dataio::to_json_pretty(summary).as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hgraph::Hypergraph;
    use crate::linalg::Matrix;

    #[test]
    fn stats_of_a_single_edge() {
        let h = Hypergraph::from_hyperedges(3, &[vec![0, 2]]).unwrap();
        let d = LabeledDataset::new(h, Matrix::zeros(3, 4), vec![0, 1, 0], 2).unwrap();
        let s = dataset_stats(&d);
        assert_eq!((s.nodes, s.hyperedges, s.memberships, s.max_hyperedge_size), (3, 1, 2, 2));
        assert_eq!(s.avg_hyperedge_size, 2.0);
        assert_eq!(s.max_node_degree, 1);
        assert!(s.to_table().contains("avg. node degree     0.67"));
    }

    #[test]
    fn digest_ignores_timings_and_paths() {
        let mut a = RunSummary::new(RunConfigFile::default(), vec![3]);
        a.loss_trace = vec![2.0, 1.5];
        let mut b = a.clone();
        b.mean_epoch_ms = Some(12.5);
        b.artifacts.insert("model".into(), "/tmp/m.json".into());
        a.seal();
        b.seal();
        assert_eq!(a.digest, b.digest);
        b.loss_trace[1] = 1.25;
        assert_ne!(a.digest, b.compute_digest());
    }

    #[test]
    fn summary_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.json");
        let mut s = RunSummary::new(RunConfigFile::default(), vec![0, 1]);
        s.silhouette = Some(0.25);
        save_summary(&mut s, &p).unwrap();
        let back = load_summary(&p).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.compute_digest(), back.digest);
    }
}
