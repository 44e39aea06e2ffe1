use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{read_text, to_json_pretty, write_bytes, DataError};
use crate::hgraph::{Hypergraph, LabeledDataset};
use crate::linalg::Matrix;

pub const DATASET_SCHEMA_VERSION: u32 = 1;

/// Largest node count `parse_hyperedge_text` will infer on its own.
pub const MAX_INFERRED_NODES: usize = 1 << 24;

fn first_repeat(edge: &[usize]) -> Option<usize> {
    let mut sorted = edge.to_vec();
    sorted.sort_unstable();
    sorted.windows(2).find(|w| w[0] == w[1]).map(|w| w[0])
}

/// On-disk dataset layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetFile {
    pub schema_version: u32,
    pub num_nodes: usize,
    pub hyperedges: Vec<Vec<usize>>,
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class_names: Option<Vec<String>>,
}

impl DatasetFile {
    pub fn into_dataset(self) -> Result<LabeledDataset, DataError> {
        if self.schema_version != DATASET_SCHEMA_VERSION {
            return Err(DataError::invalid(
                "schema_version",
                format!("unsupported version {}, expected {DATASET_SCHEMA_VERSION}", self.schema_version),
            ));
        }
        let n = self.num_nodes;
        for (j, e) in self.hyperedges.iter().enumerate() {
            if let Some(p) = e.iter().position(|&v| v >= n) {
                return Err(DataError::invalid(format!("hyperedges[{j}][{p}]"), format!("node {} >= num_nodes {n}", e[p])));
            }
            if let Some(v) = first_repeat(e) {
                return Err(DataError::invalid(format!("hyperedges[{j}]"), format!("node {v} repeated")));
            }
        }
        if self.features.len() != n {
            return Err(DataError::invalid("features", format!("{} rows, expected num_nodes = {n}", self.features.len())));
        }
        let width = self.features.first().map_or(0, Vec::len);
        for (i, row) in self.features.iter().enumerate() {
            if row.len() != width {
                return Err(DataError::invalid(format!("features[{i}]"), format!("{} columns, expected {width}", row.len())));
            }
            if let Some(c) = row.iter().position(|v| !v.is_finite()) {
                return Err(DataError::invalid(format!("features[{i}][{c}]"), "not finite"));
            }
        }
        if self.labels.len() != n {
            return Err(DataError::invalid("labels", format!("{} entries, expected num_nodes = {n}", self.labels.len())));
        }
        let num_classes = match &self.class_names {
            Some(names) => names.len(),
            None => self.labels.iter().max().map_or(0, |m| m.saturating_add(1)),
        };
        if let Some(i) = self.labels.iter().position(|&l| l >= num_classes) {
            return Err(DataError::invalid(
                format!("labels[{i}]"),
                format!("class {} >= number of classes {num_classes}", self.labels[i]),
            ));
        }
        let h = Hypergraph::from_hyperedges(n, &self.hyperedges).map_err(|e| DataError::invalid("hyperedges", e.to_string()))?;
        let data: Vec<f64> = self.features.into_iter().flatten().collect();
        let features = Matrix::from_vec(n, width, data).map_err(|e| DataError::invalid("features", e.to_string()))?;
        let mut d = LabeledDataset::new(h, features, self.labels, num_classes)
            .map_err(|e| DataError::invalid("dataset", e.to_string()))?;
        d.class_names = self.class_names;
        Ok(d)
    }
}

/// File form of a dataset. Hyperedge weights are not stored.
pub fn dataset_to_file(d: &LabeledDataset) -> DatasetFile {
    let h = &d.hypergraph;
    DatasetFile {
        schema_version: DATASET_SCHEMA_VERSION,
        num_nodes: h.num_nodes(),
        hyperedges: (0..h.num_hyperedges()).map(|j| h.nodes_of(j).to_vec()).collect(),
        features: d.features.to_rows(),
        labels: d.labels.clone(),
        class_names: d.class_names.clone(),
    }
}

pub fn parse_dataset(text: &str) -> Result<LabeledDataset, DataError> {
    let file: DatasetFile = serde_json::from_str(text).map_err(DataError::from_json)?;
    file.into_dataset()
}

/// Loads and validates a dataset. Isolated nodes are kept.
pub fn load_dataset(path: &Path) -> Result<LabeledDataset, DataError> {
    parse_dataset(&read_text(path)?).map_err(|e| e.at(path))
}

pub fn save_dataset(d: &LabeledDataset, path: &Path) -> Result<(), DataError> {
    write_bytes(path, to_json_pretty(&dataset_to_file(d)).as_bytes())
}

/// One hyperedge per line, node indices separated by whitespace or commas.
/// Blank lines and lines starting with `#` are skipped. Without
/// `num_nodes`, the node count is one more than the largest index.
pub fn parse_hyperedge_text(text: &str, num_nodes: Option<usize>) -> Result<Hypergraph, DataError> {
    let mut edges = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut edge = Vec::new();
        for (col, tok) in line.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty()).enumerate() {
            let v: usize = tok.parse().map_err(|_| DataError::Parse {
                line: ln + 1,
                column: col + 1,
                message: format!("expected a node index, found {tok:?}"),
            })?;
            edge.push(v);
        }
        if let Some(v) = first_repeat(&edge) {
            return Err(DataError::Parse { line: ln + 1, column: 1, message: format!("node {v} repeated") });
        }
        edges.push(edge);
    }
    let largest = edges.iter().flatten().max().copied();
    let n = match (num_nodes, largest) {
        (Some(n), Some(m)) if m >= n => {
            return Err(DataError::invalid("num_nodes", format!("{n} does not cover node index {m}")))
        }
        (Some(n), _) => n,
        (None, Some(m)) if m >= MAX_INFERRED_NODES => {
            return Err(DataError::invalid(
                "hyperedges",
                format!("node index {m} is too large to infer the node count; pass it explicitly"),
            ))
        }
        (None, m) => m.map_or(0, |m| m + 1),
    };
    Hypergraph::from_hyperedges(n, &edges).map_err(|e| DataError::invalid("hyperedges", e.to_string()))
}
