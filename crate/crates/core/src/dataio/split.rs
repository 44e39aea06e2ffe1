use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{read_text, to_json_pretty, write_bytes, DataError};
use crate::hgraph::Split;

/// A split together with the seed that generated it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitFile {
    pub seed: u64,
    pub train: Vec<usize>,
    pub valid: Vec<usize>,
    pub test: Vec<usize>,
}

impl SplitFile {
    pub fn new(seed: u64, split: &Split) -> Self {
        Self { seed, train: split.train.clone(), valid: split.valid.clone(), test: split.test.clone() }
    }

    pub fn split(&self) -> Split {
        Split { train: self.train.clone(), valid: self.valid.clone(), test: self.test.clone() }
    }

    fn validate(&self, num_nodes: Option<usize>) -> Result<(), DataError> {
        let mut seen = HashSet::new();
        for (name, part) in [("train", &self.train), ("valid", &self.valid), ("test", &self.test)] {
            for (p, &i) in part.iter().enumerate() {
                if !seen.insert(i) {
                    return Err(DataError::invalid(format!("{name}[{p}]"), format!("node {i} appears twice")));
                }
                if let Some(n) = num_nodes {
                    if i >= n {
                        return Err(DataError::invalid(format!("{name}[{p}]"), format!("node {i} >= num_nodes {n}")));
                    }
                }
            }
        }
        if let Some(n) = num_nodes {
            if seen.len() != n {
                return Err(DataError::invalid("split", format!("covers {} of {n} nodes", seen.len())));
            }
        }
        Ok(())
    }
}

/// Parses a split file, checking disjointness and, when `num_nodes` is
/// given, that the parts cover exactly the nodes `0..num_nodes`.
pub fn parse_split(text: &str, num_nodes: Option<usize>) -> Result<SplitFile, DataError> {
    let file: SplitFile = serde_json::from_str(text).map_err(DataError::from_json)?;
    file.validate(num_nodes)?;
    Ok(file)
}

pub fn load_split(path: &Path, num_nodes: Option<usize>) -> Result<SplitFile, DataError> {
    parse_split(&read_text(path)?, num_nodes).map_err(|e| e.at(path))
}

pub fn save_split(file: &SplitFile, path: &Path) -> Result<(), DataError> {
    write_bytes(path, to_json_pretty(file).as_bytes())
}
