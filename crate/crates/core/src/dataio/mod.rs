//! File formats: datasets, run configurations, splits, embeddings and
//! trained models.
//!
//! Every `parse_*` function takes untrusted bytes or text and returns a
//! typed [`DataError`] on any malformed input; none of them panic.

mod config;
mod dataset;
mod embeddings;
mod model_file;
mod split;

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

pub use config::{load_config, parse_config, save_config, RunConfigFile};
pub use dataset::{
    dataset_to_file, load_dataset, parse_dataset, parse_hyperedge_text, save_dataset, DatasetFile,
    DATASET_SCHEMA_VERSION, MAX_INFERRED_NODES,
};
pub use embeddings::{
    load_embeddings, parse_embeddings_binary, parse_embeddings_csv, save_embeddings, write_embeddings_binary,
    write_embeddings_csv, EmbeddingFormat, BINARY_HEADER_LEN, BINARY_MAGIC, BINARY_VERSION,
};
pub use model_file::{load_model, model_to_file, parse_model, save_model, ModelFile, TensorRecord, MODEL_SCHEMA_VERSION};
pub use split::{load_split, parse_split, save_split, SplitFile};

#[derive(Debug, Error)]
pub enum DataError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("{field}: {message}")]
    Invalid { field: String, message: String },
}

impl DataError {
    pub(crate) fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self::Invalid { field: field.into(), message: message.into() }
    }

    pub(crate) fn from_json(e: serde_json::Error) -> Self {
        Self::Parse { line: e.line(), column: e.column(), message: e.to_string() }
    }

    /// Attaches a path to an error raised while parsing file contents.
    pub(crate) fn at(self, path: &Path) -> Self {
        match self {
            Self::Invalid { field, message } => Self::Invalid { field: format!("{}: {field}", path.display()), message },
            Self::Parse { line, column, message } => {
                Self::Parse { line, column, message: format!("{}: {message}", path.display()) }
            }
            io => io,
        }
    }
}

pub(crate) fn read_text(path: &Path) -> Result<String, DataError> {
    fs::read_to_string(path).map_err(|source| DataError::Io { path: path.to_path_buf(), source })
}

pub(crate) fn read_bytes(path: &Path) -> Result<Vec<u8>, DataError> {
    fs::read(path).map_err(|source| DataError::Io { path: path.to_path_buf(), source })
}

pub(crate) fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), DataError> {
    fs::write(path, bytes).map_err(|source| DataError::Io { path: path.to_path_buf(), source })
}

pub(crate) fn to_json_pretty<S: serde::Serialize>(value: &S) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}
