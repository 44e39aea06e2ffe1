use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{read_text, to_json_pretty, write_bytes, DataError};
use crate::linalg::Matrix;
use crate::model::{ModelDims, ModelParams};
use crate::trainer::TrainedModel;

pub const MODEL_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensorRecord {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

/// Trained parameters with the architecture needed to rebuild them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub schema_version: u32,
    pub dims: ModelDims,
    pub self_loops: bool,
    #[serde(default)]
    pub loss_trace: Vec<f64>,
    pub tensors: Vec<TensorRecord>,
}

pub fn model_to_file(model: &TrainedModel) -> ModelFile {
    let p = &model.params;
    ModelFile {
        schema_version: MODEL_SCHEMA_VERSION,
        dims: *p.dims(),
        self_loops: model.self_loops,
        loss_trace: model.loss_trace.clone(),
        tensors: p
            .specs()
            .iter()
            .zip(p.tensors())
            .map(|(s, t)| TensorRecord { name: s.name.clone(), rows: t.rows(), cols: t.cols(), data: t.as_slice().to_vec() })
            .collect(),
    }
}

impl ModelFile {
    pub fn into_model(self) -> Result<TrainedModel, DataError> {
        if self.schema_version != MODEL_SCHEMA_VERSION {
            return Err(DataError::invalid("schema_version", format!("unsupported version {}", self.schema_version)));
        }
        // Every layer owns at least one tensor, so this bounds the layout size
        // before it is built.
        if self.dims.layers > self.tensors.len() {
            return Err(DataError::invalid("dims.layers", format!("{} layers but only {} tensors", self.dims.layers, self.tensors.len())));
        }
        let mut tensors = Vec::with_capacity(self.tensors.len());
        for (i, t) in self.tensors.iter().enumerate() {
            if t.rows.checked_mul(t.cols) != Some(t.data.len()) {
                return Err(DataError::invalid(
                    format!("tensors[{i}]"),
                    format!("{} values for shape {}x{}", t.data.len(), t.rows, t.cols),
                ));
            }
            if t.data.iter().any(|v| !v.is_finite()) {
                return Err(DataError::invalid(format!("tensors[{i}]"), "not finite"));
            }
            tensors.push(Matrix::from_vec(t.rows, t.cols, t.data.clone()).expect("length checked"));
        }
        let params = ModelParams::from_tensors(self.dims, tensors).map_err(|e| DataError::invalid("tensors", e.to_string()))?;
        for (i, (spec, t)) in params.specs().iter().zip(&self.tensors).enumerate() {
            if spec.name != t.name {
                return Err(DataError::invalid(format!("tensors[{i}].name"), format!("found {:?}, expected {:?}", t.name, spec.name)));
            }
        }
        Ok(TrainedModel {
            params,
            self_loops: self.self_loops,
            loss_trace: self.loss_trace,
            breakdown: Vec::new(),
            epoch_ms: Vec::new(),
            skipped_memberships: 0,
        })
    }
}

pub fn parse_model(text: &str) -> Result<TrainedModel, DataError> {
    let file: ModelFile = serde_json::from_str(text).map_err(DataError::from_json)?;
    file.into_model()
}

pub fn load_model(path: &Path) -> Result<TrainedModel, DataError> {
    parse_model(&read_text(path)?).map_err(|e| e.at(path))
}

pub fn save_model(model: &TrainedModel, path: &Path) -> Result<(), DataError> {
    write_bytes(path, to_json_pretty(&model_to_file(model)).as_bytes())
}
