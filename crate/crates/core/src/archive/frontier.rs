use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{hypervolume, sparsity, ReferencePoint, Source};
use crate::{Error, Result};

pub const FRONTIER_SCHEMA_VERSION: u32 = 1;

/// Exported non-dominated set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrontierDoc {
    pub schema_version: u32,
    pub experiment_id: String,
    pub m: usize,
    pub reference_point: Vec<f64>,
    pub entries: Vec<FrontierEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrontierEntry {
    pub objectives: Vec<f64>,
    pub generation: usize,
    pub source: Source,
    /// Checkpoint path relative to the run directory.
    pub checkpoint: String,
}

impl FrontierDoc {
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != FRONTIER_SCHEMA_VERSION {
            return Err(Error::Invalid(format!(
                "unsupported frontier schema version {}",
                self.schema_version
            )));
        }
        if self.reference_point.len() != self.m {
            return Err(Error::DimensionMismatch {
                expected: self.m,
                actual: self.reference_point.len(),
            });
        }
        for e in &self.entries {
            if e.objectives.len() != self.m {
                return Err(Error::DimensionMismatch {
                    expected: self.m,
                    actual: e.objectives.len(),
                });
            }
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<&[f64]> {
        self.entries.iter().map(|e| e.objectives.as_slice()).collect()
    }

    pub fn hypervolume(&self) -> Result<f64> {
        hypervolume(&self.points(), &ReferencePoint::new(self.reference_point.clone()))
    }

    pub fn sparsity(&self) -> Option<f64> {
        sparsity(&self.points())
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: FrontierDoc = serde_json::from_str(text)?;
        doc.validate()?;
        Ok(doc)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}
