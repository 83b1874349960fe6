use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::HasObjectives;
use crate::objective::ObjectiveVector;
use crate::policy::Agent;

/// How a policy snapshot came to exist.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Warmup,
    ParetoAscent,
    PaftPair,
    PaftExtreme,
}

impl Source {
    pub fn as_str(self) -> &'static str {
        match self {
            Source::Warmup => "warmup",
            Source::ParetoAscent => "pareto_ascent",
            Source::PaftPair => "paft_pair",
            Source::PaftExtreme => "paft_extreme",
        }
    }
}

/// An evaluated policy snapshot. `id` names the stored parameters and is
/// also the checkpoint file stem when a run is written out.
#[derive(Clone, Debug)]
pub struct PolicyEntry {
    pub id: String,
    pub agent: Arc<Agent>,
    pub objectives: ObjectiveVector<f64>,
    pub generation: usize,
    pub source: Source,
}

impl HasObjectives<f64> for PolicyEntry {
    fn objectives(&self) -> &[f64] {
        &self.objectives
    }
}
