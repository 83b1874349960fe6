//! The generational training loop.
//!
//! Warmup trains `p` policies on evenly spread fixed weights. Each generation
//! then selects lineages with [`pgr_select`] and pushes each along its own
//! min-norm ascent direction; from generation `M_ft` on, half of the lanes
//! instead fine-tune archive members chosen by [`paft_select`]. Every
//! intermediate snapshot is evaluated and offered to the archive.

mod paft;
mod pgr;
mod trainer;

pub use paft::{gap_pairs, gap_weights, nearest_neighbours, paft_select, FinetuneJob, JobKind};
pub use pgr::{distance_to_ref, pgr_select, spiral_directions, PgrPick, Regions};
pub use trainer::{
    even_weights, run_generation, run_training, warmup, GenerationMetrics, LaneRecord, Population,
    SelectionRecord, TrainingConfig, TrainingOutcome, TrainingState,
};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Generation schedule and selection settings. Keys follow the usual
/// notation: `M` generations, PA-FT from generation `M_ft`, `m_iters`
/// iterations per generation, `m_w` warmup iterations, population `p`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerationConfig {
    #[serde(rename = "M")]
    pub total_generations: usize,
    /// Defaults to `max(1, M / 3)`.
    #[serde(rename = "M_ft", default, skip_serializing_if = "Option::is_none")]
    pub paft_start: Option<usize>,
    #[serde(default = "default_m_iters")]
    pub m_iters: usize,
    #[serde(default = "default_m_w")]
    pub m_w: usize,
    #[serde(default = "default_p")]
    pub p: usize,
    /// PGR regions; defaults to the number of PGR lanes in each generation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default = "default_k")]
    pub k: usize,
    pub reference_point: Vec<f64>,
    /// Recompute the ascent weights every this many iterations; 0 computes
    /// them once per generation.
    #[serde(default)]
    pub recompute_interval: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_m_iters() -> usize {
    20
}
fn default_m_w() -> usize {
    20
}
fn default_p() -> usize {
    8
}
fn default_k() -> usize {
    2
}

impl GenerationConfig {
    pub fn paft_start(&self) -> usize {
        self.paft_start
            .unwrap_or_else(|| (self.total_generations / 3).max(1))
    }

    /// Lanes `(p_a, p_b)` for a zero-based generation index.
    pub fn lane_split(&self, gen_index: usize, paft_enabled: bool) -> (usize, usize) {
        if paft_enabled && gen_index >= self.paft_start() {
            (self.p / 2, self.p / 2)
        } else {
            (self.p, 0)
        }
    }

    pub fn validate(&self, m: usize) -> Result<()> {
        let bad = |f: &str, r: String| Err(Error::config(format!("evolution.{f}"), r));
        if self.p == 0 || !self.p.is_multiple_of(2) {
            return bad("p", format!("population size must be positive and even, got {}", self.p));
        }
        if self.p < m {
            return bad("p", format!("population of {} cannot cover {m} objective extremes", self.p));
        }
        if self.total_generations > 0 {
            let ft = self.paft_start();
            if ft < 1 || ft > self.total_generations {
                return bad("M_ft", format!("must lie in [1, M = {}], got {ft}", self.total_generations));
            }
        }
        if self.n == Some(0) {
            return bad("n", "must be at least 1".into());
        }
        if self.k == 0 {
            return bad("k", "must be at least 1".into());
        }
        if self.reference_point.len() != m {
            return bad(
                "reference_point",
                format!("needs {m} components, got {}", self.reference_point.len()),
            );
        }
        if !self.reference_point.iter().all(|v| v.is_finite()) {
            return bad("reference_point", "must be finite".into());
        }
        Ok(())
    }
}

/// Fine-tuning settings. `enabled = false` gives the ablation without it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PaftConfig {
    pub enabled: bool,
    /// Gap pairs per generation; defaults to what fits in `p/2` lanes next to
    /// the `m` extreme jobs (at least one).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_pairs: Option<usize>,
}

impl Default for PaftConfig {
    fn default() -> Self {
        PaftConfig {
            enabled: true,
            n_pairs: None,
        }
    }
}

impl PaftConfig {
    pub fn n_pairs(&self, p: usize, m: usize) -> usize {
        self.n_pairs
            .unwrap_or_else(|| ((p / 2).saturating_sub(m) / 2).max(1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> GenerationConfig {
        toml::from_str("M = 6\nreference_point = [0.0, 0.0]").unwrap()
    }

    #[test]
    fn defaults_and_split() {
        let c = cfg();
        assert_eq!(c.p, 8);
        assert_eq!(c.paft_start(), 2);
        assert_eq!(c.lane_split(0, true), (8, 0));
        assert_eq!(c.lane_split(1, true), (8, 0));
        assert_eq!(c.lane_split(2, true), (4, 4));
        assert_eq!(c.lane_split(5, false), (8, 0));
        assert!(c.validate(2).is_ok());
    }

    #[test]
    fn validation_errors_name_fields() {
        let mut c = cfg();
        c.p = 7;
        assert!(c.validate(2).unwrap_err().to_string().contains("evolution.p"));
        let mut c = cfg();
        c.paft_start = Some(9);
        assert!(c.validate(2).unwrap_err().to_string().contains("evolution.M_ft"));
        let mut c = cfg();
        c.p = 2;
        assert!(c.validate(3).is_err());
        let c = cfg();
        assert!(c.validate(3).unwrap_err().to_string().contains("reference_point"));
    }

    #[test]
    fn zero_generations_is_valid() {
        let mut c = cfg();
        c.total_generations = 0;
        assert!(c.validate(2).is_ok());
    }

    #[test]
    fn pair_defaults() {
        let p = PaftConfig::default();
        assert_eq!(p.n_pairs(8, 2), 1);
        assert_eq!(p.n_pairs(10, 3), 1);
        assert_eq!(p.n_pairs(16, 2), 3);
    }
}
