//! Vector-reward Markov decision processes and the built-in environments.
//!
//! Environments are stateless: the state is passed to [`Environment::step`]
//! and returned from it, so one instance can serve any number of rollouts.

mod point;
mod quadratic;

pub use point::{MoPoint, MoPointParams};
pub use quadratic::{simplex_lattice, MoQuadratic};

use serde::{Deserialize, Serialize};

use crate::objective::ObjectiveVector;
use crate::rng::Rng;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomdpSpec {
    pub state_dim: usize,
    pub action_dim: usize,
    pub num_objectives: usize,
    pub horizon: usize,
    pub gamma: f64,
    /// Closed interval per action dimension.
    pub action_bounds: Vec<(f64, f64)>,
}

impl MomdpSpec {
    pub fn validate(&self) -> Result<()> {
        if self.state_dim == 0 || self.action_dim == 0 {
            return Err(Error::Invalid("state and action dimensions must be positive".into()));
        }
        if self.num_objectives < 2 {
            return Err(Error::UnsupportedObjectives(self.num_objectives));
        }
        if self.horizon == 0 {
            return Err(Error::Invalid("horizon must be at least 1".into()));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::Invalid(format!("gamma {} outside (0, 1]", self.gamma)));
        }
        if self.action_bounds.len() != self.action_dim
            || self.action_bounds.iter().any(|(lo, hi)| !(lo <= hi))
        {
            return Err(Error::Invalid("one ordered bound pair per action dimension".into()));
        }
        Ok(())
    }

    pub fn clamp_action(&self, action: &[f64]) -> Vec<f64> {
        action
            .iter()
            .zip(&self.action_bounds)
            .map(|(&a, &(lo, hi))| a.clamp(lo, hi))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepOutcome {
    pub next_state: Vec<f64>,
    pub reward: ObjectiveVector<f64>,
    pub terminal: bool,
}

pub trait Environment: Send + Sync {
    fn name(&self) -> &str;

    fn spec(&self) -> &MomdpSpec;

    /// Initial state; all randomness comes from `rng`.
    fn reset(&self, rng: &mut Rng) -> Vec<f64>;

    /// Advances one step. `action` is clamped to the action bounds.
    fn step(&self, state: &[f64], action: &[f64]) -> Result<StepOutcome>;

    fn reset_seeded(&self, seed: u64) -> Vec<f64> {
        self.reset(&mut crate::rng::stream(&[seed]))
    }
}

pub(crate) fn check_action(spec: &MomdpSpec, state: &[f64], action: &[f64]) -> Result<Vec<f64>> {
    if action.len() != spec.action_dim {
        return Err(Error::DimensionMismatch {
            expected: spec.action_dim,
            actual: action.len(),
        });
    }
    if state.len() != spec.state_dim {
        return Err(Error::DimensionMismatch {
            expected: spec.state_dim,
            actual: state.len(),
        });
    }
    if !action.iter().all(|a| a.is_finite()) {
        return Err(Error::NonFinite("action"));
    }
    Ok(spec.clamp_action(action))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Transition {
    pub state: Vec<f64>,
    /// The action as executed, i.e. after clamping.
    pub action: Vec<f64>,
    pub reward: ObjectiveVector<f64>,
    pub next_state: Vec<f64>,
    pub terminal: bool,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trajectory {
    pub transitions: Vec<Transition>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    /// States chain from step to step and nothing follows a terminal step.
    pub fn is_consistent(&self) -> bool {
        self.transitions.windows(2).all(|w| {
            !w[0].terminal && w[0].next_state == w[1].state
        })
    }

    pub fn rewards(&self) -> impl Iterator<Item = &ObjectiveVector<f64>> {
        self.transitions.iter().map(|t| &t.reward)
    }
}

/// Discounted vector return `G_i = sum_t gamma^t r_i(t)`.
pub fn mo_return(trajectory: &Trajectory, gamma: f64) -> Result<ObjectiveVector<f64>> {
    let first = trajectory
        .transitions
        .first()
        .ok_or(Error::Empty("trajectory"))?;
    let mut g = ObjectiveVector::zeros(first.reward.m());
    let mut discount = 1.0;
    for r in trajectory.rewards() {
        g.add_scaled(r, discount);
        discount *= gamma;
    }
    Ok(g)
}

/// Environment settings as they appear in an experiment config.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum EnvConfig {
    MoPoint(MoPointParams),
    MoQuadratic {
        #[serde(default = "quadratic::default_targets2")]
        targets: Vec<Vec<f64>>,
        #[serde(default = "quadratic::default_bounds")]
        action_bounds: (f64, f64),
    },
    MoQuadratic3 {
        #[serde(default = "quadratic::default_targets3")]
        targets: Vec<Vec<f64>>,
        #[serde(default = "quadratic::default_bounds")]
        action_bounds: (f64, f64),
    },
}

impl EnvConfig {
    /// A named environment with default parameters.
    pub fn by_name(name: &str) -> Result<Self> {
        Ok(match name {
            "mo_point" => EnvConfig::MoPoint(MoPointParams::default()),
            "mo_quadratic" => EnvConfig::MoQuadratic {
                targets: quadratic::default_targets2(),
                action_bounds: quadratic::default_bounds(),
            },
            "mo_quadratic3" => EnvConfig::MoQuadratic3 {
                targets: quadratic::default_targets3(),
                action_bounds: quadratic::default_bounds(),
            },
            _ => return Err(Error::config("env.name", format!("unknown environment `{name}`"))),
        })
    }

    pub fn build(&self, gamma: f64) -> Result<Box<dyn Environment>> {
        Ok(match self {
            EnvConfig::MoPoint(p) => Box::new(MoPoint::new(p.clone(), gamma)?),
            EnvConfig::MoQuadratic {
                targets,
                action_bounds,
            } => {
                if targets.len() != 2 {
                    return Err(Error::config("env.targets", "mo_quadratic needs two targets"));
                }
                Box::new(MoQuadratic::new("mo_quadratic", targets.clone(), *action_bounds)?)
            }
            EnvConfig::MoQuadratic3 {
                targets,
                action_bounds,
            } => {
                if targets.len() != 3 {
                    return Err(Error::config("env.targets", "mo_quadratic3 needs three targets"));
                }
                Box::new(MoQuadratic::new("mo_quadratic3", targets.clone(), *action_bounds)?)
            }
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            EnvConfig::MoPoint(_) => "mo_point",
            EnvConfig::MoQuadratic { .. } => "mo_quadratic",
            EnvConfig::MoQuadratic3 { .. } => "mo_quadratic3",
        }
    }
}
