use super::{gae, Agent, PolicyParams};
use crate::momdp::{mo_return, Environment, Trajectory, Transition};
use crate::objective::ObjectiveVector;
use crate::rng::{stream, Rng};
use crate::{Error, Result};

/// One environment step as seen by the learner.
#[derive(Clone, Debug, PartialEq)]
pub struct BatchStep {
    pub state: Vec<f64>,
    /// Sampled action before clamping; log-probabilities refer to this.
    pub action: Vec<f64>,
    pub log_prob: f64,
    pub advantages: ObjectiveVector<f64>,
    pub returns: ObjectiveVector<f64>,
}

/// Steps collected under a single policy snapshot.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RolloutBatch {
    pub steps: Vec<BatchStep>,
    pub trajectories: Vec<Trajectory>,
}

impl RolloutBatch {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn num_objectives(&self) -> usize {
        self.steps.first().map_or(0, |s| s.advantages.m())
    }

    /// Copy whose advantages have zero mean and unit variance per objective.
    /// Objectives with (near) zero spread are only centred.
    pub fn with_normalized_advantages(&self) -> RolloutBatch {
        let m = self.num_objectives();
        let n = self.len() as f64;
        let mut out = self.clone();
        for i in 0..m {
            let mean = self.steps.iter().map(|s| s.advantages[i]).sum::<f64>() / n;
            let var = self
                .steps
                .iter()
                .map(|s| (s.advantages[i] - mean).powi(2))
                .sum::<f64>()
                / n;
            let std = var.sqrt();
            let scale = if std > 1e-8 { 1.0 / std } else { 1.0 };
            for s in &mut out.steps {
                let mut a = s.advantages.clone().into_inner();
                a[i] = (a[i] - mean) * scale;
                s.advantages = ObjectiveVector::new(a);
            }
        }
        out
    }

    /// Mean discounted return over the collected trajectories.
    pub fn mean_return(&self, gamma: f64) -> Result<ObjectiveVector<f64>> {
        mean_vector(self.trajectories.iter().map(|t| mo_return(t, gamma)))
    }
}

fn mean_vector(
    items: impl Iterator<Item = Result<ObjectiveVector<f64>>>,
) -> Result<ObjectiveVector<f64>> {
    let mut sum: Option<ObjectiveVector<f64>> = None;
    let mut n = 0usize;
    for g in items {
        let g = g?;
        match &mut sum {
            Some(s) => s.add_scaled(&g, 1.0),
            None => sum = Some(g),
        }
        n += 1;
    }
    sum.map(|s| s.scaled(1.0 / n as f64))
        .ok_or(Error::Empty("no episodes"))
}

fn rollout(
    env: &dyn Environment,
    policy: &PolicyParams,
    rng: &mut Rng,
    deterministic: bool,
) -> Result<(Trajectory, Vec<Vec<f64>>)> {
    let spec = env.spec();
    let mut state = env.reset(rng);
    let mut traj = Trajectory::default();
    let mut raw_actions = Vec::new();
    for _ in 0..spec.horizon {
        let action = if deterministic {
            policy.act_deterministic(&state)
        } else {
            policy.act(&state, rng)
        };
        let out = env.step(&state, &action)?;
        if !out.reward.is_finite() {
            return Err(Error::NonFinite("reward"));
        }
        traj.transitions.push(Transition {
            state: std::mem::replace(&mut state, out.next_state.clone()),
            action: spec.clamp_action(&action),
            reward: out.reward,
            next_state: out.next_state,
            terminal: out.terminal,
        });
        raw_actions.push(action);
        if out.terminal {
            break;
        }
    }
    Ok((traj, raw_actions))
}

/// Samples `episodes` trajectories with the stochastic policy and attaches
/// per-objective GAE advantages and return targets.
pub fn collect_batch(
    env: &dyn Environment,
    agent: &Agent,
    episodes: usize,
    lambda: f64,
    rng: &mut Rng,
) -> Result<RolloutBatch> {
    let gamma = env.spec().gamma;
    let mut batch = RolloutBatch::default();
    for _ in 0..episodes {
        let (traj, raw) = rollout(env, &agent.policy, rng, false)?;
        let adv = gae(&traj, &agent.critic, gamma, lambda);
        for ((tr, action), a) in traj.transitions.iter().zip(raw).zip(adv) {
            let value = agent.critic.value(&tr.state);
            let returns = ObjectiveVector::new(a.iter().zip(&value).map(|(x, v)| x + v).collect());
            batch.steps.push(BatchStep {
                log_prob: agent.policy.log_prob(&tr.state, &action),
                state: tr.state.clone(),
                action,
                advantages: a,
                returns,
            });
        }
        batch.trajectories.push(traj);
    }
    Ok(batch)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    pub mean: ObjectiveVector<f64>,
    pub episodes: Vec<ObjectiveVector<f64>>,
}

/// Mean discounted return of the deterministic (mean-action) policy. Episode
/// `e` starts from a state drawn with the stream `(seed, e)`, so repeated
/// evaluations share their initial states.
pub fn evaluate(
    env: &dyn Environment,
    policy: &PolicyParams,
    episodes: usize,
    seed: u64,
) -> Result<Evaluation> {
    let gamma = env.spec().gamma;
    let returns = (0..episodes)
        .map(|e| {
            let mut rng = stream(&[crate::rng::domain::EVAL, seed, e as u64]);
            let (traj, _) = rollout(env, policy, &mut rng, true)?;
            mo_return(&traj, gamma)
        })
        .collect::<Result<Vec<_>>>()?;
    let mean = mean_vector(returns.iter().cloned().map(Ok))?;
    Ok(Evaluation {
        mean,
        episodes: returns,
    })
}
