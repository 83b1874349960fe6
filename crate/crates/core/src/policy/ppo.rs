use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{Adam, Agent, PolicyParams, RolloutBatch};
use crate::pareto::{GradientSet, WeightVector};
use crate::rng::Rng;
use crate::{Error, Result};

const OMEGA_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PpoConfig {
    pub clip_eps: f64,
    pub epochs: usize,
    pub minibatches: usize,
    pub lr: f64,
    pub critic_lr: f64,
    pub lambda: f64,
    /// Episodes collected per iteration.
    pub batch_episodes: usize,
    /// Standardize each objective's advantages per batch before use.
    pub normalize_advantages: bool,
}

impl Default for PpoConfig {
    fn default() -> Self {
        PpoConfig {
            clip_eps: 0.2,
            epochs: 10,
            minibatches: 4,
            lr: 3e-3,
            critic_lr: 1e-2,
            lambda: 0.95,
            batch_episodes: 64,
            normalize_advantages: true,
        }
    }
}

impl PpoConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |f: &str, r: &str| Err(Error::config(format!("ppo.{f}"), r));
        if !(self.clip_eps > 0.0) {
            return bad("clip_eps", "must be positive");
        }
        if self.epochs == 0 || self.minibatches == 0 || self.batch_episodes == 0 {
            return bad("epochs", "epochs, minibatches and batch_episodes must be positive");
        }
        if !(self.lr > 0.0 && self.critic_lr > 0.0) {
            return bad("lr", "learning rates must be positive");
        }
        if !(0.0..=1.0).contains(&self.lambda) {
            return bad("lambda", "must lie in [0, 1]");
        }
        Ok(())
    }
}

/// Sample estimate of each objective's policy gradient: row `i` is the batch
/// mean of `grad log pi(a|s) * A_i`.
pub fn estimate_gradient_set(
    policy: &PolicyParams,
    batch: &RolloutBatch,
) -> Result<GradientSet<f64>> {
    if batch.is_empty() {
        return Err(Error::Empty("rollout batch"));
    }
    let m = batch.num_objectives();
    let mut g = GradientSet::zeros(m, policy.dim());
    let inv_n = 1.0 / batch.len() as f64;
    for step in &batch.steps {
        let score = policy.log_prob_grad(&step.state, &step.action);
        for i in 0..m {
            let a = step.advantages[i] * inv_n;
            if a == 0.0 {
                continue;
            }
            for (r, &s) in g.row_mut(i).iter_mut().zip(&score) {
                *r += a * s;
            }
        }
    }
    if !g.is_finite() {
        return Err(Error::NonFinite("gradient estimate"));
    }
    Ok(g)
}

/// Clipped-surrogate ascent on the scalarized advantage `omega . A`, plus
/// regression of the vector critic onto the batch return targets.
pub fn ppo_update(
    agent: &Agent,
    batch: &RolloutBatch,
    omega: &[f64],
    cfg: &PpoConfig,
    rng: &mut Rng,
) -> Result<Agent> {
    let omega = WeightVector::with_tolerance(omega.to_vec(), OMEGA_TOLERANCE)?;
    if batch.is_empty() {
        return Err(Error::Empty("rollout batch"));
    }
    if omega.m() != batch.num_objectives() {
        return Err(Error::DimensionMismatch {
            expected: batch.num_objectives(),
            actual: omega.m(),
        });
    }
    let scalar_adv: Vec<f64> = batch
        .steps
        .iter()
        .map(|s| s.advantages.dot(&omega))
        .collect();

    let mut policy = agent.policy.clone();
    let mut critic = agent.critic.clone();
    let mut policy_opt = Adam::new(policy.dim(), cfg.lr);
    let mut critic_opt = Adam::new(critic.values.len(), cfg.critic_lr);

    let n = batch.len();
    let chunks = cfg.minibatches.min(n).max(1);
    let mut order: Vec<usize> = (0..n).collect();
    let mut pgrad = vec![0.0; policy.dim()];
    let mut cgrad = vec![0.0; critic.values.len()];

    for _ in 0..cfg.epochs {
        order.shuffle(rng);
        for c in 0..chunks {
            let mb = &order[c * n / chunks..(c + 1) * n / chunks];
            pgrad.iter_mut().for_each(|v| *v = 0.0);
            cgrad.iter_mut().for_each(|v| *v = 0.0);
            let inv = 1.0 / mb.len() as f64;
            for &k in mb {
                let step = &batch.steps[k];
                let adv = scalar_adv[k];
                if adv != 0.0 {
                    let (logp, score) = policy.log_prob_and_grad(&step.state, &step.action);
                    let ratio = (logp - step.log_prob).exp();
                    // the unclipped term is the active branch of the min
                    let active = if adv >= 0.0 {
                        ratio <= 1.0 + cfg.clip_eps
                    } else {
                        ratio >= 1.0 - cfg.clip_eps
                    };
                    if active {
                        let w = ratio * adv * inv;
                        for (g, s) in pgrad.iter_mut().zip(&score) {
                            *g += w * s;
                        }
                    }
                }
                critic.accumulate_regression_grad(&step.state, &step.returns, &mut cgrad);
            }
            cgrad.iter_mut().for_each(|v| *v *= inv);
            policy_opt.step(&mut policy.values, &pgrad, true);
            policy.clamp_log_std();
            critic_opt.step(&mut critic.values, &cgrad, false);
        }
    }
    if !policy.is_finite() || !critic.values.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite("updated parameters"));
    }
    Ok(Agent { policy, critic })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::momdp::{Environment, MoQuadratic};
    use crate::objective::ObjectiveVector;
    use crate::policy::{collect_batch, evaluate, BatchStep, PolicyConfig};
    use crate::rng::stream;

    fn quad() -> MoQuadratic {
        MoQuadratic::new("mo_quadratic", vec![vec![1.0, 0.0], vec![0.0, 1.0]], (0.0, 1.0)).unwrap()
    }

    fn agent(seed: u64) -> Agent {
        Agent::init(1, 2, 2, &PolicyConfig::default(), &mut stream(&[seed]))
    }

    fn set_advantages(batch: &RolloutBatch, f: impl Fn(usize) -> Vec<f64>) -> RolloutBatch {
        let mut b = batch.clone();
        for (k, s) in b.steps.iter_mut().enumerate() {
            s.advantages = ObjectiveVector::new(f(k));
        }
        b
    }

    #[test]
    fn zero_advantages_give_zero_gradients() {
        let env = quad();
        let a = agent(1);
        let batch = collect_batch(&env, &a, 8, 0.95, &mut stream(&[2])).unwrap();
        let zero = set_advantages(&batch, |_| vec![0.0, 0.0]);
        let g = estimate_gradient_set(&a.policy, &zero).unwrap();
        assert!(g.rows().all(|r| r.iter().all(|&v| v == 0.0)));

        let ones = set_advantages(&batch, |_| vec![1.0, 1.0]);
        let g = estimate_gradient_set(&a.policy, &ones).unwrap();
        assert_eq!(g.row(0), g.row(1));

        let updated = ppo_update(&a, &zero, &[0.5, 0.5], &PpoConfig::default(), &mut stream(&[3]))
            .unwrap();
        assert_eq!(updated.policy, a.policy);
    }

    #[test]
    fn single_step_expansion() {
        let a = agent(4);
        let step = BatchStep {
            state: vec![0.0],
            action: vec![0.3, 0.8],
            log_prob: a.policy.log_prob(&[0.0], &[0.3, 0.8]),
            advantages: ObjectiveVector::new(vec![2.0, -1.0]),
            returns: ObjectiveVector::zeros(2),
        };
        let batch = RolloutBatch {
            steps: vec![step],
            trajectories: vec![],
        };
        let g = estimate_gradient_set(&a.policy, &batch).unwrap();
        let score = a.policy.log_prob_grad(&[0.0], &[0.3, 0.8]);
        for k in 0..score.len() {
            assert_eq!(g.row(0)[k], 2.0 * score[k]);
            assert_eq!(g.row(1)[k], -score[k]);
        }
    }

    #[test]
    fn empty_batch_is_an_error() {
        let a = agent(1);
        assert!(estimate_gradient_set(&a.policy, &RolloutBatch::default()).is_err());
        assert!(ppo_update(&a, &RolloutBatch::default(), &[0.5, 0.5], &PpoConfig::default(), &mut stream(&[1])).is_err());
    }

    #[test]
    fn gradient_rows_are_linear_in_advantages() {
        let env = quad();
        let a = agent(5);
        let batch = collect_batch(&env, &a, 16, 0.95, &mut stream(&[6])).unwrap();
        let scaled = set_advantages(&batch, |k| {
            vec![batch.steps[k].advantages[0] * -3.0, batch.steps[k].advantages[1]]
        });
        let g = estimate_gradient_set(&a.policy, &batch).unwrap();
        let gs = estimate_gradient_set(&a.policy, &scaled).unwrap();
        for k in 0..g.d() {
            assert!((gs.row(0)[k] + 3.0 * g.row(0)[k]).abs() < 1e-12);
            assert_eq!(gs.row(1)[k], g.row(1)[k]);
        }
    }

    #[test]
    fn off_simplex_weights_rejected() {
        let env = quad();
        let a = agent(1);
        let batch = collect_batch(&env, &a, 4, 0.95, &mut stream(&[2])).unwrap();
        let r = ppo_update(&a, &batch, &[0.6, 0.6], &PpoConfig::default(), &mut stream(&[3]));
        assert!(matches!(r, Err(Error::OffSimplex(_))));
        // within the 1e-6 tolerance
        assert!(ppo_update(&a, &batch, &[0.5, 0.5 + 5e-7], &PpoConfig::default(), &mut stream(&[3])).is_ok());
    }

    #[test]
    fn vertex_weight_ignores_other_objectives() {
        let env = quad();
        let a = agent(7);
        let batch = collect_batch(&env, &a, 16, 0.95, &mut stream(&[8])).unwrap();
        let cfg = PpoConfig::default();
        let only_first = set_advantages(&batch, |k| vec![batch.steps[k].advantages[0], 0.0]);
        let garbage = set_advantages(&batch, |k| vec![batch.steps[k].advantages[0], 17.0 * k as f64]);
        let u1 = ppo_update(&a, &only_first, &[1.0, 0.0], &cfg, &mut stream(&[9])).unwrap();
        let u2 = ppo_update(&a, &garbage, &[1.0, 0.0], &cfg, &mut stream(&[9])).unwrap();
        assert_eq!(u1.policy, u2.policy);

        // only objective-2 advantages nonzero: no surrogate gradient under e_1
        let second_only = set_advantages(&batch, |k| vec![0.0, batch.steps[k].advantages[1]]);
        let u3 = ppo_update(&a, &second_only, &[1.0, 0.0], &cfg, &mut stream(&[9])).unwrap();
        assert_eq!(u3.policy, a.policy);
    }

    #[test]
    fn scalarized_return_improves_over_rounds() {
        let env = quad();
        let mut a = agent(10);
        let cfg = PpoConfig::default();
        let w = [0.5, 0.5];
        let score = |a: &Agent| evaluate(&env, &a.policy, 1, 0).unwrap().mean.dot(&w);
        let initial = score(&a);
        let mut rng = stream(&[11]);
        for _ in 0..10 {
            let batch = collect_batch(&env, &a, 64, cfg.lambda, &mut rng)
                .unwrap()
                .with_normalized_advantages();
            a = ppo_update(&a, &batch, &w, &cfg, &mut rng).unwrap();
        }
        let fin = score(&a);
        assert!(fin >= initial, "{initial} -> {fin}");
        // optimum is -0.5 at a = (0.5, 0.5)
        assert!(fin > -0.6, "{fin}");
        assert_eq!(env.spec().num_objectives, 2);
    }
}
