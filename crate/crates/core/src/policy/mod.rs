//! Gaussian policies, the vector-valued critic, and the PPO machinery that
//! turns per-objective advantages into gradients and weighted updates.

mod adam;
pub mod checkpoint;
mod gae;
mod network;
mod ppo;
mod rollout;

pub use adam::Adam;
pub use gae::{gae, gae_from_values};
pub use network::{Activations, NetworkShape};
pub use ppo::{estimate_gradient_set, ppo_update, PpoConfig};
pub use rollout::{collect_batch, evaluate, BatchStep, Evaluation, RolloutBatch};

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::rng::Rng;
use crate::{Error, Result};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Policy architecture and initialization settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PolicyConfig {
    /// Hidden tanh units; 0 selects a linear mean.
    pub hidden: usize,
    pub init_log_std: f64,
    pub log_std_min: f64,
    pub log_std_max: f64,
    /// Scale of the initial output-layer weights.
    pub init_output_scale: f64,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        PolicyConfig {
            hidden: 32,
            init_log_std: -1.0,
            log_std_min: -5.0,
            log_std_max: 2.0,
            init_output_scale: 0.01,
        }
    }
}

/// Diagonal Gaussian policy. `values` holds the mean network parameters
/// followed by one log standard deviation per action dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct PolicyParams {
    pub shape: NetworkShape,
    pub values: Vec<f64>,
    pub log_std_bounds: (f64, f64),
}

impl PolicyParams {
    pub fn init(state_dim: usize, action_dim: usize, cfg: &PolicyConfig, rng: &mut Rng) -> Self {
        let shape = NetworkShape {
            input: state_dim,
            hidden: cfg.hidden,
            output: action_dim,
        };
        let mut values = shape.init(rng, cfg.init_output_scale);
        values.extend(std::iter::repeat_n(cfg.init_log_std, action_dim));
        let mut p = PolicyParams {
            shape,
            values,
            log_std_bounds: (cfg.log_std_min, cfg.log_std_max),
        };
        p.clamp_log_std();
        p
    }

    /// All-zero mean network with the given log standard deviation.
    pub fn zeros(shape: NetworkShape, log_std: f64, log_std_bounds: (f64, f64)) -> Self {
        let mut values = vec![0.0; shape.num_params()];
        values.extend(std::iter::repeat_n(log_std, shape.output));
        PolicyParams {
            shape,
            values,
            log_std_bounds,
        }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn state_dim(&self) -> usize {
        self.shape.input
    }

    pub fn action_dim(&self) -> usize {
        self.shape.output
    }

    fn net(&self) -> &[f64] {
        &self.values[..self.shape.num_params()]
    }

    pub fn log_std(&self) -> &[f64] {
        &self.values[self.shape.num_params()..]
    }

    pub fn clamp_log_std(&mut self) {
        let (lo, hi) = self.log_std_bounds;
        let n = self.shape.num_params();
        for v in &mut self.values[n..] {
            *v = v.clamp(lo, hi);
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn mean(&self, state: &[f64]) -> Vec<f64> {
        self.shape.forward(self.net(), state).output
    }

    /// Samples `mean + std * N(0, I)`.
    pub fn act(&self, state: &[f64], rng: &mut Rng) -> Vec<f64> {
        let mean = self.mean(state);
        mean.iter()
            .zip(self.log_std())
            .map(|(&mu, &ls)| {
                let z: f64 = StandardNormal.sample(rng);
                mu + ls.exp() * z
            })
            .collect()
    }

    /// The mean action.
    pub fn act_deterministic(&self, state: &[f64]) -> Vec<f64> {
        self.mean(state)
    }

    pub fn log_prob(&self, state: &[f64], action: &[f64]) -> f64 {
        let mean = self.mean(state);
        gaussian_log_prob(&mean, self.log_std(), action)
    }

    /// Gradient of `log pi(action | state)` with respect to every parameter.
    pub fn log_prob_grad(&self, state: &[f64], action: &[f64]) -> Vec<f64> {
        self.log_prob_and_grad(state, action).1
    }

    pub fn log_prob_and_grad(&self, state: &[f64], action: &[f64]) -> (f64, Vec<f64>) {
        let n = self.shape.num_params();
        let act = self.shape.forward(self.net(), state);
        let log_std = self.log_std();
        let mut grad = vec![0.0; self.values.len()];
        let mut dmean = vec![0.0; action.len()];
        for (j, (&a, (&mu, &ls))) in action.iter().zip(act.output.iter().zip(log_std)).enumerate() {
            let inv_var = (-2.0 * ls).exp();
            let diff = a - mu;
            dmean[j] = diff * inv_var;
            grad[n + j] = diff * diff * inv_var - 1.0;
        }
        self.shape
            .backward(self.net(), state, &act, &dmean, &mut grad[..n]);
        (gaussian_log_prob(&act.output, log_std, action), grad)
    }
}

fn gaussian_log_prob(mean: &[f64], log_std: &[f64], action: &[f64]) -> f64 {
    mean.iter()
        .zip(log_std)
        .zip(action)
        .map(|((&mu, &ls), &a)| {
            let z = (a - mu) * (-ls).exp();
            -0.5 * z * z - ls - 0.5 * LN_2PI
        })
        .sum()
}

/// Value function with one output per objective.
#[derive(Clone, Debug, PartialEq)]
pub struct CriticParams {
    pub shape: NetworkShape,
    pub values: Vec<f64>,
}

impl CriticParams {
    pub fn init(state_dim: usize, num_objectives: usize, hidden: usize, rng: &mut Rng) -> Self {
        let shape = NetworkShape {
            input: state_dim,
            hidden,
            output: num_objectives,
        };
        CriticParams {
            values: shape.init(rng, 1.0),
            shape,
        }
    }

    pub fn zeros(shape: NetworkShape) -> Self {
        CriticParams {
            values: vec![0.0; shape.num_params()],
            shape,
        }
    }

    pub fn value(&self, state: &[f64]) -> Vec<f64> {
        self.shape.forward(&self.values, state).output
    }

    /// Accumulates the gradient of `0.5 |V(state) - target|^2` into `grad`.
    pub fn accumulate_regression_grad(&self, state: &[f64], target: &[f64], grad: &mut [f64]) {
        let act = self.shape.forward(&self.values, state);
        let dy: Vec<f64> = act.output.iter().zip(target).map(|(v, t)| v - t).collect();
        self.shape.backward(&self.values, state, &act, &dy, grad);
    }
}

/// A policy together with its critic: the unit that is trained and stored.
#[derive(Clone, Debug, PartialEq)]
pub struct Agent {
    pub policy: PolicyParams,
    pub critic: CriticParams,
}

impl Agent {
    pub fn init(
        state_dim: usize,
        action_dim: usize,
        num_objectives: usize,
        cfg: &PolicyConfig,
        rng: &mut Rng,
    ) -> Self {
        Agent {
            policy: PolicyParams::init(state_dim, action_dim, cfg, rng),
            critic: CriticParams::init(state_dim, num_objectives, cfg.hidden, rng),
        }
    }

    pub fn num_objectives(&self) -> usize {
        self.critic.shape.output
    }

    pub fn check_env(&self, spec: &crate::momdp::MomdpSpec) -> Result<()> {
        let pairs = [
            (spec.state_dim, self.policy.state_dim()),
            (spec.action_dim, self.policy.action_dim()),
            (spec.num_objectives, self.num_objectives()),
        ];
        for (expected, actual) in pairs {
            if expected != actual {
                return Err(Error::DimensionMismatch { expected, actual });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use rand::Rng as _;

    fn random_policy(rng: &mut Rng, hidden: usize) -> PolicyParams {
        let shape = NetworkShape {
            input: 3,
            hidden,
            output: 2,
        };
        let mut p = PolicyParams::zeros(shape, 0.0, (-5.0, 2.0));
        for v in &mut p.values {
            *v = rng.random_range(-1.0..1.0);
        }
        p
    }

    #[test]
    fn zero_policy_samples_standard_normal() {
        let shape = NetworkShape {
            input: 2,
            hidden: 4,
            output: 2,
        };
        let p = PolicyParams::zeros(shape, 0.0, (-5.0, 2.0));
        let mut rng = stream(&[3]);
        let n = 20_000;
        let (mut s1, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let a = p.act(&[0.5, -0.5], &mut rng);
            s1 += a[0];
            s2 += a[0] * a[0];
        }
        let mean = s1 / n as f64;
        let var = s2 / n as f64 - mean * mean;
        // 5 standard errors
        assert!(mean.abs() < 5.0 / (n as f64).sqrt());
        assert!((var - 1.0).abs() < 5.0 * (2.0 / n as f64).sqrt());
        assert_eq!(p.act_deterministic(&[0.5, -0.5]), vec![0.0, 0.0]);
    }

    #[test]
    fn sampling_is_reproducible() {
        let mut rng = stream(&[11]);
        let p = random_policy(&mut rng, 4);
        let a = p.act(&[0.1, 0.2, 0.3], &mut stream(&[5]));
        let b = p.act(&[0.1, 0.2, 0.3], &mut stream(&[5]));
        assert_eq!(a, b);
    }

    #[test]
    fn score_at_mean() {
        let mut rng = stream(&[12]);
        let p = random_policy(&mut rng, 4);
        let s = [0.2, -0.1, 0.7];
        let mean = p.mean(&s);
        let g = p.log_prob_grad(&s, &mean);
        let n = p.shape.num_params();
        assert!(g[..n].iter().all(|v| v.abs() < 1e-12));
        for &v in &g[n..] {
            assert!((v + 1.0).abs() < 1e-12);
        }
        // finite-difference confirmation of the log-std entries
        for j in 0..2 {
            let mut pp = p.clone();
            let mut pm = p.clone();
            pp.values[n + j] += 1e-5;
            pm.values[n + j] -= 1e-5;
            let fd = (pp.log_prob(&s, &mean) - pm.log_prob(&s, &mean)) / 2e-5;
            assert!((fd + 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn log_prob_grad_matches_central_differences() {
        let mut rng = stream(&[13]);
        for hidden in [0, 5] {
            for _ in 0..20 {
                let p = random_policy(&mut rng, hidden);
                let s: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
                let a: Vec<f64> = (0..2).map(|_| rng.random_range(-2.0..2.0)).collect();
                let g = p.log_prob_grad(&s, &a);
                for k in 0..p.dim() {
                    let mut pp = p.clone();
                    let mut pm = p.clone();
                    pp.values[k] += 1e-5;
                    pm.values[k] -= 1e-5;
                    let fd = (pp.log_prob(&s, &a) - pm.log_prob(&s, &a)) / 2e-5;
                    assert!((fd - g[k]).abs() <= 1e-4 * fd.abs().max(1.0), "{fd} vs {}", g[k]);
                }
            }
        }
    }

    #[test]
    fn log_std_is_clamped_at_init() {
        let cfg = PolicyConfig {
            init_log_std: 9.0,
            ..PolicyConfig::default()
        };
        let p = PolicyParams::init(1, 2, &cfg, &mut stream(&[1]));
        assert_eq!(p.log_std(), &[2.0, 2.0]);
    }

    #[test]
    fn agent_shape_check() {
        let a = Agent::init(1, 2, 2, &PolicyConfig::default(), &mut stream(&[1]));
        let env = crate::momdp::MoQuadratic::new(
            "mo_quadratic",
            vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]],
            (0.0, 1.0),
        )
        .unwrap();
        use crate::momdp::Environment;
        assert!(matches!(
            a.check_env(env.spec()),
            Err(Error::DimensionMismatch { expected: 3, actual: 2 })
        ));
    }
}
