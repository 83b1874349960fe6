use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{check_action, Environment, MomdpSpec, StepOutcome};
use crate::objective::ObjectiveVector;
use crate::rng::Rng;
use crate::Result;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MoPointParams {
    pub horizon: usize,
    /// Velocity is multiplied by this every step before the action is applied.
    pub damping: f64,
    pub dt: f64,
    pub alive_reward: f64,
    /// Constant added to the energy objective to keep it positive.
    pub energy_shift: f64,
    /// Initial position is uniform in `[-init_noise, init_noise]^2`.
    pub init_noise: f64,
    pub action_limit: f64,
}

impl Default for MoPointParams {
    fn default() -> Self {
        MoPointParams {
            horizon: 64,
            damping: 0.95,
            dt: 0.1,
            alive_reward: 1.0,
            energy_shift: 2.0,
            init_noise: 0.05,
            action_limit: 1.0,
        }
    }
}

/// Point mass in the plane driven by a 2D acceleration.
///
/// State is `(x, y, vx, vy)`. Objective 0 rewards forward speed
/// (`vx + alive`), objective 1 rewards energy efficiency
/// (`-|a|^2 + alive + shift`).
#[derive(Clone, Debug)]
pub struct MoPoint {
    params: MoPointParams,
    spec: MomdpSpec,
}

impl MoPoint {
    pub fn new(params: MoPointParams, gamma: f64) -> Result<Self> {
        let spec = MomdpSpec {
            state_dim: 4,
            action_dim: 2,
            num_objectives: 2,
            horizon: params.horizon,
            gamma,
            action_bounds: vec![(-params.action_limit, params.action_limit); 2],
        };
        spec.validate()?;
        Ok(MoPoint { params, spec })
    }

    pub fn params(&self) -> &MoPointParams {
        &self.params
    }
}

impl Environment for MoPoint {
    fn name(&self) -> &str {
        "mo_point"
    }

    fn spec(&self) -> &MomdpSpec {
        &self.spec
    }

    fn reset(&self, rng: &mut Rng) -> Vec<f64> {
        let n = self.params.init_noise;
        let mut pos = || if n > 0.0 { rng.random_range(-n..=n) } else { 0.0 };
        vec![pos(), pos(), 0.0, 0.0]
    }

    fn step(&self, state: &[f64], action: &[f64]) -> Result<StepOutcome> {
        let a = check_action(&self.spec, state, action)?;
        let p = &self.params;
        let vx = p.damping * state[2] + p.dt * a[0];
        let vy = p.damping * state[3] + p.dt * a[1];
        let next_state = vec![state[0] + p.dt * vx, state[1] + p.dt * vy, vx, vy];
        let effort: f64 = a.iter().map(|v| v * v).sum();
        let reward = ObjectiveVector::new(vec![
            vx + p.alive_reward,
            -effort + p.alive_reward + p.energy_shift,
        ]);
        Ok(StepOutcome {
            next_state,
            reward,
            terminal: false,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn env() -> MoPoint {
        MoPoint::new(MoPointParams::default(), 0.99).unwrap()
    }

    #[test]
    fn reward_formulas() {
        let env = env();
        // a = (0.5, 0.5): |a|^2 = 0.5 and vx = 0.95 * v0 + 0.05 = 0.3 for v0 = 0.25/0.95
        let v0 = 0.25 / 0.95;
        let out = env.step(&[0.0, 0.0, v0, 0.0], &[0.5, 0.5]).unwrap();
        assert!((out.next_state[2] - 0.3).abs() < 1e-12);
        assert!((out.reward[0] - 1.3).abs() < 1e-12);
        assert!((out.reward[1] - 2.5).abs() < 1e-12);
        assert!(!out.terminal);
    }

    #[test]
    fn zero_action_zero_velocity() {
        let out = env().step(&[0.3, -0.2, 0.0, 0.0], &[0.0, 0.0]).unwrap();
        assert_eq!(out.reward.as_slice(), &[1.0, 3.0]);
    }

    #[test]
    fn actions_are_clamped() {
        let env = env();
        let big = env.step(&[0.0; 4], &[5.0, -7.0]).unwrap();
        let edge = env.step(&[0.0; 4], &[1.0, -1.0]).unwrap();
        assert_eq!(big, edge);
    }

    #[test]
    fn non_finite_action_rejected() {
        assert!(env().step(&[0.0; 4], &[f64::NAN, 0.0]).is_err());
        assert!(env().step(&[0.0; 4], &[0.0]).is_err());
    }

    #[test]
    fn reset_randomizes_only_position() {
        let env = env();
        let a = env.reset(&mut stream(&[1]));
        let b = env.reset(&mut stream(&[2]));
        assert_eq!(a, env.reset(&mut stream(&[1])));
        assert_ne!(a[..2], b[..2]);
        for s in [&a, &b] {
            assert!(s[0].abs() <= 0.05 && s[1].abs() <= 0.05);
            assert_eq!(&s[2..], &[0.0, 0.0]);
        }
    }
}
