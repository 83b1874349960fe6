use super::{check_action, Environment, MomdpSpec, StepOutcome};
use crate::objective::ObjectiveVector;
use crate::rng::Rng;
use crate::{Error, Result};

pub(super) fn default_targets2() -> Vec<Vec<f64>> {
    vec![vec![1.0, 0.0], vec![0.0, 1.0]]
}

pub(super) fn default_targets3() -> Vec<Vec<f64>> {
    vec![
        vec![1.0, 0.0, 0.0],
        vec![0.0, 1.0, 0.0],
        vec![0.0, 0.0, 1.0],
    ]
}

pub(super) fn default_bounds() -> (f64, f64) {
    (0.0, 1.0)
}

/// Single-step bandit with one quadratic target per objective:
/// `r_i = -|a - c_i|^2`.
///
/// The Pareto set is the convex hull of the targets, and for simplex weights
/// `w` the scalarized optimum is `a = sum_i w_i c_i`. The state is a constant
/// zero of dimension one.
#[derive(Clone, Debug)]
pub struct MoQuadratic {
    name: &'static str,
    targets: Vec<Vec<f64>>,
    spec: MomdpSpec,
}

impl MoQuadratic {
    pub fn new(name: &'static str, targets: Vec<Vec<f64>>, bounds: (f64, f64)) -> Result<Self> {
        let d = targets.first().map_or(0, Vec::len);
        if d == 0 || targets.iter().any(|c| c.len() != d) {
            return Err(Error::config("env.targets", "targets must share a positive dimension"));
        }
        let spec = MomdpSpec {
            state_dim: 1,
            action_dim: d,
            num_objectives: targets.len(),
            horizon: 1,
            gamma: 1.0,
            action_bounds: vec![bounds; d],
        };
        spec.validate()?;
        for c in &targets {
            if c.iter().any(|&v| v < bounds.0 || v > bounds.1) {
                return Err(Error::config("env.targets", "targets must lie inside the action bounds"));
            }
        }
        Ok(MoQuadratic {
            name,
            targets,
            spec,
        })
    }

    pub fn targets(&self) -> &[Vec<f64>] {
        &self.targets
    }

    pub fn reward(&self, action: &[f64]) -> ObjectiveVector<f64> {
        ObjectiveVector::new(
            self.targets
                .iter()
                .map(|c| -c.iter().zip(action).map(|(ci, ai)| (ai - ci).powi(2)).sum::<f64>())
                .collect(),
        )
    }

    /// Maximizer of `w . r` over actions.
    pub fn optimal_action(&self, weights: &[f64]) -> Vec<f64> {
        let mut a = vec![0.0; self.spec.action_dim];
        for (c, &w) in self.targets.iter().zip(weights) {
            for (ai, ci) in a.iter_mut().zip(c) {
                *ai += w * ci;
            }
        }
        a
    }

    /// Rewards of the optimal actions for a lattice of weights of the given
    /// resolution, i.e. a dense sample of the Pareto front.
    pub fn front_sample(&self, resolution: usize) -> Vec<ObjectiveVector<f64>> {
        simplex_lattice(self.targets.len(), resolution)
            .iter()
            .map(|w| self.reward(&self.optimal_action(w)))
            .collect()
    }

    /// Worst reward any in-bounds action can receive, per objective. A valid
    /// hypervolume reference point.
    pub fn worst_case(&self) -> ObjectiveVector<f64> {
        ObjectiveVector::new(
            self.targets
                .iter()
                .map(|c| {
                    -c.iter()
                        .zip(&self.spec.action_bounds)
                        .map(|(&ci, &(lo, hi))| (ci - lo).abs().max((hi - ci).abs()).powi(2))
                        .sum::<f64>()
                })
                .collect(),
        )
    }
}

/// All points of the simplex with coordinates in `{0, 1/res, ..., 1}`.
pub fn simplex_lattice(m: usize, res: usize) -> Vec<Vec<f64>> {
    fn rec(m: usize, left: usize, res: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<f64>>) {
        if cur.len() == m - 1 {
            cur.push(left);
            out.push(cur.iter().map(|&k| k as f64 / res as f64).collect());
            cur.pop();
            return;
        }
        for k in 0..=left {
            cur.push(k);
            rec(m, left - k, res, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(m, res, res, &mut Vec::with_capacity(m), &mut out);
    out
}

impl Environment for MoQuadratic {
    fn name(&self) -> &str {
        self.name
    }

    fn spec(&self) -> &MomdpSpec {
        &self.spec
    }

    fn reset(&self, _rng: &mut Rng) -> Vec<f64> {
        vec![0.0]
    }

    fn step(&self, state: &[f64], action: &[f64]) -> Result<StepOutcome> {
        let a = check_action(&self.spec, state, action)?;
        Ok(StepOutcome {
            next_state: vec![0.0],
            reward: self.reward(&a),
            terminal: true,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn env2() -> MoQuadratic {
        MoQuadratic::new("mo_quadratic", default_targets2(), default_bounds()).unwrap()
    }

    #[test]
    fn reset_is_origin() {
        let e = env2();
        assert_eq!(e.reset(&mut stream(&[0])), vec![0.0]);
        assert_eq!(e.reset_seeded(0), e.reset_seeded(0));
    }

    #[test]
    fn reward_at_own_target() {
        let e = env2();
        let out = e.step(&[0.0], &[1.0, 0.0]).unwrap();
        assert_eq!(out.reward.as_slice(), &[0.0, -2.0]);
        assert!(out.terminal);
    }

    #[test]
    fn optimal_action_maximizes_weighted_reward() {
        let e = env2();
        for w in [[0.3, 0.7], [0.9, 0.1], [0.5, 0.5]] {
            let best = e.optimal_action(&w);
            let v = e.reward(&best).dot(&w);
            for dx in [-1e-3, 1e-3] {
                for dy in [-1e-3, 1e-3] {
                    let v2 = e.reward(&[best[0] + dx, best[1] + dy]).dot(&w);
                    assert!(v2 < v);
                }
            }
        }
    }

    #[test]
    fn worst_case_bounds_rewards() {
        let e = env2();
        assert_eq!(e.worst_case().as_slice(), &[-2.0, -2.0]);
        let e3 = MoQuadratic::new("mo_quadratic3", default_targets3(), default_bounds()).unwrap();
        assert_eq!(e3.worst_case().as_slice(), &[-3.0, -3.0, -3.0]);
    }

    #[test]
    fn lattice_sizes() {
        assert_eq!(simplex_lattice(2, 7).len(), 8);
        assert_eq!(simplex_lattice(3, 2).len(), 6);
        assert_eq!(simplex_lattice(3, 100).len(), 5151);
        for w in simplex_lattice(3, 5) {
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}
