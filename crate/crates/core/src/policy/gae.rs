use super::CriticParams;
use crate::momdp::Trajectory;
use crate::objective::ObjectiveVector;

/// Generalized advantage estimation, run independently for each objective.
///
/// `values[t]` is `V(s_t)`; `bootstrap` is `V(s_T)` for the state after the
/// last step and is ignored when that step is terminal.
pub fn gae_from_values(
    rewards: &[&ObjectiveVector<f64>],
    values: &[Vec<f64>],
    bootstrap: &[f64],
    last_terminal: bool,
    gamma: f64,
    lambda: f64,
) -> Vec<ObjectiveVector<f64>> {
    let n = rewards.len();
    let Some(first) = rewards.first() else {
        return Vec::new();
    };
    let m = first.m();
    let mut out = vec![vec![0.0; m]; n];
    for i in 0..m {
        let mut running = 0.0;
        for t in (0..n).rev() {
            let (next_value, cont) = if t + 1 < n {
                (values[t + 1][i], 1.0)
            } else if last_terminal {
                (0.0, 0.0)
            } else {
                (bootstrap[i], 1.0)
            };
            let delta = rewards[t][i] + gamma * cont * next_value - values[t][i];
            running = delta + gamma * lambda * cont * running;
            out[t][i] = running;
        }
    }
    out.into_iter().map(ObjectiveVector::new).collect()
}

/// Per-step, per-objective advantages for one trajectory.
pub fn gae(
    trajectory: &Trajectory,
    critic: &CriticParams,
    gamma: f64,
    lambda: f64,
) -> Vec<ObjectiveVector<f64>> {
    let Some(last) = trajectory.transitions.last() else {
        return Vec::new();
    };
    let values: Vec<Vec<f64>> = trajectory
        .transitions
        .iter()
        .map(|t| critic.value(&t.state))
        .collect();
    let bootstrap = critic.value(&last.next_state);
    let rewards: Vec<&ObjectiveVector<f64>> = trajectory.rewards().collect();
    gae_from_values(&rewards, &values, &bootstrap, last.terminal, gamma, lambda)
}
