//! Exact bi-level solutions over deterministic stationary policies.
//!
//! For a fixed leader policy the follower faces an ordinary MDP, so its best
//! response comes from value iteration rather than enumeration. Among
//! follower-optimal responses the one best for the leader is chosen (strong
//! Stackelberg), then the lowest action index per state.

use serde::{Deserialize, Serialize};

use super::{JointPolicy, MarkovGameModel};
use crate::error::{Error, Result};

/// Leader policies enumerated at most.
pub const ENUMERATION_LIMIT: f64 = 1e6;

const VI_TOL: f64 = 1e-13;

fn tie_tol(v: f64) -> f64 {
    1e-9 * (1.0 + v.abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OracleMethod {
    /// The leader reached the best value any joint policy gives it, so no
    /// search was needed.
    UpperBoundAttained,
    /// Every deterministic leader policy was tried.
    Exhaustive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BirlSolution {
    pub policy: JointPolicy,
    /// Values under the start distribution.
    pub leader_value: f64,
    pub follower_value: f64,
    pub method: OracleMethod,
}

/// Value iteration for one agent over `n_actions` choices per state, where
/// `cell(s, a)` maps to the model's joint-action index. `allowed` restricts
/// the choices per state.
fn value_iteration(
    model: &MarkovGameModel,
    n_actions: usize,
    cell: &dyn Fn(usize, usize) -> usize,
    agent: usize,
    allowed: Option<&[Vec<bool>]>,
) -> Vec<f64> {
    let mut v = vec![0.0; model.n_states()];
    for _ in 0..1_000_000 {
        let mut delta: f64 = 0.0;
        for s in model.non_terminal_states() {
            let mut best = f64::NEG_INFINITY;
            for a in 0..n_actions {
                if allowed.is_some_and(|al| !al[s][a]) {
                    continue;
                }
                best = best.max(backup(model, cell(s, a), agent, &v));
            }
            delta = delta.max((best - v[s]).abs());
            v[s] = best;
        }
        if delta < VI_TOL {
            break;
        }
    }
    v
}

fn backup(model: &MarkovGameModel, i: usize, agent: usize, v: &[f64]) -> f64 {
    let r = model.rewards[i];
    let r = if agent == 1 { r.0 } else { r.1 };
    r + model.gamma * model.transitions[i].iter().map(|&(n, p)| p * v[n]).sum::<f64>()
}

fn greedy(
    model: &MarkovGameModel,
    n_actions: usize,
    cell: &dyn Fn(usize, usize) -> usize,
    agent: usize,
    allowed: Option<&[Vec<bool>]>,
    v: &[f64],
) -> Vec<usize> {
    (0..model.n_states())
        .map(|s| {
            if model.is_terminal(s) {
                return 0;
            }
            (0..n_actions)
                .filter(|&a| allowed.is_none_or(|al| al[s][a]))
                .find(|&a| backup(model, cell(s, a), agent, v) >= v[s] - tie_tol(v[s]))
                .unwrap_or(0)
        })
        .collect()
}

/// The follower's best response to a stationary leader policy, with ties
/// broken toward the leader and then toward the lowest action.
pub fn follower_best_response(model: &MarkovGameModel, leader: &[usize]) -> Vec<usize> {
    let n2 = model.n_follower_actions();
    let cell = |s: usize, a: usize| model.index(s, leader[s], a);
    let v2 = value_iteration(model, n2, &cell, 2, None);
    let allowed: Vec<Vec<bool>> = (0..model.n_states())
        .map(|s| {
            (0..n2)
                .map(|a| model.is_terminal(s) || backup(model, cell(s, a), 2, &v2) >= v2[s] - tie_tol(v2[s]))
                .collect()
        })
        .collect();
    let v1 = value_iteration(model, n2, &cell, 1, Some(&allowed));
    greedy(model, n2, &cell, 1, Some(&allowed), &v1)
}

/// The leader's best response to a stationary follower policy.
pub fn leader_best_response(model: &MarkovGameModel, follower: &[usize]) -> Vec<usize> {
    let n1 = model.n_leader_actions();
    let cell = |s: usize, a: usize| model.index(s, a, follower[s]);
    let v1 = value_iteration(model, n1, &cell, 1, None);
    greedy(model, n1, &cell, 1, None, &v1)
}

/// Whether neither agent can raise its start-distribution value by
/// switching to another deterministic stationary policy.
pub fn is_nash(model: &MarkovGameModel, policy: &JointPolicy, tol: f64) -> Result<bool> {
    let values = model.evaluate_joint_policy(policy)?;
    let leader = policy.leader();
    let follower = policy.follower();
    let br1 = JointPolicy::from_parts(&leader_best_response(model, &follower), &follower);
    let br2 = JointPolicy::from_parts(&leader, &follower_best_response(model, &leader));
    let v_br1 = model.evaluate_joint_policy(&br1)?;
    let v_br2 = model.evaluate_joint_policy(&br2)?;
    Ok(model.initial_value(&v_br1.v1) <= model.initial_value(&values.v1) + tol
        && model.initial_value(&v_br2.v2) <= model.initial_value(&values.v2) + tol)
}

fn respond(model: &MarkovGameModel, leader: &[usize]) -> Result<(JointPolicy, f64, f64)> {
    let follower = follower_best_response(model, leader);
    let policy = JointPolicy::from_parts(leader, &follower);
    let v = model.evaluate_joint_policy(&policy)?;
    Ok((policy, model.initial_value(&v.v1), model.initial_value(&v.v2)))
}

/// Solves the bi-level problem exactly over deterministic stationary
/// policies.
///
/// The best value the leader can get under *any* joint policy bounds the
/// answer from above. If the leader half of a joint policy attaining that
/// bound also attains it against the follower's best response, it is
/// returned directly. Otherwise every leader policy is tried in
/// lexicographic order (state 0 most significant) and the first strict
/// maximizer wins.
pub fn birl_oracle(model: &MarkovGameModel) -> Result<BirlSolution> {
    birl_oracle_with_limit(model, ENUMERATION_LIMIT)
}

pub fn birl_oracle_with_limit(model: &MarkovGameModel, limit: f64) -> Result<BirlSolution> {
    let (n1, n2) = (model.n_leader_actions(), model.n_follower_actions());
    let joint = |s: usize, a: usize| model.index(s, a / n2, a % n2);
    let bound_v = value_iteration(model, n1 * n2, &joint, 1, None);
    let bound = model.initial_value(&bound_v);
    let joint_policy = greedy(model, n1 * n2, &joint, 1, None, &bound_v);
    let candidate: Vec<usize> = joint_policy.iter().map(|a| a / n2).collect();
    let (policy, v1, v2) = respond(model, &candidate)?;
    if v1 >= bound - tie_tol(bound) {
        return Ok(BirlSolution {
            policy,
            leader_value: v1,
            follower_value: v2,
            method: OracleMethod::UpperBoundAttained,
        });
    }

    let free: Vec<usize> = model.non_terminal_states().collect();
    let count = (n1 as f64).powi(free.len() as i32);
    if count > limit {
        return Err(Error::EnumerationTooLarge { count, limit });
    }
    let mut leader = vec![0usize; model.n_states()];
    let mut best: Option<(JointPolicy, f64, f64)> = None;
    loop {
        let (policy, v1, v2) = respond(model, &leader)?;
        if best.as_ref().is_none_or(|b| v1 > b.1 + tie_tol(b.1)) {
            best = Some((policy, v1, v2));
        }
        // Mixed-radix increment, last free state least significant.
        let mut k = free.len();
        loop {
            if k == 0 {
                let (policy, leader_value, follower_value) = best.expect("at least one candidate");
                return Ok(BirlSolution { policy, leader_value, follower_value, method: OracleMethod::Exhaustive });
            }
            k -= 1;
            let s = free[k];
            leader[s] += 1;
            if leader[s] < n1 {
                break;
            }
            leader[s] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::markov_game::{make_counterexample_env, make_grid_env, make_matrix_env, GridConfig};
    use crate::matrix_game::MatrixGame;

    #[test]
    fn counterexample_solution_is_b_a() {
        let m = make_counterexample_env(0.9).unwrap();
        let sol = birl_oracle(&m).unwrap();
        assert_eq!(sol.policy.get(0), (1, 0));
        assert!((sol.leader_value - 10.0).abs() < 1e-9);
        assert!(sol.follower_value.abs() < 1e-9);
    }

    #[test]
    fn maintain_needs_enumeration() {
        let m = make_matrix_env(&MatrixGame::maintain());
        let sol = birl_oracle(&m).unwrap();
        assert_eq!(sol.method, OracleMethod::Exhaustive);
        assert_eq!(sol.policy.get(0), (0, 0));
        assert_eq!((sol.leader_value, sol.follower_value), (20.0, 15.0));
    }

    #[test]
    fn enumeration_guard() {
        let m = make_matrix_env(&MatrixGame::maintain());
        assert!(matches!(
            birl_oracle_with_limit(&m, 2.0),
            Err(Error::EnumerationTooLarge { .. })
        ));
    }

    #[test]
    fn grid_solution_reaches_twenty() {
        let cfg = GridConfig::default();
        let m = make_grid_env(&cfg).unwrap();
        let sol = birl_oracle(&m).unwrap();
        let path = m.rollout(&sol.policy, m.start_state());
        let last = path.last().unwrap();
        assert!(last.terminal);
        assert_eq!((last.r1, last.r2), (20.0, 20.0));
        assert!((sol.leader_value - cfg.gamma.powi(2) * 20.0).abs() < 1e-9);
    }

    #[test]
    fn grid_has_nash_at_both_squares() {
        let cfg = GridConfig::default();
        let m = make_grid_env(&cfg).unwrap();
        let left = JointPolicy::new(vec![(0, 0); m.n_states()]);
        let right = JointPolicy::new(vec![(1, 1); m.n_states()]);
        assert!(is_nash(&m, &left, 1e-9).unwrap());
        assert!(is_nash(&m, &right, 1e-9).unwrap());
        // Leader heads right while the follower heads left: the leader can do better.
        let split = JointPolicy::new(vec![(1, 0); m.n_states()]);
        assert!(!is_nash(&m, &split, 1e-9).unwrap());
    }
}
