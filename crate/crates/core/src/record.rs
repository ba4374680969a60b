//! Per-run training logs shared by all learners.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::markov_game::{MarkovGameModel, MergeConfig, MergeOutcome};

/// Greedy joint behavior of a learner, evaluated by deterministic rollouts
/// from every start state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreedyEval {
    /// FNV-1a digest of the joint actions along every rollout.
    pub digest: u64,
    /// Greedy joint action at the designated start state.
    pub start_action: (usize, usize),
    /// Undiscounted returns, weighted by the start distribution.
    pub returns: (f64, f64),
    /// Per start state: probability and final reward pair, or `None` when
    /// the rollout hit the horizon without terminating.
    pub endings: Vec<(f64, Option<(f64, f64)>)>,
}

impl GreedyEval {
    /// Rolls out `act` from each start state, following the most likely
    /// successor, until termination or the horizon.
    pub fn rollout(model: &MarkovGameModel, mut act: impl FnMut(usize) -> (usize, usize)) -> Self {
        let limit = model.horizon().unwrap_or(crate::markov_game::DEFAULT_EPISODE_CAP);
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut mix = |x: usize| {
            for b in (x as u32).to_le_bytes() {
                h ^= u64::from(b);
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        };
        let mut returns = (0.0, 0.0);
        let mut endings = Vec::new();
        let mut start_action = (0, 0);
        for (k, &(start, p)) in model.initial().iter().enumerate() {
            let mut s = start;
            let mut ret = (0.0, 0.0);
            let mut ending = None;
            for t in 0..limit {
                let (a1, a2) = act(s);
                if k == 0 && t == 0 {
                    start_action = (a1, a2);
                }
                mix(a1);
                mix(a2);
                let next = model
                    .transition(s, a1, a2)
                    .iter()
                    .fold((0, f64::NEG_INFINITY), |b, &(n, q)| if q > b.1 { (n, q) } else { b })
                    .0;
                let r = model.reward(s, a1, a2);
                ret.0 += r.0;
                ret.1 += r.1;
                s = next;
                if model.is_terminal(s) {
                    ending = Some(r);
                    break;
                }
            }
            mix(usize::MAX);
            returns.0 += p * ret.0;
            returns.1 += p * ret.1;
            endings.push((p, ending));
        }
        Self { digest: h, start_action, returns, endings }
    }

    /// Outcome fractions (leader first, follower first, crash, timeout).
    pub fn merge_fractions(&self, cfg: &MergeConfig) -> OutcomeFractions {
        let mut f = OutcomeFractions::default();
        for &(p, end) in &self.endings {
            match end.and_then(|(a, b)| MergeOutcome::from_rewards(a, b, cfg)) {
                Some(MergeOutcome::LeaderFirst) => f.leader_first += p,
                Some(MergeOutcome::FollowerFirst) => f.follower_first += p,
                Some(MergeOutcome::Crash) => f.crash += p,
                _ => f.timeout += p,
            }
        }
        f
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct OutcomeFractions {
    pub leader_first: f64,
    pub follower_first: f64,
    pub crash: f64,
    pub timeout: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeLog {
    pub episode: usize,
    pub return1: f64,
    pub return2: f64,
    /// Joint action actually taken at the first step.
    pub first_action: (usize, usize),
    /// Greedy joint action at the start state after this episode.
    pub greedy: (usize, usize),
    pub policy_hash: u64,
    /// Learner's value estimates `(Q1, Q2)` at a tracked start-state cell.
    pub probe: Option<(f64, f64)>,
    /// Follower's probability of the tracked action, for actor-critic runs.
    pub follower_prob: Option<f64>,
    /// Behavior-episode outcome on the merge env.
    pub outcome: Option<MergeOutcome>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub algorithm: String,
    pub env: String,
    pub seed: u64,
    pub one_step: bool,
    pub episodes: Vec<EpisodeLog>,
    pub final_eval: GreedyEval,
    /// Greedy behavior unchanged over the last 10% of episodes.
    pub converged: bool,
    /// Some value estimate became non-finite.
    pub diverged: bool,
}

impl RunRecord {
    pub fn new(algorithm: &str, model: &MarkovGameModel, seed: u64, episodes: Vec<EpisodeLog>, final_eval: GreedyEval, diverged: bool) -> Self {
        let converged = !diverged && stable_tail(&episodes, 0.1);
        Self {
            algorithm: algorithm.to_string(),
            env: model.name().to_string(),
            seed,
            one_step: model.is_one_step(),
            episodes,
            final_eval,
            converged,
            diverged,
        }
    }

    /// Whether the run settled on the given start-state joint action.
    pub fn converged_to(&self, joint: (usize, usize)) -> bool {
        self.converged && self.final_eval.start_action == joint
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let merge = self.episodes.iter().any(|e| e.outcome.is_some());
        let mut header = vec!["episode", "ep_return_1", "ep_return_2"];
        if self.one_step {
            header.extend(["greedy_a1", "greedy_a2"]);
        } else {
            header.push("policy_hash");
        }
        if merge {
            header.push("outcome");
        }
        w.write_record(&header)?;
        for e in &self.episodes {
            let mut row = vec![e.episode.to_string(), e.return1.to_string(), e.return2.to_string()];
            if self.one_step {
                row.push(e.greedy.0.to_string());
                row.push(e.greedy.1.to_string());
            } else {
                row.push(format!("{:016x}", e.policy_hash));
            }
            if merge {
                row.push(e.outcome.map_or("timeout", MergeOutcome::label).to_string());
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// True when `policy_hash` is constant over the trailing `frac` of episodes
/// (at least one episode).
pub fn stable_tail(episodes: &[EpisodeLog], frac: f64) -> bool {
    let Some(last) = episodes.last() else {
        return false;
    };
    let n = ((episodes.len() as f64 * frac).ceil() as usize).max(1);
    episodes[episodes.len() - n..].iter().all(|e| e.policy_hash == last.policy_hash)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn log(i: usize, hash: u64) -> EpisodeLog {
        EpisodeLog {
            episode: i,
            return1: 1.0,
            return2: 2.0,
            first_action: (0, 0),
            greedy: (0, 0),
            policy_hash: hash,
            probe: None,
            follower_prob: None,
            outcome: None,
        }
    }

    #[test]
    fn tail_stability() {
        let mut eps: Vec<_> = (0..20).map(|i| log(i, 1)).collect();
        assert!(stable_tail(&eps, 0.1));
        eps[18].policy_hash = 2;
        assert!(!stable_tail(&eps, 0.1));
        eps[18].policy_hash = 1;
        eps[17].policy_hash = 2;
        assert!(stable_tail(&eps, 0.1));
        assert!(!stable_tail(&[], 0.1));
    }
}
