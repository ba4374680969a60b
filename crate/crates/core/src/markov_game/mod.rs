//! Finite two-player Markov games.
//!
//! A [`MarkovGameModel`] is an explicit table of transitions and rewards
//! indexed by `(state, leader action, follower action)`. It doubles as a
//! simulator ([`MarkovGameModel::step`], [`GameSession`]) and as the model for
//! dynamic-programming solvers.

mod envs;
mod oracle;

use std::io::{BufRead, Write};
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use envs::{
    make_counterexample_env, make_grid_env, make_matrix_env, make_merge_env, make_random_env,
    merge_features, Car, GridConfig, Lane, MergeAction, MergeConfig, MergeOutcome, MergeState,
};
pub use oracle::{
    birl_oracle, birl_oracle_with_limit, follower_best_response, is_nash, leader_best_response,
    BirlSolution, OracleMethod, ENUMERATION_LIMIT,
};

const PROB_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct MarkovGameModel {
    name: String,
    n_states: usize,
    leader_actions: Vec<String>,
    follower_actions: Vec<String>,
    initial: Vec<(usize, f64)>,
    terminal: Vec<bool>,
    /// Indexed by [`MarkovGameModel::index`]; empty for terminal states.
    transitions: Vec<Vec<(usize, f64)>>,
    rewards: Vec<(f64, f64)>,
    gamma: f64,
    horizon: Option<usize>,
}

/// One simulated step `<s, a1, a2, s', r1, r2>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub s: usize,
    pub a1: usize,
    pub a2: usize,
    pub s_next: usize,
    pub r1: f64,
    pub r2: f64,
    /// The episode ended here, by reaching a terminal state or the horizon.
    pub done: bool,
    /// `s_next` is terminal; only then is the bootstrap term dropped.
    pub terminal: bool,
}

/// A deterministic joint policy: one `(a1, a2)` per state. Entries at
/// terminal states are ignored.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct JointPolicy {
    pub actions: Vec<(usize, usize)>,
}

impl JointPolicy {
    pub fn new(actions: Vec<(usize, usize)>) -> Self {
        Self { actions }
    }

    pub fn from_parts(leader: &[usize], follower: &[usize]) -> Self {
        Self { actions: leader.iter().copied().zip(follower.iter().copied()).collect() }
    }

    pub fn get(&self, s: usize) -> (usize, usize) {
        self.actions[s]
    }

    pub fn leader(&self) -> Vec<usize> {
        self.actions.iter().map(|a| a.0).collect()
    }

    pub fn follower(&self) -> Vec<usize> {
        self.actions.iter().map(|a| a.1).collect()
    }

    /// Order-sensitive FNV-1a digest of the non-terminal entries; stable
    /// across platforms and builds.
    pub fn digest(&self, model: &MarkovGameModel) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for (s, &(a1, a2)) in self.actions.iter().enumerate() {
            if model.is_terminal(s) {
                continue;
            }
            for byte in [a1 as u8, a2 as u8] {
                h ^= u64::from(byte);
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        }
        h
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyValues {
    pub v1: Vec<f64>,
    pub v2: Vec<f64>,
}

impl MarkovGameModel {
    pub fn builder(
        name: impl Into<String>,
        n_states: usize,
        leader_actions: &[&str],
        follower_actions: &[&str],
    ) -> ModelBuilder {
        ModelBuilder::new(name, n_states, leader_actions, follower_actions)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_leader_actions(&self) -> usize {
        self.leader_actions.len()
    }

    pub fn n_follower_actions(&self) -> usize {
        self.follower_actions.len()
    }

    pub fn leader_action_labels(&self) -> &[String] {
        &self.leader_actions
    }

    pub fn follower_action_labels(&self) -> &[String] {
        &self.follower_actions
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn horizon(&self) -> Option<usize> {
        self.horizon
    }

    pub fn initial(&self) -> &[(usize, f64)] {
        &self.initial
    }

    /// The designated start state: the first entry of the start distribution.
    pub fn start_state(&self) -> usize {
        self.initial[0].0
    }

    pub fn is_terminal(&self, s: usize) -> bool {
        self.terminal[s]
    }

    pub fn non_terminal_states(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n_states).filter(move |&s| !self.terminal[s])
    }

    /// True when every episode lasts exactly one step from the start state.
    pub fn is_one_step(&self) -> bool {
        self.non_terminal_states().count() == 1
            && self.non_terminal_states().all(|s| {
                (0..self.n_leader_actions() * self.n_follower_actions())
                    .all(|j| self.transitions[s * self.n_leader_actions() * self.n_follower_actions() + j]
                        .iter()
                        .all(|&(n, _)| self.terminal[n]))
            })
    }

    #[inline]
    pub fn index(&self, s: usize, a1: usize, a2: usize) -> usize {
        (s * self.leader_actions.len() + a1) * self.follower_actions.len() + a2
    }

    pub fn transition(&self, s: usize, a1: usize, a2: usize) -> &[(usize, f64)] {
        &self.transitions[self.index(s, a1, a2)]
    }

    pub fn reward(&self, s: usize, a1: usize, a2: usize) -> (f64, f64) {
        self.rewards[self.index(s, a1, a2)]
    }

    pub fn with_gamma(mut self, gamma: f64) -> Result<Self> {
        check_gamma(gamma)?;
        self.gamma = gamma;
        Ok(self)
    }

    pub fn reset<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        sample_categorical(&self.initial, rng)
    }

    /// One simultaneous move. `done` here only reflects terminal states;
    /// use [`GameSession`] for horizon truncation.
    pub fn step<R: Rng + ?Sized>(
        &self,
        s: usize,
        a1: usize,
        a2: usize,
        rng: &mut R,
    ) -> Result<Transition> {
        if s >= self.n_states {
            return Err(Error::Parameter(format!("state {s} out of range")));
        }
        if self.terminal[s] {
            return Err(Error::TerminalStep(s));
        }
        if a1 >= self.n_leader_actions() || a2 >= self.n_follower_actions() {
            return Err(Error::ActionOutOfRange { state: s, a1, a2 });
        }
        let i = self.index(s, a1, a2);
        let s_next = sample_categorical(&self.transitions[i], rng);
        let (r1, r2) = self.rewards[i];
        let terminal = self.terminal[s_next];
        Ok(Transition { s, a1, a2, s_next, r1, r2, done: terminal, terminal })
    }

    /// Expected value of a per-state function under the start distribution.
    pub fn initial_value(&self, v: &[f64]) -> f64 {
        self.initial.iter().map(|&(s, p)| p * v[s]).sum()
    }

    pub fn validate_policy(&self, policy: &JointPolicy) -> Result<()> {
        if policy.actions.len() != self.n_states {
            return Err(Error::Dimension(format!(
                "policy covers {} states, model has {}",
                policy.actions.len(),
                self.n_states
            )));
        }
        for s in self.non_terminal_states() {
            let (a1, a2) = policy.actions[s];
            if a1 >= self.n_leader_actions() || a2 >= self.n_follower_actions() {
                return Err(Error::ActionOutOfRange { state: s, a1, a2 });
            }
        }
        Ok(())
    }

    /// Exact discounted values of a deterministic joint policy, computed by
    /// Gauss-Seidel sweeps until the largest change drops below 1e-12.
    pub fn evaluate_joint_policy(&self, policy: &JointPolicy) -> Result<PolicyValues> {
        self.validate_policy(policy)?;
        let mut v1 = vec![0.0; self.n_states];
        let mut v2 = vec![0.0; self.n_states];
        for _ in 0..1_000_000 {
            let mut delta: f64 = 0.0;
            for s in self.non_terminal_states() {
                let (a1, a2) = policy.actions[s];
                let i = self.index(s, a1, a2);
                let (r1, r2) = self.rewards[i];
                let (mut e1, mut e2) = (0.0, 0.0);
                for &(n, p) in &self.transitions[i] {
                    e1 += p * v1[n];
                    e2 += p * v2[n];
                }
                let n1 = r1 + self.gamma * e1;
                let n2 = r2 + self.gamma * e2;
                delta = delta.max((n1 - v1[s]).abs()).max((n2 - v2[s]).abs());
                v1[s] = n1;
                v2[s] = n2;
            }
            if delta < 1e-12 {
                return Ok(PolicyValues { v1, v2 });
            }
        }
        Err(Error::Parameter("policy evaluation did not converge".into()))
    }

    /// Greedy rollout of a deterministic joint policy from `start`, following
    /// the most likely successor at each step. Stops at a terminal state or
    /// the horizon (default 1000).
    pub fn rollout(&self, policy: &JointPolicy, start: usize) -> Vec<Transition> {
        let limit = self.horizon.unwrap_or(DEFAULT_EPISODE_CAP);
        let mut out = Vec::new();
        let mut s = start;
        for t in 0..limit {
            if self.terminal[s] {
                break;
            }
            let (a1, a2) = policy.actions[s];
            let i = self.index(s, a1, a2);
            let s_next = self.transitions[i]
                .iter()
                .fold((0, f64::NEG_INFINITY), |best, &(n, p)| if p > best.1 { (n, p) } else { best })
                .0;
            let (r1, r2) = self.rewards[i];
            let terminal = self.terminal[s_next];
            out.push(Transition { s, a1, a2, s_next, r1, r2, done: terminal || t + 1 == limit, terminal });
            s = s_next;
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&ModelFile::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str::<ModelFile>(text)?.try_into()
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::Parameter(format!("discount {gamma} outside [0, 1)")));
    }
    Ok(())
}

pub(crate) fn sample_categorical<R: Rng + ?Sized>(dist: &[(usize, f64)], rng: &mut R) -> usize {
    if dist.len() == 1 {
        return dist[0].0;
    }
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for &(s, p) in dist {
        acc += p;
        if u < acc {
            return s;
        }
    }
    dist[dist.len() - 1].0
}

pub struct ModelBuilder {
    name: String,
    n_states: usize,
    leader_actions: Vec<String>,
    follower_actions: Vec<String>,
    initial: Vec<(usize, f64)>,
    terminal: Vec<bool>,
    transitions: Vec<Option<Vec<(usize, f64)>>>,
    rewards: Vec<(f64, f64)>,
    gamma: f64,
    horizon: Option<usize>,
}

impl ModelBuilder {
    fn new(name: impl Into<String>, n_states: usize, a1: &[&str], a2: &[&str]) -> Self {
        let cells = n_states * a1.len() * a2.len();
        Self {
            name: name.into(),
            n_states,
            leader_actions: a1.iter().map(|s| s.to_string()).collect(),
            follower_actions: a2.iter().map(|s| s.to_string()).collect(),
            initial: vec![(0, 1.0)],
            terminal: vec![false; n_states],
            transitions: vec![None; cells],
            rewards: vec![(0.0, 0.0); cells],
            gamma: 0.9,
            horizon: None,
        }
    }

    pub fn gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn horizon(mut self, horizon: Option<usize>) -> Self {
        self.horizon = horizon;
        self
    }

    pub fn initial(mut self, dist: Vec<(usize, f64)>) -> Self {
        self.initial = dist;
        self
    }

    pub fn terminal(mut self, s: usize) -> Self {
        self.terminal[s] = true;
        self
    }

    fn idx(&self, s: usize, a1: usize, a2: usize) -> usize {
        (s * self.leader_actions.len() + a1) * self.follower_actions.len() + a2
    }

    pub fn set(&mut self, s: usize, a1: usize, a2: usize, next: Vec<(usize, f64)>, r: (f64, f64)) {
        let i = self.idx(s, a1, a2);
        self.transitions[i] = Some(next);
        self.rewards[i] = r;
    }

    pub fn with(mut self, s: usize, a1: usize, a2: usize, next: usize, r: (f64, f64)) -> Self {
        self.set(s, a1, a2, vec![(next, 1.0)], r);
        self
    }

    pub fn build(self) -> Result<MarkovGameModel> {
        if self.n_states == 0 || self.leader_actions.is_empty() || self.follower_actions.is_empty() {
            return Err(Error::Dimension("model needs states and actions".into()));
        }
        check_gamma(self.gamma)?;
        check_distribution(&self.initial, self.n_states, "start distribution")?;
        if self.initial.iter().all(|&(s, _)| self.terminal[s]) {
            return Err(Error::Parameter("start distribution is entirely terminal".into()));
        }
        let (na1, na2) = (self.leader_actions.len(), self.follower_actions.len());
        let mut transitions = Vec::with_capacity(self.transitions.len());
        for (i, t) in self.transitions.into_iter().enumerate() {
            let s = i / (na1 * na2);
            match (self.terminal[s], t) {
                (true, None) => transitions.push(Vec::new()),
                (true, Some(_)) => {
                    return Err(Error::Parameter(format!("terminal state {s} has outgoing transitions")))
                }
                (false, None) => {
                    return Err(Error::Parameter(format!(
                        "missing transition for state {s}, joint action {}",
                        i % (na1 * na2)
                    )))
                }
                (false, Some(dist)) => {
                    check_distribution(&dist, self.n_states, "transition")?;
                    transitions.push(dist);
                }
            }
        }
        if self.rewards.iter().any(|r| !r.0.is_finite() || !r.1.is_finite()) {
            return Err(Error::NonFinite("reward"));
        }
        Ok(MarkovGameModel {
            name: self.name,
            n_states: self.n_states,
            leader_actions: self.leader_actions,
            follower_actions: self.follower_actions,
            initial: self.initial,
            terminal: self.terminal,
            transitions,
            rewards: self.rewards,
            gamma: self.gamma,
            horizon: self.horizon,
        })
    }
}

fn check_distribution(dist: &[(usize, f64)], n_states: usize, what: &str) -> Result<()> {
    if dist.is_empty() {
        return Err(Error::Parameter(format!("empty {what}")));
    }
    if dist.iter().any(|&(s, p)| s >= n_states || !(0.0..=1.0 + PROB_TOL).contains(&p)) {
        return Err(Error::Parameter(format!("{what} has an invalid entry")));
    }
    let total: f64 = dist.iter().map(|d| d.1).sum();
    if (total - 1.0).abs() > PROB_TOL {
        return Err(Error::Parameter(format!("{what} sums to {total}, not 1")));
    }
    Ok(())
}

/// Episode length cap for models without a horizon.
pub const DEFAULT_EPISODE_CAP: usize = 1000;

/// Simulator wrapper that tracks the step count and applies the horizon,
/// or [`DEFAULT_EPISODE_CAP`] when the model has none.
pub struct GameSession<'a> {
    model: &'a MarkovGameModel,
    state: usize,
    t: usize,
    finished: bool,
}

impl<'a> GameSession<'a> {
    pub fn new<R: Rng + ?Sized>(model: &'a MarkovGameModel, rng: &mut R) -> Self {
        Self { model, state: model.reset(rng), t: 0, finished: false }
    }

    pub fn starting_at(model: &'a MarkovGameModel, state: usize) -> Self {
        Self { model, state, t: 0, finished: model.is_terminal(state) }
    }

    pub fn state(&self) -> usize {
        self.state
    }

    pub fn steps(&self) -> usize {
        self.t
    }

    pub fn is_finished(&self) -> bool {
        self.finished
    }

    pub fn step<R: Rng + ?Sized>(&mut self, a1: usize, a2: usize, rng: &mut R) -> Result<Transition> {
        if self.finished {
            return Err(Error::TerminalStep(self.state));
        }
        let mut tr = self.model.step(self.state, a1, a2, rng)?;
        self.t += 1;
        if self.t >= self.model.horizon.unwrap_or(DEFAULT_EPISODE_CAP) {
            tr.done = true;
        }
        self.state = tr.s_next;
        self.finished = tr.done;
        Ok(tr)
    }
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    name: String,
    states: usize,
    leader_actions: Vec<String>,
    follower_actions: Vec<String>,
    initial: Vec<(usize, f64)>,
    terminal: Vec<usize>,
    transitions: Vec<TransitionEntry>,
    rewards: Vec<RewardEntry>,
    gamma: f64,
    horizon: Option<usize>,
}

#[derive(Serialize, Deserialize)]
struct TransitionEntry {
    s: usize,
    a1: usize,
    a2: usize,
    next: usize,
    p: f64,
}

#[derive(Serialize, Deserialize)]
struct RewardEntry {
    s: usize,
    a1: usize,
    a2: usize,
    r1: f64,
    r2: f64,
}

impl From<&MarkovGameModel> for ModelFile {
    fn from(m: &MarkovGameModel) -> Self {
        let mut transitions = Vec::new();
        let mut rewards = Vec::new();
        for s in m.non_terminal_states() {
            for a1 in 0..m.n_leader_actions() {
                for a2 in 0..m.n_follower_actions() {
                    for &(next, p) in m.transition(s, a1, a2) {
                        transitions.push(TransitionEntry { s, a1, a2, next, p });
                    }
                    let (r1, r2) = m.reward(s, a1, a2);
                    if r1 != 0.0 || r2 != 0.0 {
                        rewards.push(RewardEntry { s, a1, a2, r1, r2 });
                    }
                }
            }
        }
        ModelFile {
            name: m.name.clone(),
            states: m.n_states,
            leader_actions: m.leader_actions.clone(),
            follower_actions: m.follower_actions.clone(),
            initial: m.initial.clone(),
            terminal: (0..m.n_states).filter(|&s| m.terminal[s]).collect(),
            transitions,
            rewards,
            gamma: m.gamma,
            horizon: m.horizon,
        }
    }
}

impl TryFrom<ModelFile> for MarkovGameModel {
    type Error = Error;

    fn try_from(f: ModelFile) -> Result<Self> {
        let a1: Vec<&str> = f.leader_actions.iter().map(String::as_str).collect();
        let a2: Vec<&str> = f.follower_actions.iter().map(String::as_str).collect();
        let mut b = MarkovGameModel::builder(f.name.clone(), f.states, &a1, &a2)
            .gamma(f.gamma)
            .horizon(f.horizon)
            .initial(f.initial.clone());
        for &s in &f.terminal {
            if s >= f.states {
                return Err(Error::Parameter(format!("terminal state {s} out of range")));
            }
            b = b.terminal(s);
        }
        let in_range = |s: usize, x: usize, y: usize| s < f.states && x < a1.len() && y < a2.len();
        for t in &f.transitions {
            if !in_range(t.s, t.a1, t.a2) {
                return Err(Error::ActionOutOfRange { state: t.s, a1: t.a1, a2: t.a2 });
            }
            let i = b.idx(t.s, t.a1, t.a2);
            b.transitions[i].get_or_insert_with(Vec::new).push((t.next, t.p));
        }
        for r in &f.rewards {
            if !in_range(r.s, r.a1, r.a2) {
                return Err(Error::ActionOutOfRange { state: r.s, a1: r.a1, a2: r.a2 });
            }
            let i = b.idx(r.s, r.a1, r.a2);
            b.rewards[i] = (r.r1, r.r2);
        }
        b.build()
    }
}

/// Writes transitions as JSON lines.
pub fn write_episode_log<W: Write>(mut out: W, transitions: &[Transition]) -> Result<()> {
    for t in transitions {
        serde_json::to_writer(&mut out, t)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_episode_log<R: BufRead>(input: R) -> Result<Vec<Transition>> {
    let mut out = Vec::new();
    for line in input.lines() {
        let line = line?;
        if !line.trim().is_empty() {
            out.push(serde_json::from_str(&line)?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix_game::MatrixGame;
    use crate::rng::seeded;

    #[test]
    fn maintain_step_pays_table_entry() {
        let m = make_matrix_env(&MatrixGame::maintain());
        let mut rng = seeded(0);
        let s0 = m.reset(&mut rng);
        let t = m.step(s0, 0, 0, &mut rng).unwrap();
        assert_eq!((t.r1, t.r2), (20.0, 15.0));
        assert!(t.done && t.terminal);
        assert!(matches!(m.step(t.s_next, 0, 0, &mut rng), Err(Error::TerminalStep(_))));
        assert!(matches!(m.step(s0, 3, 0, &mut rng), Err(Error::ActionOutOfRange { .. })));
    }

    #[test]
    fn counterexample_transitions() {
        let m = make_counterexample_env(0.9).unwrap();
        let mut rng = seeded(0);
        let t = m.step(0, 1, 1, &mut rng).unwrap();
        assert_eq!((t.s_next, t.r1, t.r2, t.done), (0, -1.0, -1.0, false));
        let t = m.step(0, 0, 1, &mut rng).unwrap();
        assert_eq!((t.s_next, t.r1, t.r2, t.done), (1, 0.0, 10.0, true));
        assert_eq!(m.reward(0, 1, 0), (10.0, 0.0));
        assert_eq!(m.transition(0, 0, 0), &[(0, 1.0)]);
        assert_eq!(m.transition(0, 1, 0), &[(1, 1.0)]);
    }

    #[test]
    fn counterexample_policy_values() {
        let m = make_counterexample_env(0.9).unwrap();
        let v = m.evaluate_joint_policy(&JointPolicy::new(vec![(1, 0), (0, 0)])).unwrap();
        assert!((v.v1[0] - 10.0).abs() < 1e-10 && v.v2[0].abs() < 1e-10);
        let v = m.evaluate_joint_policy(&JointPolicy::new(vec![(0, 1), (0, 0)])).unwrap();
        assert!(v.v1[0].abs() < 1e-10 && (v.v2[0] - 10.0).abs() < 1e-10);
        // (B, B) loops forever at -1.
        let v = m.evaluate_joint_policy(&JointPolicy::new(vec![(1, 1), (0, 0)])).unwrap();
        assert!((v.v1[0] + 10.0).abs() < 1e-9);
    }

    #[test]
    fn zero_discount_values_are_immediate_rewards() {
        let m = make_counterexample_env(0.0).unwrap();
        let v = m.evaluate_joint_policy(&JointPolicy::new(vec![(1, 1), (0, 0)])).unwrap();
        assert_eq!((v.v1[0], v.v2[0]), (-1.0, -1.0));
    }

    #[test]
    fn builder_rejects_bad_models() {
        let bad = MarkovGameModel::builder("x", 2, &["a"], &["b"])
            .terminal(1)
            .with(0, 0, 0, 1, (0.0, 0.0))
            .gamma(1.0)
            .build();
        assert!(bad.is_err());
        let mut b = MarkovGameModel::builder("x", 2, &["a"], &["b"]).terminal(1);
        b.set(0, 0, 0, vec![(0, 0.5), (1, 0.4)], (0.0, 0.0));
        assert!(b.build().is_err());
        let missing = MarkovGameModel::builder("x", 2, &["a", "b"], &["c"]).terminal(1).with(0, 0, 0, 1, (0.0, 0.0));
        assert!(missing.build().is_err());
        let loops = MarkovGameModel::builder("x", 1, &["a"], &["b"]).terminal(0).initial(vec![(0, 1.0)]);
        assert!(loops.build().is_err());
    }

    #[test]
    fn session_applies_horizon() {
        let m = make_grid_env(&GridConfig::default()).unwrap();
        let mut rng = seeded(1);
        let mut sess = GameSession::new(&m, &mut rng);
        let mut n = 0;
        while !sess.is_finished() {
            // Both stay put: never co-located, so only the horizon ends it.
            let t = sess.step(2, 2, &mut rng).unwrap();
            assert!(!t.terminal);
            n += 1;
        }
        assert_eq!(n, 20);
    }

    #[test]
    fn model_json_round_trip() {
        for m in [
            make_counterexample_env(0.9).unwrap(),
            make_grid_env(&GridConfig::default()).unwrap(),
            make_matrix_env(&MatrixGame::escape()),
        ] {
            let back = MarkovGameModel::from_json(&m.to_json().unwrap()).unwrap();
            assert_eq!(back, m);
        }
    }

    #[test]
    fn episode_log_round_trip() {
        let m = make_counterexample_env(0.9).unwrap();
        let mut rng = seeded(5);
        let log = vec![m.step(0, 1, 1, &mut rng).unwrap(), m.step(0, 1, 0, &mut rng).unwrap()];
        let mut buf = Vec::new();
        write_episode_log(&mut buf, &log).unwrap();
        assert_eq!(String::from_utf8_lossy(&buf).lines().count(), 2);
        assert_eq!(read_episode_log(&buf[..]).unwrap(), log);
    }
}
