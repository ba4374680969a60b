//! Tabular bi-level learning.
//!
//! The leader and follower each keep a table over `(state, a1, a2)`. The
//! bootstrap target at `s'` uses the strong Stackelberg joint action of the
//! stage game `(Q1(s'), Q2(s'))` for both agents. Convergence is proved only
//! when every stage game along the way has a global optimal point (for
//! instance when payoffs are identical) and the learning rates satisfy the
//! usual Robbins-Monro conditions; elsewhere the learners report empirical
//! behavior.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::markov_game::{GameSession, JointPolicy, MarkovGameModel, MergeConfig, MergeOutcome, Transition};
use crate::matrix_game::{stackelberg_indices, MatrixGame};
use crate::record::{EpisodeLog, GreedyEval, RunRecord};
use crate::rng::seeded;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "QTableJson", into = "QTableJson")]
pub struct QTable {
    n_states: usize,
    n_a1: usize,
    n_a2: usize,
    q1: Vec<f64>,
    q2: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct QTableJson {
    q1: Vec<Vec<Vec<f64>>>,
    q2: Vec<Vec<Vec<f64>>>,
}

impl From<QTable> for QTableJson {
    fn from(t: QTable) -> Self {
        let nest = |v: &[f64]| {
            v.chunks(t.n_a1 * t.n_a2)
                .map(|s| s.chunks(t.n_a2).map(<[f64]>::to_vec).collect())
                .collect()
        };
        QTableJson { q1: nest(&t.q1), q2: nest(&t.q2) }
    }
}

impl TryFrom<QTableJson> for QTable {
    type Error = Error;

    fn try_from(j: QTableJson) -> Result<Self> {
        let n_states = j.q1.len();
        let n_a1 = j.q1.first().map_or(0, Vec::len);
        let n_a2 = j.q1.first().and_then(|s| s.first()).map_or(0, Vec::len);
        let flat = |q: Vec<Vec<Vec<f64>>>| -> Result<Vec<f64>> {
            if q.len() != n_states
                || q.iter().any(|s| s.len() != n_a1 || s.iter().any(|r| r.len() != n_a2))
            {
                return Err(Error::Dimension("ragged Q-table".into()));
            }
            Ok(q.into_iter().flatten().flatten().collect())
        };
        let t = QTable { n_states, n_a1, n_a2, q1: flat(j.q1)?, q2: flat(j.q2)? };
        if !t.is_finite() {
            return Err(Error::NonFinite("Q-table"));
        }
        Ok(t)
    }
}

impl QTable {
    pub fn new(n_states: usize, n_a1: usize, n_a2: usize, q0: f64) -> Self {
        let n = n_states * n_a1 * n_a2;
        Self { n_states, n_a1, n_a2, q1: vec![q0; n], q2: vec![q0; n] }
    }

    pub fn for_model(model: &MarkovGameModel, q0: f64) -> Self {
        Self::new(model.n_states(), model.n_leader_actions(), model.n_follower_actions(), q0)
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.n_states, self.n_a1, self.n_a2)
    }

    #[inline]
    fn idx(&self, s: usize, a1: usize, a2: usize) -> usize {
        (s * self.n_a1 + a1) * self.n_a2 + a2
    }

    pub fn q1(&self, s: usize, a1: usize, a2: usize) -> f64 {
        self.q1[self.idx(s, a1, a2)]
    }

    pub fn q2(&self, s: usize, a1: usize, a2: usize) -> f64 {
        self.q2[self.idx(s, a1, a2)]
    }

    pub fn set(&mut self, s: usize, a1: usize, a2: usize, v: (f64, f64)) {
        let i = self.idx(s, a1, a2);
        self.q1[i] = v.0;
        self.q2[i] = v.1;
    }

    /// Row-major stage payoffs `(Q1(s), Q2(s))`.
    pub fn stage(&self, s: usize) -> (&[f64], &[f64]) {
        let k = self.n_a1 * self.n_a2;
        (&self.q1[s * k..(s + 1) * k], &self.q2[s * k..(s + 1) * k])
    }

    pub fn stage_game(&self, s: usize) -> Result<MatrixGame> {
        let (u1, u2) = self.stage(s);
        MatrixGame::from_flat(self.n_a1, self.n_a2, u1.to_vec(), u2.to_vec())
    }

    /// Strong Stackelberg joint action of the stage game at `s`.
    pub fn stage_actions(&self, s: usize) -> (usize, usize) {
        let (u1, u2) = self.stage(s);
        stackelberg_indices(self.n_a1, self.n_a2, u1, u2)
    }

    pub fn stage_values(&self, s: usize) -> (f64, f64) {
        let (a1, a2) = self.stage_actions(s);
        (self.q1(s, a1, a2), self.q2(s, a1, a2))
    }

    pub fn greedy_policy(&self, model: &MarkovGameModel) -> JointPolicy {
        JointPolicy::new(
            (0..self.n_states)
                .map(|s| if model.is_terminal(s) { (0, 0) } else { self.stage_actions(s) })
                .collect(),
        )
    }

    /// One bi-level TD step on the visited cell. The target joint action is
    /// the stage Stackelberg action at `s'`; terminal successors contribute
    /// no bootstrap.
    pub fn td_update(&mut self, tr: &Transition, alpha1: f64, alpha2: f64, gamma: f64) {
        let (b1, b2) = if tr.terminal { (0.0, 0.0) } else { self.stage_values(tr.s_next) };
        let i = self.idx(tr.s, tr.a1, tr.a2);
        self.q1[i] = (1.0 - alpha1) * self.q1[i] + alpha1 * (tr.r1 + gamma * b1);
        self.q2[i] = (1.0 - alpha2) * self.q2[i] + alpha2 * (tr.r2 + gamma * b2);
    }

    pub fn is_finite(&self) -> bool {
        self.q1.iter().chain(&self.q2).all(|v| v.is_finite())
    }

    /// Sup-norm distance over both tables.
    pub fn distance(&self, other: &QTable) -> f64 {
        self.q1
            .iter()
            .zip(&other.q1)
            .chain(self.q2.iter().zip(&other.q2))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Distance restricted to non-terminal states of `model`.
    pub fn distance_on(&self, other: &QTable, model: &MarkovGameModel) -> f64 {
        let k = self.n_a1 * self.n_a2;
        model
            .non_terminal_states()
            .flat_map(|s| s * k..(s + 1) * k)
            .map(|i| (self.q1[i] - other.q1[i]).abs().max((self.q2[i] - other.q2[i]).abs()))
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AlphaSchedule {
    Constant,
    /// `alpha * h / (h + n)` where `n` counts earlier visits to the cell.
    Harmonic { h: f64 },
}

impl AlphaSchedule {
    pub fn rate(&self, alpha: f64, visits: u32) -> f64 {
        match *self {
            Self::Constant => alpha,
            Self::Harmonic { h } => alpha * h / (h + f64::from(visits)),
        }
    }
}

/// Linear decay from `start` to `end` over the first `decay_frac` of the
/// episodes, then constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsilonSchedule {
    pub start: f64,
    pub end: f64,
    pub decay_frac: f64,
}

impl Default for EpsilonSchedule {
    fn default() -> Self {
        Self { start: 1.0, end: 0.05, decay_frac: 0.5 }
    }
}

impl EpsilonSchedule {
    pub fn at(&self, episode: usize, episodes: usize) -> f64 {
        let span = (episodes as f64 * self.decay_frac).max(1.0);
        let t = (episode as f64 / span).min(1.0);
        self.start + (self.end - self.start) * t
    }

    fn validate(&self) -> Result<()> {
        if ![self.start, self.end].iter().all(|e| (0.0..=1.0).contains(e)) {
            return Err(Error::Parameter("epsilon must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

/// What a learner records per episode besides returns.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Tracking {
    /// Start-state joint action whose value estimates are logged.
    pub probe: Option<(usize, usize)>,
    /// Classify merge outcomes with this config.
    pub merge: Option<MergeConfig>,
}

impl Tracking {
    pub(crate) fn outcome(&self, last: &Transition) -> Option<MergeOutcome> {
        self.merge.map(|cfg| {
            if last.terminal {
                MergeOutcome::from_rewards(last.r1, last.r2, &cfg).unwrap_or(MergeOutcome::Timeout)
            } else {
                MergeOutcome::Timeout
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TabularConfig {
    pub alpha1: f64,
    pub alpha2: f64,
    pub alpha_schedule: AlphaSchedule,
    /// Overrides the model's discount when set.
    pub gamma: Option<f64>,
    pub epsilon: EpsilonSchedule,
    pub warmup_steps: usize,
    pub episodes: usize,
    pub seed: u64,
    pub q0: f64,
    pub tracking: Tracking,
}

impl Default for TabularConfig {
    fn default() -> Self {
        Self {
            alpha1: 0.1,
            alpha2: 0.05,
            alpha_schedule: AlphaSchedule::Constant,
            gamma: None,
            epsilon: EpsilonSchedule::default(),
            warmup_steps: 1000,
            episodes: 2000,
            seed: 0,
            q0: 0.0,
            tracking: Tracking::default(),
        }
    }
}

impl TabularConfig {
    pub fn validate(&self) -> Result<()> {
        for a in [self.alpha1, self.alpha2] {
            if !(a > 0.0 && a <= 1.0) {
                return Err(Error::Parameter(format!("learning rate {a} outside (0, 1]")));
            }
        }
        if let Some(g) = self.gamma {
            if !(0.0..1.0).contains(&g) {
                return Err(Error::Parameter(format!("discount {g} outside [0, 1)")));
            }
        }
        self.epsilon.validate()
    }
}

fn explore<R: Rng + ?Sized>(greedy: usize, n: usize, eps: f64, rng: &mut R) -> usize {
    if rng.random::<f64>() < eps {
        rng.random_range(0..n)
    } else {
        greedy
    }
}

/// Shared episode loop for the tabular learners: warmup with uniform joint
/// actions, then per-agent epsilon-greedy around `greedy(state)`.
fn run_episodes<R: Rng>(
    model: &MarkovGameModel,
    config: &TabularConfig,
    rng: &mut R,
    mut greedy: impl FnMut(usize) -> (usize, usize),
    mut learn: impl FnMut(&Transition),
    mut log: impl FnMut(usize, (f64, f64), (usize, usize), Option<MergeOutcome>, &mut dyn FnMut(usize) -> (usize, usize)) -> EpisodeLog,
) -> Vec<EpisodeLog> {
    let (n1, n2) = (model.n_leader_actions(), model.n_follower_actions());
    let mut steps = 0usize;
    let mut logs = Vec::with_capacity(config.episodes);
    for ep in 0..config.episodes {
        let eps = config.epsilon.at(ep, config.episodes);
        let mut sess = GameSession::new(model, rng);
        let mut ret = (0.0, 0.0);
        let mut first = None;
        let mut last = None;
        while !sess.is_finished() {
            let s = sess.state();
            let (a1, a2) = if steps < config.warmup_steps {
                (rng.random_range(0..n1), rng.random_range(0..n2))
            } else {
                let (g1, g2) = greedy(s);
                (explore(g1, n1, eps, rng), explore(g2, n2, eps, rng))
            };
            first.get_or_insert((a1, a2));
            let tr = sess.step(a1, a2, rng).expect("session state is valid");
            learn(&tr);
            ret.0 += tr.r1;
            ret.1 += tr.r2;
            steps += 1;
            last = Some(tr);
        }
        let outcome = last.as_ref().and_then(|t| config.tracking.outcome(t));
        logs.push(log(ep, ret, first.unwrap_or((0, 0)), outcome, &mut greedy));
    }
    logs
}

/// Bi-level tabular Q-learning against a simulated model.
pub fn train_bilevel_q(model: &MarkovGameModel, config: &TabularConfig) -> Result<(QTable, JointPolicy, RunRecord)> {
    config.validate()?;
    let gamma = config.gamma.unwrap_or(model.gamma());
    let mut rng = seeded(config.seed);
    let q = std::cell::RefCell::new(QTable::for_model(model, config.q0));
    let mut visits = vec![0u32; model.n_states() * model.n_leader_actions() * model.n_follower_actions()];
    let start = model.start_state();
    let logs = run_episodes(
        model,
        config,
        &mut rng,
        |s| q.borrow().stage_actions(s),
        |tr| {
            let i = model.index(tr.s, tr.a1, tr.a2);
            let a1 = config.alpha_schedule.rate(config.alpha1, visits[i]);
            let a2 = config.alpha_schedule.rate(config.alpha2, visits[i]);
            visits[i] += 1;
            q.borrow_mut().td_update(tr, a1, a2, gamma);
        },
        |episode, (r1, r2), first_action, outcome, greedy| {
            let eval = GreedyEval::rollout(model, &mut *greedy);
            let q = q.borrow();
            EpisodeLog {
                episode,
                return1: r1,
                return2: r2,
                first_action,
                greedy: eval.start_action,
                policy_hash: eval.digest,
                probe: config.tracking.probe.map(|(a1, a2)| (q.q1(start, a1, a2), q.q2(start, a1, a2))),
                follower_prob: None,
                outcome,
            }
        },
    );
    let q = q.into_inner();
    let policy = q.greedy_policy(model);
    let eval = GreedyEval::rollout(model, |s| policy.get(s));
    let record = RunRecord::new("bilevel_q", model, config.seed, logs, eval, !q.is_finite());
    Ok((q, policy, record))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValueIterationResult {
    pub q: QTable,
    pub v1: Vec<f64>,
    pub v2: Vec<f64>,
    pub sweeps: usize,
    pub converged: bool,
}

pub const MAX_SWEEPS: usize = 100_000;

/// One synchronous application of the bi-level Bellman operator:
/// `Q_i(s, a) = r_i(s, a) + gamma * sum_s' P(s' | s, a) * Stackelberg_i(Q(s'))`.
pub fn bilevel_backup(model: &MarkovGameModel, q: &QTable) -> QTable {
    let v: Vec<(f64, f64)> = (0..model.n_states())
        .map(|s| if model.is_terminal(s) { (0.0, 0.0) } else { q.stage_values(s) })
        .collect();
    let mut out = q.clone();
    let g = model.gamma();
    for s in model.non_terminal_states() {
        for a1 in 0..model.n_leader_actions() {
            for a2 in 0..model.n_follower_actions() {
                let (r1, r2) = model.reward(s, a1, a2);
                let (mut e1, mut e2) = (0.0, 0.0);
                for &(n, p) in model.transition(s, a1, a2) {
                    e1 += p * v[n].0;
                    e2 += p * v[n].1;
                }
                out.set(s, a1, a2, (r1 + g * e1, r2 + g * e2));
            }
        }
    }
    out
}

/// Model-based bi-level value iteration from zero tables.
pub fn bilevel_value_iteration(model: &MarkovGameModel, tolerance: f64) -> ValueIterationResult {
    bilevel_value_iteration_from(model, QTable::for_model(model, 0.0), tolerance, MAX_SWEEPS)
}

/// Value iteration from a given table; stops once a sweep changes no entry
/// by `tolerance` or more.
pub fn bilevel_value_iteration_from(
    model: &MarkovGameModel,
    init: QTable,
    tolerance: f64,
    max_sweeps: usize,
) -> ValueIterationResult {
    let mut q = init;
    let mut sweeps = 0;
    let mut converged = false;
    while sweeps < max_sweeps {
        let next = bilevel_backup(model, &q);
        sweeps += 1;
        let delta = next.distance_on(&q, model);
        q = next;
        if delta < tolerance {
            converged = true;
            break;
        }
    }
    let (v1, v2) = (0..model.n_states())
        .map(|s| if model.is_terminal(s) { (0.0, 0.0) } else { q.stage_values(s) })
        .unzip();
    ValueIterationResult { q, v1, v2, sweeps, converged }
}

/// Per-agent tables over own actions only; each agent treats the other as
/// part of the environment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndependentQ {
    pub n_a1: usize,
    pub n_a2: usize,
    pub q1: Vec<f64>,
    pub q2: Vec<f64>,
}

impl IndependentQ {
    pub fn new(model: &MarkovGameModel, q0: f64) -> Self {
        let (n1, n2) = (model.n_leader_actions(), model.n_follower_actions());
        Self { n_a1: n1, n_a2: n2, q1: vec![q0; model.n_states() * n1], q2: vec![q0; model.n_states() * n2] }
    }

    fn argmax(row: &[f64]) -> usize {
        let mut best = 0;
        for (i, &v) in row.iter().enumerate().skip(1) {
            if v > row[best] {
                best = i;
            }
        }
        best
    }

    pub fn greedy(&self, s: usize) -> (usize, usize) {
        (
            Self::argmax(&self.q1[s * self.n_a1..(s + 1) * self.n_a1]),
            Self::argmax(&self.q2[s * self.n_a2..(s + 1) * self.n_a2]),
        )
    }

    fn max1(&self, s: usize) -> f64 {
        self.q1[s * self.n_a1..(s + 1) * self.n_a1].iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    fn max2(&self, s: usize) -> f64 {
        self.q2[s * self.n_a2..(s + 1) * self.n_a2].iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn td_update(&mut self, tr: &Transition, alpha1: f64, alpha2: f64, gamma: f64) {
        let (b1, b2) = if tr.terminal { (0.0, 0.0) } else { (self.max1(tr.s_next), self.max2(tr.s_next)) };
        let i = tr.s * self.n_a1 + tr.a1;
        self.q1[i] += alpha1 * (tr.r1 + gamma * b1 - self.q1[i]);
        let j = tr.s * self.n_a2 + tr.a2;
        self.q2[j] += alpha2 * (tr.r2 + gamma * b2 - self.q2[j]);
    }

    pub fn greedy_policy(&self, model: &MarkovGameModel) -> JointPolicy {
        JointPolicy::new((0..model.n_states()).map(|s| if model.is_terminal(s) { (0, 0) } else { self.greedy(s) }).collect())
    }

    pub fn is_finite(&self) -> bool {
        self.q1.iter().chain(&self.q2).all(|v| v.is_finite())
    }
}

/// Independent tabular Q-learning baseline with the same exploration and
/// learning-rate settings as [`train_bilevel_q`].
pub fn train_independent_q(model: &MarkovGameModel, config: &TabularConfig) -> Result<(IndependentQ, JointPolicy, RunRecord)> {
    config.validate()?;
    let gamma = config.gamma.unwrap_or(model.gamma());
    let mut rng = seeded(config.seed);
    let q = std::cell::RefCell::new(IndependentQ::new(model, config.q0));
    let mut visits1 = vec![0u32; model.n_states() * model.n_leader_actions()];
    let mut visits2 = vec![0u32; model.n_states() * model.n_follower_actions()];
    let start = model.start_state();
    let logs = run_episodes(
        model,
        config,
        &mut rng,
        |s| q.borrow().greedy(s),
        |tr| {
            let i = tr.s * model.n_leader_actions() + tr.a1;
            let j = tr.s * model.n_follower_actions() + tr.a2;
            let a1 = config.alpha_schedule.rate(config.alpha1, visits1[i]);
            let a2 = config.alpha_schedule.rate(config.alpha2, visits2[j]);
            visits1[i] += 1;
            visits2[j] += 1;
            q.borrow_mut().td_update(tr, a1, a2, gamma);
        },
        |episode, (r1, r2), first_action, outcome, greedy| {
            let eval = GreedyEval::rollout(model, &mut *greedy);
            let q = q.borrow();
            EpisodeLog {
                episode,
                return1: r1,
                return2: r2,
                first_action,
                greedy: eval.start_action,
                policy_hash: eval.digest,
                probe: config
                    .tracking
                    .probe
                    .map(|(a1, a2)| (q.q1[start * q.n_a1 + a1], q.q2[start * q.n_a2 + a2])),
                follower_prob: None,
                outcome,
            }
        },
    );
    let q = q.into_inner();
    let policy = q.greedy_policy(model);
    let eval = GreedyEval::rollout(model, |s| policy.get(s));
    let record = RunRecord::new("independent_q", model, config.seed, logs, eval, !q.is_finite());
    Ok((q, policy, record))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::markov_game::{make_counterexample_env, make_matrix_env};

    fn escape_q() -> QTable {
        let g = MatrixGame::escape();
        let mut q = QTable::new(2, 3, 3, 0.0);
        for a1 in 0..3 {
            for a2 in 0..3 {
                q.set(0, a1, a2, (g.u1(a1, a2), g.u2(a1, a2)));
            }
        }
        q
    }

    #[test]
    fn stage_actions_on_escape_and_zero_tables() {
        assert_eq!(escape_q().stage_actions(0), (2, 2));
        assert_eq!(QTable::new(1, 3, 4, 0.0).stage_actions(0), (0, 0));
    }

    #[test]
    fn terminal_update_with_unit_rate_copies_reward() {
        let mut q = escape_q();
        let tr = Transition { s: 0, a1: 1, a2: 2, s_next: 1, r1: 4.0, r2: -2.0, done: true, terminal: true };
        q.td_update(&tr, 1.0, 1.0, 0.9);
        assert_eq!((q.q1(0, 1, 2), q.q2(0, 1, 2)), (4.0, -2.0));
    }

    #[test]
    fn zero_rate_leaves_table_unchanged() {
        let mut q = escape_q();
        let before = q.clone();
        let tr = Transition { s: 0, a1: 0, a2: 0, s_next: 1, r1: 100.0, r2: 100.0, done: true, terminal: true };
        q.td_update(&tr, 0.0, 0.0, 0.9);
        assert_eq!(q, before);
    }

    #[test]
    fn update_touches_one_cell() {
        let mut q = escape_q();
        let before = q.clone();
        let tr = Transition { s: 0, a1: 2, a2: 0, s_next: 0, r1: 1.0, r2: 1.0, done: false, terminal: false };
        q.td_update(&tr, 0.5, 0.5, 0.9);
        let changed = (0..2)
            .flat_map(|s| (0..3).flat_map(move |a| (0..3).map(move |b| (s, a, b))))
            .filter(|&(s, a, b)| q.q1(s, a, b) != before.q1(s, a, b) || q.q2(s, a, b) != before.q2(s, a, b))
            .count();
        assert_eq!(changed, 1);
        // Bootstrap through the stage SE at s' = 0: (C, Z) worth 30.
        assert_eq!(q.q1(0, 2, 0), 0.5 * (1.0 + 0.9 * 30.0));
    }

    #[test]
    fn maintain_value_iteration() {
        let m = make_matrix_env(&MatrixGame::maintain());
        let r = bilevel_value_iteration(&m, 1e-12);
        assert!(r.converged);
        assert_eq!((r.v1[0], r.v2[0]), (20.0, 15.0));
    }

    #[test]
    fn counterexample_value_iteration_from_fixed_point() {
        let g: f64 = 0.9;
        let m = make_counterexample_env(g).unwrap();
        let mut q = QTable::for_model(&m, 0.0);
        q.set(0, 0, 0, (0.0, 10.0 * g));
        q.set(0, 0, 1, (0.0, 10.0));
        q.set(0, 1, 0, (10.0, 0.0));
        q.set(0, 1, 1, (-1.0, -1.0 + 10.0 * g));
        let r = bilevel_value_iteration_from(&m, q.clone(), 1e-12, 10);
        assert!(r.converged);
        assert_eq!(r.sweeps, 1);
        assert_eq!((r.v1[0], r.v2[0]), (0.0, 10.0));
        assert!(r.q.distance(&q) < 1e-12);
    }

    #[test]
    fn qtable_json_shape() {
        let q = escape_q();
        let text = serde_json::to_string(&q).unwrap();
        let back: QTable = serde_json::from_str(&text).unwrap();
        assert_eq!(back, q);
        assert!(serde_json::from_str::<QTable>("{\"q1\":[[[1.0]]],\"q2\":[[[1.0,2.0]]]}").is_err());
    }

    #[test]
    fn harmonic_rates_decay() {
        let s = AlphaSchedule::Harmonic { h: 10.0 };
        assert_eq!(s.rate(0.5, 0), 0.5);
        assert_eq!(s.rate(0.5, 10), 0.25);
        assert_eq!(AlphaSchedule::Constant.rate(0.3, 99), 0.3);
    }

    #[test]
    fn config_validation() {
        let bad = TabularConfig { alpha1: 0.0, ..TabularConfig::default() };
        assert!(bad.validate().is_err());
        let bad = TabularConfig { epsilon: EpsilonSchedule { start: 1.5, ..Default::default() }, ..TabularConfig::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn single_action_env_is_trivially_optimal() {
        let g = MatrixGame::new(vec![vec![3.0]], vec![vec![4.0]]).unwrap();
        let m = make_matrix_env(&g);
        let cfg = TabularConfig { episodes: 50, warmup_steps: 10, ..TabularConfig::default() };
        let (_, policy, rec) = train_independent_q(&m, &cfg).unwrap();
        assert_eq!(policy.get(0), (0, 0));
        assert!(rec.converged_to((0, 0)));
    }
}
