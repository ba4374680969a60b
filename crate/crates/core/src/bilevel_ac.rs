//! Bi-level actor-critic with discrete actions.
//!
//! The leader is a Q-learner over joint actions; the follower has its own
//! critic plus an actor conditioned on the leader's action. Training is
//! centralized through a shared replay buffer. At execution time each agent
//! holds a copy of the leader critic and the follower actor and runs the same
//! deterministic selection, so no communication is needed.

use std::io::Write;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::approximator::{
    argmax, gumbel_softmax_sample, softmax, Cache, GumbelConfig, Mlp, MomentumSgd, ReplayBuffer,
    TargetSync,
};
use crate::bilevel_tabular::{EpsilonSchedule, Tracking};
use crate::error::{Error, Result};
use crate::markov_game::{merge_features, GameSession, MarkovGameModel, MergeConfig};
use crate::record::{EpisodeLog, GreedyEval, RunRecord};
use crate::rng::seeded;

/// A joint-action value function over encoded states.
pub trait Critic {
    /// `a2` is the follower's action vector (one-hot or relaxed).
    fn value_vec(&self, x: &[f64], a1: usize, a2: &[f64]) -> f64;

    fn value(&self, x: &[f64], a1: usize, a2: usize) -> f64 {
        let mut v = vec![0.0; self.n_follower_actions()];
        v[a2] = 1.0;
        self.value_vec(x, a1, &v)
    }

    fn n_follower_actions(&self) -> usize;
}

/// The follower's policy, conditioned on the leader's action.
pub trait Actor {
    fn logits(&self, x: &[f64], a1: usize) -> Vec<f64>;

    fn greedy(&self, x: &[f64], a1: usize) -> usize {
        argmax(&self.logits(x, a1))
    }
}

fn one_hot(n: usize, i: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[i] = 1.0;
    v
}

/// For every leader action, pair it with the actor's greedy reply and score
/// the pair with the leader critic; returns the best pair, lowest leader
/// index on ties.
pub fn select_next_actions<C: Critic + ?Sized, A: Actor + ?Sized>(
    critic: &C,
    actor: &A,
    x: &[f64],
    n_leader_actions: usize,
) -> (usize, usize) {
    let mut best = (0, 0);
    let mut best_v = f64::NEG_INFINITY;
    for a1 in 0..n_leader_actions {
        let a2 = actor.greedy(x, a1);
        let v = critic.value(x, a1, a2);
        if v > best_v {
            best = (a1, a2);
            best_v = v;
        }
    }
    best
}

/// Critic network over `features ++ onehot(a1) ++ a2_vector`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QNet {
    pub net: Mlp,
    pub n_a1: usize,
    pub n_a2: usize,
}

impl QNet {
    fn input(&self, x: &[f64], a1: usize, a2: &[f64]) -> Vec<f64> {
        let mut v = Vec::with_capacity(x.len() + self.n_a1 + self.n_a2);
        v.extend_from_slice(x);
        v.extend((0..self.n_a1).map(|i| if i == a1 { 1.0 } else { 0.0 }));
        v.extend_from_slice(a2);
        v
    }
}

impl Critic for QNet {
    fn value_vec(&self, x: &[f64], a1: usize, a2: &[f64]) -> f64 {
        let mut cache = Cache::default();
        self.net.forward_into(&self.input(x, a1, a2), &mut cache).expect("critic input matches encoding");
        cache.output()[0]
    }

    fn n_follower_actions(&self) -> usize {
        self.n_a2
    }
}

/// Actor network over `features ++ onehot(a1)`, emitting follower logits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyNet {
    pub net: Mlp,
    pub n_a1: usize,
}

impl PolicyNet {
    fn input(&self, x: &[f64], a1: usize) -> Vec<f64> {
        let mut v = Vec::with_capacity(x.len() + self.n_a1);
        v.extend_from_slice(x);
        v.extend((0..self.n_a1).map(|i| if i == a1 { 1.0 } else { 0.0 }));
        v
    }

    pub fn probabilities(&self, x: &[f64], a1: usize) -> Vec<f64> {
        softmax(&self.logits(x, a1))
    }
}

impl Actor for PolicyNet {
    fn logits(&self, x: &[f64], a1: usize) -> Vec<f64> {
        let mut cache = Cache::default();
        self.net.forward_into(&self.input(x, a1), &mut cache).expect("actor input matches encoding");
        cache.output().to_vec()
    }
}

/// Lookup-table critic for one-hot encoded states; the state is the index of
/// the largest feature.
#[derive(Debug, Clone, PartialEq)]
pub struct TableCritic {
    pub n_a1: usize,
    pub n_a2: usize,
    /// Indexed `(s * n_a1 + a1) * n_a2 + a2`.
    pub values: Vec<f64>,
}

impl Critic for TableCritic {
    fn value_vec(&self, x: &[f64], a1: usize, a2: &[f64]) -> f64 {
        let base = (argmax(x) * self.n_a1 + a1) * self.n_a2;
        a2.iter().enumerate().map(|(j, w)| w * self.values[base + j]).sum()
    }

    fn n_follower_actions(&self) -> usize {
        self.n_a2
    }
}

/// Lookup-table actor for one-hot encoded states.
#[derive(Debug, Clone, PartialEq)]
pub struct TableActor {
    pub n_a1: usize,
    pub n_a2: usize,
    pub logits: Vec<f64>,
}

impl Actor for TableActor {
    fn logits(&self, x: &[f64], a1: usize) -> Vec<f64> {
        let base = (argmax(x) * self.n_a1 + a1) * self.n_a2;
        self.logits[base..base + self.n_a2].to_vec()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiACParams {
    pub q1: QNet,
    pub q2: QNet,
    pub actor: PolicyNet,
    pub q1_target: QNet,
    pub q2_target: QNet,
    pub gumbel: GumbelConfig,
}

impl BiACParams {
    /// Fresh networks with `hidden` units in each of two hidden layers.
    pub fn new<R: Rng + ?Sized>(
        feature_dim: usize,
        n_a1: usize,
        n_a2: usize,
        hidden: usize,
        gumbel: GumbelConfig,
        rng: &mut R,
    ) -> Result<Self> {
        let critic_sizes = [feature_dim + n_a1 + n_a2, hidden, hidden, 1];
        let q1 = QNet { net: Mlp::new(&critic_sizes, rng)?, n_a1, n_a2 };
        let q2 = QNet { net: Mlp::new(&critic_sizes, rng)?, n_a1, n_a2 };
        let actor = PolicyNet { net: Mlp::new(&[feature_dim + n_a1, hidden, hidden, n_a2], rng)?, n_a1 };
        Ok(Self { q1_target: q1.clone(), q2_target: q2.clone(), q1, q2, actor, gumbel })
    }

    pub fn feature_dim(&self) -> usize {
        self.actor.net.input_dim() - self.actor.n_a1
    }

    /// Centralized greedy joint action.
    pub fn greedy(&self, x: &[f64]) -> (usize, usize) {
        select_next_actions(&self.q1, &self.actor, x, self.q1.n_a1)
    }

    pub fn is_finite(&self) -> bool {
        [&self.q1.net, &self.q2.net, &self.actor.net].iter().all(|n| n.is_finite())
    }
}

/// How states are turned into network inputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Encoding {
    OneHot,
    /// Lane, position and speed per car.
    Merge(MergeConfig),
}

impl Encoding {
    pub fn features(&self, model: &MarkovGameModel) -> Vec<Vec<f64>> {
        match self {
            Self::OneHot => (0..model.n_states()).map(|s| one_hot(model.n_states(), s)).collect(),
            Self::Merge(cfg) => merge_features(cfg),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiACConfig {
    /// Leader critic learning rate.
    pub alpha1: f64,
    /// Follower critic learning rate.
    pub alpha2: f64,
    /// Actor learning rate.
    pub beta: f64,
    pub momentum: f64,
    /// Overrides the model's discount when set.
    pub gamma: Option<f64>,
    pub hidden: usize,
    pub batch_size: usize,
    pub buffer_capacity: usize,
    pub target_sync: TargetSync,
    pub epsilon: EpsilonSchedule,
    pub gumbel: GumbelConfig,
    pub warmup_steps: usize,
    pub episodes: usize,
    pub seed: u64,
    pub encoding: Encoding,
    pub tracking: Tracking,
}

impl Default for BiACConfig {
    fn default() -> Self {
        Self {
            alpha1: 1e-3,
            alpha2: 1e-3,
            beta: 1e-4,
            momentum: 0.9,
            gamma: None,
            hidden: 64,
            batch_size: 32,
            buffer_capacity: 10_000,
            target_sync: TargetSync::Hard { interval: 100 },
            epsilon: EpsilonSchedule::default(),
            gumbel: GumbelConfig::default(),
            warmup_steps: 1000,
            episodes: 2000,
            seed: 0,
            encoding: Encoding::OneHot,
            tracking: Tracking::default(),
        }
    }
}

impl BiACConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("alpha1", self.alpha1), ("alpha2", self.alpha2), ("beta", self.beta)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Parameter(format!("{name} = {v} must be positive")));
            }
        }
        if let Some(g) = self.gamma {
            if !(0.0..1.0).contains(&g) {
                return Err(Error::Parameter(format!("discount {g} outside [0, 1)")));
            }
        }
        if self.batch_size == 0 || self.buffer_capacity == 0 || self.hidden == 0 {
            return Err(Error::Parameter("batch size, buffer capacity and width must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::Parameter(format!("momentum {} outside [0, 1)", self.momentum)));
        }
        if !(self.gumbel.initial > 0.0 && self.gumbel.final_temperature > 0.0) {
            return Err(Error::Parameter("Gumbel temperatures must be positive".into()));
        }
        Ok(())
    }
}

/// One replay record, with states stored as feature vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Experience {
    pub x: Vec<f64>,
    pub a1: usize,
    pub a2: usize,
    /// Follower action vector fed to the critics.
    pub a2_vec: Vec<f64>,
    pub r1: f64,
    pub r2: f64,
    pub x_next: Vec<f64>,
    pub terminal: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Optimizers {
    pub q1: MomentumSgd,
    pub q2: MomentumSgd,
    pub actor: MomentumSgd,
}

impl Optimizers {
    pub fn new(params: &BiACParams, alpha1: f64, alpha2: f64, beta: f64, momentum: f64) -> Self {
        Self {
            q1: MomentumSgd::new(&params.q1.net, alpha1, momentum),
            q2: MomentumSgd::new(&params.q2.net, alpha2, momentum),
            actor: MomentumSgd::new(&params.actor.net, beta, momentum),
        }
    }
}

/// Mean squared TD errors before the step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticLoss {
    pub q1: f64,
    pub q2: f64,
}

/// Semi-gradient TD step on both critics. Targets bootstrap from the target
/// critics at the joint action chosen by [`select_next_actions`] over the
/// online leader critic and actor; terminal records use the bare reward.
pub fn critic_update(params: &mut BiACParams, opt: &mut Optimizers, batch: &[&Experience], gamma: f64) -> Result<CriticLoss> {
    if batch.is_empty() {
        return Err(Error::EmptyBuffer);
    }
    let n = batch.len() as f64;
    let mut g1 = params.q1.net.gradients();
    let mut g2 = params.q2.net.gradients();
    let mut cache = Cache::default();
    let mut loss = CriticLoss { q1: 0.0, q2: 0.0 };
    for e in batch {
        let (y1, y2) = if e.terminal {
            (e.r1, e.r2)
        } else {
            let (b1, b2) = params.greedy(&e.x_next);
            (
                e.r1 + gamma * params.q1_target.value(&e.x_next, b1, b2),
                e.r2 + gamma * params.q2_target.value(&e.x_next, b1, b2),
            )
        };
        for (q, g, y, l) in [(&params.q1, &mut g1, y1, &mut loss.q1), (&params.q2, &mut g2, y2, &mut loss.q2)] {
            q.net.forward_into(&q.input(&e.x, e.a1, &e.a2_vec), &mut cache)?;
            let delta = cache.output()[0] - y;
            *l += delta * delta / n;
            q.net.backward_accumulate(&cache, &[delta / n], g)?;
        }
    }
    opt.q1.step(&mut params.q1.net, &g1);
    opt.q2.step(&mut params.q2.net, &g2);
    Ok(loss)
}

/// Policy-gradient step on the actor: raises the log-probability of each
/// record's follower action in proportion to the current follower critic's
/// value of the record's joint action. No baseline is subtracted.
pub fn actor_update(params: &mut BiACParams, opt: &mut Optimizers, batch: &[&Experience]) -> Result<()> {
    if batch.is_empty() {
        return Err(Error::EmptyBuffer);
    }
    let n = batch.len() as f64;
    let mut g = params.actor.net.gradients();
    let mut cache = Cache::default();
    for e in batch {
        params.actor.net.forward_into(&params.actor.input(&e.x, e.a1), &mut cache)?;
        let p = softmax(cache.output());
        let w = params.q2.value(&e.x, e.a1, e.a2);
        // Descent direction of -w * log p(a2).
        let d: Vec<f64> = p.iter().enumerate().map(|(j, pj)| -w * ((if j == e.a2 { 1.0 } else { 0.0 }) - pj) / n).collect();
        params.actor.net.backward_accumulate(&cache, &d, &mut g)?;
    }
    opt.actor.step(&mut params.actor.net, &g);
    Ok(())
}

/// Training snapshot metadata written next to the parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub env: String,
    pub seed: u64,
    /// FNV-1a of the config's JSON form.
    pub config_hash: String,
    /// How each critic's TD step is applied.
    pub critic_rule: String,
}

impl Manifest {
    pub fn new(model: &MarkovGameModel, config: &BiACConfig) -> Result<Self> {
        let text = serde_json::to_string(config)?;
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in text.bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
        Ok(Self {
            env: model.name().to_string(),
            seed: config.seed,
            config_hash: format!("{h:016x}"),
            critic_rule: "each critic steps its own parameters: theta_i -= alpha_i * delta_i * grad Q_i".into(),
        })
    }
}

/// Writes `params.json` and `manifest.json` into `dir`.
pub fn save_params(dir: impl AsRef<Path>, params: &BiACParams, manifest: &Manifest) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    let mut f = std::fs::File::create(dir.join("params.json"))?;
    serde_json::to_writer(&mut f, params)?;
    f.flush()?;
    std::fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(manifest)?)?;
    Ok(())
}

pub fn load_params(dir: impl AsRef<Path>) -> Result<BiACParams> {
    let text = std::fs::read_to_string(dir.as_ref().join("params.json"))?;
    Ok(serde_json::from_str(&text)?)
}

pub struct TrainedBiAC {
    pub params: BiACParams,
    pub record: RunRecord,
    pub manifest: Manifest,
}

/// Trains the three networks on `model`.
pub fn train_biac(model: &MarkovGameModel, config: &BiACConfig) -> Result<TrainedBiAC> {
    config.validate()?;
    let gamma = config.gamma.unwrap_or(model.gamma());
    let features = config.encoding.features(model);
    let (n1, n2) = (model.n_leader_actions(), model.n_follower_actions());
    let mut rng = seeded(config.seed);
    let mut params = BiACParams::new(features[0].len(), n1, n2, config.hidden, config.gumbel, &mut rng)?;
    let mut opt = Optimizers::new(&params, config.alpha1, config.alpha2, config.beta, config.momentum);
    let mut buffer: ReplayBuffer<Experience> = ReplayBuffer::new(config.buffer_capacity);
    let start = model.start_state();
    let mut steps = 0usize;
    let mut updates = 0usize;
    let mut logs = Vec::with_capacity(config.episodes);
    let mut diverged = false;

    for ep in 0..config.episodes {
        let eps = config.epsilon.at(ep, config.episodes);
        let mut sess = GameSession::new(model, &mut rng);
        let mut ret = (0.0, 0.0);
        let mut first = None;
        let mut last = None;
        while !sess.is_finished() {
            let s = sess.state();
            let x = &features[s];
            let temperature = config.gumbel.temperature(steps);
            let (a1, a2, a2_vec) = if steps < config.warmup_steps {
                let (a1, a2) = (rng.random_range(0..n1), rng.random_range(0..n2));
                (a1, a2, one_hot(n2, a2))
            } else {
                let a1 = if rng.random::<f64>() < eps { rng.random_range(0..n1) } else { params.greedy(x).0 };
                let sample = gumbel_softmax_sample(&params.actor.logits(x, a1), temperature, &mut rng)?;
                let v = sample.action_vector(config.gumbel.mode);
                (a1, sample.hard, v)
            };
            first.get_or_insert((a1, a2));
            let tr = sess.step(a1, a2, &mut rng)?;
            buffer.push(Experience {
                x: x.clone(),
                a1,
                a2,
                a2_vec,
                r1: tr.r1,
                r2: tr.r2,
                x_next: features[tr.s_next].clone(),
                terminal: tr.terminal,
            });
            ret.0 += tr.r1;
            ret.1 += tr.r2;
            steps += 1;
            if steps >= config.warmup_steps.max(1) && buffer.len() >= config.batch_size.min(buffer.capacity()) {
                let batch = buffer.sample(config.batch_size, &mut rng)?;
                critic_update(&mut params, &mut opt, &batch, gamma)?;
                actor_update(&mut params, &mut opt, &batch)?;
                updates += 1;
                config.target_sync.apply(updates, &params.q1.net, &mut params.q1_target.net);
                config.target_sync.apply(updates, &params.q2.net, &mut params.q2_target.net);
            }
            last = Some(tr);
        }
        if !params.is_finite() {
            diverged = true;
            break;
        }
        let eval = GreedyEval::rollout(model, |s| params.greedy(&features[s]));
        let x0 = &features[start];
        logs.push(EpisodeLog {
            episode: ep,
            return1: ret.0,
            return2: ret.1,
            first_action: first.unwrap_or((0, 0)),
            greedy: eval.start_action,
            policy_hash: eval.digest,
            probe: config.tracking.probe.map(|(a1, a2)| (params.q1.value(x0, a1, a2), params.q2.value(x0, a1, a2))),
            follower_prob: config.tracking.probe.map(|(a1, a2)| params.actor.probabilities(x0, a1)[a2]),
            outcome: last.as_ref().and_then(|t| config.tracking.outcome(t)),
        });
    }
    let eval = if diverged {
        GreedyEval { digest: 0, start_action: (0, 0), returns: (f64::NAN, f64::NAN), endings: Vec::new() }
    } else {
        GreedyEval::rollout(model, |s| params.greedy(&features[s]))
    };
    let record = RunRecord::new("bilevel_ac", model, config.seed, logs, eval, diverged);
    let manifest = Manifest::new(model, config)?;
    Ok(TrainedBiAC { params, record, manifest })
}

/// One agent's private copy of the leader critic and the follower actor.
#[derive(Debug, Clone)]
pub struct ExecutionAgent {
    q1: QNet,
    actor: PolicyNet,
}

impl ExecutionAgent {
    pub fn new(params: &BiACParams) -> Self {
        Self { q1: params.q1.clone(), actor: params.actor.clone() }
    }

    /// The leader plays its part of the selected joint action.
    pub fn leader_action(&self, x: &[f64]) -> usize {
        select_next_actions(&self.q1, &self.actor, x, self.q1.n_a1).0
    }

    /// The follower re-derives the leader's choice and replies greedily.
    pub fn follower_action(&self, x: &[f64]) -> usize {
        let a1 = select_next_actions(&self.q1, &self.actor, x, self.q1.n_a1).0;
        self.actor.greedy(x, a1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExecutionStats {
    /// Joint actions per episode.
    pub actions: Vec<Vec<(usize, usize)>>,
    pub mean_returns: (f64, f64),
}

/// Plays `episodes` episodes with two independently acting agents.
pub fn execute_decentralized<R: Rng + ?Sized>(
    params: &BiACParams,
    model: &MarkovGameModel,
    features: &[Vec<f64>],
    episodes: usize,
    rng: &mut R,
) -> Result<ExecutionStats> {
    let leader = ExecutionAgent::new(params);
    let follower = ExecutionAgent::new(params);
    run_episodes(model, features, episodes, rng, |x| (leader.leader_action(x), follower.follower_action(x)))
}

/// The same episodes driven by the centralized greedy selection.
pub fn execute_centralized<R: Rng + ?Sized>(
    params: &BiACParams,
    model: &MarkovGameModel,
    features: &[Vec<f64>],
    episodes: usize,
    rng: &mut R,
) -> Result<ExecutionStats> {
    run_episodes(model, features, episodes, rng, |x| params.greedy(x))
}

fn run_episodes<R: Rng + ?Sized>(
    model: &MarkovGameModel,
    features: &[Vec<f64>],
    episodes: usize,
    rng: &mut R,
    act: impl Fn(&[f64]) -> (usize, usize),
) -> Result<ExecutionStats> {
    if features.len() != model.n_states() {
        return Err(Error::Dimension(format!("{} feature rows for {} states", features.len(), model.n_states())));
    }
    let mut actions = Vec::with_capacity(episodes);
    let mut total = (0.0, 0.0);
    for _ in 0..episodes {
        let mut sess = GameSession::new(model, rng);
        let mut seq = Vec::new();
        while !sess.is_finished() {
            let (a1, a2) = act(&features[sess.state()]);
            let tr = sess.step(a1, a2, rng)?;
            total.0 += tr.r1;
            total.1 += tr.r2;
            seq.push((a1, a2));
        }
        actions.push(seq);
    }
    let k = episodes.max(1) as f64;
    Ok(ExecutionStats { actions, mean_returns: (total.0 / k, total.1 / k) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::markov_game::make_matrix_env;
    use crate::matrix_game::MatrixGame;

    fn maintain_tables() -> (TableCritic, TableActor) {
        let g = MatrixGame::maintain();
        let critic = TableCritic { n_a1: 3, n_a2: 3, values: g.leader_payoffs().to_vec() };
        // Follower replies X, Y, Z to A, B, C.
        let mut logits = vec![0.0; 9];
        for a1 in 0..3 {
            logits[a1 * 3 + g.follower_best_response(a1)] = 1.0;
        }
        (critic, TableActor { n_a1: 3, n_a2: 3, logits })
    }

    #[test]
    fn selection_on_maintain_tables() {
        let (critic, actor) = maintain_tables();
        assert_eq!(select_next_actions(&critic, &actor, &[1.0], 3), (0, 0));
    }

    #[test]
    fn single_leader_action_is_forced() {
        let critic = TableCritic { n_a1: 1, n_a2: 3, values: vec![5.0, 1.0, 2.0] };
        let actor = TableActor { n_a1: 1, n_a2: 3, logits: vec![0.0, 0.0, 4.0] };
        assert_eq!(select_next_actions(&critic, &actor, &[1.0], 1), (0, 2));
    }

    fn terminal_batch(n2: usize) -> Vec<Experience> {
        (0..3)
            .flat_map(|a1| {
                (0..n2).map(move |a2| Experience {
                    x: vec![1.0, 0.0],
                    a1,
                    a2,
                    a2_vec: one_hot(n2, a2),
                    r1: (a1 * 3 + a2) as f64,
                    r2: a2 as f64,
                    x_next: vec![0.0, 1.0],
                    terminal: true,
                })
            })
            .collect()
    }

    #[test]
    fn critic_regression_on_fixed_batch() {
        let mut rng = seeded(3);
        let mut params = BiACParams::new(2, 3, 3, 16, GumbelConfig::default(), &mut rng).unwrap();
        let mut opt = Optimizers::new(&params, 0.01, 0.01, 0.01, 0.9);
        let data = terminal_batch(3);
        let batch: Vec<&Experience> = data.iter().collect();
        let first = critic_update(&mut params, &mut opt, &batch, 0.9).unwrap();
        let mut last = first;
        for _ in 0..2000 {
            last = critic_update(&mut params, &mut opt, &batch, 0.9).unwrap();
        }
        assert!(last.q1 < first.q1 * 0.01 && last.q2 < first.q2 * 0.01);
    }

    #[test]
    fn zero_rates_leave_params_unchanged() {
        let mut rng = seeded(4);
        let mut params = BiACParams::new(2, 3, 3, 8, GumbelConfig::default(), &mut rng).unwrap();
        let before = params.clone();
        let mut opt = Optimizers::new(&params, 0.0, 0.0, 0.0, 0.9);
        let data = terminal_batch(3);
        let batch: Vec<&Experience> = data.iter().collect();
        critic_update(&mut params, &mut opt, &batch, 0.9).unwrap();
        actor_update(&mut params, &mut opt, &batch).unwrap();
        assert_eq!(params, before);
        assert!(matches!(critic_update(&mut params, &mut opt, &[], 0.9), Err(Error::EmptyBuffer)));
    }

    #[test]
    fn zero_follower_critic_gives_zero_actor_step() {
        let mut rng = seeded(5);
        let mut params = BiACParams::new(2, 3, 3, 8, GumbelConfig::default(), &mut rng).unwrap();
        params.q2.net = Mlp::zeros(&params.q2.net.sizes()).unwrap();
        let before = params.actor.clone();
        let mut opt = Optimizers::new(&params, 0.1, 0.1, 0.1, 0.0);
        let data = terminal_batch(3);
        actor_update(&mut params, &mut opt, &data.iter().collect::<Vec<_>>()).unwrap();
        assert_eq!(params.actor, before);
    }

    #[test]
    fn actor_follows_the_sign_of_the_critic() {
        // Bandit: Q2 = 1 for action 0 and 0 for action 1.
        let mut rng = seeded(6);
        let mut params = BiACParams::new(1, 1, 2, 8, GumbelConfig::default(), &mut rng).unwrap();
        let mut q2 = Mlp::zeros(&[4, 1]).unwrap();
        // Input is [x, onehot(a1), a2 one-hot]; weight 1 on the first follower slot.
        q2.set_params(&[0.0, 0.0, 1.0, 0.0, 0.0]).unwrap();
        params.q2 = QNet { net: q2, n_a1: 1, n_a2: 2 };
        let mut opt = Optimizers::new(&params, 0.0, 0.0, 0.05, 0.0);
        let data: Vec<Experience> = (0..2)
            .map(|a2| Experience {
                x: vec![1.0],
                a1: 0,
                a2,
                a2_vec: one_hot(2, a2),
                r1: 0.0,
                r2: 0.0,
                x_next: vec![1.0],
                terminal: true,
            })
            .collect();
        let batch: Vec<&Experience> = data.iter().collect();
        let mut p = params.actor.probabilities(&[1.0], 0)[0];
        for _ in 0..200 {
            actor_update(&mut params, &mut opt, &batch).unwrap();
            let q = params.actor.probabilities(&[1.0], 0)[0];
            assert!(q > p);
            p = q;
        }
    }

    #[test]
    fn untrained_params_run_clean_episodes() {
        let m = make_matrix_env(&MatrixGame::escape());
        let features = Encoding::OneHot.features(&m);
        let params = BiACParams::new(2, 3, 3, 8, GumbelConfig::default(), &mut seeded(1)).unwrap();
        let stats = execute_decentralized(&params, &m, &features, 5, &mut seeded(2)).unwrap();
        assert_eq!(stats.actions.len(), 5);
        assert!(stats.actions.iter().all(|e| e.len() == 1));
    }

    #[test]
    fn training_is_deterministic() {
        let m = make_matrix_env(&MatrixGame::maintain());
        let cfg = BiACConfig { episodes: 60, warmup_steps: 20, hidden: 8, seed: 11, ..BiACConfig::default() };
        let a = train_biac(&m, &cfg).unwrap();
        let b = train_biac(&m, &cfg).unwrap();
        assert_eq!(a.record, b.record);
        assert_eq!(a.params, b.params);
    }

    #[test]
    fn params_save_and_load() {
        let dir = tempfile::tempdir().unwrap();
        let m = make_matrix_env(&MatrixGame::escape());
        let cfg = BiACConfig::default();
        let params = BiACParams::new(2, 3, 3, 4, GumbelConfig::default(), &mut seeded(0)).unwrap();
        save_params(dir.path(), &params, &Manifest::new(&m, &cfg).unwrap()).unwrap();
        assert_eq!(load_params(dir.path()).unwrap(), params);
        let manifest: Manifest =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
        assert_eq!(manifest.env, m.name());
    }
}
