//! Built-in environments.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::MarkovGameModel;
use crate::error::{Error, Result};
use crate::matrix_game::MatrixGame;

const LETTERS: [&str; 8] = ["A", "B", "C", "D", "E", "F", "G", "H"];
const FOLLOWER_LETTERS: [&str; 8] = ["X", "Y", "Z", "W", "V", "U", "T", "S"];

fn labels(n: usize, base: &[&'static str]) -> Vec<String> {
    (0..n)
        .map(|i| base.get(i).map_or_else(|| format!("a{i}"), |s| s.to_string()))
        .collect()
}

/// Wraps a matrix game as a one-step Markov game: state 0 is the start,
/// state 1 is terminal, every joint action pays its matrix entry.
pub fn make_matrix_env(game: &MatrixGame) -> MarkovGameModel {
    let a1 = labels(game.rows(), &LETTERS);
    let a2 = labels(game.cols(), &FOLLOWER_LETTERS);
    let a1: Vec<&str> = a1.iter().map(String::as_str).collect();
    let a2: Vec<&str> = a2.iter().map(String::as_str).collect();
    let mut b = MarkovGameModel::builder("matrix", 2, &a1, &a2).terminal(1);
    for i in 0..game.rows() {
        for j in 0..game.cols() {
            b.set(0, i, j, vec![(1, 1.0)], (game.u1(i, j), game.u2(i, j)));
        }
    }
    b.build().expect("a valid matrix game yields a valid model")
}

/// The two-state game with a self-loop at `s1` in which the joint policy
/// `(A, B)` is a bi-level Bellman fixed point without solving the bi-level
/// problem. State 0 is `s1`, state 1 is the terminal `s2`.
pub fn make_counterexample_env(gamma: f64) -> Result<MarkovGameModel> {
    MarkovGameModel::builder("counterexample", 2, &["A", "B"], &["A", "B"])
        .gamma(gamma)
        .terminal(1)
        .with(0, 0, 0, 0, (0.0, 0.0))
        .with(0, 0, 1, 1, (0.0, 10.0))
        .with(0, 1, 0, 1, (10.0, 0.0))
        .with(0, 1, 1, 0, (-1.0, -1.0))
        .build()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub cells: usize,
    pub low_cell: usize,
    pub low_reward: f64,
    pub high_cell: usize,
    pub high_reward: f64,
    pub leader_start: usize,
    pub follower_start: usize,
    pub horizon: usize,
    pub gamma: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            cells: 5,
            low_cell: 0,
            low_reward: 10.0,
            high_cell: 4,
            high_reward: 20.0,
            leader_start: 1,
            follower_start: 3,
            horizon: 20,
            gamma: 0.95,
        }
    }
}

impl GridConfig {
    pub fn state(&self, leader_cell: usize, follower_cell: usize) -> usize {
        leader_cell * self.cells + follower_cell
    }

    pub fn cells_of(&self, s: usize) -> (usize, usize) {
        (s / self.cells, s % self.cells)
    }
}

/// A corridor coordination game. Each agent moves left, right or stays;
/// when both stand on the same reward square the episode ends and both
/// receive that square's reward.
pub fn make_grid_env(cfg: &GridConfig) -> Result<MarkovGameModel> {
    let n = cfg.cells;
    if n < 2
        || [cfg.low_cell, cfg.high_cell, cfg.leader_start, cfg.follower_start].iter().any(|&c| c >= n)
        || cfg.low_cell == cfg.high_cell
    {
        return Err(Error::Parameter("grid cells out of range".into()));
    }
    let reward_at = |c: usize| {
        if c == cfg.low_cell {
            Some(cfg.low_reward)
        } else if c == cfg.high_cell {
            Some(cfg.high_reward)
        } else {
            None
        }
    };
    let start = cfg.state(cfg.leader_start, cfg.follower_start);
    let mut b = MarkovGameModel::builder("grid", n * n, &["left", "right", "stay"], &["left", "right", "stay"])
        .gamma(cfg.gamma)
        .horizon(Some(cfg.horizon))
        .initial(vec![(start, 1.0)]);
    let is_terminal = |p: usize, q: usize| p == q && reward_at(p).is_some();
    for p in 0..n {
        for q in 0..n {
            if is_terminal(p, q) {
                b = b.terminal(cfg.state(p, q));
            }
        }
    }
    if is_terminal(cfg.leader_start, cfg.follower_start) {
        return Err(Error::Parameter("grid start is terminal".into()));
    }
    let mv = |c: usize, a: usize| match a {
        0 => c.saturating_sub(1),
        1 => (c + 1).min(n - 1),
        _ => c,
    };
    for p in 0..n {
        for q in 0..n {
            if is_terminal(p, q) {
                continue;
            }
            for a1 in 0..3 {
                for a2 in 0..3 {
                    let (np, nq) = (mv(p, a1), mv(q, a2));
                    let r = if np == nq { reward_at(np).unwrap_or(0.0) } else { 0.0 };
                    b.set(cfg.state(p, q), a1, a2, vec![(cfg.state(np, nq), 1.0)], (r, r));
                }
            }
        }
    }
    b.build()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Lane {
    Main,
    Auxiliary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MergeAction {
    LaneLeft,
    LaneRight,
    Faster,
    Slower,
    Idle,
}

impl MergeAction {
    pub const ALL: [MergeAction; 5] =
        [Self::LaneLeft, Self::LaneRight, Self::Faster, Self::Slower, Self::Idle];
    pub const LABELS: [&'static str; 5] = ["LANE_LEFT", "LANE_RIGHT", "FASTER", "SLOWER", "IDLE"];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Car {
    pub lane: Lane,
    pub cell: usize,
    pub speed: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergeState {
    pub leader: Car,
    pub follower: Car,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MergeOutcome {
    LeaderFirst,
    FollowerFirst,
    Crash,
    Timeout,
}

impl MergeOutcome {
    /// Classifies a terminal reward pair: whoever holds the first-pass
    /// reward went first.
    pub fn from_rewards(r1: f64, r2: f64, cfg: &MergeConfig) -> Option<Self> {
        if r1 == cfg.first_reward {
            Some(Self::LeaderFirst)
        } else if r2 == cfg.first_reward {
            Some(Self::FollowerFirst)
        } else if r1 == cfg.crash_reward && r2 == cfg.crash_reward {
            Some(Self::Crash)
        } else {
            None
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::LeaderFirst => "leader_first",
            Self::FollowerFirst => "follower_first",
            Self::Crash => "crash",
            Self::Timeout => "timeout",
        }
    }
}

/// Grid kinematics for the two-car merge. The leader starts on the main
/// lane, the follower on the auxiliary lane, both at cell 0. The auxiliary
/// lane ends at `merge_point`; the road ends at `length`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MergeConfig {
    pub length: usize,
    pub merge_point: usize,
    pub max_speed: usize,
    pub start_speeds: [usize; 2],
    pub horizon: usize,
    pub gamma: f64,
    pub first_reward: f64,
    pub second_reward: f64,
    pub crash_reward: f64,
}

impl Default for MergeConfig {
    fn default() -> Self {
        Self {
            length: 10,
            merge_point: 5,
            max_speed: 2,
            start_speeds: [1, 2],
            horizon: 50,
            gamma: 0.95,
            first_reward: 50.0,
            second_reward: 10.0,
            crash_reward: -10.0,
        }
    }
}

impl MergeConfig {
    fn validate(&self) -> Result<()> {
        if self.merge_point >= self.length {
            return Err(Error::Parameter(format!(
                "merge point {} must lie before the road end {}",
                self.merge_point, self.length
            )));
        }
        if self.merge_point == 0 || self.max_speed == 0 {
            return Err(Error::Parameter("merge point and max speed must be positive".into()));
        }
        if self.start_speeds.iter().any(|&v| v > self.max_speed) || self.start_speeds[0] > self.start_speeds[1] {
            return Err(Error::Parameter("start speed range invalid".into()));
        }
        Ok(())
    }

    fn car_states(&self) -> usize {
        2 * self.length * (self.max_speed + 1)
    }

    fn car_index(&self, car: Car) -> usize {
        let lane = match car.lane {
            Lane::Main => 0,
            Lane::Auxiliary => 1,
        };
        (lane * self.length + car.cell) * (self.max_speed + 1) + car.speed
    }

    fn car_at(&self, i: usize) -> Car {
        let speed = i % (self.max_speed + 1);
        let rest = i / (self.max_speed + 1);
        let lane = if rest / self.length == 0 { Lane::Main } else { Lane::Auxiliary };
        Car { lane, cell: rest % self.length, speed }
    }

    /// Index of the single absorbing terminal state.
    pub fn terminal_state(&self) -> usize {
        self.car_states() * self.car_states()
    }

    pub fn n_states(&self) -> usize {
        self.terminal_state() + 1
    }

    pub fn encode(&self, st: &MergeState) -> usize {
        self.car_index(st.leader) * self.car_states() + self.car_index(st.follower)
    }

    pub fn decode(&self, s: usize) -> Option<MergeState> {
        (s < self.terminal_state()).then(|| MergeState {
            leader: self.car_at(s / self.car_states()),
            follower: self.car_at(s % self.car_states()),
        })
    }

    pub fn start_states(&self) -> Vec<MergeState> {
        let speeds = self.start_speeds[0]..=self.start_speeds[1];
        let mut out = Vec::new();
        for vl in speeds.clone() {
            for vf in speeds.clone() {
                out.push(MergeState {
                    leader: Car { lane: Lane::Main, cell: 0, speed: vl },
                    follower: Car { lane: Lane::Auxiliary, cell: 0, speed: vf },
                });
            }
        }
        out
    }

    fn drive(&self, car: Car, action: MergeAction) -> (Car, usize) {
        let mut c = car;
        match action {
            MergeAction::Faster => c.speed = (c.speed + 1).min(self.max_speed),
            MergeAction::Slower => c.speed = c.speed.saturating_sub(1),
            MergeAction::LaneLeft => c.lane = Lane::Main,
            MergeAction::LaneRight => {
                if c.cell < self.merge_point {
                    c.lane = Lane::Auxiliary;
                }
            }
            MergeAction::Idle => {}
        }
        let pos = c.cell + c.speed;
        // The auxiliary lane ends: forced LANE_LEFT.
        if c.lane == Lane::Auxiliary && pos >= self.merge_point {
            c.lane = Lane::Main;
        }
        (c, pos)
    }

    /// Advances both cars one tick. Returns the next non-terminal state, or
    /// `None` with the terminal reward pair and outcome.
    pub fn advance(
        &self,
        st: &MergeState,
        a1: MergeAction,
        a2: MergeAction,
    ) -> (Option<MergeState>, (f64, f64), Option<MergeOutcome>) {
        let (l, lp) = self.drive(st.leader, a1);
        let (f, fp) = self.drive(st.follower, a2);
        let same_lane_after = l.lane == f.lane;
        let swapped = st.leader.lane == st.follower.lane
            && same_lane_after
            && (st.leader.cell as isize - st.follower.cell as isize).signum()
                * (lp as isize - fp as isize).signum()
                < 0;
        if (same_lane_after && lp == fp) || swapped {
            let r = self.crash_reward;
            return (None, (r, r), Some(MergeOutcome::Crash));
        }
        let (l_out, f_out) = (lp >= self.length, fp >= self.length);
        if l_out || f_out {
            let leader_first = match (l_out, f_out) {
                (true, false) => true,
                (false, true) => false,
                _ => lp > fp,
            };
            return if leader_first {
                (None, (self.first_reward, self.second_reward), Some(MergeOutcome::LeaderFirst))
            } else {
                (None, (self.second_reward, self.first_reward), Some(MergeOutcome::FollowerFirst))
            };
        }
        let next = MergeState {
            leader: Car { cell: lp, ..l },
            follower: Car { cell: fp, ..f },
        };
        (Some(next), (0.0, 0.0), None)
    }
}

/// Builds the explicit merge model. Start speeds are drawn uniformly and
/// independently per car from `start_speeds`; the first car to pass the
/// road end ends the episode, collecting the first-pass reward while the
/// other car collects the second-pass reward.
pub fn make_merge_env(cfg: &MergeConfig) -> Result<MarkovGameModel> {
    cfg.validate()?;
    let starts = cfg.start_states();
    let p = 1.0 / starts.len() as f64;
    let terminal = cfg.terminal_state();
    let mut b = MarkovGameModel::builder("merge", cfg.n_states(), &MergeAction::LABELS, &MergeAction::LABELS)
        .gamma(cfg.gamma)
        .horizon(Some(cfg.horizon))
        .initial(starts.iter().map(|st| (cfg.encode(st), p)).collect())
        .terminal(terminal);
    for s in 0..terminal {
        let st = cfg.decode(s).expect("non-terminal index");
        for (i, &a1) in MergeAction::ALL.iter().enumerate() {
            for (j, &a2) in MergeAction::ALL.iter().enumerate() {
                let (next, r, _) = cfg.advance(&st, a1, a2);
                let n = next.map_or(terminal, |ns| cfg.encode(&ns));
                b.set(s, i, j, vec![(n, 1.0)], r);
            }
        }
    }
    b.build()
}

/// Normalized numeric features per merge state: lane, cell / length and
/// speed / max speed for each car. The terminal state maps to zeros.
pub fn merge_features(cfg: &MergeConfig) -> Vec<Vec<f64>> {
    (0..cfg.n_states())
        .map(|s| match cfg.decode(s) {
            Some(st) => {
                let f = |c: Car| {
                    [
                        if c.lane == Lane::Main { 0.0 } else { 1.0 },
                        c.cell as f64 / cfg.length as f64,
                        c.speed as f64 / cfg.max_speed as f64,
                    ]
                };
                f(st.leader).into_iter().chain(f(st.follower)).collect()
            }
            None => vec![0.0; 6],
        })
        .collect()
}

/// A random finite game with deterministic or stochastic transitions; used
/// by property tests. With `identical` both agents share the reward.
pub fn make_random_env<R: Rng + ?Sized>(
    n_states: usize,
    n_a1: usize,
    n_a2: usize,
    gamma: f64,
    identical: bool,
    rng: &mut R,
) -> Result<MarkovGameModel> {
    let a1 = labels(n_a1, &LETTERS);
    let a2 = labels(n_a2, &FOLLOWER_LETTERS);
    let a1: Vec<&str> = a1.iter().map(String::as_str).collect();
    let a2: Vec<&str> = a2.iter().map(String::as_str).collect();
    // Last state is terminal.
    let mut b = MarkovGameModel::builder("random", n_states + 1, &a1, &a2)
        .gamma(gamma)
        .terminal(n_states);
    for s in 0..n_states {
        for i in 0..n_a1 {
            for j in 0..n_a2 {
                let k = rng.random_range(1..=2usize.min(n_states + 1));
                let mut next: Vec<(usize, f64)> = Vec::new();
                let mut weights = Vec::new();
                for _ in 0..k {
                    let n = rng.random_range(0..=n_states);
                    if !next.iter().any(|x| x.0 == n) {
                        next.push((n, 0.0));
                        weights.push(rng.random_range(0.1..1.0));
                    }
                }
                let total: f64 = weights.iter().sum();
                for (e, w) in next.iter_mut().zip(&weights) {
                    e.1 = w / total;
                }
                let r1 = rng.random_range(-1.0..1.0);
                let r2 = if identical { r1 } else { rng.random_range(-1.0..1.0) };
                b.set(s, i, j, next, (r1, r2));
            }
        }
    }
    b.build()
}
