//! Two-player matrix games and their equilibria.
//!
//! Row index is always the leader (agent 1), column index the follower
//! (agent 2). Payoffs are stored row-major so a stage game can be read
//! straight out of a Q-table slice without copying.

use std::io::Write;
use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{derive_seed, seeded};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GameJson", into = "GameJson")]
pub struct MatrixGame {
    rows: usize,
    cols: usize,
    u1: Vec<f64>,
    u2: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct GameJson {
    u1: Vec<Vec<f64>>,
    u2: Vec<Vec<f64>>,
}

impl TryFrom<GameJson> for MatrixGame {
    type Error = Error;

    fn try_from(g: GameJson) -> Result<Self> {
        MatrixGame::new(g.u1, g.u2)
    }
}

impl From<MatrixGame> for GameJson {
    fn from(g: MatrixGame) -> Self {
        GameJson {
            u1: g.u1.chunks(g.cols).map(<[f64]>::to_vec).collect(),
            u2: g.u2.chunks(g.cols).map(<[f64]>::to_vec).collect(),
        }
    }
}

impl MatrixGame {
    /// Builds a game from nested rows; row = leader action.
    pub fn new(u1: Vec<Vec<f64>>, u2: Vec<Vec<f64>>) -> Result<Self> {
        let rows = u1.len();
        let cols = u1.first().map_or(0, Vec::len);
        if rows == 0 || cols == 0 {
            return Err(Error::Dimension("payoff matrices must be nonempty".into()));
        }
        if u2.len() != rows
            || u1.iter().chain(u2.iter()).any(|r| r.len() != cols)
        {
            return Err(Error::Dimension(format!(
                "payoff matrices must both be {rows}x{cols}"
            )));
        }
        Self::from_flat(
            rows,
            cols,
            u1.into_iter().flatten().collect(),
            u2.into_iter().flatten().collect(),
        )
    }

    /// Builds a game from row-major payoff vectors.
    pub fn from_flat(rows: usize, cols: usize, u1: Vec<f64>, u2: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Dimension("payoff matrices must be nonempty".into()));
        }
        if u1.len() != rows * cols || u2.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "expected {} entries per matrix, got {} and {}",
                rows * cols,
                u1.len(),
                u2.len()
            )));
        }
        if u1.iter().chain(u2.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("payoff matrix"));
        }
        Ok(Self { rows, cols, u1, u2 })
    }

    /// The cooperative "Escape" game: A-X and C-Z are pure NE, C-Z is the SE.
    pub fn escape() -> Self {
        Self::new(
            vec![
                vec![15.0, 10.0, 0.0],
                vec![10.0, 10.0, 0.0],
                vec![0.0, 0.0, 30.0],
            ],
            vec![
                vec![15.0, 10.0, 0.0],
                vec![10.0, 10.0, 0.0],
                vec![0.0, 0.0, 30.0],
            ],
        )
        .expect("static game is valid")
    }

    /// The non-cooperative "Maintain" game: A-X is the SE, B-Y and C-Z are the NE.
    pub fn maintain() -> Self {
        Self::new(
            vec![
                vec![20.0, 0.0, 0.0],
                vec![30.0, 10.0, 0.0],
                vec![0.0, 0.0, 5.0],
            ],
            vec![
                vec![15.0, 0.0, 0.0],
                vec![0.0, 5.0, 0.0],
                vec![0.0, 0.0, 10.0],
            ],
        )
        .expect("static game is valid")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn u1(&self, a1: usize, a2: usize) -> f64 {
        self.u1[a1 * self.cols + a2]
    }

    pub fn u2(&self, a1: usize, a2: usize) -> f64 {
        self.u2[a1 * self.cols + a2]
    }

    pub fn leader_payoffs(&self) -> &[f64] {
        &self.u1
    }

    pub fn follower_payoffs(&self) -> &[f64] {
        &self.u2
    }

    pub fn follower_best_response(&self, a1: usize) -> usize {
        follower_best_response(self.cols, &self.u1, &self.u2, a1)
    }

    pub fn solve_stackelberg(&self) -> StackelbergSolution {
        let (a1, a2) = stackelberg_indices(self.rows, self.cols, &self.u1, &self.u2);
        StackelbergSolution {
            leader_action: a1,
            follower_action: a2,
            leader_payoff: self.u1(a1, a2),
            follower_payoff: self.u2(a1, a2),
        }
    }

    /// Strict pure equilibria: every unilateral deviation loses payoff for
    /// the deviating player. Listed in row-major order.
    pub fn enumerate_pure_nash(&self) -> PureNashSet {
        self.pure_nash(true)
    }

    /// Weak pure equilibria: no unilateral deviation gains. On the Escape
    /// table this adds the indifferent cell (B, Y).
    pub fn enumerate_weak_nash(&self) -> PureNashSet {
        self.pure_nash(false)
    }

    fn pure_nash(&self, strict: bool) -> PureNashSet {
        let beats = |a: f64, b: f64| if strict { a > b } else { a >= b };
        let mut points = Vec::new();
        for a1 in 0..self.rows {
            for a2 in 0..self.cols {
                let (v1, v2) = (self.u1(a1, a2), self.u2(a1, a2));
                let leader_ok = (0..self.rows).filter(|&b| b != a1).all(|b| beats(v1, self.u1(b, a2)));
                let follower_ok = (0..self.cols).filter(|&b| b != a2).all(|b| beats(v2, self.u2(a1, b)));
                if leader_ok && follower_ok {
                    points.push((a1, a2));
                }
            }
        }
        PureNashSet { points }
    }

    /// Pure-strategy security level of the leader: max over rows of the row
    /// minimum of `u1`. Ties go to the lowest row.
    pub fn solve_minimax(&self) -> (usize, f64) {
        let mut best = (0, f64::NEG_INFINITY);
        for a1 in 0..self.rows {
            let worst = self.u1[a1 * self.cols..(a1 + 1) * self.cols]
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min);
            if worst > best.1 {
                best = (a1, worst);
            }
        }
        best
    }

    /// Pearson correlation between the two payoff matrices over all joint
    /// pure actions.
    pub fn cooperation_level(&self) -> Result<f64> {
        pearson(&self.u1, &self.u2)
    }

    /// Applies `u1 -> s1*u1 + b1` and `u2 -> s2*u2 + b2`.
    pub fn affine(&self, s1: f64, b1: f64, s2: f64, b2: f64) -> Result<Self> {
        Self::from_flat(
            self.rows,
            self.cols,
            self.u1.iter().map(|v| s1 * v + b1).collect(),
            self.u2.iter().map(|v| s2 * v + b2).collect(),
        )
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}

pub(crate) fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(Error::ZeroVariance("leader payoffs"));
    }
    if syy == 0.0 {
        return Err(Error::ZeroVariance("follower payoffs"));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Follower best response to `a1` over row-major payoff slices: maximize
/// `u2`, break ties toward the leader's payoff, then lowest index.
pub fn follower_best_response(cols: usize, u1: &[f64], u2: &[f64], a1: usize) -> usize {
    let base = a1 * cols;
    let mut best = 0;
    for a2 in 1..cols {
        let (f, fb) = (u2[base + a2], u2[base + best]);
        if f > fb || (f == fb && u1[base + a2] > u1[base + best]) {
            best = a2;
        }
    }
    best
}

/// Strong Stackelberg joint action of the stage game held in row-major
/// slices. Leader ties go to the lowest index.
pub fn stackelberg_indices(rows: usize, cols: usize, u1: &[f64], u2: &[f64]) -> (usize, usize) {
    debug_assert_eq!(u1.len(), rows * cols);
    debug_assert_eq!(u2.len(), rows * cols);
    let mut best = (0, follower_best_response(cols, u1, u2, 0));
    let mut best_value = u1[best.1];
    for a1 in 1..rows {
        let a2 = follower_best_response(cols, u1, u2, a1);
        let v = u1[a1 * cols + a2];
        if v > best_value {
            best = (a1, a2);
            best_value = v;
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StackelbergSolution {
    pub leader_action: usize,
    pub follower_action: usize,
    pub leader_payoff: f64,
    pub follower_payoff: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PureNashSet {
    pub points: Vec<(usize, usize)>,
}

impl PureNashSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, a1: usize, a2: usize) -> bool {
        self.points.contains(&(a1, a2))
    }
}

/// Draws an `n x n` game whose cell payoff pairs are i.i.d. bivariate normal
/// with zero means, unit variances and the given covariance.
pub fn sample_random_game<R: Rng + ?Sized>(
    size_n: usize,
    covariance: f64,
    rng: &mut R,
) -> Result<MatrixGame> {
    if !(-1.0..=1.0).contains(&covariance) {
        return Err(Error::Parameter(format!(
            "covariance {covariance} outside [-1, 1]"
        )));
    }
    if size_n == 0 {
        return Err(Error::Dimension("game size must be positive".into()));
    }
    // Cholesky factor of [[1, c], [c, 1]].
    let tail = (1.0 - covariance * covariance).sqrt();
    let cells = size_n * size_n;
    let mut u1 = Vec::with_capacity(cells);
    let mut u2 = Vec::with_capacity(cells);
    for _ in 0..cells {
        let z1: f64 = rng.sample(StandardNormal);
        let z2: f64 = rng.sample(StandardNormal);
        u1.push(z1);
        u2.push(covariance * z1 + tail * z2);
    }
    MatrixGame::from_flat(size_n, size_n, u1, u2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub size_n: usize,
    pub covariance: f64,
    pub trials: usize,
    pub seed: u64,
}

/// Aggregates of the SE-vs-NE comparison at one covariance level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    pub covariance: f64,
    pub se_leader: f64,
    pub se_follower: f64,
    /// NaN when no trial had a pure NE.
    pub ne_leader: f64,
    pub ne_follower: f64,
    pub ne_count: f64,
    pub ne_exists_frac: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyResult {
    pub size_n: usize,
    pub trials: usize,
    pub rows: Vec<StudyRow>,
}

impl StudyResult {
    pub const CSV_HEADER: &'static str =
        "covariance,se_leader,se_follower,ne_leader,ne_follower,ne_count,ne_exists_frac";

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{}", Self::CSV_HEADER)?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.covariance,
                r.se_leader,
                r.se_follower,
                r.ne_leader,
                r.ne_follower,
                r.ne_count,
                r.ne_exists_frac
            )?;
        }
        Ok(())
    }
}

/// Runs `config.trials` independent games at one covariance level. Trial `t`
/// draws from a generator seeded by `(config.seed, t)`, so results do not
/// depend on evaluation order.
pub fn se_vs_ne_study(config: &StudyConfig) -> Result<StudyRow> {
    if config.trials == 0 || config.size_n == 0 {
        return Err(Error::Parameter("trials and size_n must be positive".into()));
    }
    let mut se = (0.0, 0.0);
    let mut ne = (0.0, 0.0);
    let mut ne_trials = 0usize;
    let mut ne_count = 0usize;
    for trial in 0..config.trials {
        let mut rng = seeded(derive_seed(config.seed, trial as u64));
        let game = sample_random_game(config.size_n, config.covariance, &mut rng)?;
        let sol = game.solve_stackelberg();
        se.0 += sol.leader_payoff;
        se.1 += sol.follower_payoff;
        let nash = game.enumerate_pure_nash();
        ne_count += nash.len();
        if !nash.is_empty() {
            let k = nash.len() as f64;
            ne.0 += nash.points.iter().map(|&(a, b)| game.u1(a, b)).sum::<f64>() / k;
            ne.1 += nash.points.iter().map(|&(a, b)| game.u2(a, b)).sum::<f64>() / k;
            ne_trials += 1;
        }
    }
    let t = config.trials as f64;
    let nt = ne_trials as f64;
    Ok(StudyRow {
        covariance: config.covariance,
        se_leader: se.0 / t,
        se_follower: se.1 / t,
        ne_leader: if ne_trials > 0 { ne.0 / nt } else { f64::NAN },
        ne_follower: if ne_trials > 0 { ne.1 / nt } else { f64::NAN },
        ne_count: ne_count as f64 / t,
        ne_exists_frac: nt / t,
    })
}

/// The study across several covariance levels. Each level gets its own
/// seed stream derived from `seed` and the level's position.
pub fn run_study(size_n: usize, covariances: &[f64], trials: usize, seed: u64) -> Result<StudyResult> {
    let rows = covariances
        .iter()
        .enumerate()
        .map(|(i, &covariance)| {
            se_vs_ne_study(&StudyConfig {
                size_n,
                covariance,
                trials,
                seed: derive_seed(seed, 1_000_000 + i as u64),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(StudyResult { size_n, trials, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn escape_and_maintain_stackelberg() {
        let s = MatrixGame::escape().solve_stackelberg();
        assert_eq!((s.leader_action, s.follower_action), (2, 2));
        assert_eq!((s.leader_payoff, s.follower_payoff), (30.0, 30.0));
        let s = MatrixGame::maintain().solve_stackelberg();
        assert_eq!((s.leader_action, s.follower_action), (0, 0));
        assert_eq!((s.leader_payoff, s.follower_payoff), (20.0, 15.0));
    }

    #[test]
    fn single_cell_game() {
        let g = MatrixGame::new(vec![vec![7.0]], vec![vec![-3.0]]).unwrap();
        let s = g.solve_stackelberg();
        assert_eq!((s.leader_action, s.follower_action), (0, 0));
        assert_eq!((s.leader_payoff, s.follower_payoff), (7.0, -3.0));
        let g = MatrixGame::new(vec![vec![5.0]], vec![vec![-5.0]]).unwrap();
        assert_eq!(g.solve_minimax(), (0, 5.0));
    }

    #[test]
    fn empty_and_ragged_games_are_rejected() {
        assert!(matches!(MatrixGame::new(vec![], vec![]), Err(Error::Dimension(_))));
        assert!(matches!(
            MatrixGame::new(vec![vec![]], vec![vec![]]),
            Err(Error::Dimension(_))
        ));
        assert!(MatrixGame::new(vec![vec![1.0, 2.0], vec![1.0]], vec![vec![1.0, 2.0], vec![1.0, 2.0]]).is_err());
        assert!(matches!(
            MatrixGame::new(vec![vec![f64::NAN]], vec![vec![0.0]]),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn pure_nash_of_the_two_tables() {
        assert_eq!(MatrixGame::escape().enumerate_pure_nash().points, vec![(0, 0), (2, 2)]);
        assert_eq!(MatrixGame::maintain().enumerate_pure_nash().points, vec![(1, 1), (2, 2)]);
        assert_eq!(MatrixGame::escape().enumerate_weak_nash().points, vec![(0, 0), (1, 1), (2, 2)]);
        assert_eq!(MatrixGame::maintain().enumerate_weak_nash().points, vec![(1, 1), (2, 2)]);
    }

    #[test]
    fn matching_pennies_has_no_pure_nash() {
        let u1 = vec![vec![1.0, -1.0], vec![-1.0, 1.0]];
        let u2 = vec![vec![-1.0, 1.0], vec![1.0, -1.0]];
        let g = MatrixGame::new(u1, u2).unwrap();
        assert!(g.enumerate_pure_nash().is_empty());
    }

    #[test]
    fn minimax_of_maintain_picks_lowest_row() {
        // Row minima of u1 are (0, 0, 0).
        assert_eq!(MatrixGame::maintain().solve_minimax(), (0, 0.0));
        let c = MatrixGame::new(vec![vec![4.0; 2]; 2], vec![vec![1.0; 2]; 2]).unwrap();
        assert_eq!(c.solve_minimax().1, 4.0);
    }

    #[test]
    fn follower_ties_favor_the_leader() {
        // Follower indifferent in row 0; leader prefers column 1.
        let g = MatrixGame::new(
            vec![vec![1.0, 5.0], vec![2.0, 0.0]],
            vec![vec![3.0, 3.0], vec![1.0, 0.0]],
        )
        .unwrap();
        assert_eq!(g.follower_best_response(0), 1);
        let s = g.solve_stackelberg();
        assert_eq!((s.leader_action, s.follower_action), (0, 1));
    }

    #[test]
    fn cooperation_level_extremes() {
        let u = vec![vec![1.0, 2.0], vec![3.0, 5.0]];
        let neg: Vec<Vec<f64>> = u.iter().map(|r| r.iter().map(|v| -v).collect()).collect();
        let same = MatrixGame::new(u.clone(), u.clone()).unwrap();
        assert!((same.cooperation_level().unwrap() - 1.0).abs() < 1e-12);
        let zs = MatrixGame::new(u.clone(), neg).unwrap();
        assert!((zs.cooperation_level().unwrap() + 1.0).abs() < 1e-12);
        let flat = MatrixGame::new(vec![vec![2.0; 2]; 2], u).unwrap();
        assert!(matches!(flat.cooperation_level(), Err(Error::ZeroVariance(_))));
    }

    #[test]
    fn covariance_one_gives_identical_payoffs() {
        let mut rng = seeded(3);
        let g = sample_random_game(6, 1.0, &mut rng).unwrap();
        assert_eq!(g.leader_payoffs(), g.follower_payoffs());
        assert!(sample_random_game(3, 1.5, &mut rng).is_err());
    }

    #[test]
    fn sampling_is_reproducible() {
        let a = sample_random_game(5, 0.3, &mut seeded(11)).unwrap();
        let b = sample_random_game(5, 0.3, &mut seeded(11)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_covariance_sample_correlation() {
        let mut rng = seeded(2024);
        let mut x = Vec::new();
        let mut y = Vec::new();
        for _ in 0..10 {
            let g = sample_random_game(100, 0.0, &mut rng).unwrap();
            x.extend_from_slice(g.leader_payoffs());
            y.extend_from_slice(g.follower_payoffs());
        }
        assert_eq!(x.len(), 100_000);
        assert!(pearson(&x, &y).unwrap().abs() < 0.01);
    }

    #[test]
    fn identical_payoff_study_has_equal_se_payoffs() {
        let row = se_vs_ne_study(&StudyConfig { size_n: 5, covariance: 1.0, trials: 50, seed: 1 }).unwrap();
        assert_eq!(row.se_leader, row.se_follower);
        assert!(row.se_leader > row.ne_leader);
        assert!(row.ne_exists_frac == 1.0);
    }

    #[test]
    fn json_round_trip_layout() {
        let text = serde_json::to_string(&MatrixGame::maintain()).unwrap();
        assert!(text.starts_with("{\"u1\":[[20.0,0.0,0.0],[30.0,10.0,0.0]"));
        let back: MatrixGame = serde_json::from_str(&text).unwrap();
        assert_eq!(back, MatrixGame::maintain());
        assert!(serde_json::from_str::<MatrixGame>("{\"u1\":[[1]],\"u2\":[[1,2]]}").is_err());
    }
}
