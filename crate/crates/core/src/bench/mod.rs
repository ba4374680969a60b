//! Experiment harness: runs a learner across seeds and writes per-run logs,
//! a summary table and learning-curve data.
//!
//! Output layout under the chosen directory:
//!
//! ```text
//! runs/<algorithm>_seed<k>.csv   one per seed
//! summary.csv, summary.json
//! curves/<algorithm>/*.csv       mean and std per episode
//! ```

pub mod config;
pub mod counterexample;
pub mod plot;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bilevel_ac::{train_biac, BiACConfig, Encoding};
use crate::bilevel_tabular::{bilevel_value_iteration, train_bilevel_q, train_independent_q, TabularConfig, Tracking};
use crate::error::{Error, Result};
use crate::markov_game::{make_grid_env, make_matrix_env, make_merge_env, GridConfig, MarkovGameModel, MergeConfig};
use crate::matrix_game::{run_study, MatrixGame};
use crate::record::{GreedyEval, RunRecord};

pub use config::Overrides;
pub use counterexample::{verify_counterexample, CounterexampleReport};
pub use plot::emit_plot_data;

/// Covariances swept by the payoff-correlation study when none are given.
pub const STUDY_COVARIANCES: [f64; 7] = [-1.0, -0.9, -0.5, 0.0, 0.5, 0.9, 1.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Escape,
    Maintain,
    Grid,
    Merge,
    SeVsNe,
    Counterexample,
}

impl Experiment {
    pub const ALL: [Experiment; 6] =
        [Self::Escape, Self::Maintain, Self::Grid, Self::Merge, Self::SeVsNe, Self::Counterexample];

    pub fn name(self) -> &'static str {
        match self {
            Self::Escape => "escape",
            Self::Maintain => "maintain",
            Self::Grid => "grid",
            Self::Merge => "merge",
            Self::SeVsNe => "se_vs_ne",
            Self::Counterexample => "counterexample",
        }
    }

    /// Learners make sense only on the four games; the study and the
    /// counterexample are exact computations.
    pub fn supports(self, algo: Algorithm) -> bool {
        match self {
            Self::SeVsNe | Self::Counterexample => algo == Algorithm::ValueIteration,
            _ => true,
        }
    }

    /// Builds the environment for the four games.
    pub fn model(self) -> Option<MarkovGameModel> {
        match self {
            Self::Escape => Some(make_matrix_env(&MatrixGame::escape())),
            Self::Maintain => Some(make_matrix_env(&MatrixGame::maintain())),
            Self::Grid => make_grid_env(&GridConfig::default()).ok(),
            Self::Merge => make_merge_env(&MergeConfig::default()).ok(),
            Self::SeVsNe | Self::Counterexample => None,
        }
    }

    /// Start-state joint action whose estimates are logged as curves.
    fn probe(self) -> Option<(usize, usize)> {
        match self {
            Self::Escape => Some((2, 2)),
            Self::Maintain => Some((0, 0)),
            _ => None,
        }
    }

    /// Whether a finished run reached the designated optimum: C-Z on
    /// Escape, A-X on Maintain, both agents on the 20-square in the grid,
    /// and the leader merging first from every start on the highway.
    pub fn is_optimal(self, record: &RunRecord) -> bool {
        match self {
            Self::Escape => record.converged_to((2, 2)),
            Self::Maintain => record.converged_to((0, 0)),
            Self::Grid => {
                let high = GridConfig::default().high_reward;
                record.converged
                    && !record.final_eval.endings.is_empty()
                    && record.final_eval.endings.iter().all(|&(_, e)| e == Some((high, high)))
            }
            Self::Merge => record.converged && record.final_eval.merge_fractions(&MergeConfig::default()).leader_first == 1.0,
            Self::SeVsNe | Self::Counterexample => false,
        }
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|e| e.name() == s).ok_or_else(|| Error::UnknownExperiment(s.to_string()))
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    BilevelQ,
    BilevelAc,
    IndependentQ,
    ValueIteration,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Self::BilevelQ, Self::BilevelAc, Self::IndependentQ, Self::ValueIteration];

    pub fn name(self) -> &'static str {
        match self {
            Self::BilevelQ => "bilevel_q",
            Self::BilevelAc => "bilevel_ac",
            Self::IndependentQ => "independent_q",
            Self::ValueIteration => "value_iteration",
        }
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown algorithm `{s}`")))
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub experiment: Experiment,
    pub algorithm: Algorithm,
    pub seeds: Vec<u64>,
    pub overrides: Overrides,
    pub out_dir: PathBuf,
}

impl ExperimentSpec {
    pub fn new(experiment: Experiment, algorithm: Algorithm, n_seeds: usize, out_dir: impl Into<PathBuf>) -> Self {
        Self {
            experiment,
            algorithm,
            seeds: (0..n_seeds as u64).collect(),
            overrides: Overrides::default(),
            out_dir: out_dir.into(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.experiment.supports(self.algorithm) {
            return Err(Error::UnsupportedAlgorithm {
                experiment: self.experiment.to_string(),
                algorithm: self.algorithm.to_string(),
            });
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("at least one seed is required".into()));
        }
        Ok(())
    }

    /// Tabular settings used for this experiment before overrides.
    pub fn tabular_config(&self) -> TabularConfig {
        let mut c = TabularConfig {
            tracking: Tracking { probe: self.experiment.probe(), merge: None },
            ..TabularConfig::default()
        };
        match self.experiment {
            Experiment::Grid => c.episodes = 3000,
            Experiment::Merge => {
                c.episodes = 3000;
                c.tracking.merge = Some(MergeConfig::default());
            }
            _ => {}
        }
        self.overrides.apply_tabular(c)
    }

    /// Actor-critic settings used for this experiment before overrides.
    pub fn biac_config(&self) -> BiACConfig {
        let mut c = BiACConfig {
            tracking: Tracking { probe: self.experiment.probe(), merge: None },
            ..BiACConfig::default()
        };
        match self.experiment {
            Experiment::Grid => c.episodes = 3000,
            Experiment::Merge => {
                let cfg = MergeConfig::default();
                c.episodes = 5000;
                c.encoding = Encoding::Merge(cfg);
                c.tracking.merge = Some(cfg);
            }
            _ => {}
        }
        self.overrides.apply_biac(c)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub experiment: String,
    pub algorithm: String,
    pub seeds: usize,
    /// Seeds whose estimates stayed finite.
    pub completed: usize,
    /// Greedy-play returns averaged over completed seeds.
    pub mean_return_leader: f64,
    pub mean_return_follower: f64,
    pub optimality_rate: f64,
    pub converged_rate: f64,
    pub leader_first: Option<f64>,
    pub follower_first: Option<f64>,
    pub crash: Option<f64>,
}

impl SummaryRow {
    pub fn from_records(experiment: Experiment, algorithm: Algorithm, records: &[RunRecord]) -> Self {
        let done: Vec<&RunRecord> = records.iter().filter(|r| !r.diverged).collect();
        let n = done.len().max(1) as f64;
        let mean = |f: &dyn Fn(&RunRecord) -> f64| done.iter().map(|r| f(r)).sum::<f64>() / n;
        let merge = (experiment == Experiment::Merge).then(|| {
            let cfg = MergeConfig::default();
            let fr: Vec<_> = done.iter().map(|r| r.final_eval.merge_fractions(&cfg)).collect();
            let avg = |g: &dyn Fn(&crate::record::OutcomeFractions) -> f64| fr.iter().map(g).sum::<f64>() / n;
            (avg(&|f| f.leader_first), avg(&|f| f.follower_first), avg(&|f| f.crash))
        });
        Self {
            experiment: experiment.to_string(),
            algorithm: algorithm.to_string(),
            seeds: records.len(),
            completed: done.len(),
            mean_return_leader: mean(&|r| r.final_eval.returns.0),
            mean_return_follower: mean(&|r| r.final_eval.returns.1),
            optimality_rate: mean(&|r| f64::from(u8::from(experiment.is_optimal(r)))),
            converged_rate: mean(&|r| f64::from(u8::from(r.converged))),
            leader_first: merge.map(|m| m.0),
            follower_first: merge.map(|m| m.1),
            crash: merge.map(|m| m.2),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SummaryTable {
    pub rows: Vec<SummaryRow>,
    /// Outcome of an exact check, when the experiment is one.
    pub verified: Option<bool>,
}

impl SummaryTable {
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }

    fn write(&self, dir: &Path) -> Result<()> {
        if !self.rows.is_empty() {
            self.write_csv(dir.join("summary.csv"))?;
        }
        self.write_json(dir.join("summary.json"))
    }
}

/// Trains one learner on one seed.
pub fn run_seed(spec: &ExperimentSpec, model: &MarkovGameModel, seed: u64) -> Result<RunRecord> {
    match spec.algorithm {
        Algorithm::BilevelQ => {
            let c = TabularConfig { seed, ..spec.tabular_config() };
            Ok(train_bilevel_q(model, &c)?.2)
        }
        Algorithm::IndependentQ => {
            let c = TabularConfig { seed, ..spec.tabular_config() };
            Ok(train_independent_q(model, &c)?.2)
        }
        Algorithm::BilevelAc => {
            let c = BiACConfig { seed, ..spec.biac_config() };
            Ok(train_biac(model, &c)?.record)
        }
        Algorithm::ValueIteration => {
            let vi = bilevel_value_iteration(model, spec.overrides.tolerance.unwrap_or(1e-10));
            let policy = vi.q.greedy_policy(model);
            let eval = GreedyEval::rollout(model, |s| policy.get(s));
            let mut rec = RunRecord::new("value_iteration", model, seed, Vec::new(), eval, !vi.q.is_finite());
            rec.converged = vi.converged;
            Ok(rec)
        }
    }
}

/// Runs the experiment across all seeds in parallel and writes its
/// artifacts under `spec.out_dir`.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<SummaryTable> {
    spec.validate()?;
    let out = &spec.out_dir;
    fs::create_dir_all(out)?;
    match spec.experiment {
        Experiment::SeVsNe => {
            let o = &spec.overrides;
            let covs = o.covariances.clone().unwrap_or_else(|| STUDY_COVARIANCES.to_vec());
            let study = run_study(o.size.unwrap_or(10), &covs, o.trials.unwrap_or(2000), spec.seeds[0])?;
            study.write_csv(fs::File::create(out.join("study.csv"))?)?;
            fs::write(out.join("study.json"), serde_json::to_string_pretty(&study)? + "\n")?;
            let table = SummaryTable::default();
            table.write(out)?;
            Ok(table)
        }
        Experiment::Counterexample => {
            let report = match spec.overrides.gamma {
                Some(g) => counterexample::verify_with(g, &counterexample::q_star(g))?,
                None => verify_counterexample()?,
            };
            fs::write(out.join("counterexample.txt"), format!("{report}\n"))?;
            fs::write(out.join("counterexample.json"), serde_json::to_string_pretty(&report)? + "\n")?;
            let table = SummaryTable { rows: Vec::new(), verified: Some(report.passed()) };
            table.write(out)?;
            Ok(table)
        }
        exp => {
            let model = exp.model().ok_or_else(|| Error::UnknownExperiment(exp.to_string()))?;
            let records = spec
                .seeds
                .par_iter()
                .map(|&seed| run_seed(spec, &model, seed))
                .collect::<Result<Vec<_>>>()?;
            let runs = out.join("runs");
            fs::create_dir_all(&runs)?;
            for r in &records {
                r.write_csv(fs::File::create(runs.join(format!("{}_seed{}.csv", spec.algorithm, r.seed)))?)?;
            }
            if records.iter().any(|r| !r.episodes.is_empty()) {
                let labels = (model.leader_action_labels(), model.follower_action_labels());
                emit_plot_data(&records, labels, out.join("curves").join(spec.algorithm.name()))?;
            }
            let table = SummaryTable { rows: vec![SummaryRow::from_records(exp, spec.algorithm, &records)], verified: None };
            table.write(out)?;
            Ok(table)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for e in Experiment::ALL {
            assert_eq!(e.name().parse::<Experiment>().unwrap(), e);
        }
        for a in Algorithm::ALL {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
        }
        assert!(matches!("chess".parse::<Experiment>(), Err(Error::UnknownExperiment(_))));
        assert!("sarsa".parse::<Algorithm>().is_err());
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let spec = ExperimentSpec::new(Experiment::SeVsNe, Algorithm::BilevelQ, 1, dir.path());
        assert!(matches!(run_experiment(&spec), Err(Error::UnsupportedAlgorithm { .. })));
        let spec = ExperimentSpec::new(Experiment::Escape, Algorithm::BilevelQ, 0, dir.path());
        assert!(matches!(run_experiment(&spec), Err(Error::Config(_))));
    }

    #[test]
    fn unwritable_output_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("occupied");
        fs::write(&file, "x").unwrap();
        let spec = ExperimentSpec::new(Experiment::Escape, Algorithm::ValueIteration, 1, file.join("sub"));
        assert!(matches!(run_experiment(&spec), Err(Error::Io(_))));
    }

    #[test]
    fn value_iteration_on_escape_is_optimal() {
        let dir = tempfile::tempdir().unwrap();
        let spec = ExperimentSpec::new(Experiment::Escape, Algorithm::ValueIteration, 2, dir.path());
        let table = run_experiment(&spec).unwrap();
        let row = &table.rows[0];
        assert_eq!((row.optimality_rate, row.mean_return_leader, row.mean_return_follower), (1.0, 30.0, 30.0));
        assert!(dir.path().join("summary.csv").exists());
        assert!(dir.path().join("runs/value_iteration_seed1.csv").exists());
    }

    #[test]
    fn reruns_are_byte_identical() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let mut spec = ExperimentSpec::new(Experiment::Maintain, Algorithm::BilevelQ, 3, a.path());
        spec.overrides.episodes = Some(300);
        run_experiment(&spec).unwrap();
        spec.out_dir = b.path().to_path_buf();
        run_experiment(&spec).unwrap();
        for f in ["summary.csv", "summary.json", "runs/bilevel_q_seed2.csv", "curves/bilevel_q/return_leader.csv"] {
            assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
        }
    }

    #[test]
    fn counterexample_experiment_records_verification() {
        let dir = tempfile::tempdir().unwrap();
        let spec = ExperimentSpec::new(Experiment::Counterexample, Algorithm::ValueIteration, 1, dir.path());
        assert_eq!(run_experiment(&spec).unwrap().verified, Some(true));
        let mut spec = spec;
        spec.overrides.gamma = Some(0.0);
        assert_eq!(run_experiment(&spec).unwrap().verified, Some(false));
    }
}
