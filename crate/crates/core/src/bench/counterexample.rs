//! A bi-level Bellman fixed point that is not a bi-level solution.
//!
//! In the two-state game the tables below satisfy the bi-level Bellman
//! equation with stage solution `(A, B)` at `s1`, yet the leader can do
//! strictly better by committing to `B` there, where the follower's reply
//! `A` pays `(10, 0)`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bilevel_tabular::{bilevel_backup, QTable};
use crate::error::Result;
use crate::markov_game::{birl_oracle, make_counterexample_env, MarkovGameModel};

/// Default discount for the check.
pub const GAMMA: f64 = 0.9;

/// Joint-action values at `s1`: leader action is the row, follower action
/// the column.
pub fn q_star(gamma: f64) -> QTable {
    let mut q = QTable::new(2, 2, 2, 0.0);
    q.set(0, 0, 0, (0.0, 10.0 * gamma));
    q.set(0, 0, 1, (0.0, 10.0));
    q.set(0, 1, 0, (10.0, 0.0));
    q.set(0, 1, 1, (-1.0, -1.0 + 10.0 * gamma));
    q
}

/// Sup-norm residual of `q` under one bi-level Bellman backup on the
/// non-terminal states.
pub fn bellman_residual(model: &MarkovGameModel, q: &QTable) -> f64 {
    bilevel_backup(model, q).distance_on(q, model)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleReport {
    pub gamma: f64,
    pub residual: f64,
    pub stage_solution: (usize, usize),
    pub oracle_action: (usize, usize),
    pub oracle_value: (f64, f64),
    pub checks: Vec<Check>,
}

impl CounterexampleReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

impl fmt::Display for CounterexampleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = |a: usize| ["A", "B"][a];
        writeln!(f, "counterexample game, gamma = {}", self.gamma)?;
        for c in &self.checks {
            writeln!(f, "  [{}] {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail)?;
        }
        writeln!(
            f,
            "  fixed point plays ({}, {}); the exact bi-level solution plays ({}, {}) for ({}, {})",
            name(self.stage_solution.0),
            name(self.stage_solution.1),
            name(self.oracle_action.0),
            name(self.oracle_action.1),
            self.oracle_value.0,
            self.oracle_value.1
        )?;
        if self.passed() {
            write!(f, "VERIFIED: a bi-level Bellman fixed point need not solve the bi-level problem")
        } else {
            write!(f, "FAILED")
        }
    }
}

/// Runs the three checks against the given tables.
pub fn verify_with(gamma: f64, q: &QTable) -> Result<CounterexampleReport> {
    let model = make_counterexample_env(gamma)?;
    let residual = bellman_residual(&model, q);
    let stage_solution = q.stage_actions(0);
    let sol = birl_oracle(&model)?;
    let oracle_action = sol.policy.get(0);
    let oracle_value = (sol.leader_value, sol.follower_value);
    let checks = vec![
        Check {
            name: "Bellman residual".into(),
            passed: residual <= 1e-9,
            detail: format!("{residual:.3e} (limit 1e-9)"),
        },
        Check {
            name: "stage solution at s1".into(),
            passed: stage_solution == (0, 1),
            detail: format!("{stage_solution:?} (expected (A, B) = (0, 1))"),
        },
        Check {
            name: "exact bi-level solution".into(),
            passed: oracle_action.0 == 1
                && (oracle_value.0 - 10.0).abs() <= 1e-9
                && oracle_value.1.abs() <= 1e-9,
            detail: format!("leader {} with value ({:.6}, {:.6}) (expected B, (10, 0))", oracle_action.0, oracle_value.0, oracle_value.1),
        },
    ];
    Ok(CounterexampleReport { gamma, residual, stage_solution, oracle_action, oracle_value, checks })
}

pub fn verify_counterexample() -> Result<CounterexampleReport> {
    verify_with(GAMMA, &q_star(GAMMA))
}
