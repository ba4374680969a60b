//! The corridor coordination game solved three ways.

use stackeq::bilevel_tabular::{bilevel_value_iteration, train_bilevel_q, TabularConfig};
use stackeq::markov_game::{birl_oracle, make_grid_env, GridConfig};

fn main() -> stackeq::Result<()> {
    let cfg = GridConfig::default();
    let model = make_grid_env(&cfg)?;

    let vi = bilevel_value_iteration(&model, 1e-10);
    let start = model.start_state();
    println!("value iteration: {} sweeps, start values ({:.3}, {:.3})", vi.sweeps, vi.v1[start], vi.v2[start]);
    let path: Vec<_> = model.rollout(&vi.q.greedy_policy(&model), start).iter().map(|t| cfg.cells_of(t.s_next)).collect();
    println!("  greedy path (leader cell, follower cell): {path:?}");

    let (_, policy, record) = train_bilevel_q(&model, &TabularConfig { episodes: 3000, ..TabularConfig::default() })?;
    let last = model.rollout(&policy, start).last().map(|t| (t.r1, t.r2));
    println!("bi-level Q: converged {}, final reward {last:?}", record.converged);

    let sol = birl_oracle(&model)?;
    println!("exact bi-level optimum ({:?}): ({:.3}, {:.3})", sol.method, sol.leader_value, sol.follower_value);
    Ok(())
}
