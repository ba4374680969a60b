//! A bi-level Bellman fixed point that is not optimal for the leader.

use stackeq::bench::counterexample::{bellman_residual, q_star, verify_counterexample};
use stackeq::markov_game::make_counterexample_env;

fn main() -> stackeq::Result<()> {
    println!("{}", verify_counterexample()?);
    println!();
    for gamma in [0.0, 0.5, 0.9, 0.99] {
        let model = make_counterexample_env(gamma)?;
        let q = q_star(gamma);
        println!("gamma {gamma:>4}: residual {:.1e}, stage solution {:?}", bellman_residual(&model, &q), q.stage_actions(0));
    }
    Ok(())
}
