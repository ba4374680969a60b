//! Tabular learners on the one-step games: the bi-level learner settles on
//! the Stackelberg cell while independent learners do not.
//!
//! Usage: `cargo run --release --example tabular_escape_maintain -- [seeds]`

use stackeq::bilevel_tabular::{train_bilevel_q, train_independent_q, TabularConfig};
use stackeq::markov_game::make_matrix_env;
use stackeq::MatrixGame;

fn main() -> stackeq::Result<()> {
    let seeds: u64 = std::env::args().nth(1).map_or(100, |a| a.parse().expect("numeric seed count"));
    for (name, game, optimum) in [("escape", MatrixGame::escape(), (2, 2)), ("maintain", MatrixGame::maintain(), (0, 0))] {
        let model = make_matrix_env(&game);
        let (mut bi, mut ind) = (0, 0);
        for seed in 0..seeds {
            let cfg = TabularConfig { seed, ..TabularConfig::default() };
            bi += usize::from(train_bilevel_q(&model, &cfg)?.2.converged_to(optimum));
            ind += usize::from(train_independent_q(&model, &cfg)?.2.converged_to(optimum));
        }
        println!("{name}: bi-level Q {bi}/{seeds}, independent Q {ind}/{seeds} on {optimum:?}");
    }
    Ok(())
}
