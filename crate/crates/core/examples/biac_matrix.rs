//! Bi-level actor-critic on the Escape and Maintain matrix games.
//!
//! Usage: `cargo run --release --example biac_matrix -- [seeds] [episodes]`

use std::time::Instant;

use stackeq::bilevel_ac::{train_biac, BiACConfig};
use stackeq::markov_game::make_matrix_env;
use stackeq::MatrixGame;

fn main() -> stackeq::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>().expect("numeric argument"));
    let seeds = args.next().unwrap_or(10);
    let episodes = args.next().unwrap_or(BiACConfig::default().episodes);
    for (name, game, optimum) in [("escape", MatrixGame::escape(), (2, 2)), ("maintain", MatrixGame::maintain(), (0, 0))] {
        let model = make_matrix_env(&game);
        let t = Instant::now();
        let mut hits = 0;
        for seed in 0..seeds as u64 {
            let cfg = BiACConfig { seed, episodes, ..BiACConfig::default() };
            let run = train_biac(&model, &cfg)?;
            if run.record.converged_to(optimum) {
                hits += 1;
            } else {
                println!("  {name} seed {seed}: greedy {:?} converged {}", run.record.final_eval.start_action, run.record.converged);
            }
        }
        println!("{name}: {hits}/{seeds} runs settled on {optimum:?} ({:.1?})", t.elapsed());
    }
    Ok(())
}
