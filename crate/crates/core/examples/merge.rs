//! Two-car highway merge: bi-level actor-critic against independent Q-learning.
//!
//! Usage: `cargo run --release --example merge -- [seeds] [episodes]`

use std::time::Instant;

use stackeq::bilevel_ac::{train_biac, BiACConfig, Encoding};
use stackeq::bilevel_tabular::{train_independent_q, TabularConfig, Tracking};
use stackeq::markov_game::{make_merge_env, MergeConfig};
use stackeq::record::OutcomeFractions;

fn add(acc: &mut OutcomeFractions, f: OutcomeFractions, k: f64) {
    acc.leader_first += f.leader_first / k;
    acc.follower_first += f.follower_first / k;
    acc.crash += f.crash / k;
    acc.timeout += f.timeout / k;
}

fn main() -> stackeq::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>().expect("numeric argument"));
    let seeds = args.next().unwrap_or(3);
    let episodes = args.next().unwrap_or(3000);
    let cfg = MergeConfig::default();
    let model = make_merge_env(&cfg)?;
    let tracking = Tracking { probe: None, merge: Some(cfg) };
    let k = seeds as f64;

    let t = Instant::now();
    let mut biac = OutcomeFractions::default();
    for seed in 0..seeds as u64 {
        let c = BiACConfig { seed, episodes, encoding: Encoding::Merge(cfg), tracking, ..BiACConfig::default() };
        let run = train_biac(&model, &c)?;
        let f = run.record.final_eval.merge_fractions(&cfg);
        println!("  bi-AC seed {seed}: {f:?} converged {}", run.record.converged);
        add(&mut biac, f, k);
    }
    println!("bi-AC: {biac:?} ({:.1?})", t.elapsed());

    let t = Instant::now();
    let mut iq = OutcomeFractions::default();
    for seed in 0..seeds as u64 {
        let c = TabularConfig { seed, episodes, tracking, ..TabularConfig::default() };
        let (_, _, rec) = train_independent_q(&model, &c)?;
        let f = rec.final_eval.merge_fractions(&cfg);
        println!("  independent Q seed {seed}: {f:?} converged {}", rec.converged);
        add(&mut iq, f, k);
    }
    println!("independent Q: {iq:?} ({:.1?})", t.elapsed());
    Ok(())
}
