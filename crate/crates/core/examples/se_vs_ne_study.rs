//! Stackelberg versus Nash payoffs on random games as the payoff
//! correlation varies.
//!
//! Usage: `cargo run --release --example se_vs_ne_study -- [trials]`

use stackeq::bench::STUDY_COVARIANCES;
use stackeq::matrix_game::run_study;

fn main() -> stackeq::Result<()> {
    let trials = std::env::args().nth(1).map_or(2000, |a| a.parse().expect("numeric trial count"));
    let study = run_study(10, &STUDY_COVARIANCES, trials, 7)?;
    println!("{:>6} {:>9} {:>9} {:>9} {:>9} {:>8}", "cov", "SE lead", "SE foll", "NE lead", "NE foll", "#NE");
    for r in &study.rows {
        println!(
            "{:>6.2} {:>9.3} {:>9.3} {:>9.3} {:>9.3} {:>8.3}",
            r.covariance, r.se_leader, r.se_follower, r.ne_leader, r.ne_follower, r.ne_count
        );
    }
    Ok(())
}
