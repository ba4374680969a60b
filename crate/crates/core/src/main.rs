use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use stackeq::bench::{run_experiment, verify_counterexample, Algorithm, Experiment, ExperimentSpec, Overrides};
use stackeq::matrix_game::run_study;
use stackeq::MatrixGame;

#[derive(Parser)]
#[command(name = "stackeq", version, about = "Stackelberg equilibria and bi-level learning in two-agent games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a matrix game read from JSON (`{"u1": [[..]], "u2": [[..]]}`).
    Solve(SolveArgs),
    /// Run an experiment across seeds and write logs and summaries.
    Run {
        #[arg(long)]
        experiment: Experiment,
        #[arg(long)]
        algo: Algorithm,
        #[arg(long, default_value_t = 10)]
        seeds: usize,
        #[arg(long)]
        out: PathBuf,
        /// Key-value override file.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Equilibrium payoffs on random games with correlated payoffs.
    Study {
        #[arg(long, default_value_t = 10)]
        sizes: usize,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_values_t = stackeq::bench::STUDY_COVARIANCES)]
        covariances: Vec<f64>,
        #[arg(long, default_value_t = 2000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check the fixed-point counterexample.
    VerifyCounterexample,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    game: PathBuf,
    #[arg(long)]
    nash: bool,
    #[arg(long)]
    stackelberg: bool,
    #[arg(long)]
    minimax: bool,
    #[arg(long)]
    coop_level: bool,
}

fn solve(a: &SolveArgs) -> stackeq::Result<()> {
    let game = MatrixGame::from_json_file(&a.game)?;
    let all = !(a.nash || a.stackelberg || a.minimax || a.coop_level);
    if all || a.stackelberg {
        let se = game.solve_stackelberg();
        println!("stackelberg: leader {} follower {} payoffs ({}, {})", se.leader_action, se.follower_action, se.leader_payoff, se.follower_payoff);
    }
    if all || a.nash {
        let ne = game.enumerate_pure_nash();
        println!("pure nash: {:?}", ne.points);
    }
    if all || a.minimax {
        let (row, value) = game.solve_minimax();
        println!("leader maximin: action {row} value {value}");
    }
    if all || a.coop_level {
        println!("cooperation level: {}", game.cooperation_level()?);
    }
    Ok(())
}

fn run(cli: Cli) -> stackeq::Result<bool> {
    match cli.command {
        Command::Solve(a) => solve(&a).map(|()| true),
        Command::Run { experiment, algo, seeds, out, config } => {
            let mut spec = ExperimentSpec::new(experiment, algo, seeds, out);
            if let Some(path) = config {
                spec.overrides = Overrides::from_file(path)?;
            }
            let table = run_experiment(&spec)?;
            for row in &table.rows {
                println!("{}", serde_json::to_string(row)?);
            }
            if let Some(ok) = table.verified {
                println!("{}", if ok { "VERIFIED" } else { "FAILED" });
            }
            println!("wrote {}", spec.out_dir.display());
            Ok(table.verified != Some(false))
        }
        Command::Study { sizes, covariances, trials, seed, out } => {
            let study = run_study(sizes, &covariances, trials, seed)?;
            std::fs::create_dir_all(&out)?;
            let path = out.join("study.csv");
            study.write_csv(std::fs::File::create(&path)?)?;
            study.write_csv(std::io::stdout().lock())?;
            println!("wrote {}", path.display());
            Ok(true)
        }
        Command::VerifyCounterexample => {
            let report = verify_counterexample()?;
            println!("{report}");
            Ok(report.passed())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
