//! Exact solutions of the two 3x3 coordination games.

use stackeq::MatrixGame;

fn main() -> stackeq::Result<()> {
    let names = ["A", "B", "C"];
    let cols = ["X", "Y", "Z"];
    for (title, game) in [("Escape", MatrixGame::escape()), ("Maintain", MatrixGame::maintain())] {
        println!("{title}");
        for (a1, name) in names.iter().enumerate().take(game.rows()) {
            let row: Vec<String> = (0..game.cols()).map(|a2| format!("{:>3},{:>3}", game.u1(a1, a2), game.u2(a1, a2))).collect();
            println!("  {name}  {}", row.join("  "));
        }
        let se = game.solve_stackelberg();
        println!(
            "  Stackelberg: ({}, {}) paying ({}, {})",
            names[se.leader_action], cols[se.follower_action], se.leader_payoff, se.follower_payoff
        );
        let ne: Vec<String> = game.enumerate_pure_nash().points.iter().map(|&(a, b)| format!("({}, {})", names[a], cols[b])).collect();
        println!("  strict pure Nash: {}", ne.join(" "));
        let (row, value) = game.solve_minimax();
        println!("  leader security level: {value} with {}", names[row]);
        println!("  cooperation level: {:.4}", game.cooperation_level()?);
    }
    Ok(())
}
