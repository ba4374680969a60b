mod common;

use proptest::prelude::*;

use stackeq::approximator::{softmax, ReplayBuffer};
use stackeq::bilevel_ac::{select_next_actions, TableActor, TableCritic};
use stackeq::bilevel_tabular::QTable;
use stackeq::MatrixGame;

fn payoffs(max: usize) -> impl Strategy<Value = (usize, usize, Vec<f64>, Vec<f64>)> {
    (1..=max, 1..=max).prop_flat_map(|(r, c)| {
        let cell = -50i32..50;
        (
            Just(r),
            Just(c),
            prop::collection::vec(cell.clone().prop_map(f64::from), r * c),
            prop::collection::vec(cell.prop_map(f64::from), r * c),
        )
    })
}

fn continuous_payoffs(max: usize) -> impl Strategy<Value = (usize, usize, Vec<f64>, Vec<f64>)> {
    (1..=max, 1..=max).prop_flat_map(|(r, c)| {
        (Just(r), Just(c), prop::collection::vec(-10.0..10.0f64, r * c), prop::collection::vec(-10.0..10.0f64, r * c))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn stage_actions_match_the_matrix_solver((r, c, u1, u2) in payoffs(5)) {
        let game = MatrixGame::from_flat(r, c, u1.clone(), u2.clone()).unwrap();
        let mut q = QTable::new(1, r, c, 0.0);
        for i in 0..r {
            for j in 0..c {
                q.set(0, i, j, (u1[i * c + j], u2[i * c + j]));
            }
        }
        let se = game.solve_stackelberg();
        prop_assert_eq!(q.stage_actions(0), (se.leader_action, se.follower_action));
        prop_assert_eq!(q.stage_values(0), (se.leader_payoff, se.follower_payoff));
    }

    #[test]
    fn lookup_nets_reduce_to_the_matrix_solver((r, c, u1, u2) in continuous_payoffs(5)) {
        let game = MatrixGame::from_flat(r, c, u1.clone(), u2.clone()).unwrap();
        let critic = TableCritic { n_a1: r, n_a2: c, values: u1 };
        let mut logits = vec![0.0; r * c];
        for a1 in 0..r {
            logits[a1 * c + game.follower_best_response(a1)] = 1.0;
        }
        let actor = TableActor { n_a1: r, n_a2: c, logits };
        let se = game.solve_stackelberg();
        prop_assert_eq!(select_next_actions(&critic, &actor, &[1.0], r), (se.leader_action, se.follower_action));
    }

    #[test]
    fn leader_does_no_worse_than_any_pure_nash((r, c, u1, u2) in payoffs(5)) {
        let game = MatrixGame::from_flat(r, c, u1, u2).unwrap();
        let se = game.solve_stackelberg();
        for &(i, j) in &game.enumerate_weak_nash().points {
            prop_assert!(se.leader_payoff >= game.u1(i, j));
        }
        for &p in &game.enumerate_pure_nash().points {
            prop_assert!(game.enumerate_weak_nash().points.contains(&p));
        }
    }

    #[test]
    fn positive_affine_maps_keep_the_solution(
        (r, c, u1, u2) in payoffs(4),
        s1 in 0.1..5.0f64, b1 in -10.0..10.0f64, s2 in 0.1..5.0f64, b2 in -10.0..10.0f64,
    ) {
        let game = MatrixGame::from_flat(r, c, u1, u2).unwrap();
        let a = game.solve_stackelberg();
        let b = game.affine(s1, b1, s2, b2).unwrap().solve_stackelberg();
        prop_assert_eq!((a.leader_action, a.follower_action), (b.leader_action, b.follower_action));
    }

    #[test]
    fn cooperation_level_is_a_correlation((r, c, u1, u2) in continuous_payoffs(4)) {
        prop_assume!(r * c > 1);
        let game = MatrixGame::from_flat(r, c, u1, u2).unwrap();
        let cl = game.cooperation_level().unwrap();
        prop_assert!((-1.0..=1.0).contains(&cl));
    }

    #[test]
    fn softmax_is_a_distribution(logits in prop::collection::vec(-50.0..50.0f64, 1..8)) {
        let p = softmax(&logits);
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(p.iter().all(|&x| (0.0..=1.0).contains(&x)));
    }

    #[test]
    fn replay_buffer_never_exceeds_capacity(cap in 1usize..20, pushes in 0usize..60) {
        let mut b = ReplayBuffer::new(cap);
        for i in 0..pushes {
            b.push(i);
        }
        prop_assert_eq!(b.len(), pushes.min(cap));
        let kept: Vec<usize> = b.iter().copied().collect();
        prop_assert_eq!(kept, (pushes.saturating_sub(cap)..pushes).collect::<Vec<_>>());
    }
}

#[test]
fn mlp_gradients_match_finite_differences() {
    let err = common::gradient_check();
    assert!(err < 1e-4, "relative error {err}");
}

#[test]
fn gumbel_argmax_matches_the_categorical() {
    let gap = common::gumbel_marginals(100_000);
    assert!(gap < 0.01, "largest frequency gap {gap}");
}

#[test]
fn identical_payoff_backup_is_a_contraction() {
    let slack = common::contraction_slack(100);
    assert!(slack <= 1e-12, "contraction violated by {slack}");
}

#[test]
fn stage_solvers_agree_with_ties() {
    assert_eq!(common::stage_solver_mismatches(100), 0);
}

#[test]
fn decentralized_play_equals_centralized_play() {
    assert!(common::execution_mismatches().is_empty());
}
