//! Deterministic checks shared by the property suite and the acceptance run.
//! Each returns the worst observed quantity so callers can apply their own
//! tolerance.

#![allow(dead_code)]

use rand::Rng;

use stackeq::approximator::{gumbel_softmax_sample, softmax, GumbelConfig, Mlp};
use stackeq::bilevel_ac::{execute_centralized, execute_decentralized, select_next_actions, BiACParams, Encoding, TableActor, TableCritic};
use stackeq::bilevel_tabular::{bilevel_backup, QTable};
use stackeq::markov_game::{make_counterexample_env, make_grid_env, make_matrix_env, make_merge_env, make_random_env, GridConfig, MergeConfig};
use stackeq::rng::seeded;
use stackeq::{MarkovGameModel, MatrixGame};

/// Largest relative error between backpropagated and central-difference
/// gradients of `dy . y(x)` over a few random nets.
pub fn gradient_check() -> f64 {
    let mut rng = seeded(11);
    let mut worst: f64 = 0.0;
    for sizes in [vec![3, 5, 2], vec![4, 8, 6, 3], vec![6, 16, 16, 1]] {
        for _ in 0..5 {
            let mut net = Mlp::new(&sizes, &mut rng).unwrap();
            let mut p = net.params();
            for v in &mut p {
                *v += rng.random_range(-0.1..0.1);
            }
            net.set_params(&p).unwrap();
            let x: Vec<f64> = (0..sizes[0]).map(|_| rng.random_range(-1.0..1.0)).collect();
            let dy: Vec<f64> = (0..*sizes.last().unwrap()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let (_, cache) = net.forward(&x).unwrap();
            let analytic = net.backward(&cache, &dy).unwrap().flat();

            let f = |net: &Mlp| net.forward(&x).unwrap().0.iter().zip(&dy).map(|(a, b)| a * b).sum::<f64>();
            let h = 1e-6;
            let mut numeric = Vec::with_capacity(p.len());
            for k in 0..p.len() {
                let mut q = p.clone();
                q[k] = p[k] + h;
                net.set_params(&q).unwrap();
                let up = f(&net);
                q[k] = p[k] - h;
                net.set_params(&q).unwrap();
                numeric.push((up - f(&net)) / (2.0 * h));
            }
            let norm = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();
            let diff: Vec<f64> = analytic.iter().zip(&numeric).map(|(a, b)| a - b).collect();
            worst = worst.max(norm(&diff) / (norm(&analytic) + norm(&numeric)).max(1e-12));
        }
    }
    worst
}

/// Largest gap between the hard Gumbel-Softmax sample frequencies and the
/// softmax probabilities, over `n` draws per logit vector.
pub fn gumbel_marginals(n: usize) -> f64 {
    let mut rng = seeded(5);
    let mut worst: f64 = 0.0;
    for (logits, temperature) in [(vec![1.0, 0.0, -0.5, 2.0], 1.0), (vec![0.3, 0.3, -1.0], 0.2), (vec![-2.0, 1.5], 3.0)] {
        let mut counts = vec![0usize; logits.len()];
        for _ in 0..n {
            counts[gumbel_softmax_sample(&logits, temperature, &mut rng).unwrap().hard] += 1;
        }
        for (c, p) in counts.iter().zip(softmax(&logits)) {
            worst = worst.max((*c as f64 / n as f64 - p).abs());
        }
    }
    worst
}

/// Largest `d(BQ, BQ') - gamma * d(Q, Q')` over random identical-payoff
/// models and table pairs with `Q1 = Q2`.
pub fn contraction_slack(pairs: usize) -> f64 {
    let mut rng = seeded(3);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..pairs {
        let gamma = rng.random_range(0.0..0.99);
        let (n, a1, a2) = (rng.random_range(1..6), rng.random_range(1..4), rng.random_range(1..4));
        let model = make_random_env(n, a1, a2, gamma, true, &mut rng).unwrap();
        let mut tables = [QTable::for_model(&model, 0.0), QTable::for_model(&model, 0.0)];
        for q in &mut tables {
            for s in 0..model.n_states() {
                for i in 0..a1 {
                    for j in 0..a2 {
                        let v = rng.random_range(-20.0..20.0);
                        q.set(s, i, j, (v, v));
                    }
                }
            }
        }
        let before = tables[0].distance_on(&tables[1], &model);
        let after = bilevel_backup(&model, &tables[0]).distance_on(&bilevel_backup(&model, &tables[1]), &model);
        worst = worst.max(after - gamma * before);
    }
    worst
}

/// Random stage games (integer payoffs, so ties occur) on which the stage
/// solver or the lookup-backed action selection disagrees with the matrix
/// solver.
pub fn stage_solver_mismatches(games: usize) -> usize {
    let mut rng = seeded(21);
    let mut bad = 0;
    for _ in 0..games {
        let (r, c) = (rng.random_range(1..=5), rng.random_range(1..=5));
        let u1: Vec<f64> = (0..r * c).map(|_| f64::from(rng.random_range(-5..=5))).collect();
        let u2: Vec<f64> = (0..r * c).map(|_| f64::from(rng.random_range(-5..=5))).collect();
        let game = MatrixGame::from_flat(r, c, u1.clone(), u2.clone()).unwrap();
        let se = game.solve_stackelberg();
        let mut q = QTable::new(1, r, c, 0.0);
        for i in 0..r * c {
            q.set(0, i / c, i % c, (u1[i], u2[i]));
        }
        let critic = TableCritic { n_a1: r, n_a2: c, values: u1 };
        let mut logits = vec![0.0; r * c];
        for a1 in 0..r {
            logits[a1 * c + game.follower_best_response(a1)] = 1.0;
        }
        let actor = TableActor { n_a1: r, n_a2: c, logits };
        let want = (se.leader_action, se.follower_action);
        if q.stage_actions(0) != want || select_next_actions(&critic, &actor, &[1.0], r) != want {
            bad += 1;
        }
    }
    bad
}

pub fn all_envs() -> Vec<(MarkovGameModel, Encoding)> {
    let merge = MergeConfig::default();
    let mut rng = seeded(9);
    vec![
        (make_matrix_env(&MatrixGame::escape()), Encoding::OneHot),
        (make_matrix_env(&MatrixGame::maintain()), Encoding::OneHot),
        (make_grid_env(&GridConfig::default()).unwrap(), Encoding::OneHot),
        (make_merge_env(&merge).unwrap(), Encoding::Merge(merge)),
        (make_counterexample_env(0.9).unwrap(), Encoding::OneHot),
        (make_random_env(6, 3, 2, 0.9, false, &mut rng).unwrap(), Encoding::OneHot),
    ]
}

/// Environments on which decentralized and centralized greedy play differ
/// for freshly initialized parameters.
pub fn execution_mismatches() -> Vec<String> {
    let mut bad = Vec::new();
    for (model, encoding) in all_envs() {
        let features = encoding.features(&model);
        for seed in 0..3 {
            let params = BiACParams::new(
                features[0].len(),
                model.n_leader_actions(),
                model.n_follower_actions(),
                16,
                GumbelConfig::default(),
                &mut seeded(100 + seed),
            )
            .unwrap();
            let a = execute_decentralized(&params, &model, &features, 5, &mut seeded(seed)).unwrap();
            let b = execute_centralized(&params, &model, &features, 5, &mut seeded(seed)).unwrap();
            if a != b {
                bad.push(format!("{} seed {seed}", model.name()));
            }
        }
    }
    bad
}
