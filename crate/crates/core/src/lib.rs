//! Stackelberg equilibrium learning for two-player Markov games.
//!
//! * [`matrix_game`]: stage-game solvers (strong Stackelberg, pure Nash,
//!   pure maximin), the cooperation level, and the SE-vs-NE study.
//! * [`markov_game`]: explicit finite Markov games, the built-in
//!   environments, exact policy evaluation and a brute-force bi-level oracle.
//! * [`bilevel_tabular`]: bi-level tabular Q-learning, bi-level value
//!   iteration and an independent Q-learning baseline.
//! * [`approximator`]: small MLPs with manual backprop, momentum SGD,
//!   Gumbel-Softmax sampling and a replay buffer.
//! * [`bilevel_ac`]: the bi-level actor-critic learner with centralized
//!   training and decentralized execution.
//! * [`bench`]: the experiment harness used by the `stackeq` binary.

pub mod approximator;
pub mod bench;
pub mod bilevel_ac;
pub mod bilevel_tabular;
pub mod error;
pub mod markov_game;
pub mod matrix_game;
pub mod record;
pub mod rng;

pub use error::{Error, Result};
pub use markov_game::{JointPolicy, MarkovGameModel, Transition};
pub use matrix_game::{MatrixGame, PureNashSet, StackelbergSolution};
