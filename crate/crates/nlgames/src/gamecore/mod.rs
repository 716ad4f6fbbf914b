//! The game abstraction: explicit multiplayer games with exact rational
//! question distributions, deterministic and quantum strategies, referee
//! engine, and value computations.

mod game;
mod quantum;
mod referee;

pub use game::{
    chsh_game, classical_value_bruteforce, evaluate_deterministic, xor_bias, BruteForceOptions,
    DeterministicStrategy, Predicate, QaPredicate, TableGame, Weight,
};
pub use quantum::{evaluate_quantum, symmetrize, QuantumStrategy, QUANTUM_DIM_CAP};
pub use referee::{
    exhaustive_value, monte_carlo, play_round, EnumerableReferee, FnStrategy, McReport,
    PlayerStrategy, RationalSampler, Referee, Round, RoundTranscript, TableReferee, TokenStrategy,
};
