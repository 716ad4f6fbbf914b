//! The referee engine: one-round sampling, Monte Carlo estimation with
//! Hoeffding confidence intervals, and exhaustive evaluation for
//! enumerable referees.

use crate::error::Result;
use crate::gamecore::game::{DeterministicStrategy, TableGame, Weight};
use crate::rng::StreamSeed;
use num::{BigUint, Zero};
use rand::RngCore;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// One sampled round: which players are queried with what, plus whatever
/// hidden data the acceptance check needs.
#[derive(Debug, Clone)]
pub struct Round<Q, X> {
    pub auto_accept: bool,
    pub queries: Vec<(usize, Q)>,
    pub aux: X,
}

impl<Q, X> Round<Q, X> {
    pub fn auto(aux: X) -> Self {
        Round { auto_accept: true, queries: vec![], aux }
    }
}

/// A referee protocol: samples rounds and judges answers. Answers are given
/// in query order.
pub trait Referee: Sync {
    type Question: Clone + std::fmt::Display + Send + Sync;
    type Answer: Clone + std::fmt::Display + Send + Sync;
    type Aux: Clone + Send + Sync;

    fn players(&self) -> usize;
    fn sample_round(&self, rng: &mut ChaCha8Rng) -> Round<Self::Question, Self::Aux>;
    fn accepts(&self, round: &Round<Self::Question, Self::Aux>, answers: &[Self::Answer]) -> bool;
}

/// Per-player answer functions; honest protocol strategies implement this.
pub trait PlayerStrategy<Q, A>: Sync {
    fn answer(&self, player: usize, question: &Q) -> A;
}

/// Strategy built from a closure.
pub struct FnStrategy<F>(pub F);

impl<Q, A, F: Fn(usize, &Q) -> A + Sync> PlayerStrategy<Q, A> for FnStrategy<F> {
    fn answer(&self, player: usize, question: &Q) -> A {
        self.0(player, question)
    }
}

/// Replayable record of a single round.
#[derive(Debug, Clone)]
pub struct RoundTranscript {
    pub round_index: u64,
    pub questions: Vec<(usize, String)>,
    pub answers: Vec<String>,
    pub auto_accept: bool,
    pub accept: bool,
}

/// Plays round `index` of the stream and records a transcript. Replaying
/// with the same seed and index reproduces it exactly.
pub fn play_round<R: Referee, S: PlayerStrategy<R::Question, R::Answer> + ?Sized>(
    referee: &R,
    strategy: &S,
    seed: &StreamSeed,
    index: u64,
) -> RoundTranscript {
    let mut rng = seed.stream(index);
    let round = referee.sample_round(&mut rng);
    if round.auto_accept {
        return RoundTranscript {
            round_index: index,
            questions: vec![],
            answers: vec![],
            auto_accept: true,
            accept: true,
        };
    }
    let answers: Vec<R::Answer> = round
        .queries
        .iter()
        .map(|(p, q)| strategy.answer(*p, q))
        .collect();
    let accept = referee.accepts(&round, &answers);
    RoundTranscript {
        round_index: index,
        questions: round.queries.iter().map(|(p, q)| (*p, q.to_string())).collect(),
        answers: answers.iter().map(|a| a.to_string()).collect(),
        auto_accept: false,
        accept,
    }
}

/// Monte Carlo acceptance report.
#[derive(Debug, Clone)]
pub struct McReport {
    pub rounds: u64,
    pub accepted: u64,
    pub estimate: f64,
    /// 99% Hoeffding half-width: sqrt(ln(2/0.01) / (2 rounds)).
    pub halfwidth: f64,
}

impl McReport {
    fn new(rounds: u64, accepted: u64) -> Self {
        McReport {
            rounds,
            accepted,
            estimate: accepted as f64 / rounds as f64,
            halfwidth: ((2.0f64 / 0.01).ln() / (2.0 * rounds as f64)).sqrt(),
        }
    }
}

/// Runs i.i.d. referee rounds against a strategy. Rounds are independent
/// streams of the seed, so the tally is identical for any worker count.
pub fn monte_carlo<R, S>(referee: &R, strategy: &S, rounds: u64, seed: &StreamSeed) -> McReport
where
    R: Referee,
    S: PlayerStrategy<R::Question, R::Answer> + ?Sized,
{
    let accepted = (0..rounds)
        .into_par_iter()
        .map(|i| {
            let mut rng = seed.stream(i);
            let round = referee.sample_round(&mut rng);
            if round.auto_accept {
                return 1u64;
            }
            let answers: Vec<R::Answer> = round
                .queries
                .iter()
                .map(|(p, q)| strategy.answer(*p, q))
                .collect();
            referee.accepts(&round, &answers) as u64
        })
        .sum();
    McReport::new(rounds, accepted)
}

/// A referee whose full round distribution can be enumerated with exact
/// rational weights.
pub trait EnumerableReferee: Referee {
    /// All rounds with positive probability (auto-accept mass may be
    /// aggregated into a single `Round::auto` entry). Weights sum to 1.
    fn enumerate_rounds(&self, cap: u128) -> Result<Vec<(Weight, Round<Self::Question, Self::Aux>)>>;
}

/// Exact acceptance probability of a strategy, by full enumeration.
pub fn exhaustive_value<R, S>(referee: &R, strategy: &S, cap: u128) -> Result<Weight>
where
    R: EnumerableReferee,
    S: PlayerStrategy<R::Question, R::Answer> + ?Sized,
{
    let mut value = Weight::zero();
    for (w, round) in referee.enumerate_rounds(cap)? {
        if round.auto_accept {
            value += w;
            continue;
        }
        let answers: Vec<R::Answer> = round
            .queries
            .iter()
            .map(|(p, q)| strategy.answer(*p, q))
            .collect();
        if referee.accepts(&round, &answers) {
            value += w;
        }
    }
    Ok(value)
}

/// Exact sampling from a list of positive rational weights: the common
/// denominator is materialized once, then a uniform integer below it picks
/// an index by cumulative weight.
pub struct RationalSampler {
    denom: BigUint,
    cumulative: Vec<BigUint>,
}

impl RationalSampler {
    pub fn new<'a, I: IntoIterator<Item = &'a Weight>>(weights: I) -> Self {
        let weights: Vec<&Weight> = weights.into_iter().collect();
        let mut denom = BigUint::from(1u32);
        for w in &weights {
            denom = num::integer::lcm(denom, w.denom().to_biguint().expect("positive"));
        }
        let mut cumulative = Vec::with_capacity(weights.len());
        let mut acc = BigUint::zero();
        for w in &weights {
            let scaled = w.numer().to_biguint().expect("positive") * &denom
                / w.denom().to_biguint().expect("positive");
            acc += scaled;
            cumulative.push(acc.clone());
        }
        RationalSampler { denom, cumulative }
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> usize {
        let x = sample_below(&self.denom, rng);
        match self.cumulative.binary_search_by(|c| {
            if *c <= x {
                std::cmp::Ordering::Less
            } else {
                std::cmp::Ordering::Greater
            }
        }) {
            Ok(i) | Err(i) => i,
        }
    }
}

/// Table game with its sampling table cached; every player is queried with
/// their coordinate of the sampled tuple.
pub struct TableReferee<'a> {
    game: &'a TableGame,
    sampler: RationalSampler,
}

impl<'a> TableReferee<'a> {
    pub fn new(game: &'a TableGame) -> Self {
        let sampler = RationalSampler::new(game.dist().iter().map(|(_, w)| w));
        TableReferee { game, sampler }
    }

    pub fn game(&self) -> &TableGame {
        self.game
    }

    fn sample_index(&self, rng: &mut ChaCha8Rng) -> usize {
        self.sampler.sample(rng)
    }
}

/// Uniform BigUint in [0, bound) by rejection on the bit prefix.
fn sample_below(bound: &BigUint, rng: &mut ChaCha8Rng) -> BigUint {
    let bits = bound.bits();
    let bytes = bits.div_ceil(8) as usize;
    let mask_bits = (bits % 8) as u32;
    loop {
        let mut buf = vec![0u8; bytes];
        rng.fill_bytes(&mut buf);
        if mask_bits != 0 {
            buf[0] &= (1u8 << mask_bits) - 1;
        }
        let x = BigUint::from_bytes_be(&buf);
        if &x < bound {
            return x;
        }
    }
}

impl Referee for TableReferee<'_> {
    type Question = String;
    type Answer = String;
    type Aux = usize; // tuple index

    fn players(&self) -> usize {
        self.game.players()
    }

    fn sample_round(&self, rng: &mut ChaCha8Rng) -> Round<String, usize> {
        let i = self.sample_index(rng);
        let (tuple, _) = &self.game.dist()[i];
        Round {
            auto_accept: false,
            queries: tuple
                .iter()
                .enumerate()
                .map(|(p, &q)| (p, self.game.questions()[q].clone()))
                .collect(),
            aux: i,
        }
    }

    fn accepts(&self, round: &Round<String, usize>, answers: &[String]) -> bool {
        let (tuple, _) = &self.game.dist()[round.aux];
        let mut atuple = Vec::with_capacity(answers.len());
        for a in answers {
            match self.game.answer_index(a) {
                Some(i) => atuple.push(i),
                None => return false, // malformed answer loses
            }
        }
        self.game.predicate().accepts(tuple, &atuple)
    }
}

impl EnumerableReferee for TableReferee<'_> {
    fn enumerate_rounds(&self, cap: u128) -> Result<Vec<(Weight, Round<String, usize>)>> {
        if self.game.dist().len() as u128 > cap {
            return Err(crate::error::Error::TooLarge(self.game.dist().len() as u128, cap));
        }
        Ok(self
            .game
            .dist()
            .iter()
            .enumerate()
            .map(|(i, (tuple, w))| {
                (
                    w.clone(),
                    Round {
                        auto_accept: false,
                        queries: tuple
                            .iter()
                            .enumerate()
                            .map(|(p, &q)| (p, self.game.questions()[q].clone()))
                            .collect(),
                        aux: i,
                    },
                )
            })
            .collect())
    }
}

/// Adapter: a deterministic strategy answered over token alphabets.
pub struct TokenStrategy<'a> {
    game: &'a TableGame,
    strat: &'a DeterministicStrategy,
}

impl<'a> TokenStrategy<'a> {
    pub fn new(game: &'a TableGame, strat: &'a DeterministicStrategy) -> Self {
        TokenStrategy { game, strat }
    }
}

impl PlayerStrategy<String, String> for TokenStrategy<'_> {
    fn answer(&self, player: usize, question: &String) -> String {
        let q = self.game.question_index(question).expect("question in alphabet");
        self.game.answers()[self.strat.answer(player, q)].clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gamecore::game::{chsh_game, evaluate_deterministic};

    #[test]
    fn chsh_monte_carlo_matches_exact_value() {
        let g = chsh_game();
        let strat = DeterministicStrategy::new(&g, vec![vec![0, 0], vec![0, 0]]).unwrap();
        let referee = TableReferee::new(&g);
        let tokens = TokenStrategy::new(&g, &strat);
        let seed = StreamSeed::new(123, "chsh-mc");
        let report = monte_carlo(&referee, &tokens, 1_000_000, &seed);
        assert!((report.estimate - 0.75).abs() <= report.halfwidth);
        // deterministic replay
        let report2 = monte_carlo(&referee, &tokens, 1_000_000, &seed);
        assert_eq!(report.accepted, report2.accepted);
        // exhaustive agrees with the exact evaluation
        let exact = exhaustive_value(&referee, &tokens, 1 << 20).unwrap();
        assert_eq!(exact, evaluate_deterministic(&g, &strat).unwrap());
    }

    #[test]
    fn always_reject_estimates_zero() {
        let g = chsh_game();
        let referee = TableReferee::new(&g);
        let bogus = FnStrategy(|_: usize, _: &String| "not-an-answer".to_string());
        let seed = StreamSeed::new(5, "reject");
        let report = monte_carlo(&referee, &bogus, 10_000, &seed);
        assert_eq!(report.accepted, 0);
        assert_eq!(report.estimate, 0.0);
    }

    #[test]
    fn transcripts_replay() {
        let g = chsh_game();
        let strat = DeterministicStrategy::new(&g, vec![vec![0, 1], vec![1, 0]]).unwrap();
        let referee = TableReferee::new(&g);
        let tokens = TokenStrategy::new(&g, &strat);
        let seed = StreamSeed::new(9, "transcript");
        let t1 = play_round(&referee, &tokens, &seed, 3);
        let t2 = play_round(&referee, &tokens, &seed, 3);
        assert_eq!(t1.questions, t2.questions);
        assert_eq!(t1.answers, t2.answers);
        assert_eq!(t1.accept, t2.accept);
    }

    #[test]
    fn hoeffding_halfwidth_formula() {
        let r = McReport::new(100_000, 50_000);
        let want = ((2.0f64 / 0.01).ln() / (2.0 * 100_000.0)).sqrt();
        assert!((r.halfwidth - want).abs() < 1e-15);
    }
}
