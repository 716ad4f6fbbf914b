//! The BLR linearity test over F_2^n: three players receive x, y and x+y
//! and must answer bits summing to zero.

use crate::error::{Error, Result};
use crate::gamecore::{EnumerableReferee, PlayerStrategy, Referee, Round, Weight};
use crate::protocols::{all_player_tuples, pick_players, ratio};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Question: a vector of F_2^n, displayed as a bit string.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LinQuestion(pub Vec<bool>);

impl std::fmt::Display for LinQuestion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for &b in &self.0 {
            write!(f, "{}", b as u8)?;
        }
        Ok(())
    }
}

pub(crate) fn xor_bits(a: &[bool], b: &[bool]) -> Vec<bool> {
    a.iter().zip(b).map(|(x, y)| x ^ y).collect()
}

pub(crate) fn dot_bits(a: &[bool], b: &[bool]) -> bool {
    a.iter().zip(b).fold(false, |acc, (x, y)| acc ^ (x & y))
}

pub struct LinearityTest {
    pub n: usize,
    pub r: usize,
}

impl LinearityTest {
    pub fn new(n: usize, r: usize) -> Result<Self> {
        if r < 3 {
            return Err(Error::InvalidGame("linearity test needs r >= 3".into()));
        }
        if n == 0 {
            return Err(Error::InvalidGame("empty domain".into()));
        }
        Ok(LinearityTest { n, r })
    }

    fn random_vec(&self, rng: &mut ChaCha8Rng) -> Vec<bool> {
        (0..self.n).map(|_| rng.gen_bool(0.5)).collect()
    }
}

impl Referee for LinearityTest {
    type Question = LinQuestion;
    type Answer = bool;
    type Aux = ();

    fn players(&self) -> usize {
        self.r
    }

    fn sample_round(&self, rng: &mut ChaCha8Rng) -> Round<LinQuestion, ()> {
        let x = self.random_vec(rng);
        let y = self.random_vec(rng);
        let z = xor_bits(&x, &y);
        let players = pick_players(self.r, 3, rng);
        Round {
            auto_accept: false,
            queries: vec![
                (players[0], LinQuestion(x)),
                (players[1], LinQuestion(y)),
                (players[2], LinQuestion(z)),
            ],
            aux: (),
        }
    }

    fn accepts(&self, _round: &Round<LinQuestion, ()>, answers: &[bool]) -> bool {
        answers[0] ^ answers[1] ^ answers[2] == false
    }
}

impl EnumerableReferee for LinearityTest {
    fn enumerate_rounds(&self, cap: u128) -> Result<Vec<(Weight, Round<LinQuestion, ()>)>> {
        let pairs = 1u128 << (2 * self.n as u32);
        let triples = (self.r * (self.r - 1) * (self.r - 2)) as u128;
        let total = pairs * triples;
        if total > cap {
            return Err(Error::TooLarge(total, cap));
        }
        let w = ratio(1, total);
        let mut out = Vec::with_capacity(total as usize);
        for bits in 0..pairs {
            let x: Vec<bool> = (0..self.n).map(|i| (bits >> i) & 1 == 1).collect();
            let y: Vec<bool> = (0..self.n).map(|i| (bits >> (self.n + i)) & 1 == 1).collect();
            let z = xor_bits(&x, &y);
            for players in all_player_tuples(self.r, 3) {
                out.push((
                    w.clone(),
                    Round {
                        auto_accept: false,
                        queries: vec![
                            (players[0], LinQuestion(x.clone())),
                            (players[1], LinQuestion(y.clone())),
                            (players[2], LinQuestion(z.clone())),
                        ],
                        aux: (),
                    },
                ));
            }
        }
        Ok(out)
    }
}

/// Honest linear strategy: answers u . x.
pub struct HonestLinear {
    pub u: Vec<bool>,
}

impl PlayerStrategy<LinQuestion, bool> for HonestLinear {
    fn answer(&self, _player: usize, q: &LinQuestion) -> bool {
        dot_bits(&self.u, &q.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gamecore::{exhaustive_value, FnStrategy};
    use num::{One, Zero};

    #[test]
    fn linear_strategies_pass_exhaustively() {
        for n in 1..=4usize {
            let t = LinearityTest::new(n, 3).unwrap();
            for u_bits in 0..(1u32 << n) {
                let u: Vec<bool> = (0..n).map(|i| (u_bits >> i) & 1 == 1).collect();
                let v = exhaustive_value(&t, &HonestLinear { u }, 1 << 22).unwrap();
                assert!(v.is_one());
            }
        }
    }

    #[test]
    fn single_round_check() {
        let t = LinearityTest::new(2, 3).unwrap();
        let round = Round {
            auto_accept: false,
            queries: vec![
                (0, LinQuestion(vec![true, false])),
                (1, LinQuestion(vec![false, false])),
                (2, LinQuestion(vec![true, false])),
            ],
            aux: (),
        };
        // (a,b,c) = (1,0,1) accepted
        assert!(t.accepts(&round, &[true, false, true]));
        assert!(!t.accepts(&round, &[true, false, false]));
    }

    #[test]
    fn constant_one_strategy_always_rejected() {
        // 1 + 1 != 1 over F_2, so the all-ones table never passes
        let t = LinearityTest::new(3, 3).unwrap();
        let ones = FnStrategy(|_: usize, _: &LinQuestion| true);
        let v = exhaustive_value(&t, &ones, 1 << 22).unwrap();
        assert!(v.is_zero());
    }

    #[test]
    fn sixteen_question_triples_at_n2() {
        let t = LinearityTest::new(2, 3).unwrap();
        let rounds = t.enumerate_rounds(1 << 22).unwrap();
        let mut contents = std::collections::HashSet::new();
        for (_, r) in &rounds {
            let c: Vec<String> = r.queries.iter().map(|(_, q)| q.to_string()).collect();
            contents.insert(c);
        }
        assert_eq!(contents.len(), 16);
        let total: Weight = rounds.into_iter().map(|(w, _)| w).sum();
        assert!(total.is_one());
    }
}
