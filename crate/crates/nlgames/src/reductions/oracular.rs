//! Stage 3: oracularization (one player answers a full question triple, a
//! second confirms one coordinate) and the confuse-question repetition that
//! precedes gap amplification.

use crate::error::{Error, Result};
use crate::gamecore::{
    EnumerableReferee, PlayerStrategy, RationalSampler, Referee, Round, TableGame, Weight,
};
use crate::protocols::IDLE_TOKEN;
use crate::reductions::quadeqify::BinarizedGame;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// One referee round of a three-player binary game in slot form: three
/// question tokens (idle slots marked "-") and the acceptance predicate as
/// an 8-entry truth table over the answer bits (bit a1 + 2 a2 + 4 a3).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TripleRound {
    pub questions: [String; 3],
    pub predicate: u8,
}

impl TripleRound {
    pub fn accepts(&self, bits: [bool; 3]) -> bool {
        let idx = bits[0] as u8 | (bits[1] as u8) << 1 | (bits[2] as u8) << 2;
        self.predicate >> idx & 1 == 1
    }
}

/// A three-player game with single-bit answers, seen as a distribution over
/// slot-form rounds.
pub trait BinaryTripleGame: Sync {
    fn sample_triple(&self, rng: &mut ChaCha8Rng) -> TripleRound;
}

pub trait EnumerableTripleGame: BinaryTripleGame {
    fn enumerate_triples(&self, cap: u128) -> Result<Vec<(Weight, TripleRound)>>;
}

/// Adapter for an explicit three-player binary table game.
pub struct TableTripleGame<'a> {
    game: &'a TableGame,
    sampler: RationalSampler,
}

impl<'a> TableTripleGame<'a> {
    pub fn new(game: &'a TableGame) -> Result<Self> {
        if game.players() != 3 {
            return Err(Error::InvalidGame("triple adapter needs 3 players".into()));
        }
        if game.answers().len() != 2 {
            return Err(Error::InvalidGame("triple adapter needs binary answers".into()));
        }
        let sampler = RationalSampler::new(game.dist().iter().map(|(_, w)| w));
        Ok(TableTripleGame { game, sampler })
    }

    fn round_at(&self, i: usize) -> TripleRound {
        let (tuple, _) = &self.game.dist()[i];
        let mut predicate = 0u8;
        for bits in 0..8usize {
            let atuple = vec![bits & 1, (bits >> 1) & 1, (bits >> 2) & 1];
            if self.game.predicate().accepts(tuple, &atuple) {
                predicate |= 1 << bits;
            }
        }
        TripleRound {
            questions: [
                self.game.questions()[tuple[0]].clone(),
                self.game.questions()[tuple[1]].clone(),
                self.game.questions()[tuple[2]].clone(),
            ],
            predicate,
        }
    }
}

impl BinaryTripleGame for TableTripleGame<'_> {
    fn sample_triple(&self, rng: &mut ChaCha8Rng) -> TripleRound {
        self.round_at(self.sampler.sample(rng))
    }
}

impl EnumerableTripleGame for TableTripleGame<'_> {
    fn enumerate_triples(&self, cap: u128) -> Result<Vec<(Weight, TripleRound)>> {
        if self.game.dist().len() as u128 > cap {
            return Err(Error::TooLarge(self.game.dist().len() as u128, cap));
        }
        Ok(self
            .game
            .dist()
            .iter()
            .enumerate()
            .map(|(i, (_, w))| (w.clone(), self.round_at(i)))
            .collect())
    }
}

impl BinaryTripleGame for BinarizedGame {
    fn sample_triple(&self, rng: &mut ChaCha8Rng) -> TripleRound {
        loop {
            let round = self.sample_round(rng);
            if round.auto_accept {
                continue; // the QUADEQ test never auto-accepts
            }
            let mut questions =
                [IDLE_TOKEN.to_string(), IDLE_TOKEN.to_string(), IDLE_TOKEN.to_string()];
            for (player, q) in &round.queries {
                questions[*player] = q.to_string();
            }
            let mut predicate = 0u8;
            for bits in 0..8usize {
                let answers: Vec<bool> = round
                    .queries
                    .iter()
                    .map(|(player, _)| bits >> player & 1 == 1)
                    .collect();
                if self.accepts(&round, &answers) {
                    predicate |= 1 << bits;
                }
            }
            return TripleRound { questions, predicate };
        }
    }
}

/// A per-question bit assignment; the honest strategies of all later stages
/// are coordinate-wise applications of one of these.
pub trait BitStrategy: Sync {
    fn bit(&self, token: &str) -> bool;
}

impl BitStrategy for std::collections::HashMap<String, bool> {
    fn bit(&self, token: &str) -> bool {
        *self.get(token).unwrap_or(&false)
    }
}

pub struct FnBit<F>(pub F);

impl<F: Fn(&str) -> bool + Sync> BitStrategy for FnBit<F> {
    fn bit(&self, token: &str) -> bool {
        self.0(token)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OrcQuestion {
    Triple([String; 3]),
    Single(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OrcAnswer {
    Bits([bool; 3]),
    Bit(bool),
}

impl std::fmt::Display for OrcQuestion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            OrcQuestion::Triple([a, b, c]) => write!(f, "T[{a};{b};{c}]"),
            OrcQuestion::Single(q) => write!(f, "S[{q}]"),
        }
    }
}

impl std::fmt::Display for OrcAnswer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            OrcAnswer::Bits([a, b, c]) => {
                write!(f, "{}{}{}", *a as u8, *b as u8, *c as u8)
            }
            OrcAnswer::Bit(a) => write!(f, "{}", *a as u8),
        }
    }
}

#[derive(Debug, Clone)]
pub struct OrcAux {
    pub round: TripleRound,
    pub pos: usize,
}

/// The oracularized game G'_1: one player receives the whole question
/// triple, another a uniformly chosen coordinate; accept iff the triple
/// answer passes the source predicate and the coordinate answers agree.
pub struct OracularizedGame<G> {
    base: G,
    r: usize,
}

pub fn oracularize<G: BinaryTripleGame>(base: G) -> OracularizedGame<G> {
    OracularizedGame { base, r: 3 }
}

impl<G: BinaryTripleGame> OracularizedGame<G> {
    pub fn base(&self) -> &G {
        &self.base
    }

    fn pair_round(&self, rng: &mut ChaCha8Rng) -> (TripleRound, usize) {
        let round = self.base.sample_triple(rng);
        let pos = rng.gen_range(0..3);
        (round, pos)
    }
}

impl<G: BinaryTripleGame> Referee for OracularizedGame<G> {
    type Question = OrcQuestion;
    type Answer = OrcAnswer;
    type Aux = OrcAux;

    fn players(&self) -> usize {
        self.r
    }

    fn sample_round(&self, rng: &mut ChaCha8Rng) -> Round<OrcQuestion, OrcAux> {
        let (round, pos) = self.pair_round(rng);
        let players = crate::protocols::pick_players(self.r, 2, rng);
        Round {
            auto_accept: false,
            queries: vec![
                (players[0], OrcQuestion::Triple(round.questions.clone())),
                (players[1], OrcQuestion::Single(round.questions[pos].clone())),
            ],
            aux: OrcAux { round, pos },
        }
    }

    fn accepts(&self, round: &Round<OrcQuestion, OrcAux>, answers: &[OrcAnswer]) -> bool {
        let (OrcAnswer::Bits(bits), OrcAnswer::Bit(b)) = (&answers[0], &answers[1]) else {
            return false;
        };
        round.aux.round.accepts(*bits) && bits[round.aux.pos] == *b
    }
}

impl<G: EnumerableTripleGame> EnumerableReferee for OracularizedGame<G> {
    fn enumerate_rounds(&self, cap: u128) -> Result<Vec<(Weight, Round<OrcQuestion, OrcAux>)>> {
        let triples = self.base.enumerate_triples(cap)?;
        let pairs = crate::protocols::all_player_tuples(self.r, 2);
        let total = triples.len() as u128 * 3 * pairs.len() as u128;
        if total > cap {
            return Err(Error::TooLarge(total, cap));
        }
        let mut out = Vec::with_capacity(total as usize);
        let scale = Weight::new(1.into(), (3 * pairs.len()).into());
        for (w, round) in triples {
            for pos in 0..3 {
                for players in &pairs {
                    out.push((
                        w.clone() * scale.clone(),
                        Round {
                            auto_accept: false,
                            queries: vec![
                                (players[0], OrcQuestion::Triple(round.questions.clone())),
                                (players[1], OrcQuestion::Single(round.questions[pos].clone())),
                            ],
                            aux: OrcAux { round: round.clone(), pos },
                        },
                    ));
                }
            }
        }
        Ok(out)
    }
}

/// Coordinate-wise honest strategy for the oracularized game.
pub struct OrcHonest<'a, S>(pub &'a S);

impl<S: BitStrategy> PlayerStrategy<OrcQuestion, OrcAnswer> for OrcHonest<'_, S> {
    fn answer(&self, _player: usize, q: &OrcQuestion) -> OrcAnswer {
        match q {
            OrcQuestion::Triple([a, b, c]) => {
                OrcAnswer::Bits([self.0.bit(a), self.0.bit(b), self.0.bit(c)])
            }
            OrcQuestion::Single(q) => OrcAnswer::Bit(self.0.bit(q)),
        }
    }
}

#[derive(Debug, Clone)]
pub enum RepSlot {
    Real(TripleRound, usize),
    Confuse { first: [String; 3], second: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepQuestion(pub Vec<OrcQuestion>);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepAnswer(pub Vec<OrcAnswer>);

impl std::fmt::Display for RepQuestion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (i, q) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, "|")?;
            }
            write!(f, "{q}")?;
        }
        Ok(())
    }
}

impl std::fmt::Display for RepAnswer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, "|")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct RepAux {
    /// Slot data in shuffled order.
    pub slots: Vec<RepSlot>,
}

/// The repeated game with confuse questions: K pairs drawn as in the base
/// game plus K' pairs drawn from the independent per-slot marginals, all
/// shuffled together; the referee checks only the real coordinates.
pub struct RepeatedGame<G> {
    base: OracularizedGame<G>,
    pub k: usize,
    pub kp: usize,
}

pub fn repeat_with_confuse<G: BinaryTripleGame>(
    base: OracularizedGame<G>,
    k: usize,
    kp: usize,
) -> Result<RepeatedGame<G>> {
    if k == 0 {
        return Err(Error::InvalidGame("need K >= 1 real repetitions".into()));
    }
    Ok(RepeatedGame { base, k, kp })
}

impl<G: BinaryTripleGame> RepeatedGame<G> {
    pub fn base(&self) -> &OracularizedGame<G> {
        &self.base
    }
}

impl<G: BinaryTripleGame> Referee for RepeatedGame<G> {
    type Question = RepQuestion;
    type Answer = RepAnswer;
    type Aux = RepAux;

    fn players(&self) -> usize {
        3
    }

    fn sample_round(&self, rng: &mut ChaCha8Rng) -> Round<RepQuestion, RepAux> {
        let mut slots: Vec<RepSlot> = Vec::with_capacity(self.k + self.kp);
        for _ in 0..self.k {
            let (round, pos) = self.base.pair_round(rng);
            slots.push(RepSlot::Real(round, pos));
        }
        for _ in 0..self.kp {
            // independent marginals: first-slot question from one fresh
            // round, second-slot question from another
            let (r1, _) = self.base.pair_round(rng);
            let (r2, pos2) = self.base.pair_round(rng);
            slots.push(RepSlot::Confuse {
                first: r1.questions,
                second: r2.questions[pos2].clone(),
            });
        }
        // shuffle
        for i in (1..slots.len()).rev() {
            let j = rng.gen_range(0..=i);
            slots.swap(i, j);
        }
        let first: Vec<OrcQuestion> = slots
            .iter()
            .map(|s| match s {
                RepSlot::Real(r, _) => OrcQuestion::Triple(r.questions.clone()),
                RepSlot::Confuse { first, .. } => OrcQuestion::Triple(first.clone()),
            })
            .collect();
        let second: Vec<OrcQuestion> = slots
            .iter()
            .map(|s| match s {
                RepSlot::Real(r, pos) => OrcQuestion::Single(r.questions[*pos].clone()),
                RepSlot::Confuse { second, .. } => OrcQuestion::Single(second.clone()),
            })
            .collect();
        let players = crate::protocols::pick_players(3, 2, rng);
        Round {
            auto_accept: false,
            queries: vec![
                (players[0], RepQuestion(first)),
                (players[1], RepQuestion(second)),
            ],
            aux: RepAux { slots },
        }
    }

    fn accepts(&self, round: &Round<RepQuestion, RepAux>, answers: &[RepAnswer]) -> bool {
        let (RepAnswer(first), RepAnswer(second)) = (&answers[0], &answers[1]);
        if first.len() != round.aux.slots.len() || second.len() != round.aux.slots.len() {
            return false;
        }
        for (i, slot) in round.aux.slots.iter().enumerate() {
            let RepSlot::Real(r, pos) = slot else {
                continue; // confuse answers are ignored
            };
            let (OrcAnswer::Bits(bits), OrcAnswer::Bit(b)) = (&first[i], &second[i]) else {
                return false;
            };
            if !r.accepts(*bits) || bits[*pos] != *b {
                return false;
            }
        }
        true
    }
}

/// Coordinate-wise strategy for the repeated game.
pub struct RepHonest<'a, S>(pub &'a S);

impl<S: BitStrategy> PlayerStrategy<RepQuestion, RepAnswer> for RepHonest<'_, S> {
    fn answer(&self, player: usize, q: &RepQuestion) -> RepAnswer {
        let inner = OrcHonest(self.0);
        RepAnswer(q.0.iter().map(|oq| inner.answer(player, oq)).collect())
    }
}

/// A tiny satisfiable fixture: three players each get a uniform bit and
/// must answer bits with matching total parity, a1 + a2 + a3 = q1 + q2 + q3
/// mod 2. The identity strategy h(q) = q is perfect.
pub fn parity_triple_game() -> TableGame {
    use crate::gamecore::{Predicate, QaPredicate};
    use std::sync::Arc;

    struct ParityPred;
    impl QaPredicate for ParityPred {
        fn name(&self) -> &str {
            "xor-parity"
        }
        fn accepts(&self, q: &[usize], a: &[usize]) -> bool {
            (a.iter().sum::<usize>() % 2) == (q.iter().sum::<usize>() % 2)
        }
    }

    let w = Weight::new(1.into(), 8.into());
    let mut dist = Vec::new();
    for bits in 0..8usize {
        dist.push((vec![bits & 1, (bits >> 1) & 1, (bits >> 2) & 1], w.clone()));
    }
    TableGame::new(
        3,
        vec!["0".into(), "1".into()],
        vec!["0".into(), "1".into()],
        dist,
        Predicate::Checker(Arc::new(ParityPred)),
    )
    .expect("parity fixture is well-formed")
    .claim_symmetric()
    .expect("parity fixture is symmetric")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gamecore::monte_carlo;
    use crate::rng::StreamSeed;
    use num::ToPrimitive;
    use std::collections::HashMap;

    fn parity_game() -> TableGame {
        parity_triple_game()
    }

    fn identity_bits() -> HashMap<String, bool> {
        HashMap::from([("0".to_string(), false), ("1".to_string(), true)])
    }

    #[test]
    fn oracularized_honest_is_perfect() {
        let g = parity_game();
        let triple = TableTripleGame::new(&g).unwrap();
        let orc = oracularize(triple);
        let bits = identity_bits();
        let honest = OrcHonest(&bits);
        let seed = StreamSeed::new(71, "orc");
        let rep = monte_carlo(&orc, &honest, 20_000, &seed);
        assert_eq!(rep.accepted, rep.rounds);
    }

    #[test]
    fn inconsistent_second_answer_rejected_when_matched() {
        let g = parity_game();
        let triple = TableTripleGame::new(&g).unwrap();
        let orc = oracularize(triple);
        let bits = identity_bits();
        // flip all single answers: rejected on every round (either the
        // match check fails, or nothing else can fail first)
        let liar = crate::gamecore::FnStrategy(|_: usize, q: &OrcQuestion| match q {
            OrcQuestion::Triple([a, b, c]) => {
                OrcAnswer::Bits([bits.bit(a), bits.bit(b), bits.bit(c)])
            }
            OrcQuestion::Single(q) => OrcAnswer::Bit(!bits.bit(q)),
        });
        let seed = StreamSeed::new(73, "orc-liar");
        let rep = monte_carlo(&orc, &liar, 10_000, &seed);
        assert_eq!(rep.accepted, 0);
    }

    #[test]
    fn oracular_value_bracketed_by_source_value() {
        // brute force over (triple table F, bit table h), using the
        // factorization of deterministic strategies: the oracularized value
        // equals max over (F, h) of the pairwise value, and satisfies
        // omega <= omega(G'_1) <= (2 + omega)/3
        let g = parity_game();
        let triple = TableTripleGame::new(&g).unwrap();
        let rounds = triple.enumerate_triples(1 << 20).unwrap();
        let omega = crate::gamecore::classical_value_bruteforce(
            &g,
            crate::gamecore::BruteForceOptions::default(),
        )
        .unwrap()
        .to_f64()
        .unwrap();

        // distinct question tokens for h; distinct triples for F
        let mut triples: Vec<TripleRound> = Vec::new();
        for (_, r) in &rounds {
            if !triples.contains(r) {
                triples.push(r.clone());
            }
        }
        let nt = triples.len();
        let mut best = 0.0f64;
        // F assigns one of 8 bit-triples per distinct triple; h one of 4
        // tables over {0, 1}
        for f_code in 0..(8usize.pow(nt as u32)) {
            let mut fc = f_code;
            let f_assign: Vec<[bool; 3]> = (0..nt)
                .map(|_| {
                    let bits = fc % 8;
                    fc /= 8;
                    [bits & 1 == 1, bits & 2 != 0, bits & 4 != 0]
                })
                .collect();
            for h_code in 0..4usize {
                let h = |tok: &str| -> bool {
                    if tok == "0" {
                        h_code & 1 == 1
                    } else {
                        h_code & 2 != 0
                    }
                };
                let mut value = 0.0;
                for (w, r) in &rounds {
                    let idx = triples.iter().position(|t| t == r).unwrap();
                    let bits = f_assign[idx];
                    let mut acc = 0.0;
                    for pos in 0..3 {
                        if r.accepts(bits) && bits[pos] == h(&r.questions[pos]) {
                            acc += 1.0 / 3.0;
                        }
                    }
                    value += w.to_f64().unwrap() * acc;
                }
                best = best.max(value);
            }
        }
        assert!(best >= omega - 1e-12, "oracular {best} < source {omega}");
        assert!(best <= (2.0 + omega) / 3.0 + 1e-12);
    }

    #[test]
    fn repetition_with_k1_k0_matches_base_law() {
        let g = parity_game();
        let triple = TableTripleGame::new(&g).unwrap();
        let orc = oracularize(triple);
        let bits = identity_bits();
        // a slightly faulty strategy so acceptance is not trivially 1
        let faulty = crate::gamecore::FnStrategy(|_: usize, q: &OrcQuestion| match q {
            OrcQuestion::Triple([a, b, c]) => {
                OrcAnswer::Bits([!bits.bit(a), bits.bit(b), bits.bit(c)])
            }
            OrcQuestion::Single(q) => OrcAnswer::Bit(bits.bit(q)),
        });
        let seed = StreamSeed::new(77, "rep-k1");
        let base_rep = monte_carlo(&orc, &faulty, 100_000, &seed);

        let g = parity_game();
        let triple = TableTripleGame::new(&g).unwrap();
        let rep1 = repeat_with_confuse(oracularize(triple), 1, 0).unwrap();
        let faulty_rep = crate::gamecore::FnStrategy(|p: usize, q: &RepQuestion| {
            RepAnswer(q.0.iter().map(|oq| faulty.0(p, oq)).collect())
        });
        let rep = monte_carlo(&rep1, &faulty_rep, 100_000, &seed.child("rep"));
        assert!(
            (base_rep.estimate - rep.estimate).abs() <= base_rep.halfwidth + rep.halfwidth,
            "{} vs {}",
            base_rep.estimate,
            rep.estimate
        );
    }

    #[test]
    fn repeated_honest_stays_perfect_and_confuse_marginal_is_product() {
        use statrs::distribution::{ChiSquared, ContinuousCDF};
        let g = parity_game();
        let triple = TableTripleGame::new(&g).unwrap();
        let repg = repeat_with_confuse(oracularize(triple), 3, 2).unwrap();
        let bits = identity_bits();
        let honest = RepHonest(&bits);
        let seed = StreamSeed::new(79, "rep-honest");
        let rep = monte_carlo(&repg, &honest, 50_000, &seed);
        assert_eq!(rep.accepted, rep.rounds);

        // chi-square: the joint (first, second) question on a confuse slot
        // factorizes into the product of the marginals
        let mut joint: HashMap<(String, String), usize> = HashMap::new();
        let mut m1: HashMap<String, usize> = HashMap::new();
        let mut m2: HashMap<String, usize> = HashMap::new();
        let mut total = 0usize;
        let seed = StreamSeed::new(81, "rep-chi");
        for i in 0..100_000u64 {
            let mut rng = seed.stream(i);
            let round = repg.sample_round(&mut rng);
            for (slot, s) in round.aux.slots.iter().enumerate() {
                if let RepSlot::Confuse { first, second } = s {
                    let f = format!("{};{};{}", first[0], first[1], first[2]);
                    *joint.entry((f.clone(), second.clone())).or_default() += 1;
                    *m1.entry(f).or_default() += 1;
                    *m2.entry(second.clone()).or_default() += 1;
                    total += 1;
                    let _ = slot;
                }
            }
        }
        let mut stat = 0.0;
        let mut dof = 0usize;
        for (k1, c1) in &m1 {
            for (k2, c2) in &m2 {
                let expected = (*c1 as f64) * (*c2 as f64) / total as f64;
                if expected < 5.0 {
                    continue;
                }
                let observed = *joint.get(&(k1.clone(), k2.clone())).unwrap_or(&0) as f64;
                stat += (observed - expected).powi(2) / expected;
                dof += 1;
            }
        }
        let dof = (dof - m1.len() - m2.len() + 1).max(1);
        let p = 1.0 - ChiSquared::new(dof as f64).unwrap().cdf(stat);
        assert!(p > 0.001, "chi2 stat {stat}, dof {dof}, p {p}");
    }
}
