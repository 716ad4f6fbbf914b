//! The QUADEQ test: verifies satisfiability of a system of quadratic
//! equations over F_2 through linearity tests on chunk/full/square tables,
//! a chunk-consistency check, a tensor check, and a random equation
//! aggregate.

use crate::error::{Error, Result};
use crate::gamecore::{EnumerableReferee, PlayerStrategy, Referee, Round, Weight};
use crate::protocols::lin::{dot_bits, xor_bits};
use crate::protocols::{all_player_tuples, pick_players, ratio};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// One quadratic equation sum_{(i,j)} x_i x_j = c over F_2, with canonical
/// index pairs i <= j (x_i^2 = x_i encodes linear terms on the diagonal).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadeqEquation {
    pairs: Vec<(usize, usize)>,
    pub constant: bool,
}

impl QuadeqEquation {
    /// Canonicalizes pair order and cancels duplicates mod 2.
    pub fn new(pairs: impl IntoIterator<Item = (usize, usize)>, constant: bool) -> Self {
        let mut canon: Vec<(usize, usize)> = pairs
            .into_iter()
            .map(|(i, j)| if i <= j { (i, j) } else { (j, i) })
            .collect();
        canon.sort_unstable();
        let mut out = Vec::with_capacity(canon.len());
        for p in canon {
            if out.last() == Some(&p) {
                out.pop();
            } else {
                out.push(p);
            }
        }
        QuadeqEquation { pairs: out, constant }
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn evaluate(&self, x: &[bool]) -> bool {
        self.pairs.iter().fold(false, |acc, &(i, j)| acc ^ (x[i] & x[j]))
    }

    pub fn satisfied_by(&self, x: &[bool]) -> bool {
        self.evaluate(x) == self.constant
    }

    /// Coefficient vector over F_2^(n^2), entry (i,j) at position i n + j.
    pub fn coefficient_vector(&self, n: usize) -> Vec<bool> {
        let mut v = vec![false; n * n];
        for &(i, j) in &self.pairs {
            v[i * n + j] ^= true;
        }
        v
    }
}

/// A QUADEQ instance whose variables are partitioned into labeled chunks.
/// The standard instance has two chunks of n/2 variables each; reductions
/// append an auxiliary third chunk.
#[derive(Debug, Clone)]
pub struct QuadeqInstance {
    chunks: Vec<(String, usize)>,
    equations: Vec<QuadeqEquation>,
}

impl QuadeqInstance {
    pub fn new(
        chunks: Vec<(String, usize)>,
        equations: Vec<QuadeqEquation>,
    ) -> Result<Self> {
        if chunks.len() < 2 {
            return Err(Error::InvalidGame("need at least two chunks".into()));
        }
        if chunks.iter().any(|(_, s)| *s == 0) {
            return Err(Error::InvalidGame("empty chunk".into()));
        }
        if equations.is_empty() {
            return Err(Error::InvalidGame("need at least one equation".into()));
        }
        let n: usize = chunks.iter().map(|(_, s)| s).sum();
        for eq in &equations {
            if eq.pairs().iter().any(|&(i, j)| i >= n || j >= n) {
                return Err(Error::InvalidGame("equation index out of range".into()));
            }
        }
        Ok(QuadeqInstance { chunks, equations })
    }

    /// The two-chunk instance of the standalone test: n even, labels l1, l2.
    pub fn standard(n: usize, equations: Vec<QuadeqEquation>) -> Result<Self> {
        if n == 0 || n % 2 != 0 {
            return Err(Error::InvalidGame("standard instance needs even n >= 2".into()));
        }
        Self::new(
            vec![("l1".to_string(), n / 2), ("l2".to_string(), n / 2)],
            equations,
        )
    }

    pub fn num_vars(&self) -> usize {
        self.chunks.iter().map(|(_, s)| s).sum()
    }

    pub fn num_equations(&self) -> usize {
        self.equations.len()
    }

    pub fn equations(&self) -> &[QuadeqEquation] {
        &self.equations
    }

    pub fn chunks(&self) -> &[(String, usize)] {
        &self.chunks
    }

    pub fn chunk_offset(&self, idx: usize) -> usize {
        self.chunks[..idx].iter().map(|(_, s)| s).sum()
    }

    pub fn full_label(&self) -> String {
        self.chunks
            .iter()
            .map(|(l, _)| l.as_str())
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn is_satisfied_by(&self, x: &[bool]) -> bool {
        self.equations.iter().all(|eq| eq.satisfied_by(x))
    }
}

/// Question tokens carry their label prefixes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QuadeqQuestion {
    /// (l_i, u) with u over chunk i.
    Chunk { label: String, v: Vec<bool> },
    /// ((l_1,..,l_c), v) with v over all variables.
    Full { labels: String, v: Vec<bool> },
    /// ((l_1,..,l_c), w) with w over n^2 entries.
    Square { labels: String, v: Vec<bool> },
}

impl QuadeqQuestion {
    pub fn payload(&self) -> &[bool] {
        match self {
            QuadeqQuestion::Chunk { v, .. }
            | QuadeqQuestion::Full { v, .. }
            | QuadeqQuestion::Square { v, .. } => v,
        }
    }
}

impl std::fmt::Display for QuadeqQuestion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let bits = |f: &mut std::fmt::Formatter<'_>, v: &[bool]| -> std::fmt::Result {
            for &b in v {
                write!(f, "{}", b as u8)?;
            }
            Ok(())
        };
        match self {
            QuadeqQuestion::Chunk { label, v } => {
                write!(f, "{label} u=")?;
                bits(f, v)
            }
            QuadeqQuestion::Full { labels, v } => {
                write!(f, "{labels} v=")?;
                bits(f, v)
            }
            QuadeqQuestion::Square { labels, v } => {
                write!(f, "{labels} w=")?;
                bits(f, v)
            }
        }
    }
}

/// What the referee checks on this round.
#[derive(Debug, Clone)]
pub enum QuadeqAux {
    /// a + b = c on a linearity triple.
    Linearity,
    /// a + b = c across chunk tables and the full table.
    ChunkPair,
    /// a = b between one chunk table and the full table (multi-chunk form).
    ChunkEmbed,
    /// a . b = c between full tables and the square table.
    Tensor,
    /// Answer must equal the aggregated constant.
    Equation { expect: bool },
}

pub struct QuadeqTest {
    pub instance: QuadeqInstance,
    pub r: usize,
}

impl QuadeqTest {
    pub fn new(instance: QuadeqInstance, r: usize) -> Result<Self> {
        if r < 3 {
            return Err(Error::InvalidGame("QUADEQ test needs r >= 3".into()));
        }
        Ok(QuadeqTest { instance, r })
    }

    fn chunk_q(&self, idx: usize, v: Vec<bool>) -> QuadeqQuestion {
        QuadeqQuestion::Chunk { label: self.instance.chunks()[idx].0.clone(), v }
    }

    fn full_q(&self, v: Vec<bool>) -> QuadeqQuestion {
        QuadeqQuestion::Full { labels: self.instance.full_label(), v }
    }

    fn square_q(&self, v: Vec<bool>) -> QuadeqQuestion {
        QuadeqQuestion::Square { labels: self.instance.full_label(), v }
    }

    fn rand_bits(len: usize, rng: &mut ChaCha8Rng) -> Vec<bool> {
        (0..len).map(|_| rng.gen_bool(0.5)).collect()
    }

    /// Linearity sub-domains: one per chunk, the full vector, the square.
    fn lin_domains(&self) -> usize {
        self.instance.chunks().len() + 2
    }

    fn lin_question(&self, domain: usize, v: Vec<bool>) -> QuadeqQuestion {
        let c = self.instance.chunks().len();
        if domain < c {
            self.chunk_q(domain, v)
        } else if domain == c {
            self.full_q(v)
        } else {
            self.square_q(v)
        }
    }

    fn lin_domain_len(&self, domain: usize) -> usize {
        let c = self.instance.chunks().len();
        let n = self.instance.num_vars();
        if domain < c {
            self.instance.chunks()[domain].1
        } else if domain == c {
            n
        } else {
            n * n
        }
    }
}

fn tensor(u: &[bool], v: &[bool]) -> Vec<bool> {
    let mut out = Vec::with_capacity(u.len() * v.len());
    for &a in u {
        for &b in v {
            out.push(a & b);
        }
    }
    out
}

impl Referee for QuadeqTest {
    type Question = QuadeqQuestion;
    type Answer = bool;
    type Aux = QuadeqAux;

    fn players(&self) -> usize {
        self.r
    }

    fn sample_round(&self, rng: &mut ChaCha8Rng) -> Round<QuadeqQuestion, QuadeqAux> {
        let inst = &self.instance;
        let n = inst.num_vars();
        let two_chunks = inst.chunks().len() == 2;
        match rng.gen_range(0..4u8) {
            0 => {
                // linearity on a random table
                let domain = rng.gen_range(0..self.lin_domains());
                let len = self.lin_domain_len(domain);
                let x = Self::rand_bits(len, rng);
                let y = Self::rand_bits(len, rng);
                let z = xor_bits(&x, &y);
                let players = pick_players(self.r, 3, rng);
                Round {
                    auto_accept: false,
                    queries: vec![
                        (players[0], self.lin_question(domain, x)),
                        (players[1], self.lin_question(domain, y)),
                        (players[2], self.lin_question(domain, z)),
                    ],
                    aux: QuadeqAux::Linearity,
                }
            }
            1 => {
                if two_chunks {
                    let n1 = inst.chunks()[0].1;
                    let u = Self::rand_bits(n1, rng);
                    let v = Self::rand_bits(inst.chunks()[1].1, rng);
                    let mut uv = u.clone();
                    uv.extend_from_slice(&v);
                    let players = pick_players(self.r, 3, rng);
                    Round {
                        auto_accept: false,
                        queries: vec![
                            (players[0], self.chunk_q(0, u)),
                            (players[1], self.chunk_q(1, v)),
                            (players[2], self.full_q(uv)),
                        ],
                        aux: QuadeqAux::ChunkPair,
                    }
                } else {
                    // chunk-vs-full consistency for the multi-chunk variant
                    let t = rng.gen_range(0..inst.chunks().len());
                    let u = Self::rand_bits(inst.chunks()[t].1, rng);
                    let mut embedded = vec![false; n];
                    let off = inst.chunk_offset(t);
                    embedded[off..off + u.len()].copy_from_slice(&u);
                    let players = pick_players(self.r, 2, rng);
                    Round {
                        auto_accept: false,
                        queries: vec![
                            (players[0], self.chunk_q(t, u)),
                            (players[1], self.full_q(embedded)),
                        ],
                        aux: QuadeqAux::ChunkEmbed,
                    }
                }
            }
            2 => {
                let u = Self::rand_bits(n, rng);
                let v = Self::rand_bits(n, rng);
                let w = tensor(&u, &v);
                let players = pick_players(self.r, 3, rng);
                Round {
                    auto_accept: false,
                    queries: vec![
                        (players[0], self.full_q(u)),
                        (players[1], self.full_q(v)),
                        (players[2], self.square_q(w)),
                    ],
                    aux: QuadeqAux::Tensor,
                }
            }
            _ => {
                let k = inst.num_equations();
                let sel: Vec<bool> = (0..k).map(|_| rng.gen_bool(0.5)).collect();
                let mut w = vec![false; n * n];
                let mut expect = false;
                for (eq, &on) in inst.equations().iter().zip(&sel) {
                    if on {
                        w = xor_bits(&w, &eq.coefficient_vector(n));
                        expect ^= eq.constant;
                    }
                }
                let players = pick_players(self.r, 1, rng);
                Round {
                    auto_accept: false,
                    queries: vec![(players[0], self.square_q(w))],
                    aux: QuadeqAux::Equation { expect },
                }
            }
        }
    }

    fn accepts(&self, round: &Round<QuadeqQuestion, QuadeqAux>, answers: &[bool]) -> bool {
        match &round.aux {
            QuadeqAux::Linearity | QuadeqAux::ChunkPair => {
                !(answers[0] ^ answers[1] ^ answers[2])
            }
            QuadeqAux::ChunkEmbed => answers[0] == answers[1],
            QuadeqAux::Tensor => (answers[0] & answers[1]) == answers[2],
            QuadeqAux::Equation { expect } => answers[0] == *expect,
        }
    }
}

impl EnumerableReferee for QuadeqTest {
    fn enumerate_rounds(
        &self,
        cap: u128,
    ) -> Result<Vec<(Weight, Round<QuadeqQuestion, QuadeqAux>)>> {
        let inst = &self.instance;
        if inst.chunks().len() != 2 {
            return Err(Error::InvalidGame(
                "only the two-chunk test is enumerable".into(),
            ));
        }
        let n = inst.num_vars();
        let n1 = inst.chunks()[0].1;
        let n2 = inst.chunks()[1].1;
        let k = inst.num_equations();
        let triples = (self.r * (self.r - 1) * (self.r - 2)) as u128;
        let pow = |b: usize| -> Result<u128> {
            if b >= 100 {
                return Err(Error::TooLarge(u128::MAX, cap));
            }
            Ok(1u128 << b)
        };
        let lin_count = pow(2 * n1)? + pow(2 * n2)? + pow(2 * n)? + pow(2 * n * n)?;
        let count = lin_count * triples
            + pow(n1 + n2)? * triples
            + pow(2 * n)? * triples
            + pow(k)? * self.r as u128;
        if count > cap {
            return Err(Error::TooLarge(count, cap));
        }

        let mut out = Vec::new();
        let quarter = ratio(1, 4);
        // branch 1: the four linearity tables
        for domain in 0..self.lin_domains() {
            let len = self.lin_domain_len(domain);
            let w = quarter.clone() * ratio(1, 4) / ratio(pow(2 * len)? * triples, 1);
            for bits in 0..pow(2 * len)? {
                let x: Vec<bool> = (0..len).map(|i| (bits >> i) & 1 == 1).collect();
                let y: Vec<bool> = (0..len).map(|i| (bits >> (len + i)) & 1 == 1).collect();
                let z = xor_bits(&x, &y);
                for players in all_player_tuples(self.r, 3) {
                    out.push((
                        w.clone(),
                        Round {
                            auto_accept: false,
                            queries: vec![
                                (players[0], self.lin_question(domain, x.clone())),
                                (players[1], self.lin_question(domain, y.clone())),
                                (players[2], self.lin_question(domain, z.clone())),
                            ],
                            aux: QuadeqAux::Linearity,
                        },
                    ));
                }
            }
        }
        // branch 2: chunk pair consistency
        let w2 = quarter.clone() / ratio(pow(n1 + n2)? * triples, 1);
        for bits in 0..pow(n1 + n2)? {
            let u: Vec<bool> = (0..n1).map(|i| (bits >> i) & 1 == 1).collect();
            let v: Vec<bool> = (0..n2).map(|i| (bits >> (n1 + i)) & 1 == 1).collect();
            let mut uv = u.clone();
            uv.extend_from_slice(&v);
            for players in all_player_tuples(self.r, 3) {
                out.push((
                    w2.clone(),
                    Round {
                        auto_accept: false,
                        queries: vec![
                            (players[0], self.chunk_q(0, u.clone())),
                            (players[1], self.chunk_q(1, v.clone())),
                            (players[2], self.full_q(uv.clone())),
                        ],
                        aux: QuadeqAux::ChunkPair,
                    },
                ));
            }
        }
        // branch 3: tensor check
        let w3 = quarter.clone() / ratio(pow(2 * n)? * triples, 1);
        for bits in 0..pow(2 * n)? {
            let u: Vec<bool> = (0..n).map(|i| (bits >> i) & 1 == 1).collect();
            let v: Vec<bool> = (0..n).map(|i| (bits >> (n + i)) & 1 == 1).collect();
            let w = tensor(&u, &v);
            for players in all_player_tuples(self.r, 3) {
                out.push((
                    w3.clone(),
                    Round {
                        auto_accept: false,
                        queries: vec![
                            (players[0], self.full_q(u.clone())),
                            (players[1], self.full_q(v.clone())),
                            (players[2], self.square_q(w.clone())),
                        ],
                        aux: QuadeqAux::Tensor,
                    },
                ));
            }
        }
        // branch 4: equation aggregate
        let w4 = quarter / ratio(pow(k)? * self.r as u128, 1);
        for bits in 0..pow(k)? {
            let mut w = vec![false; n * n];
            let mut expect = false;
            for (idx, eq) in inst.equations().iter().enumerate() {
                if (bits >> idx) & 1 == 1 {
                    w = xor_bits(&w, &eq.coefficient_vector(n));
                    expect ^= eq.constant;
                }
            }
            for p in 0..self.r {
                out.push((
                    w4.clone(),
                    Round {
                        auto_accept: false,
                        queries: vec![(p, self.square_q(w.clone()))],
                        aux: QuadeqAux::Equation { expect },
                    },
                ));
            }
        }
        Ok(out)
    }
}

/// Honest strategy from an assignment: chunk tables answer u . x_chunk, the
/// full table v . x, the square table w . (x (x) x).
pub struct HonestQuadeq<'a> {
    instance: &'a QuadeqInstance,
    assignment: Vec<bool>,
}

impl<'a> HonestQuadeq<'a> {
    pub fn new(instance: &'a QuadeqInstance, assignment: Vec<bool>) -> Result<Self> {
        if assignment.len() != instance.num_vars() {
            return Err(Error::DimensionMismatch {
                expected: instance.num_vars(),
                got: assignment.len(),
            });
        }
        Ok(HonestQuadeq { instance, assignment })
    }
}

impl PlayerStrategy<QuadeqQuestion, bool> for HonestQuadeq<'_> {
    fn answer(&self, _player: usize, q: &QuadeqQuestion) -> bool {
        let x = &self.assignment;
        match q {
            QuadeqQuestion::Chunk { label, v } => {
                let idx = self
                    .instance
                    .chunks()
                    .iter()
                    .position(|(l, _)| l == label)
                    .expect("known label");
                let off = self.instance.chunk_offset(idx);
                dot_bits(v, &x[off..off + v.len()])
            }
            QuadeqQuestion::Full { v, .. } => dot_bits(v, x),
            QuadeqQuestion::Square { v, .. } => {
                let n = x.len();
                let mut acc = false;
                for i in 0..n {
                    if !x[i] {
                        continue;
                    }
                    for j in 0..n {
                        if x[j] {
                            acc ^= v[i * n + j];
                        }
                    }
                }
                acc
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gamecore::{exhaustive_value, monte_carlo, FnStrategy};
    use crate::rng::StreamSeed;
    use num::One;

    fn sat_instance() -> (QuadeqInstance, Vec<bool>) {
        // variables x0,x1,x2,x3; equations: x0 x1 = 1, x2 = 0, x0 x3 = x0
        let eqs = vec![
            QuadeqEquation::new([(0, 1)], true),
            QuadeqEquation::new([(2, 2)], false),
            QuadeqEquation::new([(0, 3), (0, 0)], false),
        ];
        let inst = QuadeqInstance::standard(4, eqs).unwrap();
        let x = vec![true, true, false, true];
        assert!(inst.is_satisfied_by(&x));
        (inst, x)
    }

    #[test]
    fn honest_satisfying_assignment_accepted() {
        let (inst, x) = sat_instance();
        let t = QuadeqTest::new(inst.clone(), 3).unwrap();
        let honest = HonestQuadeq::new(&inst, x).unwrap();
        let seed = StreamSeed::new(31, "quadeq-honest");
        let rep = monte_carlo(&t, &honest, 20_000, &seed);
        assert_eq!(rep.accepted, rep.rounds);
        // exhaustively only n = 2 is in reach (the square linearity table
        // alone has 2^(2 n^2) question pairs)
        let eqs = vec![QuadeqEquation::new([(0, 1)], true)];
        let inst2 = QuadeqInstance::standard(2, eqs).unwrap();
        let t2 = QuadeqTest::new(inst2.clone(), 3).unwrap();
        let honest2 = HonestQuadeq::new(&inst2, vec![true, true]).unwrap();
        let v = exhaustive_value(&t2, &honest2, 1 << 22).unwrap();
        assert!(v.is_one());
    }

    #[test]
    fn tensor_mismatch_rejected() {
        let (inst, x) = sat_instance();
        let t = QuadeqTest::new(inst.clone(), 3).unwrap();
        let honest = HonestQuadeq::new(&inst, x).unwrap();
        let round = Round {
            auto_accept: false,
            queries: vec![
                (0, t.full_q(vec![true, false, false, false])),
                (1, t.full_q(vec![true, false, false, false])),
                (2, t.square_q({
                    let mut w = vec![false; 16];
                    w[0] = true;
                    w
                })),
            ],
            aux: QuadeqAux::Tensor,
        };
        let a = honest.answer(0, &round.queries[0].1);
        let b = honest.answer(1, &round.queries[1].1);
        let c = honest.answer(2, &round.queries[2].1);
        assert!(t.accepts(&round, &[a, b, c]));
        assert!(!t.accepts(&round, &[a, b, !c]));
    }

    #[test]
    fn violated_equation_caught_half_the_time() {
        // all-false violates x0 x1 = 1; the random aggregate includes that
        // equation with probability 1/2, so rejection >= 1/4 * 1/2
        let (inst, _) = sat_instance();
        let t = QuadeqTest::new(inst.clone(), 3).unwrap();
        let bad = HonestQuadeq::new(&inst, vec![false; 4]).unwrap();
        let seed = StreamSeed::new(33, "quadeq-bad");
        let rep = monte_carlo(&t, &bad, 100_000, &seed);
        let reject = 1.0 - rep.estimate;
        assert!(reject >= 1.0 / 8.0 - 0.01, "reject {reject}");
    }

    #[test]
    fn malformed_all_ones_square_table_fails_linearity() {
        let (inst, x) = sat_instance();
        let t = QuadeqTest::new(inst.clone(), 3).unwrap();
        let honest = HonestQuadeq::new(&inst, x).unwrap();
        let liar = FnStrategy(|p: usize, q: &QuadeqQuestion| match q {
            QuadeqQuestion::Square { .. } => true,
            _ => honest.answer(p, q),
        });
        let seed = StreamSeed::new(35, "quadeq-liar");
        let rep = monte_carlo(&t, &liar, 50_000, &seed);
        assert!(rep.estimate < 1.0);
    }

    #[test]
    fn weights_sum_to_one() {
        let eqs = vec![
            QuadeqEquation::new([(0, 1)], true),
            QuadeqEquation::new([(0, 0)], true),
        ];
        let inst = QuadeqInstance::standard(2, eqs).unwrap();
        let t = QuadeqTest::new(inst, 3).unwrap();
        let rounds = t.enumerate_rounds(1 << 22).unwrap();
        let total: Weight = rounds.into_iter().map(|(w, _)| w).sum();
        assert!(total.is_one());
    }
}
