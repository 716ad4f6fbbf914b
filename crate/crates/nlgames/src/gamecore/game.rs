//! Explicit games: finite question/answer alphabets, exact rational
//! question distribution, 0/1 acceptance predicate.

use crate::error::{Error, Result};
use crate::linalg::permutations;
use num::{BigRational, One, Zero};
use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

pub type Weight = BigRational;

/// Acceptance predicate backed by a closure-like object, used when the
/// accepted set is too large to tabulate.
pub trait QaPredicate: Send + Sync {
    fn name(&self) -> &str;
    fn accepts(&self, qtuple: &[usize], atuple: &[usize]) -> bool;
}

#[derive(Clone)]
pub enum Predicate {
    /// Explicit accepted (question tuple, answer tuple) pairs.
    Table(BTreeSet<(Vec<usize>, Vec<usize>)>),
    /// Named deterministic checker.
    Checker(Arc<dyn QaPredicate>),
}

impl Predicate {
    pub fn accepts(&self, q: &[usize], a: &[usize]) -> bool {
        match self {
            Predicate::Table(set) => set.contains(&(q.to_vec(), a.to_vec())),
            Predicate::Checker(c) => c.accepts(q, a),
        }
    }

    pub fn name(&self) -> &str {
        match self {
            Predicate::Table(_) => "table",
            Predicate::Checker(c) => c.name(),
        }
    }
}

impl std::fmt::Debug for Predicate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Predicate::Table(s) => write!(f, "Predicate::Table({} pairs)", s.len()),
            Predicate::Checker(c) => write!(f, "Predicate::Checker({})", c.name()),
        }
    }
}

/// An explicit r-player game: token alphabets, a rational distribution over
/// question tuples summing to one exactly, and an acceptance predicate.
#[derive(Debug, Clone)]
pub struct TableGame {
    players: usize,
    questions: Vec<String>,
    answers: Vec<String>,
    dist: Vec<(Vec<usize>, Weight)>,
    predicate: Predicate,
    xor: bool,
    symmetric: bool,
}

impl TableGame {
    pub fn new(
        players: usize,
        questions: Vec<String>,
        answers: Vec<String>,
        dist: Vec<(Vec<usize>, Weight)>,
        predicate: Predicate,
    ) -> Result<Self> {
        if players < 2 {
            return Err(Error::InvalidGame("need at least 2 players".into()));
        }
        if questions.is_empty() || answers.is_empty() {
            return Err(Error::InvalidGame("empty alphabet".into()));
        }
        let mut sum = Weight::zero();
        for (tuple, w) in &dist {
            if tuple.len() != players {
                return Err(Error::InvalidGame(format!(
                    "tuple arity {} != players {players}",
                    tuple.len()
                )));
            }
            if tuple.iter().any(|&q| q >= questions.len()) {
                return Err(Error::InvalidGame("question index out of range".into()));
            }
            if *w <= Weight::zero() {
                return Err(Error::InvalidGame("non-positive weight".into()));
            }
            sum += w;
        }
        if !sum.is_one() {
            return Err(Error::InvalidGame(format!("weights sum to {sum}, not 1")));
        }
        Ok(TableGame { players, questions, answers, dist, predicate, xor: false, symmetric: false })
    }

    pub fn players(&self) -> usize {
        self.players
    }

    pub fn questions(&self) -> &[String] {
        &self.questions
    }

    pub fn answers(&self) -> &[String] {
        &self.answers
    }

    pub fn question_index(&self, token: &str) -> Option<usize> {
        self.questions.iter().position(|q| q == token)
    }

    pub fn answer_index(&self, token: &str) -> Option<usize> {
        self.answers.iter().position(|a| a == token)
    }

    pub fn dist(&self) -> &[(Vec<usize>, Weight)] {
        &self.dist
    }

    pub fn predicate(&self) -> &Predicate {
        &self.predicate
    }

    /// |G| = |Q| * |A|.
    pub fn size(&self) -> usize {
        self.questions.len() * self.answers.len()
    }

    pub fn is_xor(&self) -> bool {
        self.xor
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// Claims the XOR property and verifies it: binary answers, and on every
    /// support tuple the predicate is constant on each answer-parity class.
    pub fn claim_xor(mut self) -> Result<Self> {
        if self.answers.len() != 2 {
            return Err(Error::InvalidGame("XOR games need a binary answer alphabet".into()));
        }
        for (tuple, _) in &self.dist {
            let mut by_parity: [Option<bool>; 2] = [None, None];
            for bits in 0..(1usize << self.players) {
                let atuple: Vec<usize> = (0..self.players).map(|i| (bits >> i) & 1).collect();
                let parity = atuple.iter().sum::<usize>() % 2;
                let v = self.predicate.accepts(tuple, &atuple);
                match by_parity[parity] {
                    None => by_parity[parity] = Some(v),
                    Some(prev) if prev != v => {
                        return Err(Error::InvalidGame(
                            "predicate is not a function of the answer parity".into(),
                        ))
                    }
                    _ => {}
                }
            }
        }
        self.xor = true;
        Ok(self)
    }

    /// Claims symmetry and verifies it: the distribution is invariant under
    /// tuple permutation, and the predicate under simultaneous permutation
    /// of questions and answers (exhaustive when the answer space is small,
    /// else on a deterministic sample of answer tuples).
    pub fn claim_symmetric(mut self) -> Result<Self> {
        let mut weights: HashMap<Vec<usize>, Weight> = HashMap::new();
        for (tuple, w) in &self.dist {
            *weights.entry(tuple.clone()).or_insert_with(Weight::zero) += w;
        }
        let perms = permutations(self.players);
        for (tuple, w) in &weights {
            for perm in &perms {
                let permuted: Vec<usize> = perm.iter().map(|&i| tuple[i]).collect();
                if weights.get(&permuted) != Some(w) {
                    return Err(Error::InvalidGame("distribution not permutation-invariant".into()));
                }
            }
        }
        let n_atuples = (self.answers.len() as u128).checked_pow(self.players as u32);
        let exhaustive = matches!(n_atuples, Some(n) if n <= 4096);
        for (tuple, _) in &self.dist {
            let atuples: Vec<Vec<usize>> = if exhaustive {
                all_tuples(self.answers.len(), self.players)
            } else {
                // deterministic sparse probe
                (0..256usize)
                    .map(|s| {
                        (0..self.players)
                            .map(|i| (s.wrapping_mul(2654435761).wrapping_add(i * 97)) % self.answers.len())
                            .collect()
                    })
                    .collect()
            };
            for a in &atuples {
                let v = self.predicate.accepts(tuple, a);
                for perm in &perms {
                    let pq: Vec<usize> = perm.iter().map(|&i| tuple[i]).collect();
                    let pa: Vec<usize> = perm.iter().map(|&i| a[i]).collect();
                    if self.predicate.accepts(&pq, &pa) != v {
                        return Err(Error::InvalidGame("predicate not permutation-invariant".into()));
                    }
                }
            }
        }
        self.symmetric = true;
        Ok(self)
    }

    /// Marginal distribution of the question at tuple position `slot`.
    pub fn marginal(&self, slot: usize) -> Vec<(usize, Weight)> {
        let mut acc: HashMap<usize, Weight> = HashMap::new();
        for (tuple, w) in &self.dist {
            *acc.entry(tuple[slot]).or_insert_with(Weight::zero) += w;
        }
        let mut out: Vec<(usize, Weight)> = acc.into_iter().collect();
        out.sort_by_key(|(q, _)| *q);
        out
    }
}

pub(crate) fn all_tuples(alphabet: usize, arity: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..arity {
        let mut next = Vec::with_capacity(out.len() * alphabet);
        for t in &out {
            for a in 0..alphabet {
                let mut t2 = t.clone();
                t2.push(a);
                next.push(t2);
            }
        }
        out = next;
    }
    out
}

/// A full answer function per player.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeterministicStrategy {
    answers: Vec<Vec<usize>>, // [player][question] -> answer index
}

impl DeterministicStrategy {
    pub fn new(game: &TableGame, answers: Vec<Vec<usize>>) -> Result<Self> {
        if answers.len() != game.players() {
            return Err(Error::InvalidStrategy(format!(
                "{} answer functions for {} players",
                answers.len(),
                game.players()
            )));
        }
        for f in &answers {
            if f.len() != game.questions().len() {
                return Err(Error::InvalidStrategy("answer function not total on Q".into()));
            }
            if f.iter().any(|&a| a >= game.answers().len()) {
                return Err(Error::InvalidStrategy("answer index out of range".into()));
            }
        }
        Ok(DeterministicStrategy { answers })
    }

    pub fn answer(&self, player: usize, question: usize) -> usize {
        self.answers[player][question]
    }

    pub fn tables(&self) -> &[Vec<usize>] {
        &self.answers
    }
}

/// Exact acceptance probability of a deterministic strategy.
pub fn evaluate_deterministic(game: &TableGame, strat: &DeterministicStrategy) -> Result<Weight> {
    if strat.answers.len() != game.players() {
        return Err(Error::InvalidStrategy("wrong player count".into()));
    }
    let mut value = Weight::zero();
    for (tuple, w) in game.dist() {
        let atuple: Vec<usize> = tuple
            .iter()
            .enumerate()
            .map(|(i, &q)| strat.answer(i, q))
            .collect();
        if game.predicate().accepts(tuple, &atuple) {
            value += w;
        }
    }
    Ok(value)
}

#[derive(Debug, Clone, Copy)]
pub struct BruteForceOptions {
    /// Cap on |A|^(r|Q|), the number of strategy tuples examined.
    pub cap: u128,
    /// Restrict the search to identical per-player strategies. Off by
    /// default: for classical players the symmetric restriction can lose
    /// value even in symmetric games.
    pub assume_identical: bool,
}

impl Default for BruteForceOptions {
    fn default() -> Self {
        BruteForceOptions { cap: 10_000_000, assume_identical: false }
    }
}

/// Exact classical value by enumeration of all deterministic strategy
/// tuples.
pub fn classical_value_bruteforce(game: &TableGame, opts: BruteForceOptions) -> Result<Weight> {
    let nq = game.questions().len() as u32;
    let na = game.answers().len() as u128;
    let per_player = na.checked_pow(nq).ok_or(Error::TooLarge(u128::MAX, opts.cap))?;
    let players = if opts.assume_identical { 1 } else { game.players() as u32 };
    let total = per_player
        .checked_pow(players)
        .ok_or(Error::TooLarge(u128::MAX, opts.cap))?;
    if total > opts.cap {
        return Err(Error::TooLarge(total, opts.cap));
    }

    // precompute support as (tuple, weight)
    let mut best = Weight::zero();
    let nq = nq as usize;
    let na = na as usize;
    let r = game.players();
    let mut tables: Vec<Vec<usize>> = vec![vec![0; nq]; r];
    let free = if opts.assume_identical { 1 } else { r };
    loop {
        if opts.assume_identical {
            let t0 = tables[0].clone();
            for t in tables.iter_mut().skip(1) {
                *t = t0.clone();
            }
        }
        let mut value = Weight::zero();
        for (tuple, w) in game.dist() {
            let atuple: Vec<usize> = tuple
                .iter()
                .enumerate()
                .map(|(i, &q)| tables[i][q])
                .collect();
            if game.predicate().accepts(tuple, &atuple) {
                value += w;
            }
        }
        if value > best {
            best = value;
        }
        // odometer over the free tables
        let mut done = true;
        'outer: for p in 0..free {
            for q in 0..nq {
                tables[p][q] += 1;
                if tables[p][q] < na {
                    done = false;
                    break 'outer;
                }
                tables[p][q] = 0;
            }
        }
        if done {
            return Ok(best);
        }
    }
}

/// Bias of an XOR game from its value: beta = 2*omega - 1.
pub fn xor_bias(value: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::InvalidGame(format!("value {value} outside [0,1]")));
    }
    Ok(2.0 * value - 1.0)
}

/// The CHSH game: uniform question pairs in {0,1}^2, accept iff
/// a1 xor a2 = q1 and q2.
pub fn chsh_game() -> TableGame {
    let questions = vec!["0".to_string(), "1".to_string()];
    let answers = vec!["0".to_string(), "1".to_string()];
    let w = Weight::new(1.into(), 4.into());
    let dist = vec![
        (vec![0, 0], w.clone()),
        (vec![0, 1], w.clone()),
        (vec![1, 0], w.clone()),
        (vec![1, 1], w),
    ];
    let mut accepted = BTreeSet::new();
    for q1 in 0..2usize {
        for q2 in 0..2usize {
            for a1 in 0..2usize {
                for a2 in 0..2usize {
                    if (a1 ^ a2) == (q1 & q2) {
                        accepted.insert((vec![q1, q2], vec![a1, a2]));
                    }
                }
            }
        }
    }
    TableGame::new(2, questions, answers, dist, Predicate::Table(accepted))
        .expect("CHSH is well-formed")
        .claim_xor()
        .expect("CHSH is an XOR game")
        .claim_symmetric()
        .expect("CHSH is symmetric")
}
