//! Stage 4: the three-player XOR gadget. Questions are folded boolean
//! functions over small sets of source questions; the referee blends K real
//! and K' confuse repetitions into the conditioning predicate, multiplies
//! in the eps-noise function, and checks a single parity.
//!
//! Boolean values ride as bools with `true` standing for -1 ("true" in the
//! +-1 convention), so products of signs become XORs.

use crate::error::{Error, Result};
use crate::gamecore::{PlayerStrategy, Referee, Round};
use crate::reductions::oracular::{BinaryTripleGame, BitStrategy, TripleRound};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// A folded function question: the representative of the pair {f, -f},
/// normalized to the value +1 (`false`) on the all-false assignment, over
/// an ordered subset of source questions. The table is indexed by
/// assignment masks (bit i set means subset[i] is assigned true).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldedFunctionQuestion {
    pub subset: Vec<String>,
    pub table: Vec<bool>,
}

/// A folded function with the sign that recovers the original:
/// original = -rep if `negated` else rep.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignedFunction {
    pub rep: FoldedFunctionQuestion,
    pub negated: bool,
}

/// Folds a raw table over the subset: the representative takes value +1 on
/// the lexicographically smallest (all-false) assignment.
pub fn fold_function(subset: Vec<String>, table: Vec<bool>) -> SignedFunction {
    let sign = table[0];
    let rep_table = if sign { table.iter().map(|b| !b).collect() } else { table };
    SignedFunction {
        rep: FoldedFunctionQuestion { subset, table: rep_table },
        negated: sign,
    }
}

impl std::fmt::Display for FoldedFunctionQuestion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "F[")?;
        for (i, s) in self.subset.iter().enumerate() {
            if i > 0 {
                write!(f, ";")?;
            }
            write!(f, "{s}")?;
        }
        write!(f, "]:")?;
        // pack table bits into hex
        let mut nibble = 0u8;
        for (i, &b) in self.table.iter().enumerate() {
            nibble |= (b as u8) << (i % 4);
            if i % 4 == 3 || i == self.table.len() - 1 {
                write!(f, "{nibble:x}")?;
                nibble = 0;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct XorAux {
    /// Referee-side signs of the three folded questions, in query order.
    pub signs: [bool; 3],
}

pub struct XorGadget<G> {
    base: G,
    pub eps: f64,
    pub k: usize,
    pub kp: usize,
}

/// Builds the XOR gadget over a binary triple game. The variable-set cap
/// bounds 2^|Z| table sizes: |Z| <= 4(K+K') in the worst case.
pub fn xor_gadget<G: BinaryTripleGame>(
    base: G,
    eps: f64,
    k: usize,
    kp: usize,
    max_vars: usize,
) -> Result<XorGadget<G>> {
    if !(0.0..=0.5).contains(&eps) {
        return Err(Error::InvalidGame("eps must lie in [0, 1/2]".into()));
    }
    if k == 0 {
        return Err(Error::InvalidGame("need K >= 1".into()));
    }
    let worst = 3 * (k + kp) + kp;
    if worst > max_vars {
        return Err(Error::TooLarge(1u128 << worst, 1u128 << max_vars));
    }
    Ok(XorGadget { base, eps, k, kp })
}

impl<G: BinaryTripleGame> XorGadget<G> {
    pub fn base(&self) -> &G {
        &self.base
    }
}

fn insert_sorted(set: &mut Vec<String>, token: &str) {
    if let Err(pos) = set.binary_search_by(|t| t.as_str().cmp(token)) {
        set.insert(pos, token.to_string());
    }
}

fn restriction_mask(full: u64, positions: &[usize]) -> usize {
    let mut m = 0usize;
    for (i, &p) in positions.iter().enumerate() {
        m |= (((full >> p) & 1) as usize) << i;
    }
    m
}

impl<G: BinaryTripleGame> Referee for XorGadget<G> {
    type Question = FoldedFunctionQuestion;
    type Answer = bool;
    type Aux = XorAux;

    fn players(&self) -> usize {
        3
    }

    fn sample_round(&self, rng: &mut ChaCha8Rng) -> Round<FoldedFunctionQuestion, XorAux> {
        // K + K' source triples; one marked coordinate per real triple, an
        // independent marginal draw per confuse triple
        let triples: Vec<TripleRound> =
            (0..self.k + self.kp).map(|_| self.base.sample_triple(rng)).collect();
        let mut w_tokens: Vec<String> = Vec::with_capacity(self.k + self.kp);
        for t in triples.iter().take(self.k) {
            w_tokens.push(t.questions[rng.gen_range(0..3)].clone());
        }
        for _ in 0..self.kp {
            let fresh = self.base.sample_triple(rng);
            w_tokens.push(fresh.questions[rng.gen_range(0..3)].clone());
        }

        let mut u_set: Vec<String> = Vec::new();
        for t in &w_tokens {
            insert_sorted(&mut u_set, t);
        }
        let mut w_set: Vec<String> = Vec::new();
        for t in &triples {
            for q in &t.questions {
                insert_sorted(&mut w_set, q);
            }
        }
        let mut z_set = w_set.clone();
        for t in &u_set {
            insert_sorted(&mut z_set, t);
        }
        let zpos = |tok: &str| z_set.binary_search_by(|t| t.as_str().cmp(tok)).expect("in Z");
        let u_sel: Vec<usize> = u_set.iter().map(|t| zpos(t)).collect();
        let w_sel: Vec<usize> = w_set.iter().map(|t| zpos(t)).collect();
        let triple_sel: Vec<[usize; 3]> = triples
            .iter()
            .map(|t| {
                [
                    w_set.binary_search_by(|x| x.as_str().cmp(&t.questions[0])).unwrap(),
                    w_set.binary_search_by(|x| x.as_str().cmp(&t.questions[1])).unwrap(),
                    w_set.binary_search_by(|x| x.as_str().cmp(&t.questions[2])).unwrap(),
                ]
            })
            .collect();

        // random tables: f on U-assignments, g1 on W-assignments, mu on Z
        let f_table: Vec<bool> = (0..1usize << u_set.len()).map(|_| rng.gen_bool(0.5)).collect();
        let g1_table: Vec<bool> = (0..1usize << w_set.len()).map(|_| rng.gen_bool(0.5)).collect();
        let mu_table: Vec<bool> =
            (0..1usize << z_set.len()).map(|_| rng.gen_bool(self.eps)).collect();

        // psi over W-assignments: all triples accepted
        let psi = |wmask: usize| -> bool {
            triples.iter().zip(&triple_sel).all(|(t, sel)| {
                t.accepts([
                    wmask >> sel[0] & 1 == 1,
                    wmask >> sel[1] & 1 == 1,
                    wmask >> sel[2] & 1 == 1,
                ])
            })
        };

        // folded questions
        let q_a = fold_function(u_set.clone(), f_table.clone());
        let b_table: Vec<bool> = (0..1usize << w_set.len())
            .map(|wm| psi(wm) && g1_table[wm])
            .collect();
        let q_b = fold_function(w_set.clone(), b_table);
        let c_table: Vec<bool> = (0..1usize << z_set.len())
            .map(|zm| {
                let um = restriction_mask(zm as u64, &u_sel);
                let wm = restriction_mask(zm as u64, &w_sel);
                let g2 = f_table[um] ^ g1_table[wm] ^ mu_table[zm];
                psi(wm) && g2
            })
            .collect();
        let q_c = fold_function(z_set, c_table);

        // random assignment of the three folded questions to players
        let players = crate::protocols::pick_players(3, 3, rng);
        Round {
            auto_accept: false,
            queries: vec![
                (players[0], q_a.rep),
                (players[1], q_b.rep),
                (players[2], q_c.rep),
            ],
            aux: XorAux { signs: [q_a.negated, q_b.negated, q_c.negated] },
        }
    }

    fn accepts(&self, round: &Round<FoldedFunctionQuestion, XorAux>, answers: &[bool]) -> bool {
        // abc = r_f r_g1 r_g2 as parity of negatives
        let lhs = answers[0] ^ answers[1] ^ answers[2];
        let rhs = round.aux.signs[0] ^ round.aux.signs[1] ^ round.aux.signs[2];
        lhs == rhs
    }
}

/// Honest strategy: evaluate the received representative at the global
/// assignment (folding does the sign bookkeeping referee-side).
pub struct XorHonest<'a, S>(pub &'a S);

impl<S: BitStrategy> PlayerStrategy<FoldedFunctionQuestion, bool> for XorHonest<'_, S> {
    fn answer(&self, _player: usize, q: &FoldedFunctionQuestion) -> bool {
        let mut mask = 0usize;
        for (i, tok) in q.subset.iter().enumerate() {
            mask |= (self.0.bit(tok) as usize) << i;
        }
        q.table[mask]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gamecore::{monte_carlo, FnStrategy, TableGame};
    use crate::reductions::oracular::{parity_triple_game, TableTripleGame};
    use crate::rng::StreamSeed;
    use std::collections::HashMap;

    fn fixture() -> (TableGame, HashMap<String, bool>) {
        let g = parity_triple_game();
        let h = HashMap::from([("0".to_string(), false), ("1".to_string(), true)]);
        (g, h)
    }

    #[test]
    fn folding_pairs_share_a_representative_with_opposite_signs() {
        let subset = vec!["a".to_string(), "b".to_string()];
        let table = vec![true, false, true, true];
        let f = fold_function(subset.clone(), table.clone());
        let neg = fold_function(subset, table.iter().map(|b| !b).collect());
        assert_eq!(f.rep, neg.rep);
        assert_ne!(f.negated, neg.negated);
        assert!(!f.rep.table[0], "representative is +1 on the smallest input");
    }

    #[test]
    fn honest_acceptance_tracks_one_minus_eps() {
        let (g, h) = fixture();
        for (eps, rounds) in [(0.0, 20_000u64), (0.05, 100_000), (0.2, 100_000)] {
            let triple = TableTripleGame::new(&g).unwrap();
            let gadget = xor_gadget(triple, eps, 2, 1, 16).unwrap();
            let honest = XorHonest(&h);
            let seed = StreamSeed::new(91, "xor-eps");
            let rep = monte_carlo(&gadget, &honest, rounds, &seed);
            if eps == 0.0 {
                assert_eq!(rep.accepted, rep.rounds);
            } else {
                let sigma = (eps * (1.0 - eps) / rounds as f64).sqrt();
                assert!(
                    (rep.estimate - (1.0 - eps)).abs() <= 3.0 * sigma,
                    "eps {eps}: {} vs {}",
                    rep.estimate,
                    1.0 - eps
                );
            }
        }
    }

    #[test]
    fn flipping_one_player_lands_at_eps() {
        let (g, h) = fixture();
        let eps = 0.1;
        let triple = TableTripleGame::new(&g).unwrap();
        let gadget = xor_gadget(triple, eps, 2, 1, 16).unwrap();
        let honest = XorHonest(&h);
        let flipped = FnStrategy(|p: usize, q: &FoldedFunctionQuestion| {
            let a = honest.answer(p, q);
            if p == 1 {
                !a
            } else {
                a
            }
        });
        let rounds = 100_000u64;
        let seed = StreamSeed::new(93, "xor-flip");
        let rep = monte_carlo(&gadget, &flipped, rounds, &seed);
        let sigma = (eps * (1.0 - eps) / rounds as f64).sqrt();
        assert!(
            (rep.estimate - eps).abs() <= 3.0 * sigma,
            "{} vs {eps}",
            rep.estimate
        );
    }

    #[test]
    fn cap_guard() {
        let (g, _) = fixture();
        let triple = TableTripleGame::new(&g).unwrap();
        assert!(xor_gadget(triple, 0.1, 8, 8, 20).is_err());
    }
}
