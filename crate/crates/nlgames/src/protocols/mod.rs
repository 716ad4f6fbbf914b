//! Referee samplers, acceptance checkers and honest strategies for the five
//! tests: plane-vs-point low-degree, two-level low-degree, 3-SAT, BLR
//! linearity, and QUADEQ; plus the compiler from samplers to explicit game
//! tables.

mod lin;
mod lowdeg;
mod quadeq;
mod sat;
mod table;
mod twolevel;

pub use lin::{HonestLinear, LinQuestion, LinearityTest};
pub use lowdeg::{HonestLowDegree, LdAnswer, LdQuestion, LowDegreeParams, LowDegreeTest};
pub use quadeq::{
    HonestQuadeq, QuadeqAux, QuadeqEquation, QuadeqInstance, QuadeqQuestion, QuadeqTest,
};
pub use sat::{sat_params, Clause, Cnf, HonestSat, SatAnswer, SatAux, SatParams, SatQuestion, SatTest};
pub use table::{compile_to_table, CompiledGame, IDLE_TOKEN};
pub use twolevel::{HonestTwoLevel, TlAnswer, TlQuestion, TwoLevelParams, TwoLevelTest};

use crate::field::FieldParams;
use crate::gamecore::Weight;
use num::{BigInt, One, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Ordered selection of `count` distinct players among `r`, uniform.
pub(crate) fn pick_players(r: usize, count: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..r).collect();
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let i = rng.gen_range(0..pool.len());
        out.push(pool.swap_remove(i));
    }
    out
}

/// All ordered selections of `count` distinct players among `r`.
pub(crate) fn all_player_tuples(r: usize, count: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = vec![vec![]];
    for _ in 0..count {
        let mut next = Vec::new();
        for t in &out {
            for p in 0..r {
                if !t.contains(&p) {
                    let mut t2 = t.clone();
                    t2.push(p);
                    next.push(t2);
                }
            }
        }
        out = next;
    }
    out
}

pub(crate) fn ratio(num: u128, den: u128) -> Weight {
    Weight::new(BigInt::from(num), BigInt::from(den))
}

/// Probability that k uniform directions in F_q^m are linearly independent.
pub(crate) fn independence_probability(field: FieldParams, m: usize, k: usize) -> Weight {
    let q = field.modulus() as u128;
    let total = q.pow(m as u32);
    let mut p = Weight::one();
    for i in 0..k {
        p *= ratio(total - q.pow(i as u32), total);
    }
    p
}

pub(crate) fn dependence_probability(field: FieldParams, m: usize, k: usize) -> Weight {
    Weight::one() - independence_probability(field, m, k)
}

pub(crate) fn is_zero_weight(w: &Weight) -> bool {
    w.is_zero()
}
