//! The exact entangled bias of a two-player XOR game, as a Gram-matrix SDP
//! over unit vectors (one per question per side).

use crate::error::{Error, Result};
use crate::gamecore::TableGame;
use crate::linalg::{c, CMat};
use crate::optim::problem::{solve_sdp, ConstraintKind, SdpConstraint, SdpProblem};
use num::ToPrimitive;

#[derive(Debug, Clone)]
pub struct XorBiasResult {
    pub bias: f64,
    /// Gram matrix of the optimizing unit vectors (first-player questions,
    /// then second-player questions).
    pub gram: CMat,
}

/// Maximal quantum bias of a 2-player XOR game:
/// beta = const + max sum_q pi(q) s(q) <u_{q1}, v_{q2}> over unit vectors,
/// where s(q) = V(even|q) - V(odd|q) and const collects parity-independent
/// acceptance mass.
pub fn xor_bias_sdp_2player(game: &TableGame) -> Result<XorBiasResult> {
    if game.players() != 2 {
        return Err(Error::InvalidGame("bias SDP needs a 2-player game".into()));
    }
    if !game.is_xor() {
        return Err(Error::InvalidGame("bias SDP needs the XOR flag".into()));
    }
    let nq = game.questions().len();
    let dim = 2 * nq;

    // weight matrix: W[q1, nq + q2] accumulates pi s / 2
    let mut w = CMat::zeros(dim, dim);
    let mut constant = 0.0f64;
    for (tuple, weight) in game.dist() {
        let pi = weight.to_f64().expect("weight fits in f64");
        let v_even = game.predicate().accepts(tuple, &[0, 0]) as i32 as f64;
        let v_odd = game.predicate().accepts(tuple, &[0, 1]) as i32 as f64;
        constant += pi * (v_even + v_odd - 1.0);
        let s = v_even - v_odd;
        if s != 0.0 {
            let (i, j) = (tuple[0], nq + tuple[1]);
            w[(i, j)] += c(pi * s / 2.0, 0.0);
            w[(j, i)] += c(pi * s / 2.0, 0.0);
        }
    }

    if w.iter().all(|z| z.norm() == 0.0) {
        // parity-independent predicate: the bias is the constant part
        return Ok(XorBiasResult { bias: constant, gram: CMat::identity(dim, dim) });
    }

    // max <W, G> s.t. G psd, G_ii = 1
    let mut constraints = Vec::with_capacity(dim);
    for i in 0..dim {
        let mut e = CMat::zeros(dim, dim);
        e[(i, i)] = c(1.0, 0.0);
        constraints.push(SdpConstraint { coeffs: vec![e], rhs: 1.0, kind: ConstraintKind::Eq });
    }
    let problem = SdpProblem { block_dims: vec![dim], objective: vec![w], constraints };
    let sol = solve_sdp(&problem, 1e-8)?;
    Ok(XorBiasResult { bias: constant + sol.primal_value, gram: sol.blocks[0].clone() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gamecore::{
        chsh_game, classical_value_bruteforce, xor_bias, BruteForceOptions, Predicate, TableGame,
        Weight,
    };
    use crate::rng::StreamSeed;
    use rand::Rng;
    use std::collections::BTreeSet;
    use std::sync::Arc;

    #[test]
    fn chsh_bias_is_sqrt2_over_2() {
        let res = xor_bias_sdp_2player(&chsh_game()).unwrap();
        assert!((res.bias - 2f64.sqrt() / 2.0).abs() < 1e-6, "bias {}", res.bias);
    }

    #[test]
    fn constant_predicate_has_bias_one() {
        struct Always;
        impl crate::gamecore::QaPredicate for Always {
            fn name(&self) -> &str {
                "always"
            }
            fn accepts(&self, _: &[usize], _: &[usize]) -> bool {
                true
            }
        }
        let g = TableGame::new(
            2,
            vec!["q".into()],
            vec!["0".into(), "1".into()],
            vec![(vec![0, 0], num::One::one())],
            Predicate::Checker(Arc::new(Always)),
        )
        .unwrap()
        .claim_xor()
        .unwrap();
        let res = xor_bias_sdp_2player(&g).unwrap();
        assert!((res.bias - 1.0).abs() < 1e-9);
    }

    #[test]
    fn quantum_bias_dominates_classical_on_random_xor_games() {
        let mut rng = StreamSeed::new(131, "xorbias").rng();
        for _ in 0..20 {
            // random 2x2-question XOR game: per question pair, accept a
            // random parity
            let mut accepted = BTreeSet::new();
            for q1 in 0..2usize {
                for q2 in 0..2usize {
                    let target = rng.gen_range(0..2usize);
                    for a1 in 0..2usize {
                        for a2 in 0..2usize {
                            if (a1 + a2) % 2 == target {
                                accepted.insert((vec![q1, q2], vec![a1, a2]));
                            }
                        }
                    }
                }
            }
            let w = Weight::new(1.into(), 4.into());
            let g = TableGame::new(
                2,
                vec!["0".into(), "1".into()],
                vec!["0".into(), "1".into()],
                vec![
                    (vec![0, 0], w.clone()),
                    (vec![0, 1], w.clone()),
                    (vec![1, 0], w.clone()),
                    (vec![1, 1], w),
                ],
                Predicate::Table(accepted),
            )
            .unwrap()
            .claim_xor()
            .unwrap();
            let classical = classical_value_bruteforce(&g, BruteForceOptions::default())
                .unwrap();
            let classical_bias =
                xor_bias(num::ToPrimitive::to_f64(&classical).unwrap()).unwrap();
            let quantum_bias = xor_bias_sdp_2player(&g).unwrap().bias;
            assert!(
                quantum_bias >= classical_bias - 1e-6,
                "quantum {quantum_bias} < classical {classical_bias}"
            );
        }
    }
}
