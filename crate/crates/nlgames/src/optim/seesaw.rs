//! See-saw lower bounds on the entangled value: alternate between the
//! optimal state for fixed measurements (an eigenproblem) and the optimal
//! POVM per player and question for a fixed rest (an eigenprojection for
//! binary answers, the measurement-design SDP otherwise). Each step
//! maximizes exactly, so sweep values never decrease.

use crate::error::{Error, Result};
use crate::gamecore::{
    evaluate_quantum, DeterministicStrategy, QuantumStrategy, TableGame, QUANTUM_DIM_CAP,
};
use crate::linalg::{apply_to_register, c, identity, total_dim, CMat, CVec};
use crate::optim::problem::{solve_sdp, ConstraintKind, SdpConstraint, SdpProblem};
use crate::quantumlab::randops::{random_povm, random_unit_vector};
use crate::rng::StreamSeed;
use num::ToPrimitive;

#[derive(Debug, Clone)]
pub struct SeesawOptions {
    pub dims: Vec<usize>,
    pub restarts: usize,
    pub sweeps: usize,
    pub seed: u64,
    /// Start one restart from this classical strategy embedded with the
    /// requested dimensions.
    pub classical_init: Option<DeterministicStrategy>,
}

#[derive(Debug, Clone)]
pub struct SeesawOutcome {
    pub value: f64,
    pub strategy: QuantumStrategy,
    /// Sweep values of the best restart (monotone nondecreasing).
    pub sweep_values: Vec<f64>,
}

/// The operator K_{i,q,a} with value contribution tr(X K) for the element
/// X = A_{i,q}^a, everything else fixed.
fn response_matrix(
    game: &TableGame,
    dims: &[usize],
    state: &CVec,
    povms: &[Vec<Vec<CMat>>],
    player: usize,
    question: usize,
) -> Vec<CMat> {
    let d = dims[player];
    let na = game.answers().len();
    let mut out = vec![CMat::zeros(d, d); na];
    let r = game.players();
    for (tuple, w) in game.dist() {
        if tuple[player] != question {
            continue;
        }
        let wf = w.to_f64().expect("weight fits in f64");
        // iterate over the other players' answers
        let mut others: Vec<usize> = (0..r).filter(|&j| j != player).collect();
        let mut counters = vec![0usize; others.len()];
        loop {
            // apply fixed elements
            let mut applied = state.clone();
            for (idx, &j) in others.iter().enumerate() {
                applied = apply_to_register(
                    &applied,
                    &povms[j][tuple[j]][counters[idx]],
                    j,
                    dims,
                );
            }
            for a in 0..na {
                let mut atuple = vec![0usize; r];
                atuple[player] = a;
                for (idx, &j) in others.iter().enumerate() {
                    atuple[j] = counters[idx];
                }
                if !game.predicate().accepts(tuple, &atuple) {
                    continue;
                }
                // value term = <psi| X on reg player |applied> = tr(X K)
                let k = cross_matrix(state, &applied, dims, player);
                out[a] += k * c(wf, 0.0);
            }
            // advance
            let mut i = 0;
            loop {
                if i == counters.len() {
                    break;
                }
                counters[i] += 1;
                if counters[i] < na {
                    break;
                }
                counters[i] = 0;
                i += 1;
            }
            if counters.iter().all(|&x| x == 0) {
                break;
            }
        }
    }
    // only the Hermitian part matters for Hermitian arguments
    out.into_iter().map(|k| (&k + k.adjoint()) * c(0.5, 0.0)).collect()
}

/// K with tr(X K) = <psi | X on register reg | phi>.
fn cross_matrix(psi: &CVec, phi: &CVec, dims: &[usize], reg: usize) -> CMat {
    let d = dims[reg];
    let stride: usize = dims[reg + 1..].iter().product();
    let block = d * stride;
    let total = total_dim(dims);
    let mut k = CMat::zeros(d, d);
    for outer in 0..total / block {
        for inner in 0..stride {
            let base = outer * block + inner;
            for row in 0..d {
                for col in 0..d {
                    // X[row, col] multiplies conj(psi[row idx]) phi[col idx]
                    k[(row, col)] +=
                        psi[base + row * stride].conj() * phi[base + col * stride];
                }
            }
        }
    }
    k.transpose() // tr(X K) with K[col, row] ordering
}

/// Optimal POVM for response matrices K_a: maximize sum_a tr(X_a K_a) over
/// POVMs. Binary answers use the eigenprojector of K_0 - K_1; larger
/// alphabets go through the SDP.
fn best_povm(ks: &[CMat], tol: f64) -> Result<Vec<CMat>> {
    let d = ks[0].nrows();
    if ks.len() == 2 {
        let diff = &ks[0] - &ks[1];
        let eig = diff.clone().symmetric_eigen();
        let mut p0 = CMat::zeros(d, d);
        for i in 0..d {
            if eig.eigenvalues[i] > 0.0 {
                let v = eig.eigenvectors.column(i);
                p0 += v * v.adjoint();
            }
        }
        let p1 = identity(d) - &p0;
        return Ok(vec![p0, p1]);
    }
    // measurement-design SDP: blocks X_a >= 0, sum X_a = Id
    let na = ks.len();
    let mut constraints = Vec::new();
    let mut basis: Vec<CMat> = Vec::new();
    for i in 0..d {
        let mut e = CMat::zeros(d, d);
        e[(i, i)] = c(1.0, 0.0);
        basis.push(e);
    }
    for i in 0..d {
        for j in i + 1..d {
            let mut e = CMat::zeros(d, d);
            e[(i, j)] = c(1.0, 0.0);
            e[(j, i)] = c(1.0, 0.0);
            basis.push(e);
            let mut e = CMat::zeros(d, d);
            e[(i, j)] = c(0.0, -1.0);
            e[(j, i)] = c(0.0, 1.0);
            basis.push(e);
        }
    }
    for e in &basis {
        let rhs: f64 = (0..d).map(|i| e[(i, i)].re).sum();
        constraints.push(SdpConstraint {
            coeffs: vec![e.clone(); na],
            rhs,
            kind: ConstraintKind::Eq,
        });
    }
    let problem = SdpProblem {
        block_dims: vec![d; na],
        objective: ks.to_vec(),
        constraints,
    };
    let sol = solve_sdp(&problem, tol)?;
    Ok(sol.blocks)
}

pub fn seesaw_lower_bound(game: &TableGame, opts: &SeesawOptions) -> Result<SeesawOutcome> {
    let r = game.players();
    if opts.dims.len() != r {
        return Err(Error::DimensionMismatch { expected: r, got: opts.dims.len() });
    }
    let total = total_dim(&opts.dims);
    if total > QUANTUM_DIM_CAP {
        return Err(Error::TooLarge(total as u128, QUANTUM_DIM_CAP as u128));
    }
    let nq = game.questions().len();
    let na = game.answers().len();
    let seed = StreamSeed::new(opts.seed, "seesaw");

    let mut best: Option<SeesawOutcome> = None;
    let restarts = if opts.classical_init.is_some() {
        opts.restarts + 1
    } else {
        opts.restarts.max(1)
    };
    for restart in 0..restarts {
        let mut rng = seed.stream(restart as u64);
        let (mut state, mut povms): (CVec, Vec<Vec<Vec<CMat>>>) =
            match (&opts.classical_init, restart) {
                (Some(cl), 0) => {
                    // classical embedding padded up to the requested dims:
                    // answer a deterministically via scaled projectors
                    let povms = (0..r)
                        .map(|p| {
                            (0..nq)
                                .map(|q| {
                                    (0..na)
                                        .map(|a| {
                                            if cl.answer(p, q) == a {
                                                identity(opts.dims[p])
                                            } else {
                                                CMat::zeros(opts.dims[p], opts.dims[p])
                                            }
                                        })
                                        .collect()
                                })
                                .collect()
                        })
                        .collect();
                    let mut v = CVec::zeros(total);
                    v[0] = c(1.0, 0.0);
                    (v, povms)
                }
                _ => {
                    let v = random_unit_vector(total, &mut rng);
                    let povms = (0..r)
                        .map(|p| {
                            (0..nq)
                                .map(|_| {
                                    random_povm(opts.dims[p], na, &mut rng)
                                        .elements()
                                        .to_vec()
                                })
                                .collect()
                        })
                        .collect();
                    (v, povms)
                }
            };

        let value_of = |state: &CVec, povms: &Vec<Vec<Vec<CMat>>>| -> f64 {
            let qs = QuantumStrategy::new(opts.dims.clone(), state.clone(), povms.clone())
                .expect("iterates stay valid");
            evaluate_quantum(game, &qs).expect("within caps")
        };

        let mut sweep_values = Vec::with_capacity(opts.sweeps);
        let mut last = value_of(&state, &povms);
        for _ in 0..opts.sweeps {
            // measurements
            for player in 0..r {
                for q in 0..nq {
                    let ks = response_matrix(game, &opts.dims, &state, &povms, player, q);
                    povms[player][q] = best_povm(&ks, 1e-9)?;
                }
            }
            // state: top eigenvector of the game operator
            let mut op = CMat::zeros(total, total);
            for (tuple, w) in game.dist() {
                let wf = w.to_f64().expect("weight fits in f64");
                let mut atuple = vec![0usize; r];
                loop {
                    if game.predicate().accepts(tuple, &atuple) {
                        let mut term = CMat::identity(1, 1);
                        for (j, &a) in atuple.iter().enumerate() {
                            term = term.kronecker(&povms[j][tuple[j]][a]);
                        }
                        op += term * c(wf, 0.0);
                    }
                    let mut i = 0;
                    loop {
                        if i == r {
                            break;
                        }
                        atuple[i] += 1;
                        if atuple[i] < na {
                            break;
                        }
                        atuple[i] = 0;
                        i += 1;
                    }
                    if atuple.iter().all(|&x| x == 0) {
                        break;
                    }
                }
            }
            let op = (&op + op.adjoint()) * c(0.5, 0.0);
            let eig = op.clone().symmetric_eigen();
            let top = (0..total)
                .max_by(|&a, &b| {
                    eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap()
                })
                .unwrap();
            state = eig.eigenvectors.column(top).into_owned();
            state /= c(state.norm(), 0.0);

            let v = value_of(&state, &povms);
            debug_assert!(v >= last - 1e-9, "sweep decreased: {last} -> {v}");
            last = v;
            sweep_values.push(v);
        }

        let strategy =
            QuantumStrategy::new(opts.dims.clone(), state, povms).expect("final iterate valid");
        let outcome = SeesawOutcome { value: last, strategy, sweep_values };
        if best.as_ref().map(|b| outcome.value > b.value).unwrap_or(true) {
            best = Some(outcome);
        }
    }
    Ok(best.expect("at least one restart"))
}
