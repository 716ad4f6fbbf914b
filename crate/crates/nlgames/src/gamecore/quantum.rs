//! Quantum strategies: a shared multi-register state plus per-player,
//! per-question POVMs, with exact contraction of the acceptance value and
//! the permutation-register symmetrization construction.

use crate::error::{Error, Result};
use crate::gamecore::game::{DeterministicStrategy, TableGame};
use crate::linalg::{
    apply_to_register, c, identity, inner, is_hermitian, max_abs_entry, min_eigenvalue,
    permutations, permute_registers, total_dim, CMat, CVec,
};

/// Cap on the total tensor dimension for exact contraction.
pub const QUANTUM_DIM_CAP: usize = 1 << 12;

const NORM_TOL: f64 = 1e-10;
const PSD_FLOOR: f64 = -1e-10;
const COMPLETENESS_TOL: f64 = 1e-10;
const IMAG_TOL: f64 = 1e-9;

/// A finite-dimensional strategy for an explicit game: per-player register
/// dimensions, a unit-norm joint state, and one POVM per (player, question).
#[derive(Debug, Clone)]
pub struct QuantumStrategy {
    dims: Vec<usize>,
    state: CVec,
    /// povms[player][question][answer]
    povms: Vec<Vec<Vec<CMat>>>,
}

impl QuantumStrategy {
    pub fn new(dims: Vec<usize>, state: CVec, povms: Vec<Vec<Vec<CMat>>>) -> Result<Self> {
        let total = total_dim(&dims);
        if total > QUANTUM_DIM_CAP {
            return Err(Error::TooLarge(total as u128, QUANTUM_DIM_CAP as u128));
        }
        if state.len() != total {
            return Err(Error::DimensionMismatch { expected: total, got: state.len() });
        }
        if (state.norm() - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidStrategy(format!("state norm {} != 1", state.norm())));
        }
        if povms.len() != dims.len() {
            return Err(Error::InvalidStrategy("one POVM family per player".into()));
        }
        for (player, per_q) in povms.iter().enumerate() {
            for (q, povm) in per_q.iter().enumerate() {
                let mut sum = CMat::zeros(dims[player], dims[player]);
                for el in povm {
                    if el.nrows() != dims[player] || el.ncols() != dims[player] {
                        return Err(Error::DimensionMismatch {
                            expected: dims[player],
                            got: el.nrows(),
                        });
                    }
                    if !is_hermitian(el, 1e-9) {
                        return Err(Error::InvalidStrategy(format!(
                            "POVM element not Hermitian (player {player}, question {q})"
                        )));
                    }
                    if min_eigenvalue(el) < PSD_FLOOR {
                        return Err(Error::InvalidStrategy(format!(
                            "POVM element not PSD (player {player}, question {q}, min eig {})",
                            min_eigenvalue(el)
                        )));
                    }
                    sum += el;
                }
                if max_abs_entry(&(&sum - identity(dims[player]))) > COMPLETENESS_TOL {
                    return Err(Error::InvalidStrategy(format!(
                        "POVM does not sum to identity (player {player}, question {q})"
                    )));
                }
            }
        }
        Ok(QuantumStrategy { dims, state, povms })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn state(&self) -> &CVec {
        &self.state
    }

    pub fn povm(&self, player: usize, question: usize) -> &[CMat] {
        &self.povms[player][question]
    }

    pub fn povms(&self) -> &[Vec<Vec<CMat>>] {
        &self.povms
    }

    /// Classical strategy embedded with one-dimensional registers: the
    /// chosen answer has the scalar identity as its element.
    pub fn from_deterministic(game: &TableGame, strat: &DeterministicStrategy) -> Result<Self> {
        let r = game.players();
        let dims = vec![1usize; r];
        let state = CVec::from_element(1, c(1.0, 0.0));
        let one = CMat::from_element(1, 1, c(1.0, 0.0));
        let zero = CMat::zeros(1, 1);
        let povms = (0..r)
            .map(|p| {
                (0..game.questions().len())
                    .map(|q| {
                        (0..game.answers().len())
                            .map(|a| if strat.answer(p, q) == a { one.clone() } else { zero.clone() })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        QuantumStrategy::new(dims, state, povms)
    }

    /// Largest deviation from invariance over all register permutations.
    pub fn state_swap_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for perm in permutations(self.dims.len()) {
            let permuted = permute_registers(&self.state, &self.dims, &perm);
            let diff = (&permuted - &self.state).norm();
            worst = worst.max(diff);
        }
        worst
    }
}

/// Exact entangled acceptance probability of a strategy: the full sum
/// over question tuples and answer tuples of pi(q) V(a|q) <Psi| (x) A |Psi>.
/// The imaginary residue of the accumulated value must stay below 1e-9.
pub fn evaluate_quantum(game: &TableGame, qs: &QuantumStrategy) -> Result<f64> {
    if qs.povms().len() != game.players() {
        return Err(Error::InvalidStrategy("wrong player count".into()));
    }
    for per_q in qs.povms() {
        if per_q.len() != game.questions().len() {
            return Err(Error::InvalidStrategy("POVMs not total on Q".into()));
        }
        for povm in per_q {
            if povm.len() != game.answers().len() {
                return Err(Error::InvalidStrategy("POVM outcomes must match A".into()));
            }
        }
    }
    let mut value = c(0.0, 0.0);
    for (tuple, w) in game.dist() {
        let wf = rational_to_f64(w);
        let mut atuple = vec![0usize; game.players()];
        value += wf * tuple_value(game, qs, tuple, 0, &qs.state().clone(), &mut atuple);
    }
    if value.im.abs() > IMAG_TOL {
        return Err(Error::InvariantViolated(format!("imaginary residue {}", value.im)));
    }
    Ok(value.re)
}

fn tuple_value(
    game: &TableGame,
    qs: &QuantumStrategy,
    tuple: &[usize],
    player: usize,
    applied: &CVec,
    atuple: &mut Vec<usize>,
) -> num::complex::Complex64 {
    if player == game.players() {
        if game.predicate().accepts(tuple, atuple) {
            return inner(qs.state(), applied);
        }
        return c(0.0, 0.0);
    }
    let mut acc = c(0.0, 0.0);
    for (a, el) in qs.povm(player, tuple[player]).iter().enumerate() {
        atuple[player] = a;
        let next = apply_to_register(applied, el, player, qs.dims());
        acc += tuple_value(game, qs, tuple, player + 1, &next, atuple);
    }
    acc
}

pub(crate) fn rational_to_f64(w: &crate::gamecore::game::Weight) -> f64 {
    use num::ToPrimitive;
    w.to_f64().expect("weight fits in f64")
}

/// The permutation-register symmetrization: given any strategy for a
/// symmetric game, builds a strategy with identical per-player POVMs and a
/// permutation-invariant state achieving the same value. Each player's new
/// register is C^r (x) H; the flag register selects which original player's
/// measurement to apply.
pub fn symmetrize(game: &TableGame, qs: &QuantumStrategy) -> Result<QuantumStrategy> {
    if !game.is_symmetric() {
        return Err(Error::InvalidGame("symmetrization needs a symmetric game".into()));
    }
    let r = game.players();
    let d = *qs.dims().iter().max().expect("at least one player");
    // pad all registers to dimension d
    let padded_state = pad_state(qs.state(), qs.dims(), d);
    let dims_pad = vec![d; r];
    let new_d = r * d;
    let new_dims = vec![new_d; r];
    let total_new = total_dim(&new_dims);
    if total_new > QUANTUM_DIM_CAP {
        return Err(Error::TooLarge(total_new as u128, QUANTUM_DIM_CAP as u128));
    }

    // |Psi'> = (1/sqrt(r!)) sum_sigma (x)_i |sigma(i)> (x) |Psi^sigma>
    // where register i of Psi^sigma holds register sigma(i) of Psi.
    let perms = permutations(r);
    let norm = (perms.len() as f64).sqrt();
    let mut state = CVec::zeros(total_new);
    for sigma in &perms {
        // Psi^sigma[j_1..j_r] = Psi[k_1..k_r] with k_t = j_{sigma^{-1}(t)},
        // i.e. register i of the new state reads register sigma(i) of Psi:
        // that is permute_registers with perm[i] = sigma[i].
        let psi_sigma = permute_registers(&padded_state, &dims_pad, sigma);
        // embed with flags: index of player i is sigma(i)*d + j_i
        for flat in 0..total_dim(&dims_pad) {
            // decompose flat over (d,..,d)
            let mut rem = flat;
            let mut jidx = vec![0usize; r];
            for i in (0..r).rev() {
                jidx[i] = rem % d;
                rem /= d;
            }
            let mut new_flat = 0usize;
            for i in 0..r {
                new_flat = new_flat * new_d + (sigma[i] * d + jidx[i]);
            }
            state[new_flat] += psi_sigma[flat] / c(norm, 0.0);
        }
    }

    // Controlled measurement, identical for every player:
    // A'^a_q = sum_t |t><t| (x) P_{t,q}^a  (P padded to dimension d).
    let nq = game.questions().len();
    let na = game.answers().len();
    let mut shared: Vec<Vec<CMat>> = Vec::with_capacity(nq);
    for q in 0..nq {
        let mut per_answer = Vec::with_capacity(na);
        for a in 0..na {
            let mut m = CMat::zeros(new_d, new_d);
            for (t, orig_dim) in qs.dims().iter().enumerate() {
                let el = pad_op(&qs.povm(t, q)[a], *orig_dim, d, a == 0);
                for i in 0..d {
                    for j in 0..d {
                        m[(t * d + i, t * d + j)] = el[(i, j)];
                    }
                }
            }
            per_answer.push(m);
        }
        shared.push(per_answer);
    }
    let povms = vec![shared; r];
    QuantumStrategy::new(new_dims, state, povms)
}

fn pad_state(state: &CVec, dims: &[usize], d: usize) -> CVec {
    if dims.iter().all(|&x| x == d) {
        return state.clone();
    }
    let r = dims.len();
    let new_dims = vec![d; r];
    let mut out = CVec::zeros(total_dim(&new_dims));
    let old_strides: Vec<usize> = (0..r)
        .map(|i| dims[i + 1..].iter().product())
        .collect();
    for flat in 0..state.len() {
        let mut rem = flat;
        let mut new_flat = 0usize;
        for i in 0..r {
            let idx = rem / old_strides[i];
            rem %= old_strides[i];
            new_flat = new_flat * d + idx;
        }
        out[new_flat] = state[flat];
    }
    out
}

/// Pads an operator to dimension d. The padding subspace is dead weight for
/// the state, but POVM completeness still has to hold there, so the whole
/// slack identity goes to answer 0.
fn pad_op(op: &CMat, orig: usize, d: usize, absorb_slack: bool) -> CMat {
    if orig == d {
        return op.clone();
    }
    let mut out = CMat::zeros(d, d);
    for i in 0..orig {
        for j in 0..orig {
            out[(i, j)] = op[(i, j)];
        }
    }
    if absorb_slack {
        for i in orig..d {
            out[(i, i)] = c(1.0, 0.0);
        }
    }
    out
}
