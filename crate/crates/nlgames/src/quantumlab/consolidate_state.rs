//! The success operator of a two-player symmetric projective strategy and
//! the consolidation state transformer (Id - R)^(x r) |Psi> / z with its
//! residual report.

use crate::error::{Error, Result};
use crate::gamecore::TableGame;
use crate::linalg::{apply_to_register, psd_sqrt, CMat};
use crate::quantumlab::metrics::{pairwise_form, trace_rho};
use crate::quantumlab::state::MultiRegisterState;
use crate::quantumlab::submeas::SubMeasurement;
use num::ToPrimitive;

/// Single-register operator X with 0 <= X <= Id such that
/// <Psi| X (x) Id |Psi> tracks the success probability of the symmetric
/// projective strategy P in a two-player symmetric game:
/// X = E_{(q,q')} sum_{accepted (a,a')} sqrt(P_q^a) P_{q'}^{a'} sqrt(P_q^a).
///
/// Experimental: only the two-player construction is provided.
pub fn success_operator_2p(game: &TableGame, per_question: &[SubMeasurement]) -> Result<CMat> {
    if game.players() != 2 {
        return Err(Error::InvalidGame("success operator is built for 2-player games".into()));
    }
    if per_question.len() != game.questions().len() {
        return Err(Error::InvalidStrategy("one measurement per question".into()));
    }
    let dim = per_question[0].dim();
    let sqrts: Vec<Vec<CMat>> = per_question
        .iter()
        .map(|m| m.elements().iter().map(psd_sqrt).collect())
        .collect();
    let mut x = CMat::zeros(dim, dim);
    for (tuple, w) in game.dist() {
        let wf = w.to_f64().expect("weight fits in f64");
        let (q, qp) = (tuple[0], tuple[1]);
        for a in 0..per_question[q].len() {
            for ap in 0..per_question[qp].len() {
                if game.predicate().accepts(tuple, &[a, ap]) {
                    let s = &sqrts[q][a];
                    x += (s * per_question[qp].element(ap) * s) * crate::linalg::c(wf, 0.0);
                }
            }
        }
    }
    Ok(x)
}

/// Report on the renormalized state |Phi> = (Id-R)^(x r)|Psi> / z.
#[derive(Debug, Clone)]
pub struct ConsolidationStateReport {
    /// delta = <R, Id - R>_Psi, the projectivity defect of R.
    pub delta: f64,
    /// || (Id-R)^(x r)|Psi> - (Id^(r-1) (x) (Id-R))|Psi> ||^2
    pub residual: f64,
    /// The residual's guaranteed ceiling r^2 delta.
    pub residual_bound: f64,
    /// z^2, the squared norm before renormalization.
    pub z_squared: f64,
    /// The guaranteed floor 1 - <R, Id> - 3 r sqrt(delta).
    pub z_squared_floor: f64,
}

/// Applies (Id - R) to every register and renormalizes; reports the
/// one-register-versus-all-registers residual and the norm bounds.
pub fn consolidated_state(
    state: &MultiRegisterState,
    r_op: &CMat,
) -> Result<(MultiRegisterState, ConsolidationStateReport)> {
    let d = state.dim();
    if r_op.nrows() != d || r_op.ncols() != d {
        return Err(Error::DimensionMismatch { expected: d, got: r_op.nrows() });
    }
    let r = state.registers();
    let id = crate::linalg::identity(d);
    let comp = &id - r_op;

    let delta = {
        let v = pairwise_form(r_op, &comp, state)?;
        if v.im.abs() > 1e-9 {
            return Err(Error::InvariantViolated(format!("imaginary residue {}", v.im)));
        }
        v.re.max(0.0)
    };

    let dims = state.dims();
    let mut all = state.vector().clone();
    for reg in 0..r {
        all = apply_to_register(&all, &comp, reg, &dims);
    }
    let last_only = apply_to_register(state.vector(), &comp, r - 1, &dims);
    let residual = (&all - &last_only).norm_squared();

    let z2 = all.norm_squared();
    let z = z2.sqrt();
    if z < 1e-12 {
        return Err(Error::InvariantViolated("transformed state vanishes".into()));
    }
    let phi = MultiRegisterState::new(r, d, all / crate::linalg::c(z, 0.0))?;
    let tr_r = trace_rho(r_op, state)?.re;
    let report = ConsolidationStateReport {
        delta,
        residual,
        residual_bound: (r * r) as f64 * delta,
        z_squared: z2,
        z_squared_floor: 1.0 - tr_r - 3.0 * r as f64 * delta.sqrt(),
    };
    Ok((phi, report))
}
