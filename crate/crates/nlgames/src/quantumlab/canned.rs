//! Reference states and strategies.

use crate::gamecore::QuantumStrategy;
use crate::linalg::{c, CMat, CVec};
use crate::quantumlab::state::MultiRegisterState;

/// (|0..0> + |1..1>)/sqrt(2) on r qubit registers.
pub fn ghz_state(r: usize) -> MultiRegisterState {
    let total = 1usize << r;
    let mut v = CVec::zeros(total);
    let s = 1.0 / 2f64.sqrt();
    v[0] = c(s, 0.0);
    v[total - 1] = c(s, 0.0);
    MultiRegisterState::new(r, 2, v).expect("GHZ is a unit vector")
}

/// The EPR pair, GHZ on two registers.
pub fn epr_state() -> MultiRegisterState {
    ghz_state(2)
}

fn projector(theta: f64) -> CMat {
    let v = CVec::from_vec(vec![c(theta.cos(), 0.0), c(theta.sin(), 0.0)]);
    &v * v.adjoint()
}

/// Rank-1 qubit measurement at angle theta: outcome 0 projects onto
/// cos(theta)|0> + sin(theta)|1>, outcome 1 onto the orthogonal state.
fn angle_povm(theta: f64) -> Vec<CMat> {
    let p0 = projector(theta);
    let p1 = projector(theta + std::f64::consts::FRAC_PI_2);
    vec![p0, p1]
}

/// The optimal CHSH strategy: EPR pair, first player measures at angles
/// 0 and pi/4, second at pi/8 and -pi/8. Evaluates to 1/2 + sqrt(2)/4.
pub fn chsh_optimal_strategy() -> QuantumStrategy {
    use std::f64::consts::PI;
    let state = epr_state();
    let povms = vec![
        vec![angle_povm(0.0), angle_povm(PI / 4.0)],
        vec![angle_povm(PI / 8.0), angle_povm(-PI / 8.0)],
    ];
    QuantumStrategy::new(vec![2, 2], state.vector().clone(), povms)
        .expect("canned CHSH strategy is well-formed")
}
