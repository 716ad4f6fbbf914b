//! Assignment decoding: the boolean assignment a polynomial implicitly
//! carries on the variable grid points.

use crate::polyalg::MultiPoly;
use crate::protocols::{Cnf, SatParams};

/// Z(g): variable x gets g evaluated at its grid point, mapped to a boolean
/// by nonzero -> true (honest polynomials take values in {0, 1} there).
pub fn decode_assignment(g: &MultiPoly, params: &SatParams) -> Vec<bool> {
    (0..params.n)
        .map(|v| !g.evaluate(&params.var_point(v)).expect("dims match").is_zero())
        .collect()
}

/// kappa(g): the fraction of clauses satisfied by the decoded assignment.
pub fn satisfied_fraction(g: &MultiPoly, params: &SatParams, cnf: &Cnf) -> f64 {
    let assignment = decode_assignment(g, params);
    let sat = cnf.clauses.iter().filter(|c| c.satisfied_by(&assignment)).count();
    sat as f64 / cnf.clauses.len() as f64
}
