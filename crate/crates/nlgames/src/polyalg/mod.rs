//! Multivariate polynomials over prime fields, plus the affine geometry
//! (subspaces, degree-4 curves) and variable-substitution maps used by the
//! referee protocols.

mod curve;
mod poly;
mod subspace;

pub use curve::{curve_through, restrict_to_curve, Curve4};
pub use poly::{
    low_degree_extension, monomial_polys_up_to, sharp_apply, sharp_apply_univariate,
    substitute_vars, substitute_vars_univariate, zero_fraction_exhaustive, zero_fraction_sampled,
    MultiPoly, SharpMap,
};
pub use subspace::{
    enumerate_points, enumerate_subspaces, restrict_to_subspace, sample_subspace, subspace_count,
    AffineSubspace, SubspaceDraw,
};
