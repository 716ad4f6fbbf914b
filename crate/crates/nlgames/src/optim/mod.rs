//! A small dense semidefinite-programming lab: an interior-point core over
//! real symmetric blocks, complex Hermitian problems through the 2x2 block
//! embedding, and its three clients (the consolidation SDP, the two-player
//! XOR bias SDP, and the see-saw heuristic).

mod consolidation;
mod problem;
mod seesaw;
mod solver;
mod xorbias;

pub use consolidation::{
    consolidation_sdp, improved_submeasurement, ConsolidationResult, ImprovedSubmeasurement,
};
pub use problem::{solve_sdp, ConstraintKind, IterRecord, SdpConstraint, SdpProblem, SdpSolution};
pub use seesaw::{seesaw_lower_bound, SeesawOptions, SeesawOutcome};
pub use xorbias::{xor_bias_sdp_2player, XorBiasResult};
