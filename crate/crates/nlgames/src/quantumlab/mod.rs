//! Small-Hilbert-space machinery: permutation-invariant states, POVMs and
//! sub-measurements, the state-induced bilinear form and norm, the
//! consistency parameters, and robust-triple metrics.

mod canned;
mod consolidate_state;
mod metrics;
pub mod randops;
mod state;
mod submeas;

pub use canned::{chsh_optimal_strategy, epr_state, ghz_state};
pub use consolidate_state::{consolidated_state, success_operator_2p, ConsolidationStateReport};
pub use metrics::{
    closeness_from_consistency, consistency_metrics, pairwise_form, pairwise_form_at,
    robust_triple_metrics, state_norm, ClosenessReport, ConsistencyMetrics, RobustTripleMetrics,
};
pub use state::MultiRegisterState;
pub use submeas::{RobustTripleSpec, SubMeasurement};
