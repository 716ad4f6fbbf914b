//! The reduction pipeline: 3-SAT to the game G_phi, binarization through
//! per-pair QUADEQ instances, oracularization with confuse-question
//! repetition, the three-player XOR gadget with folding, and the Fourier
//! decoding utilities.

mod config;
mod decode;
mod fourier;
mod gphi;
mod manifest;
mod oracular;
mod quadeqify;
mod xor;

pub use config::ReductionConfig;
pub use decode::{decode_assignment, satisfied_fraction};
pub use fourier::{fourier_transform, fourier_transform_ops, DecodedStrategy, FourierTable};
pub use gphi::{build_game_gphi, GphiGame, GphiReport};
pub use manifest::{PipelineManifest, StageRecord};
pub use oracular::{
    oracularize, parity_triple_game, repeat_with_confuse, BinaryTripleGame, BitStrategy,
    EnumerableTripleGame, FnBit, OracularizedGame, OrcAnswer, OrcAux, OrcHonest, OrcQuestion,
    RepAnswer, RepAux, RepHonest, RepQuestion, RepSlot, RepeatedGame, TableTripleGame,
    TripleRound,
};
pub use quadeqify::{binarize_game, predicate_to_quadeq, BinarizedGame, PredicateQuadeq};
pub use xor::{fold_function, xor_gadget, FoldedFunctionQuestion, SignedFunction, XorAux, XorGadget, XorHonest};
