//! Distillation protocols as binary hypothesis tests: measure-and-prepare
//! channels built from tests, the adjoint map back to tests, universal
//! permutation-symmetric states, and explicit threshold constructions.

pub mod channel;
pub mod threshold;
pub mod universal;

pub use channel::{
    apply_channel, channel_from_test, choi_adjoint, choi_apply, clip_to_test,
    distillation_error, test_from_channel, type1_error, verify_theorem1, BinaryTest,
    DistillerChannel, Theorem1Report,
};
pub use threshold::{threshold_a_n, threshold_test, type2_error, ThresholdParams};
pub use universal::{universal_state, UniversalState};
