//! Optimization over the PPT cone: membership, linear maximization with
//! dual certificates, the optimal type-II error SDP, and divergence
//! minimization by Frank-Wolfe and projected descent.

pub mod basis;
pub mod fw;
pub mod ppt;
pub mod project;
pub mod sdp;

pub use fw::{min_petz_ppt, rel_ent_ppt, reverse_rel_ent_ppt, ReverseOutcome};
pub use ppt::{
    beta_opt, is_ppt, max_linear_ppt, ConicSolution, SolverDiagnostics, StateSet, StateSetKind,
};
pub use project::{min_sandwiched_ppt, project_density_ppt, random_ppt_state, SandwichedOutcome};
