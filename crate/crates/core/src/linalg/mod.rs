//! Dense complex Hermitian linear algebra for bipartite many-copy systems:
//! tensor structure, partial transpose, permutation actions, spectral
//! functions, and canonical state constructors.

pub mod layout;
pub mod op;
pub mod perm;
pub mod spectral;
pub mod states;
pub mod textio;

pub use layout::{digits_to_index, index_to_digits, BipartitionLayout};
pub use op::{partial_transpose_matrix, reorder_factors, CMat, Cpx, HermitianOperator};
pub use perm::{all_permutations, permutation_unitary, twirl};
pub use spectral::{
    daleckii_krein, dominance_projector, eigh, eigh_matrix, frac_power, log2_on_support,
    min_eigenvalue, psd_check, trace_norm, trace_norm_general, SpectralDecomposition, PSD_TOL,
    SUPPORT_CUTOFF,
};
pub use states::{
    fidelity, isotropic, max_entangled, maximally_mixed, pure_from_schmidt, random_density,
    random_product_state, swap_operator, DensityMatrix,
};
pub use textio::{parse_matrix_text, parse_state_spec, write_matrix_text};
