//! Numerical laboratory for macroscopic observables on quantum spin chains.
//!
//! A chain window `[-n, n]` carries `2n + 1` copies of a `d`-dimensional site
//! space. For a family of one-site Hermitian generators `A_1..A_m`, the
//! spatial means `H_i = (2n+1)^{-1} sum_j shift_j(A_i)` almost commute (their
//! commutators decay like `1/(2n+1)`), and the crate builds and audits the
//! objects that quantify and exploit that: free-energy / entropy duality for
//! the achievable means, sub-level contour ladders and mesh discretizations of
//! the entropy domain, spectral box counting with rank rates, and exactly
//! commuting approximants produced by sequential joint clustering.
//!
//! Modules:
//! - [`algebra`]: validated Hermitian matrices, eigendecomposition, site
//!   embeddings, functional calculus.
//! - [`macro_obs`]: mean observables, interval interactions and their means,
//!   coarse-graining into block averages.
//! - [`thermo`]: free energy `p`, Gibbs states, the concave entropy function
//!   `mu` with domain classification, contour ladders, mesh points.
//! - [`spectra`]: spectral box projections, rank rates, minimal-rank
//!   projector sizes (`beta`) for product states.
//! - [`approx`]: commuting models from sequential joint clustering, error
//!   reports, convergence experiments, mesh snapping.

pub mod algebra;
pub mod approx;
pub mod error;
pub mod macro_obs;
pub mod spectra;
pub mod thermo;

pub use algebra::{
    apply_function, commutator_i, commutator_norm, embed_at_site, embed_on_block, hermitian_eig,
    operator_norm, pauli_x, pauli_y, pauli_z, window_dim, window_sites, HermitianOperator,
    SpectralDecomposition,
};
pub use approx::{
    approximation_error, convergence_experiment, sequential_joint_cluster, snap_to_mesh,
    ApproximationError, ClusterParams, CommutingModel, ConvergenceRow, ModelCell,
};
pub use error::{Error, Result};
pub use macro_obs::{
    build_interaction_means, build_mean_observables, coarse_grain, commutator_decay_profile,
    interaction_norm, CoarseGrained, DecayRow, Interaction, MeanObservableSet, ObservableFamily,
};
pub use spectra::{
    beta_min_rank, box_projection, mean_entropy_product, rank_rate, BetaRecord, BoxKind,
    BoxProjection, BoxSpec, ProductState, RankRateRecord,
};
pub use thermo::{
    contour_ladder, dom_membership, entropy_mu, entropy_mu_oracle, free_energy, gibbs_state,
    mesh_points, ContourLadder, DomMembership, DualSolverSettings, EntropyProfile,
    FreeEnergySurface, MeshPointSet, MuEval,
};

/// Numerical tolerances and size caps used across the crate.
///
/// Each constant states what it gates; the values are part of the crate's
/// contract and are exercised directly by the test suite.
pub mod tol {
    /// Max-abs hermiticity deviation accepted (and silently symmetrized) at
    /// operator construction; larger violations are rejected.
    pub const HERMITICITY: f64 = 1e-12;

    /// Relative eigendecomposition quality: unitarity defect and
    /// reconstruction residual must stay below `EIG_RELATIVE * dim`.
    pub const EIG_RELATIVE: f64 = 1e-10;

    /// Hard cap on dense matrix dimension (`d^(2n+1)` for window builders).
    /// At this size one dense complex matrix occupies 4 GiB; anything larger
    /// is out of scope for the dense desk-scale algorithms implemented here.
    pub const MAX_DENSE_DIM: usize = 16384;

    /// Convergence tolerance on the entropy dual solver: finite `mu` values
    /// are within this of the true infimum for interior points.
    pub const DUAL_VALUE: f64 = 1e-8;

    /// Boundary inclusion slop for closed/open spectral boxes.
    pub const BOX_BOUNDARY: f64 = 1e-12;
}
