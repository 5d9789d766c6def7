//! Desk-scale numerical laboratory for open-quantum-system dynamics.
//!
//! The crate builds finite system+environment Hamiltonians, evolves joint
//! states exactly by eigendecomposition, extracts reduced dynamical maps,
//! tests their divisibility, propagates projected (relevant/irrelevant)
//! components with an explicit memory kernel, and tracks coherence
//! observables. Everything is generic over the real scalar via [`Real`];
//! concrete `f64` aliases live at the crate root.

pub mod coherence;
pub mod divisibility;
pub mod dynamics;
pub mod error;
pub mod expansions;
pub mod linalg;
pub mod model;
pub mod projection;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;

pub use coherence::{
    coherence_l1, coherence_trace, decoheres, einselect, population_drift,
    transition_probability, CoherenceTrace, PopulationDrift, TransitionProbability,
};
pub use divisibility::{
    assess_divisibility, commutator_diagnostics, composition_residual, gamma_block_decompose,
    markov_timescales, mixed_state_divisibility_residual, nonlocal_decomposition,
    rotate_to_env_eigenbasis,
    state_divisibility_residual, DivisibilityReport, GammaBlock, RotatedModel,
    TimescaleEstimate, Verdict, DIVISIBLE_TOL, NON_DIVISIBLE_TOL,
};
pub use dynamics::{
    apply_map, env_correlation, evolve_joint, markov_condition_check, reduced_state,
    super_matrix, Evolution, InitialState, SuperMap, TimeGrid,
};
pub use expansions::{
    analytic_reduced_element, boson_polynomial, boson_polynomial_conj, kinematic_factors,
    omega_env, omega_env_normalized, zassenhaus_error, zassenhaus_product, zassenhaus_terms,
    KinematicFactors, ZassenhausTerms,
};
pub use linalg::{
    check_density, check_hermitian, commutator, commutator_norm, expm, frobenius,
    hermiticity_deviation, identity, kron, kron_vec, partial_trace_env, partial_trace_sys,
    trace, unitary_from_hamiltonian, CMat, CVec, HermitianEigen, HilbertSpec, Propagator,
    HERMITICITY_TOL,
};
pub use model::{
    boson_ops, build_counterexample_model, build_custom_model, build_dephasing_model,
    build_jsquared_model, spin_ops, two_j_from_float, HamiltonianTriple, Mode, ModelParams,
};
pub use projection::{
    build_projectors, memory_term, propagate_projected, time_local_check, ProjectedTrajectory,
    ProjectorPair,
};

/// Complex matrix at the default `f64` precision.
pub type Matrix = linalg::CMat<f64>;
/// Complex vector at the default `f64` precision.
pub type Vector = linalg::CVec<f64>;
/// Hamiltonian triple at the default `f64` precision.
pub type Model = model::HamiltonianTriple<f64>;
/// Initial joint state at the default `f64` precision.
pub type State = dynamics::InitialState<f64>;
/// Time grid at the default `f64` precision.
pub type Grid = dynamics::TimeGrid<f64>;
/// Dynamical super-matrix at the default `f64` precision.
pub type Map = dynamics::SuperMap<f64>;

/// Single-precision variants for quick scans.
pub type Matrix32 = linalg::CMat<f32>;
pub type Vector32 = linalg::CVec<f32>;
pub type Model32 = model::HamiltonianTriple<f32>;
