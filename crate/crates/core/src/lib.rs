//! Numerical tools for Liouville systems
//!
//! ```text
//!     Δu_i + Σ_j a_ij e^{u_j} = 0          (entire solutions on the plane)
//!     Δu_i + Σ_j ρ_j a_ij (h_j e^{u_j} / ∫ h_j e^{u_j} − 1) = 0   (mean field, closed surface)
//! ```
//!
//! The crate is organised bottom-up:
//!
//! * [`matrix`] stores the symmetric coefficient matrix `A`, inverts it and
//!   decides the structural hypotheses (H1)/(H2) together with their
//!   consequences on the entries.
//! * [`energy`] evaluates the quadratic forms `Λ_J`, classifies parameters
//!   `ρ` against the critical hypersurfaces, builds points of the mass set
//!   `E` and evaluates the Leray–Schauder degree.
//! * [`radial`] shoots radial entire solutions from prescribed heights,
//!   extrapolates their total masses and checks the Pohozaev identity.
//! * [`mean_field`] solves the mean-field system on the unit flat torus with
//!   a spectral discretisation and a damped Picard iteration.
//!
//! Data-parallel loops (sweeps, batch property checks, per-component
//! transforms) go through [`par`], which uses rayon when the `parallel`
//! feature is enabled and falls back to plain iterators otherwise.

// Negated comparisons are deliberate: they reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod energy;
pub mod matrix;
pub mod mean_field;
pub mod par;
pub mod radial;
pub mod sampling;

pub use energy::{
    classify_rho, construct_e_point, degree, degree_for_rho, in_e, in_gamma, lambda_j,
    Classification, Degree, EPoint, EnergyError, MassVector, RhoPoint, SurfaceKind, SurfaceSpec,
    ENTIRE, MEANFIELD,
};
pub use matrix::{
    check_h1, check_h2, check_hypotheses, check_lemma21, decompose_blocks, is_irreducible,
    BlockDecomposition, CoefficientMatrix, Condition, Failure, HypothesisReport, MatrixError,
};
pub use par::Execution;
