//! Desk-scale numerical laboratory for dilute Bose gases.
//!
//! The crate assembles the standard cast of objects used in the rigorous
//! analysis of Bose-Einstein condensates — truncated Fock spaces, modified
//! creation/annihilation operators, the excitation map, generalized
//! Bogoliubov transformations, zero-energy scattering solutions and the
//! Gross-Pitaevskii functional — as concrete finite-dimensional matrices and
//! grid functions, small enough that every operator identity and every
//! inequality can be checked numerically rather than taken on faith.
//!
//! Module map:
//! - [`fock`]: occupation-number bases, a/a†, the √((N−𝒩)/N)-weighted b/b†,
//!   the excitation map U_N and matrix-function actions.
//! - [`meanfield`]: the translation-invariant mean-field Hamiltonian on a
//!   torus, low-energy spectral windows, exponential moments of the
//!   excitation number and the commutator/bootstrap machinery.
//! - [`scattering`]: radial zero-energy and Neumann eigenvalue solvers,
//!   scattering length extraction, decay bounds for w_ℓ = 1 − f_ℓ.
//! - [`gp`]: Gross-Pitaevskii energy evaluation and constrained gradient-flow
//!   minimization on 1D and 3D-radial grids.
//! - [`kernel`]: the correlation kernel η built from w_ℓ, a high-pass filter
//!   and the condensate profile, with Hilbert-Schmidt norm and scaling checks.
//! - [`bogoliubov`]: e^{B(η)} on truncated Fock spaces, its approximate
//!   action, remainder operators and conjugation bounds.
//!
//! All operators are complex-valued sparse matrices over deterministic,
//! lexicographically ordered bases, so repeated runs are bit-reproducible.

pub mod bogoliubov;
pub mod error;
pub mod fock;
pub mod gp;
pub mod kernel;
pub mod linalg;
pub mod meanfield;
pub mod scattering;
pub mod sparse;

pub use error::CoreError;

/// Convenience alias used throughout: all operator entries are complex even
/// though most physical inputs are real. Keeping the scalar complex keeps
/// adjoints honest.
pub type C64 = num_complex::Complex64;
