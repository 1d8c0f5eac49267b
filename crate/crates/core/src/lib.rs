//! Ladder operators for non self-adjoint Hamiltonians on a truncated,
//! dressed Fock space.
//!
//! A [`space::DressedSpace`] fixes a non-orthonormal basis `phi_n = V e_n`
//! with dual `psi_n = V^{-†} e_n`. Triples `(H, T, S)` are classified by the
//! commutator identities they satisfy ([`ladder`]), their eigenfamilies are
//! built by repeated raising and cross-checked against an eigensolver, and
//! bi-coherent states are assembled from the families ([`bicoherent`]).
//! [`quon`], [`dgha`] and [`graphene`] provide concrete models.

pub mod bicoherent;
pub mod dgha;
pub mod error;
pub mod graphene;
pub mod ladder;
pub mod quon;
pub mod scalar;
pub mod space;

/// Vectors and matrices in the public API are nalgebra types.
pub use nalgebra;

pub use error::{BicoherentError, DghaError, EigError, GrapheneError, LadderError, QuonError, SpaceError};
pub use ladder::{EigenFamilyPair, LadderTriple};
pub use scalar::{JsonComplex, C64};
pub use space::{make_space, Basis, Comparison, DressedSpace, DressingSpec, Operator};
