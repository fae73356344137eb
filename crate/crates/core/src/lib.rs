//! Exact diagonalization and interaction-quench dynamics of the quantum
//! sunburst model: a transverse-field Ising ring (or a disordered XXZ ring)
//! coupled through `σˣ Σˣ` bonds to a handful of isolated qubits.
//!
//! The crate is organised bottom-up:
//!
//! * [`operators`] builds Hamiltonians and the global parity operator as dense
//!   matrices from Pauli strings.
//! * [`spectral`] diagonalizes them, resolves parity sectors and computes
//!   nearest-neighbour spacing-ratio statistics.
//! * [`dynamics`] prepares initial states, propagates them exactly in the
//!   post-quench eigenbasis and evaluates entropies, IPR and coherence.
//! * [`theory`] holds the closed-form predictions the numerics are checked
//!   against.
//! * [`experiments`] drives configuration-based reproduction runs and writes
//!   CSV output with a manifest sidecar.
//!
//! Scalar-only code (ratio statistics, time statistics, all of [`theory`]) is
//! generic over [`Scalar`]; matrix code works in double precision through the
//! aliases below.

pub mod dynamics;
pub mod error;
pub mod experiments;
mod linalg;
pub mod operators;
pub mod scalar;
pub mod seeding;
pub mod spectral;
pub mod theory;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Working real scalar for matrix code.
pub type Real = f64;
/// Working complex scalar for state amplitudes.
pub type Complex = num_complex::Complex<Real>;
/// Dense real matrix (Hamiltonians, eigenvector bases).
pub type Matrix = nalgebra::DMatrix<Real>;
/// Dense complex matrix (reduced density matrices, embedded local operators).
pub type ComplexMatrix = nalgebra::DMatrix<Complex>;
/// Limiting regime in working precision.
pub type Regime = theory::LimitingRegime<Real>;
