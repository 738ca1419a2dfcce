//! Design and exact simulation of dynamical-decoupling pulse sequences for
//! spin qubits coupled to an XXZ spin-½ chain.
//!
//! * [`sequence`]: toggling-frame sign histories, moment constraints, the
//!   multi-start interval solver, and the sequence catalog (plus UDD/QDD).
//! * [`model`]: chain, coupling and control Hamiltonians on the joint
//!   qubit ⊗ chain space, and the bath eigensolver.
//! * [`dynamics`]: state-vector evolution under ideal or finite-width
//!   pulses, reduced densities and observables, stroboscopic runs.
//! * [`free_fermion`]: Jordan–Wigner determinant oracle for Ising coupling.
//! * [`experiments`]: experiment specs, runners, CSV and manifests.
//!
//! The sequence algebra is generic over [`scalar::Scalar`]; the aliases
//! below fix the scalar for the common cases.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod free_fermion;
pub mod kv;
pub mod model;
pub mod scalar;
pub mod sequence;
mod vecops;

pub use error::{Error, Result};
pub use scalar::{Rational, Real, Scalar};

/// Double-precision sequence, the type the simulator consumes.
pub type Sequence = sequence::DdSequence<f64>;
/// Single-precision sequence.
pub type SequenceF32 = sequence::DdSequence<f32>;
/// Exact rational sequence for closed-form interval sets.
pub type ExactSequence = sequence::DdSequence<Rational>;
/// Double-precision sign history.
pub type History = sequence::SignHistory<f64>;
/// Exact rational sign history.
pub type ExactHistory = sequence::SignHistory<Rational>;
