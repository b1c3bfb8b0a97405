//! Semi-quantum nonlocal games at desk scale.
//!
//! A semi-quantum nonlocal game replaces the classical questions of a
//! conventional nonlocal game with quantum question states drawn from two
//! ensembles. This crate provides the full numerical pipeline around that
//! idea:
//!
//! - [`matcore`]: dense complex matrices, Kronecker products, partial traces,
//!   and a cyclic-Jacobi Hermitian eigendecomposition;
//! - [`qobjects`]: density matrices, POVMs, ensembles, Kraus channels, and
//!   standard constructions (maximally entangled states, Werner family,
//!   Heisenberg-Weyl unitaries, PPT test, seeded samplers);
//! - [`games`]: game definitions, joint conditional distributions, and payoff
//!   evaluation for fixed measurement strategies;
//! - [`optimize`]: see-saw optimization of the game value over local POVMs
//!   with dual-certified single-side subproblems, plus exact brute force for
//!   classical games;
//! - [`losr`]: local operations and shared randomness maps, discard-and-prepare
//!   constructions, and monotonicity checks;
//! - [`appendixlab`]: tetrahedral question states, Bell answer measurements,
//!   informationally complete question ensembles, and the teleportation-based
//!   state reconstruction that links game statistics back to the shared state;
//! - [`witness`]: witness games that separate an NPT two-qubit state from all
//!   separable states by game value.

pub mod appendixlab;
pub mod config;
pub mod error;
pub mod games;
pub mod losr;
pub mod matcore;
pub mod optimize;
pub mod qobjects;
pub mod witness;

pub use config::Tolerances;
pub use error::{Error, Result};
pub use matcore::{CMatrix, DimVector, C64};
