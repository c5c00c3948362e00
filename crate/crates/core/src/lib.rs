//! Exact laboratory for n-partite connected correlation functions (Ursell
//! functions) of small qubit systems.
//!
//! The crate is organised around a handful of independent pieces:
//!
//! * [`partitions`] streams set partitions and bipartitions and provides the
//!   combinatorial coefficients (Möbius factor, Bell and Stirling numbers).
//! * [`quantum`] holds dense state vectors, observables, Hamiltonians and
//!   exact time evolution.
//! * [`correlators`] computes connected correlators three independent ways
//!   (partition sum, subtraction recursion, finite-difference generating
//!   function).
//! * [`states`] builds GHZ, product, graph/cluster states and evaluates
//!   Pauli expectations through stabilizer algebra.
//! * [`closed_form`] contains analytic oracles: Bernoulli numbers for GHZ
//!   correlators and the XX-chain matrix product state.
//! * [`geometry`] computes the critical distance of a set of supports and
//!   the multipartite Lieb-Robinson envelope, and calibrates `(c2, v)`.
//! * [`experiments`] drives the file-based batch runs used by the `ursell`
//!   binary.

pub mod closed_form;
pub mod correlators;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod partitions;
pub mod quantum;
pub mod states;

pub use error::{Error, Result};
pub use num_complex::Complex64;
