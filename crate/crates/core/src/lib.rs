//! Heralded preparation of bright Schrödinger-cat states by degenerate
//! parametric down-conversion.
//!
//! A pump mode in a coherent state drives a signal mode through the
//! interaction `a² b† + a†² b`. The total-quanta number `n_s + 2 n_p` is
//! conserved, so the two-mode Hamiltonian splits into independent tridiagonal
//! blocks which are diagonalized once and reused for exact propagation. A
//! zero-photon measurement on the pump leaves the signal in a state that is,
//! after a rotation and an anti-squeeze, almost exactly an even cat state.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub use error::{Error, Result};

mod csvfmt;

pub mod cli;
pub mod conditional;
pub mod cvops;
pub mod dynamics;
pub mod feasibility;
pub mod fits;
pub mod hilbert;
pub mod numkit;
pub mod oracle;
