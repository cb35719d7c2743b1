//! Overshoot, undershoot and last-maximum laws at first passage for
//! spectrally positive compound Poisson processes with negative drift.
//!
//! The crate computes the ladder data of such a process on a grid, evaluates
//! the finite-level joint passage law and its asymptotic forms as the level
//! grows, simulates first passage exactly, and checks a discrete random-walk
//! identity by enumeration.

// Negated float comparisons are used on purpose so that NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod ladder;
pub mod laws;
pub mod measures;
pub mod process;
pub mod quad;
pub mod rw_oracle;
pub mod simulate;
pub mod stats;

pub use error::{Error, Result};
