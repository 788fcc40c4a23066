//! Two-state self-stabilizing token ring, modelled classically and as quantum
//! circuits.
//!
//! - [`ring`]: guard/move semantics under a central demon, an explicit-state
//!   model checker for closure and convergence, and demon-driven traces.
//! - [`qsim`]: exact statevector simulation with marginals, seeded sampling,
//!   reduced density matrices and von Neumann entropy.
//! - [`synth`]: circuit construction (uniform init, GHZ, W, per-node rule
//!   fragments, serialized schedules) and the line-based circuit text format.
//! - [`verify`]: brute-force classical oracle, distribution comparison,
//!   entanglement reports and transient-fault experiments.
//! - [`cli`]: command handlers behind the `qring` binary.
//!
//! Bitstrings are always written in ket order: the leftmost character is
//! `x_0`, which is also the most significant bit of a basis index.

pub mod cli;
pub mod error;
pub mod qsim;
pub mod ring;
pub mod synth;
pub mod verify;

pub use error::{Error, Result};
