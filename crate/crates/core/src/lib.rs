//! Matrix-level machinery for quadratic quantum Hamiltonians.
//!
//! Canonical variables are ordered `Q = (p_1..p_N, q_1..q_N)` everywhere and
//! `ħ = 1`. The crate is organised bottom-up:
//!
//! - [`matcore`]: dense kernels (characteristic coefficients, matrix
//!   exponential, the symplectic form and symplectic-defect utilities).
//! - [`hamiltonian`]: time-dependent grand matrices `[[A, B], [Bᵀ, C]]`,
//!   coefficient schedules, presets and the one-mode `Ω²(t)` reduction.
//! - [`canonical`]: symplectic canonical transformations and their
//!   propagation in time.
//! - [`states`]: Gaussian states as mean vector plus covariance matrix.
//! - [`uncertainty`]: Robertson, Schrödinger, Heisenberg and characteristic
//!   uncertainty audits, Williamson normal form.
//! - [`io`] and [`cli`]: JSON/CSV formats and the command-line front end.

// `!(x > y)` is used on purpose so that NaN lands in the failing branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod canonical;
pub mod cli;
mod error;
pub mod hamiltonian;
pub mod io;
pub mod matcore;
pub mod states;
pub mod uncertainty;

pub use error::{Error, Result};
