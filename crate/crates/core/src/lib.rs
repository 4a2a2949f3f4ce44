//! Non-Markovian dissipative quantum walk on an extended SSH lattice.
//!
//! The walker hops between the `A` sublattice and local reservoirs (a
//! detuned `B` site plus a band of levels with power-law spectral density
//! `J(ε) ∝ ε^α` on `[0, Δ]`). The crate computes
//!
//! * k-resolved populations `ρ_A(k, t)` from a second-order memory-kernel
//!   master equation ([`gme`]),
//! * the average displacement, its long-time phase diagram and the
//!   trace-distance witness of information back-flow ([`observables`]),
//! * brute-force references by exact diagonalization ([`oracle`]).
//!
//! Sweeps over k, `(u, α)` or `Δ` run on rayon when the `parallel` feature
//! is on (the default) and always return results in input order.

// `!(x > 0.0)` is the NaN-rejecting form used for parameter checks
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod exec;
pub mod gme;
pub mod kernel;
pub mod model;
pub mod observables;
pub mod oracle;
pub mod quad;
pub mod swt;

pub use error::{Error, ErrorClass, Result};
pub use exec::Execution;
pub use gme::{KTrace, TimeGrid};
pub use kernel::SpectralLaw;
pub use model::{KGrid, WalkParams};
