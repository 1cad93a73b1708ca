//! Null-control of 1D heat evolutions with controls supported on
//! measurable sets.
//!
//! The library has three layers:
//!
//! * **Propagation of smallness** ([`analytic`], [`sets`]): constructive
//!   certificates `‖f‖ ≤ N · data^θ · M^{1-θ}` bounding an analytic
//!   function on a ball by its average over a measurable subset, built
//!   from Hadamard three-circle chains and an exact polynomial
//!   interpolation bound.
//! * **Spectral observability** ([`spectral`], [`observability`]):
//!   Dirichlet eigenbases for `e'' + ρ(x) ω² e = 0` (piecewise-constant
//!   ρ, exact transfer matrices), Gram forms of low-frequency mode sums
//!   restricted to a measurable set ω, and the observability constant
//!   `C(μ) = 1/λ_min` with its exponential-in-μ growth rate.
//! * **Control synthesis** ([`control`], [`simulate`]): the iterative
//!   low-frequency construction — dyadic stages, each killing all modes
//!   below a doubling cutoff via a minimal-norm Gramian solve, followed
//!   by free decay — with exact per-mode propagation and a
//!   Crank–Nicolson cross-check.
//!
//! Run the examples for guided tours (`cargo run --example null_control`),
//! or the `nullcontrol` binary for CSV-producing experiment drivers.

pub mod analytic;
pub mod cli;
pub mod config;
pub mod control;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod observability;
pub mod quad;
pub mod sets;
pub mod simulate;
pub mod spectral;

pub use error::{Error, Result};
