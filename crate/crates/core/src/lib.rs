//! Radial bifurcation analysis for the singular Neumann problem
//!
//! ```text
//!     -Δu = λu - 1/u   in B(0, R) ⊂ R²,   u > 0,   ∂u/∂ν = 0 on ∂B
//! ```
//!
//! Writing `u = 1/√λ + w(|x|)` turns the problem into the radial equation
//!
//! ```text
//!     w'' + w'/ρ = f_λ(w) = -λw - λw / (1 + √λ w),   w'(0) = w'(R) = 0,
//! ```
//!
//! whose nontrivial solutions bifurcate from `(μ_k / 2, 0)` where `μ_k` is the
//! k-th radial Neumann eigenvalue of the disk.
//!
//! Layout:
//!
//! * [`specfun`]: `J0`, `J1`, their zeros, and the radial Neumann / Dirichlet spectra.
//! * [`model`]: the nonlinearity, its potential, the variable changes and the energy.
//! * [`timemap`]: the time map of a monotone hump and its rescaled form.
//! * [`shooting`]: the radial shooting integrator, nodal analysis and inequality checks.
//! * [`branch`]: Neumann solves, branch tracing, λ-bounds and the Dirichlet probe.
//! * [`cli`]: command implementations behind the `radbif` binary.
//! * [`verify`]: the invariant suite run by `radbif verify`.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod branch;
pub mod cli;
pub mod error;
pub mod model;
pub mod numeric;
pub mod shooting;
pub mod specfun;
pub mod timemap;
pub mod verify;

#[cfg(test)]
mod properties;

pub use error::{Error, Result};
pub use model::ProblemParams;
