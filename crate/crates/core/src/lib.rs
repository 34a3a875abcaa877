//! Finite-element laboratory for the inverse obstacle problem of coupled elliptic systems.
//!
//! The crate solves
//!
//! ```text
//! -Δy + a y + b z = 0,   -Δz + A y + B z = 0   in Ω \ D̄,
//! y = φ, z = ψ on ∂Ω,    y = z = 0 on ∂D,
//! ```
//!
//! extracts boundary fluxes on an observation arc γ (or values on an interior disk ω),
//! and provides the tools built around that forward map: domain-variation experiments,
//! adjoint shape sensitivities, iterative obstacle reconstruction, Carleman-weight
//! checks and a one-dimensional non-uniqueness construction.

pub mod carleman;
pub mod error;
pub mod fem;
pub mod geometry;
pub mod linalg;
pub mod observation;
mod par;
pub mod reconstruction;
pub mod shape_gradient;
pub mod stability;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
