//! Pseudospectral simulation of the bi-laplacian Schrödinger equation
//!
//! ```text
//! i ∂ₜψ = Δ²ψ + 𝒩(x, t, |ψ|) ψ
//! ```
//!
//! on a periodic box, together with the phase-space cutoff calculus and the
//! scattering diagnostics built on top of it: free channel wave operators,
//! the propagation ledger, and the kernel, commutator, interaction and
//! velocity decay probes.
//!
//! Time starts at `t = 1`. Every free flow that would be `e^{itH₀}` on the
//! line is realised as `e^{i(t−1)H₀}` so that the configured data is ψ(1).

pub mod dynamics;
pub mod error;
pub mod harness;
pub mod phase;
pub mod scattering;
pub mod spectral;

pub use error::{Error, Result};
pub use num_complex::Complex64;
