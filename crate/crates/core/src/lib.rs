//! Post-Markovian master equation (PMME) dynamics and non-Markovianity
//! diagnostics.
//!
//! The PMME `dρ/dt = 𝓛 ∫₀ᵗ k(t′) e^{𝓛t′} ρ(t−t′) dt′` is solved two ways:
//! spectrally, by Laplace inversion in the damping basis of `𝓛`
//! ([`solver::XiSet`]), and directly, as a Volterra integro-differential
//! equation ([`solver::solve_volterra`]). The [`witnesses`] module measures
//! trace-distance backflow and CP-divisibility of the resulting maps, and
//! [`models`] holds closed-form reference solutions.

pub mod error;
pub mod kernels;
pub mod laplace;
pub mod linalg;
pub mod liouville;
pub mod models;
pub mod poly;
pub mod quad;
pub mod solver;
pub mod witnesses;

pub use error::{Error, Result};
