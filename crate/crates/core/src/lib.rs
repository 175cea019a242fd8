//! Exact open-system dynamics of a central qubit coupled to a star of
//! dissipative peripheral spins, and the trace-distance (BLP)
//! non-Markovianity of the resulting reduced dynamics.
//!
//! The crate is `no_std` and only needs `alloc`. IO, configuration files and
//! parallel sweeps live in the companion `spinstar` crate.
//!
//! Conventions used throughout:
//!
//! * Single-spin basis ordering is `(|+⟩, |−⟩)` with `|+⟩` the excited state,
//!   `σᶻ|±⟩ = ±|±⟩` and `σ⁻|+⟩ = |−⟩`.
//! * Bloch angles follow `|ψ⟩ = cos(θ/2)|−⟩ + e^{iφ} sin(θ/2)|+⟩`, so `θ = 0` is
//!   the ground state and sits on the *north* pole. Bloch vectors returned by
//!   [`QubitState::bloch_vector`] use the same orientation (`z = ρ₋₋ − ρ₊₊`).
//! * The Hamiltonian is `Σⱼ εⱼ σᶻⱼ + J Σⱼ [(1+λ) S₀ˣSⱼˣ + (1−λ) S₀ʸSⱼʸ]` with
//!   `S = σ/2`, `ε₀ = 0` and `εⱼ = Δ` for every peripheral spin.

#![no_std]
#![allow(clippy::needless_range_loop)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod blp;
pub mod damping;
pub mod dynamics;
pub mod engine;
mod error;
pub mod kernels;
pub mod linalg;
mod mat2;
pub mod oracle;
mod params;
mod state;

pub use error::Error;
pub use mat2::ComplexMat2;
pub use num_complex::Complex64 as C64;
pub use params::{ModelParams, Spectrum};
pub use state::{trace_distance, BlochAngles, QubitState};

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Default absolute tolerance for state validity checks.
pub const STATE_TOL: f64 = 1e-10;
