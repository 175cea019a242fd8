//! Exact solution in the damping basis.
//!
//! The star state is expanded as `Σ c μⁿ₀ ⊗ Oₘ` with `Oₘ` products of
//! single-spin damping eigenoperators. Permutation symmetry of the periphery
//! lets every `Oₘ` with the same occupation counts share one coefficient, so
//! the generator acts on `4·C(N+3, 3)` numbers instead of `4^(N+1)`.

mod classes;
mod coefficients;
mod generator;
mod propagate;
mod trajectory;

pub use classes::{class_count, enumerate_classes, ClassIndex, DampingClass};
pub use coefficients::{
    initial_coefficients, project_full, reconstruct_full, reduced_state, CoefficientVector, POSITIVITY_TOL,
};
pub use generator::{build_generator, GeneratorMatrix};
pub use propagate::propagate;
pub use trajectory::EngineDynamics;
