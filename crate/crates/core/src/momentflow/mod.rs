//! Eigenvector moment flow.
//!
//! Configurations place `n` indistinguishable particles on the sites of a
//! window of eigenvalue indices. Under Dyson Brownian motion, conditional
//! moments `f(η) = E[∏_k z_k^{2η_k}/a(2η_k) | λ]` evolve by the jump process
//!
//! ```text
//! ∂_s f(η) = Σ_{i≠j} 2η_i(1 + 2η_j)/(N(λ_i − λ_j)²) · (f(η^{i,j}) − f(η))
//! ```
//!
//! where `η^{i,j}` moves one particle from `i` to `j`. This module builds that
//! generator on a finite window, evolves observables and transition kernels,
//! and provides the perfect-matching observable, the continuum kernel `p_t`
//! and the exponential identity relating the flow to the resolvent.

mod config;
mod evolve;
mod expo;
mod generator;
mod kernel;
mod observables;

pub use config::{enumerate, enumerate_with_cap, ConfigSpace, ParticleConfiguration, Window, DEFAULT_SPACE_CAP};
pub use evolve::{evolve, evolve_path, flat, flat_av, transition_kernel, EvolveOptions, Evolution, KernelRow};
pub use expo::{exponential_identity, ExpoCheck};
pub use generator::{build_generator, Boundary, FlowGenerator, Range};
pub use kernel::{apply_k, kernel_cauchy_approx, kernel_pt, SemicircleQuadrature};
pub use observables::{
    a_table, double_factorial_odd, holder_check, matching_count, matching_observable, matching_value,
    moment_observable, moment_value, perfect_matchings, reversible_measure, HolderCheck, OverlapMatrix,
};
