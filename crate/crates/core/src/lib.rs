//! Numerical laboratory for deformed Wigner matrices `D + √t·W`.
//!
//! The crate is organised around the pieces needed to study bulk
//! eigenvectors of a diagonal potential perturbed by mean-field noise:
//!
//! - [`freeconv`]: the self-consistent Stieltjes transform `m_t`, the
//!   limiting density and quantiles, and the Cauchy-shaped variance profile.
//! - [`ensembles`]: Wigner samplers, deterministic potentials and the
//!   deformation `D + √t·W`.
//! - [`dynamics`]: matrix Brownian / Ornstein–Uhlenbeck flows, the Dyson
//!   eigenvalue/eigenvector SDE, the semicircle characteristics and the
//!   resolvent flow.
//! - [`momentflow`]: the eigenvector moment flow on particle configurations
//!   and its observables, plus the continuum kernel `p_t`.
//! - [`verify`]: Monte Carlo experiments producing [`verify::ExperimentReport`]s.
//!
//! Shared building blocks ([`matrix`], [`rng`], [`stats`], [`semicircle`],
//! [`io`]) are public so that the command-line runner and the benchmarks can
//! use them directly.

pub mod dynamics;
pub mod ensembles;
pub mod error;
pub mod freeconv;
pub mod io;
pub mod matrix;
pub mod momentflow;
pub mod rng;
pub mod semicircle;
pub mod stats;
pub mod verify;

pub use error::{Error, Result};
pub use num_complex::Complex64;

pub use ensembles::{EnsembleSpec, EntryLaw, PotentialKind};
pub use freeconv::{ComplexPoint, DiagonalPotential, FreeConvolution, SolverParams};
pub use matrix::{Beta, SpectralSample, SymmetricMatrix};
pub use rng::SeedStream;
pub use verify::{Experiment, ExperimentConfig, ExperimentReport};
