//! Fourier-Galerkin approximation of the space-homogeneous Boltzmann
//! equation for Maxwell molecules on a periodized velocity box.
//!
//! The crate provides the spectral representation ([`SpectralField`],
//! [`SpectralTransform`]), a moment-constrained L² projection
//! ([`conservative_project`]), the fast spectral collision operator
//! ([`collide_fast`]) with its conservative and equilibrium-preserving
//! variants, an RK4 integrator and the diagnostics used by the experiments.

pub mod collision;
pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod field;
pub mod grid;
pub mod moments;
pub mod parallel;
pub mod projection;
pub mod transform;

pub use collision::{
    angular_kernel_quadrature, apply_scheme, collide_direct, collide_fast, collide_fast_with,
    phi_r2, precompute_kernel, KernelDecomposition, SchemeEvaluator, SchemeVariant,
};
pub use error::{Result, SpectralError};
pub use rustfft::num_complex::Complex64;
pub use field::SpectralField;
pub use grid::{Mode, VelocityGrid, LAMBDA};
pub use moments::{maxwellian, maxwellian_field, moments, MomentBasis, MomentVector};
pub use parallel::Execution;
pub use projection::{
    build_constraint_operator, conservative_project, exact_moments_gaussian_mixture,
    ConstraintOperator, GaussianComponent,
};
pub use transform::{forward_transform, inverse_transform, SpectralTransform};
