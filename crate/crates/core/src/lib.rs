//! Floquet theory for linear differential equations with quaternion-valued
//! coefficients.
//!
//! Quaternion matrices are handled through their complex adjoint `χ_A`, a
//! `2n × 2n` complex matrix that turns products into products. Eigenvalues,
//! determinants, exponentials and logarithms are all computed there and mapped
//! back.

pub mod error;
pub mod expr;
pub mod floquet;
pub mod functions;
pub mod hill;
pub mod integrator;
pub mod linalg;
pub mod matrix;
pub mod quaternion;
pub mod spectrum;
pub mod system;

#[cfg(test)]
mod testutil;

pub use error::{Error, Result};
pub use functions::{expm, logm, logm_with_diagnostics, spectral_map_check, LogBranch, Logarithm};
pub use matrix::{AdjointMatrix, QMatrix};
pub use quaternion::{qexp, similar, standardize, ComplexPair, Quaternion};
pub use spectrum::{right_eigenvector, standard_eigenvalues, SpectrumEntry, StandardSpectrum};
pub use expr::{parse, Expr};
pub use integrator::{integrate, liouville_residual, IntegratorConfig, Method, Trajectory};
pub use system::MatrixSpec;
pub use floquet::{classify_constant, classify_periodic, normal_form, FloquetData, StabilityKind, StabilityVerdict};
pub use hill::{analyze, HillProblem, HillReport};
