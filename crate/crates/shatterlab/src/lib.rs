//! Numerical laboratory for sparse-perturbation spectral regularity.
//!
//! The crate samples sparse Bernoulli-Gaussian perturbations of complex
//! matrices, measures how they regularize the spectrum (eigenvalue condition
//! numbers, eigenvalue gaps, pseudospectra, small-ball concentration), runs
//! the perturb-then-power-iterate spectral-radius estimator, and drives
//! reproducible Monte-Carlo campaigns over all of it.
//!
//! Modules, roughly bottom-up:
//! - [`error`], [`matrix`], [`rng`]: plumbing (errors, dense/CSR complex
//!   matrices, versioned counter-based stream derivation);
//! - [`eig`]: complex Schur/eigendecomposition/SVD kernels;
//! - [`noise`]: the sparse noise model and its K parameter;
//! - [`diagnostics`]: condition numbers, gaps, and the deterministic
//!   inequalities tying them together;
//! - [`pseudospectrum`]: sigma-min grids and pseudospectral area;
//! - [`concentration`]: Levy small-ball estimates on the sphere;
//! - [`specr`]: the spectral-radius algorithm;
//! - [`experiments`]: Monte-Carlo campaigns;
//! - [`mmio`]: Matrix Market file I/O.

pub mod concentration;
pub mod diagnostics;
pub mod eig;
pub mod error;
pub mod experiments;
pub mod matrix;
pub mod mmio;
pub mod noise;
pub mod pseudospectrum;
pub mod rng;
pub mod specr;

pub use error::{Error, Result};
pub use matrix::{ComplexScalar, DenseMatrix, SparseMatrix};
