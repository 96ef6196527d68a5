//! Sparse Bernoulli-Gaussian perturbation sampler.
//!
//! Each of the n^2 entries is independently present with probability `rho`;
//! present entries are `scale * g` with g a standard complex Gaussian
//! (`E|g|^2 = 1`). One ChaCha8 stream per row, with the Bernoulli mask and the
//! Gaussian values drawn from the same stream in fixed row-major order, so the
//! output is a deterministic function of the seed under any parallel schedule.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{DenseMatrix, SparseMatrix};
use crate::rng::{sample_complex_gaussian, stream, Domain};

/// Parameters of the sparse complex-Gaussian perturbation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    pub n: usize,
    pub rho: f64,
    pub scale: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(n: usize, rho: f64, scale: f64, seed: u64) -> Result<Self> {
        let spec = NoiseSpec { n, rho, scale, seed };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::domain("n", "must be positive"));
        }
        if !(self.rho > 0.0 && self.rho <= 1.0) {
            return Err(Error::domain(
                "rho",
                format!("sparsity must lie in (0, 1], got {}", self.rho),
            ));
        }
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(Error::domain(
                "scale",
                format!("must be positive and finite, got {}", self.scale),
            ));
        }
        Ok(())
    }
}

/// The tail-exponent parameter `K = 2 log(n) / log(n rho)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KParam {
    pub value: f64,
}

pub fn k_param(n: usize, rho: f64) -> Result<KParam> {
    let nrho = n as f64 * rho;
    if nrho <= 1.0 {
        return Err(Error::domain(
            "rho",
            format!("n*rho = {nrho} must exceed 1"),
        ));
    }
    Ok(KParam {
        value: 2.0 * (n as f64).ln() / nrho.ln(),
    })
}

/// Expected nonzero count of the noise matrix, `n^2 rho`.
pub fn expected_nnz(n: usize, rho: f64) -> f64 {
    (n * n) as f64 * rho
}

/// Sample the sparse noise matrix `scale * N_g`.
pub fn sample_sparse_noise(spec: &NoiseSpec) -> Result<SparseMatrix> {
    spec.validate()?;
    let n = spec.n;
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let mut rng = stream(spec.seed, Domain::NoiseRow, i as u64);
        let mut row = Vec::new();
        for j in 0..n {
            let u: f64 = rng.random();
            if u < spec.rho {
                let g = sample_complex_gaussian(&mut rng);
                row.push((j, g * spec.scale));
            }
        }
        rows.push(row);
    }
    SparseMatrix::from_rows(n, rows)
}

/// `M + scale * N_g` for sparse `M`; the pattern is the structural union.
pub fn perturb_sparse(m: &SparseMatrix, spec: &NoiseSpec) -> Result<SparseMatrix> {
    if m.n() != spec.n {
        return Err(Error::DimensionMismatch {
            expected: spec.n,
            got: m.n(),
        });
    }
    m.add(&sample_sparse_noise(spec)?)
}

/// `M + scale * N_g` for dense `M`.
pub fn perturb_dense(m: &DenseMatrix, spec: &NoiseSpec) -> Result<DenseMatrix> {
    if m.n() != spec.n {
        return Err(Error::DimensionMismatch {
            expected: spec.n,
            got: m.n(),
        });
    }
    let noise = sample_sparse_noise(spec)?;
    let mut out = m.clone();
    for i in 0..spec.n {
        for (j, v) in noise.row(i) {
            out.set(i, j, out.get(i, j) + v)?;
        }
    }
    Ok(out)
}
