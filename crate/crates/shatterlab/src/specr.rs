//! Spectral-radius estimation with mixed forward-backward error semantics.
//!
//! The estimator perturbs the input, `A = M + (delta/n) N` with N the sparse
//! Bernoulli-Gaussian noise matrix, then returns `||A^k b||^{1/k}` for a
//! Gaussian probe vector b. The result is a (1 +/- eps)-accurate spectral
//! radius of the nearby matrix A (backward error at most delta), not of M
//! itself; the realized perturbation norm is recorded so the backward-error
//! budget can be certified a posteriori.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::eig::{operator_norm, schur};
use crate::error::{Error, Result};
use crate::matrix::{DenseMatrix, SparseMatrix};
use crate::noise::{sample_sparse_noise, NoiseSpec};
use crate::rng::{sample_complex_gaussian_vector, stream, Domain};

/// Parameters of one spectral-radius estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecrConfig {
    pub rho: f64,
    pub eps: f64,
    pub delta: f64,
    pub seed: u64,
    #[serde(default)]
    pub k_override: Option<usize>,
}

impl SpecrConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.rho <= 1.0) {
            return Err(Error::domain("rho", "must lie in (0, 1]"));
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(Error::domain("eps", "must lie in (0, 1)"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::domain("delta", "must lie in (0, 1)"));
        }
        if self.k_override == Some(0) {
            return Err(Error::domain("k_override", "must be positive"));
        }
        Ok(())
    }
}

/// Result of one estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecrOutcome {
    pub estimate: f64,
    pub k_used: usize,
    pub nnz_perturbed: usize,
    /// Realized `||(delta/n) N||` (dense operator norm).
    pub perturbation_norm: f64,
    /// Cumulative `log ||A^j b||` after each of the k steps.
    pub log_norm_trace: Vec<f64>,
}

/// `log ||A^k b||` by per-step renormalization: the iterate is rescaled to
/// unit norm after every multiply and the logs accumulate, so norms up to
/// `exp(+/-4000)` and beyond never overflow a double. Also returns the
/// cumulative trace after each step.
pub fn power_norm(a: &SparseMatrix, b: &[Complex64], k: usize) -> Result<(f64, Vec<f64>)> {
    if k == 0 {
        return Err(Error::domain("k", "must be at least 1"));
    }
    if b.len() != a.n() {
        return Err(Error::DimensionMismatch {
            expected: a.n(),
            got: b.len(),
        });
    }
    let norm_b: f64 = b.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    if norm_b == 0.0 {
        return Err(Error::domain("b", "must be a nonzero vector"));
    }
    let mut x: Vec<Complex64> = b.iter().map(|v| v / norm_b).collect();
    let mut total = norm_b.ln();
    let mut trace = Vec::with_capacity(k);
    for _ in 0..k {
        let y = a.matvec(&x)?;
        let ny: f64 = y.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        if ny == 0.0 {
            total = f64::NEG_INFINITY;
            trace.push(total);
            return Ok((total, trace));
        }
        total += ny.ln();
        trace.push(total);
        for (xi, yi) in x.iter_mut().zip(&y) {
            *xi = yi / ny;
        }
    }
    Ok((total, trace))
}

/// The step count `k = ceil(2 (log n / log(n rho)) log(n ||M|| / delta) / eps)`.
pub fn specr_k(n: usize, norm_m: f64, cfg: &SpecrConfig) -> Result<usize> {
    let nrho = n as f64 * cfg.rho;
    if nrho <= 1.0 {
        return Err(Error::domain("rho", format!("n*rho = {nrho} must exceed 1")));
    }
    let k = (2.0 * ((n as f64).ln() / nrho.ln()) * (n as f64 * norm_m / cfg.delta).ln()
        / cfg.eps)
        .ceil();
    Ok((k as usize).max(1))
}

/// Estimate the spectral radius of a matrix within backward error `delta`.
///
/// Samples `N` at sparsity rho, forms `A = M + (delta/n) N`, draws a standard
/// complex Gaussian probe b, and returns `(||A^k b|| / ||b||)^{1/k}` (so
/// k = 1 gives exactly `||A b|| / ||b||`). Requires the hypothesis
/// `||M|| >= 1`.
pub fn specr_estimate(m: &SparseMatrix, cfg: &SpecrConfig) -> Result<SpecrOutcome> {
    cfg.validate()?;
    let n = m.n();
    let norm_m = operator_norm(&m.to_dense());
    if norm_m < 1.0 {
        return Err(Error::domain(
            "m",
            format!("need operator norm at least 1, got {norm_m}"),
        ));
    }
    let k = match cfg.k_override {
        Some(k) => k,
        None => specr_k(n, norm_m, cfg)?,
    };
    let noise_spec = NoiseSpec::new(n, cfg.rho, cfg.delta / n as f64, cfg.seed)?;
    let noise = sample_sparse_noise(&noise_spec)?;
    let perturbation_norm = operator_norm(&noise.to_dense());
    let a = m.add(&noise)?;
    let mut rng = stream(cfg.seed, Domain::GaussianVector, 0);
    let b = sample_complex_gaussian_vector(&mut rng, n);
    let log_norm_b = b.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt().ln();
    let (log_norm, trace) = power_norm(&a, &b, k)?;
    Ok(SpecrOutcome {
        estimate: ((log_norm - log_norm_b) / k as f64).exp(),
        k_used: k,
        nnz_perturbed: a.nnz(),
        perturbation_norm,
        log_norm_trace: trace,
    })
}

/// The realized perturbed matrix for a config, for oracle comparisons.
pub fn realized_matrix(m: &SparseMatrix, cfg: &SpecrConfig) -> Result<SparseMatrix> {
    cfg.validate()?;
    let noise_spec = NoiseSpec::new(m.n(), cfg.rho, cfg.delta / m.n() as f64, cfg.seed)?;
    m.add(&sample_sparse_noise(&noise_spec)?)
}

/// Exact spectral radius `max_j |lambda_j|` via the Schur form (test oracle).
pub fn exact_spectral_radius(a: &DenseMatrix) -> Result<f64> {
    let form = schur(a)?;
    Ok((0..a.n())
        .map(|i| form.t[(i, i)].norm())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{mix_seed, Domain};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sparse_scalar(n: usize, v: Complex64) -> SparseMatrix {
        SparseMatrix::from_rows(n, (0..n).map(|i| vec![(i, v)]).collect()).unwrap()
    }

    #[test]
    fn power_norm_identity_is_log_norm_b() {
        let a = SparseMatrix::identity(5);
        let b = vec![c(3.0, 0.0), c(0.0, 4.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        let (log_norm, trace) = power_norm(&a, &b, 7).unwrap();
        assert!((log_norm - 5.0f64.ln()).abs() < 1e-12);
        assert_eq!(trace.len(), 7);
    }

    #[test]
    fn power_norm_scalar_matrix() {
        let a = sparse_scalar(4, c(2.0, 0.0));
        let mut b = vec![Complex64::ZERO; 4];
        b[0] = Complex64::ONE;
        let (log_norm, _) = power_norm(&a, &b, 10).unwrap();
        assert!((log_norm - 10.0 * 2.0f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn power_norm_no_overflow_at_large_exponent() {
        let a = sparse_scalar(3, c(10.0, 0.0));
        let mut b = vec![Complex64::ZERO; 3];
        b[1] = Complex64::ONE;
        let (log_norm, trace) = power_norm(&a, &b, 400).unwrap();
        assert!((log_norm - 400.0 * 10.0f64.ln()).abs() < 1e-7);
        assert!((log_norm - 921.034).abs() < 0.01);
        assert!(trace.iter().all(|t| t.is_finite()));
    }

    #[test]
    fn power_norm_rejects_bad_input() {
        let a = SparseMatrix::identity(3);
        assert!(power_norm(&a, &vec![Complex64::ZERO; 3], 5).is_err());
        assert!(power_norm(&a, &vec![Complex64::ONE; 3], 0).is_err());
        assert!(power_norm(&a, &vec![Complex64::ONE; 2], 5).is_err());
    }

    #[test]
    fn power_norm_nilpotent_hits_zero() {
        let a = SparseMatrix::from_rows(2, vec![vec![(1, Complex64::ONE)], vec![]]).unwrap();
        let b = vec![Complex64::ONE, Complex64::ZERO];
        let (log_norm, _) = power_norm(&a, &b, 3).unwrap();
        assert_eq!(log_norm, f64::NEG_INFINITY);
    }

    #[test]
    fn exact_radius_examples() {
        let d = DenseMatrix::from_diagonal(&[c(1.0, 0.0), c(-3.0, 0.0), c(0.0, 2.0)]).unwrap();
        assert!((exact_spectral_radius(&d).unwrap() - 3.0).abs() < 1e-12);
        let j = DenseMatrix::from_row_major(2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)])
            .unwrap();
        assert!(exact_spectral_radius(&j).unwrap() < 1e-7);
    }

    #[test]
    fn exact_radius_dominates_mean_eigenvalue() {
        use crate::rng::{sample_complex_gaussian, stream};
        for t in 0..20 {
            let mut rng = stream(50, Domain::Probe, t);
            let a = DenseMatrix::from_fn(6, |_, _| sample_complex_gaussian(&mut rng)).unwrap();
            let trace: Complex64 = (0..6).map(|i| a.get(i, i)).sum();
            assert!(exact_spectral_radius(&a).unwrap() >= trace.norm() / 6.0 - 1e-10);
        }
    }

    #[test]
    fn scalar_matrix_estimate_brackets_oracle() {
        let m = sparse_scalar(64, c(2.0, 0.0));
        let cfg = SpecrConfig {
            rho: 0.25,
            eps: 0.1,
            delta: 1e-3,
            seed: 7,
            k_override: None,
        };
        let out = specr_estimate(&m, &cfg).unwrap();
        let oracle = exact_spectral_radius(&realized_matrix(&m, &cfg).unwrap().to_dense()).unwrap();
        assert!(
            out.estimate >= (1.0 - cfg.eps) * oracle && out.estimate <= (1.0 + cfg.eps) * oracle,
            "estimate {} oracle {oracle}",
            out.estimate
        );
        assert!(out.perturbation_norm <= cfg.delta);
    }

    #[test]
    fn huge_k_converges_to_oracle() {
        let m = sparse_scalar(32, c(2.0, 0.0));
        let base = SpecrConfig {
            rho: 0.5,
            eps: 0.1,
            delta: 1e-3,
            seed: 9,
            k_override: None,
        };
        let k10 = 10 * specr_k(32, 2.0, &base).unwrap();
        let cfg = SpecrConfig {
            k_override: Some(k10),
            ..base
        };
        let out = specr_estimate(&m, &cfg).unwrap();
        let oracle = exact_spectral_radius(&realized_matrix(&m, &cfg).unwrap().to_dense()).unwrap();
        assert!(
            (out.estimate - oracle).abs() / oracle < 0.01,
            "estimate {} oracle {oracle}",
            out.estimate
        );
    }

    #[test]
    fn jordan_block_tracks_realized_radius_not_input() {
        // Nilpotent Jordan block: spr(M) = 0, yet ||M^k||^{1/k} = 1 for k < n.
        // The estimate follows the realized perturbed matrix instead.
        let n = 32;
        let m = SparseMatrix::from_rows(
            n,
            (0..n)
                .map(|i| if i + 1 < n { vec![(i + 1, Complex64::ONE)] } else { vec![] })
                .collect(),
        )
        .unwrap();
        let cfg = SpecrConfig {
            rho: 0.5,
            eps: 0.2,
            delta: 1e-3,
            seed: 17,
            k_override: None,
        };
        let out = specr_estimate(&m, &cfg).unwrap();
        let oracle = exact_spectral_radius(&realized_matrix(&m, &cfg).unwrap().to_dense()).unwrap();
        assert!(oracle > 0.3, "realized radius {oracle}");
        assert!(
            out.estimate >= (1.0 - cfg.eps) * oracle && out.estimate <= (1.0 + cfg.eps) * oracle,
            "estimate {} oracle {oracle}",
            out.estimate
        );
    }

    #[test]
    fn deterministic_replay() {
        let m = sparse_scalar(16, c(1.5, 0.0));
        let cfg = SpecrConfig {
            rho: 0.5,
            eps: 0.2,
            delta: 1e-2,
            seed: 23,
            k_override: Some(50),
        };
        let a = specr_estimate(&m, &cfg).unwrap();
        let b = specr_estimate(&m, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn median_error_shrinks_as_k_doubles() {
        // Fixed realized matrix; the probe b varies with the seed only through
        // Domain::GaussianVector, so vary seeds but pin the matrix directly.
        let m = sparse_scalar(24, c(2.0, 0.0));
        let cfg0 = SpecrConfig {
            rho: 0.5,
            eps: 0.2,
            delta: 1e-2,
            seed: 31,
            k_override: Some(1),
        };
        let a = realized_matrix(&m, &cfg0).unwrap();
        let oracle = exact_spectral_radius(&a.to_dense()).unwrap();
        let mut medians = Vec::new();
        for k in [10usize, 80, 640] {
            let mut errs: Vec<f64> = (0..21u64)
                .map(|t| {
                    let mut rng = stream(mix_seed(77, t), Domain::GaussianVector, 0);
                    let b = sample_complex_gaussian_vector(&mut rng, 24);
                    let (log_norm, _) = power_norm(&a, &b, k).unwrap();
                    ((log_norm / k as f64).exp() - oracle).abs() / oracle
                })
                .collect();
            errs.sort_by(|x, y| x.partial_cmp(y).unwrap());
            medians.push(errs[10]);
        }
        assert!(medians[0] > medians[1] && medians[1] > medians[2], "{medians:?}");
    }

    #[test]
    fn invalid_configs_rejected() {
        let m = sparse_scalar(8, c(2.0, 0.0));
        for cfg in [
            SpecrConfig { rho: 0.0, eps: 0.2, delta: 1e-3, seed: 0, k_override: None },
            SpecrConfig { rho: 0.5, eps: 1.0, delta: 1e-3, seed: 0, k_override: None },
            SpecrConfig { rho: 0.5, eps: 0.2, delta: 0.0, seed: 0, k_override: None },
            SpecrConfig { rho: 0.5, eps: 0.2, delta: 1e-3, seed: 0, k_override: Some(0) },
            // n * rho <= 1.
            SpecrConfig { rho: 0.1, eps: 0.2, delta: 1e-3, seed: 0, k_override: None },
        ] {
            assert!(specr_estimate(&m, &cfg).is_err(), "{cfg:?}");
        }
        // ||M|| < 1 violates the hypothesis.
        let small = sparse_scalar(8, c(0.5, 0.0));
        let cfg = SpecrConfig { rho: 0.5, eps: 0.2, delta: 1e-3, seed: 0, k_override: None };
        assert!(specr_estimate(&small, &cfg).is_err());
    }
}
