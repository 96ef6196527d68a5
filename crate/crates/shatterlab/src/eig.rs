//! Dense complex eigendecomposition and singular values.
//!
//! The eigensolver is Schur-based: nalgebra reduces to Hessenberg form and
//! runs QR iteration, yielding A = Q T Q* with T upper triangular. Right
//! eigenvectors come from back-substitution on T; left eigenvectors are the
//! normalized columns of V^{-H}, paired by index. Desk scale (n <= 512), so
//! O(n^3) everywhere.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

/// `|w_j^* v_j|` below this is treated as numerically defective downstream.
pub const DEFECT_THRESHOLD: f64 = 1e-13;

const SCHUR_MAX_SWEEPS_PER_N: usize = 100;

/// Full spectral data: eigenvalues with unit right/left eigenvectors paired
/// by index, plus the achieved residual `max_j ||A v_j - lambda_j v_j||`.
#[derive(Debug, Clone)]
pub struct EigDecomposition {
    pub eigenvalues: Vec<Complex64>,
    /// Unit right eigenvectors, column j for eigenvalue j.
    pub right_vectors: DMatrix<Complex64>,
    /// Unit left eigenvectors (columns of V^{-H}, normalized), column j paired
    /// with eigenvalue j so that w_j^* A = lambda_j w_j^*.
    pub left_vectors: DMatrix<Complex64>,
    /// `w_j^* v_j` per index; its modulus is the reciprocal eigenvalue
    /// condition number. Near zero means defective.
    pub alignments: Vec<Complex64>,
    pub residual: f64,
}

/// Schur form A = Q T Q* with T exactly upper triangular.
pub struct SchurForm {
    pub q: DMatrix<Complex64>,
    pub t: DMatrix<Complex64>,
}

pub fn schur(a: &DenseMatrix) -> Result<SchurForm> {
    let n = a.n();
    if n == 0 {
        return Err(Error::domain("n", "matrix must be at least 1x1"));
    }
    let max_iter = SCHUR_MAX_SWEEPS_PER_N * n;
    let schur = a
        .to_na()
        .try_schur(f64::EPSILON, max_iter)
        .ok_or(Error::NonConvergence {
            what: "QR iteration (Schur form)",
            iterations: max_iter,
        })?;
    let (q, t) = schur.unpack();
    Ok(SchurForm { q, t })
}

/// Right eigenvector of an upper-triangular `t` for the eigenvalue at
/// diagonal position `k`, by back-substitution. Tiny pivots are floored so
/// defective matrices still produce a (nearly parallel) vector.
fn triangular_right_vector(t: &DMatrix<Complex64>, k: usize) -> Vec<Complex64> {
    let n = t.nrows();
    let lambda = t[(k, k)];
    let scale: f64 = (0..n).map(|i| t[(i, i)].norm()).fold(1.0, f64::max);
    let floor = f64::EPSILON * scale * n as f64;
    let mut y = vec![Complex64::ZERO; n];
    y[k] = Complex64::ONE;
    for i in (0..k).rev() {
        let mut s = Complex64::ZERO;
        for j in (i + 1)..=k {
            s += t[(i, j)] * y[j];
        }
        let mut d = t[(i, i)] - lambda;
        if d.norm() < floor {
            d = if d == Complex64::ZERO {
                Complex64::new(floor, 0.0)
            } else {
                d / d.norm() * floor
            };
        }
        y[i] = -s / d;
    }
    y
}

/// Eigendecomposition with paired left/right unit eigenvectors.
pub fn eig(a: &DenseMatrix) -> Result<EigDecomposition> {
    let n = a.n();
    let SchurForm { q, t } = schur(a)?;
    let eigenvalues: Vec<Complex64> = (0..n).map(|i| t[(i, i)]).collect();

    let mut v = DMatrix::<Complex64>::zeros(n, n);
    for k in 0..n {
        let y = triangular_right_vector(&t, k);
        let yv = nalgebra::DVector::from_vec(y);
        let mut col = &q * yv;
        let norm = col.norm();
        col /= Complex64::new(norm, 0.0);
        v.set_column(k, &col);
    }

    // Left vectors from the inverse-adjoint of V. The pivot floor above keeps
    // V invertible in floating point even for exactly defective input.
    let v_inv = v.clone().lu().try_inverse().ok_or_else(|| {
        Error::RankDeficient("eigenvector matrix is numerically singular".into())
    })?;
    let mut w = v_inv.adjoint();
    let mut alignments = Vec::with_capacity(n);
    for k in 0..n {
        let norm = w.column(k).norm();
        let mut col = w.column(k).into_owned();
        col /= Complex64::new(norm, 0.0);
        w.set_column(k, &col);
        alignments.push(w.column(k).dotc(&v.column(k)));
    }

    let a_na = a.to_na();
    let mut residual: f64 = 0.0;
    for k in 0..n {
        let r = &a_na * v.column(k) - v.column(k) * eigenvalues[k];
        residual = residual.max(r.norm());
    }

    Ok(EigDecomposition {
        eigenvalues,
        right_vectors: v,
        left_vectors: w,
        alignments,
        residual,
    })
}

/// All singular values, sorted nonincreasing.
pub fn singular_values(a: &DenseMatrix) -> Vec<f64> {
    let svd = a.to_na().svd(false, false);
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    s
}

/// Largest singular value.
pub fn operator_norm(a: &DenseMatrix) -> f64 {
    if a.n() == 0 {
        return 0.0;
    }
    singular_values(a)[0]
}

pub fn operator_norm_na(a: &DMatrix<Complex64>) -> f64 {
    a.clone().svd(false, false).singular_values.max()
}

/// `sigma_{n-m}(A - zI)`.
pub fn shifted_sigma(a: &DenseMatrix, z: Complex64, m: usize) -> Result<f64> {
    let n = a.n();
    if m >= n {
        return Err(Error::domain("m", format!("m = {m} must be < n = {n}")));
    }
    let s = singular_values(&a.shifted(z));
    Ok(s[n - 1 - m])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{sample_complex_gaussian, stream, Domain};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_dense(n: usize, seed: u64) -> DenseMatrix {
        let mut rng = stream(seed, Domain::Probe, 0);
        DenseMatrix::from_fn(n, |_, _| sample_complex_gaussian(&mut rng)).unwrap()
    }

    fn sorted_by_re(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        v
    }

    #[test]
    fn eig_diagonal() {
        let a = DenseMatrix::from_diagonal(&[c(1.0, 0.0), c(2.0, 0.0)]).unwrap();
        let d = eig(&a).unwrap();
        let e = sorted_by_re(d.eigenvalues.clone());
        assert!((e[0] - c(1.0, 0.0)).norm() < 1e-12);
        assert!((e[1] - c(2.0, 0.0)).norm() < 1e-12);
        // V = I up to phase.
        for k in 0..2 {
            let col = d.right_vectors.column(k);
            let m: f64 = col.iter().map(|x| x.norm()).fold(0.0, f64::max);
            assert!((m - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn eig_rotation_by_hand() {
        // [[0, 1], [-1, 0]] has characteristic polynomial z^2 + 1: eigenvalues i, -i.
        let a = DenseMatrix::from_row_major(
            2,
            &[c(0.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0), c(0.0, 0.0)],
        )
        .unwrap();
        let d = eig(&a).unwrap();
        let mut ims: Vec<f64> = d.eigenvalues.iter().map(|z| z.im).collect();
        ims.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((ims[0] + 1.0).abs() < 1e-12 && ims[1] - 1.0 < 1e-12);
        assert!(d.eigenvalues.iter().all(|z| z.re.abs() < 1e-12));
    }

    #[test]
    fn eig_jordan_block_flags_defective() {
        let a =
            DenseMatrix::from_row_major(2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)])
                .unwrap();
        let d = eig(&a).unwrap();
        for z in &d.eigenvalues {
            assert!(z.norm() < 1e-7);
        }
        for al in &d.alignments {
            assert!(al.norm() < DEFECT_THRESHOLD, "|w*v| = {}", al.norm());
        }
    }

    #[test]
    fn eig_left_right_residuals_random() {
        let a = random_dense(20, 5);
        let nrm = operator_norm(&a);
        let d = eig(&a).unwrap();
        assert!(d.residual <= 1e-8 * nrm);
        let am = a.to_na();
        for k in 0..20 {
            let w = d.left_vectors.column(k);
            let r = w.adjoint() * &am - w.adjoint() * d.eigenvalues[k];
            assert!(r.norm() <= 1e-8 * nrm, "left residual {}", r.norm());
        }
    }

    #[test]
    fn singular_values_identity_and_nilpotent() {
        assert!(singular_values(&DenseMatrix::identity(5))
            .iter()
            .all(|s| (s - 1.0).abs() < 1e-12));
        let a =
            DenseMatrix::from_row_major(2, &[c(0.0, 0.0), c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)])
                .unwrap();
        let s = singular_values(&a);
        assert!((s[0] - 2.0).abs() < 1e-12 && s[1].abs() < 1e-12);
    }

    #[test]
    fn singular_values_match_gram_eigenvalues() {
        // Oracle: sigma_i^2 are the eigenvalues of A* A.
        let a = random_dense(4, 9);
        let gram = DenseMatrix::from_na(&(a.to_na().adjoint() * a.to_na())).unwrap();
        let mut gram_eigs: Vec<f64> = eig(&gram).unwrap().eigenvalues.iter().map(|z| z.re).collect();
        gram_eigs.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let s = singular_values(&a);
        for (si, ge) in s.iter().zip(&gram_eigs) {
            assert!((si - ge.max(0.0).sqrt()).abs() < 1e-8);
        }
    }

    #[test]
    fn operator_norm_examples() {
        assert!((operator_norm(&DenseMatrix::identity(6)) - 1.0).abs() < 1e-12);
        assert_eq!(operator_norm(&DenseMatrix::zeros(4)), 0.0);
        let a = DenseMatrix::from_diagonal(&[c(3.0, 0.0), c(0.0, 4.0)]).unwrap();
        assert!((operator_norm(&a) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn operator_norm_equals_largest_singular_value() {
        let a = random_dense(12, 13);
        let s = singular_values(&a);
        assert!((operator_norm(&a) - s[0]).abs() <= 1e-10 * s[0]);
    }

    #[test]
    fn unitary_from_qr_has_unit_singular_values() {
        let a = random_dense(10, 21);
        let qr = a.to_na().qr();
        let q = DenseMatrix::from_na(&qr.q()).unwrap();
        for s in singular_values(&q) {
            assert!((s - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn shifted_sigma_examples() {
        let a = DenseMatrix::from_diagonal(&[c(1.0, 0.0), c(4.0, 0.0), c(9.0, 0.0)]).unwrap();
        assert!(shifted_sigma(&a, c(4.0, 0.0), 0).unwrap() < 1e-12);
        let i5 = DenseMatrix::identity(5);
        for m in 0..5 {
            assert!((shifted_sigma(&i5, Complex64::ZERO, m).unwrap() - 1.0).abs() < 1e-12);
        }
        assert!(shifted_sigma(&i5, Complex64::ZERO, 5).is_err());
        // m = 1 matches the full SVD of the shifted matrix.
        let r = random_dense(5, 33);
        let z = c(0.3, -0.2);
        let s = singular_values(&r.shifted(z));
        assert!((shifted_sigma(&r, z, 1).unwrap() - s[3]).abs() < 1e-12);
    }
}
