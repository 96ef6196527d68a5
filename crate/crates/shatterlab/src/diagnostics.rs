//! Spectral regularity diagnostics: eigenvalue condition numbers, eigenvector
//! condition number bounds, minimum eigenvalue gap, and the deterministic
//! inequalities that relate them.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize, Serializer};

use crate::eig::{eig, operator_norm, operator_norm_na, singular_values, EigDecomposition, DEFECT_THRESHOLD};
use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

/// Serialize possibly-infinite condition numbers as the string "inf".
pub(crate) fn serialize_maybe_inf<S: Serializer>(
    v: &f64,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_str("inf")
    }
}

fn serialize_maybe_inf_vec<S: Serializer>(
    v: &[f64],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for x in v {
        if x.is_finite() {
            seq.serialize_element(x)?;
        } else {
            seq.serialize_element("inf")?;
        }
    }
    seq.end()
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ComplexEntry {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for ComplexEntry {
    fn from(z: Complex64) -> Self {
        ComplexEntry { re: z.re, im: z.im }
    }
}

/// Everything the regularity analysis reports for one matrix.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralReport {
    pub eigenvalues: Vec<ComplexEntry>,
    /// kappa(lambda_j) per eigenvalue; +inf where numerically defective.
    #[serde(serialize_with = "serialize_maybe_inf_vec")]
    pub kappa_j: Vec<f64>,
    #[serde(serialize_with = "serialize_maybe_inf")]
    pub kappa_v_lower: f64,
    #[serde(serialize_with = "serialize_maybe_inf")]
    pub kappa_v_upper: f64,
    #[serde(serialize_with = "serialize_maybe_inf")]
    pub kappa_v_direct: f64,
    pub eta: f64,
    pub sigma_n: f64,
    pub sigma_n_minus_1: f64,
    pub defective: bool,
}

/// Eigenvalue condition numbers `kappa(lambda_j) = 1/|w_j^* v_j|` for unit
/// left/right eigenvectors paired by index. Entries below the defectiveness
/// threshold become the +inf sentinel.
pub fn eigenvalue_condition_numbers_from(
    decomp: &EigDecomposition,
    defect_threshold: f64,
) -> Vec<f64> {
    decomp
        .alignments
        .iter()
        .map(|al| {
            let a = al.norm();
            if a < defect_threshold {
                f64::INFINITY
            } else {
                1.0 / a
            }
        })
        .collect()
}

pub fn eigenvalue_condition_numbers(a: &DenseMatrix) -> Result<Vec<f64>> {
    Ok(eigenvalue_condition_numbers_from(&eig(a)?, DEFECT_THRESHOLD))
}

/// The sandwich around kappa_V plus one direct value:
/// lower = max_j kappa(lambda_j), upper = sqrt(n sum kappa^2),
/// direct = ||V|| ||V^-1|| for the computed unit-column eigenvector matrix.
#[derive(Debug, Clone, Copy)]
pub struct KappaVBounds {
    pub lower: f64,
    pub upper: f64,
    pub direct: f64,
}

pub fn kappa_v_bounds_from(decomp: &EigDecomposition, defect_threshold: f64) -> KappaVBounds {
    let kappas = eigenvalue_condition_numbers_from(decomp, defect_threshold);
    if kappas.iter().any(|k| !k.is_finite()) {
        return KappaVBounds {
            lower: f64::INFINITY,
            upper: f64::INFINITY,
            direct: f64::INFINITY,
        };
    }
    let n = kappas.len() as f64;
    let lower = kappas.iter().copied().fold(0.0, f64::max);
    let upper = (n * kappas.iter().map(|k| k * k).sum::<f64>()).sqrt();
    let v = &decomp.right_vectors;
    let direct = match v.clone().lu().try_inverse() {
        Some(v_inv) => operator_norm_na(v) * operator_norm_na(&v_inv),
        None => f64::INFINITY,
    };
    KappaVBounds { lower, upper, direct }
}

pub fn kappa_v_bounds(a: &DenseMatrix) -> Result<KappaVBounds> {
    Ok(kappa_v_bounds_from(&eig(a)?, DEFECT_THRESHOLD))
}

/// Minimum pairwise distance among eigenvalues, counted with multiplicity.
pub fn min_gap(eigenvalues: &[Complex64]) -> Result<f64> {
    let n = eigenvalues.len();
    if n < 2 {
        return Err(Error::domain("n", "eigenvalue gap needs n >= 2"));
    }
    let mut gap = f64::INFINITY;
    for i in 0..n {
        for j in (i + 1)..n {
            gap = gap.min((eigenvalues[i] - eigenvalues[j]).norm());
        }
    }
    Ok(gap)
}

pub fn min_eigenvalue_gap(a: &DenseMatrix) -> Result<f64> {
    min_gap(&eig(a)?.eigenvalues)
}

/// Deterministic ceiling `kappa_V(A) <= n 2^n eta^(1-n)` for `||A|| <= 1`.
pub fn exponential_kappa_bound(eta: f64, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::domain("n", "eta is undefined for n < 2"));
    }
    if !(eta > 0.0) {
        return Err(Error::domain("eta", "must be positive"));
    }
    Ok(n as f64 * 2f64.powi(n as i32) * eta.powi(1 - n as i32))
}

/// Check that the product of the two smallest `|lambda - z|` dominates
/// `sigma_n(A - zI) sigma_{n-1}(A - zI)` up to a `1e-10 ||A||^2` slack.
pub fn weyl_pair_check(a: &DenseMatrix, z: Complex64) -> Result<bool> {
    let n = a.n();
    if n < 2 {
        return Err(Error::domain("n", "pair check needs n >= 2"));
    }
    let decomp = eig(a)?;
    let mut dists: Vec<f64> = decomp.eigenvalues.iter().map(|l| (l - z).norm()).collect();
    dists.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let shifted = singular_values(&a.shifted(z));
    let tol = 1e-10 * operator_norm(a).powi(2);
    Ok(dists[0] * dists[1] >= shifted[n - 1] * shifted[n - 2] - tol)
}

/// Full spectral report for one matrix.
pub fn spectral_report(a: &DenseMatrix, defect_threshold: f64) -> Result<SpectralReport> {
    let n = a.n();
    if n < 2 {
        return Err(Error::domain("n", "spectral report needs n >= 2"));
    }
    let decomp = eig(a)?;
    let kappas = eigenvalue_condition_numbers_from(&decomp, defect_threshold);
    let bounds = kappa_v_bounds_from(&decomp, defect_threshold);
    let eta = min_gap(&decomp.eigenvalues)?;
    let s = singular_values(a);
    let defective = kappas.iter().any(|k| !k.is_finite());
    Ok(SpectralReport {
        eigenvalues: decomp.eigenvalues.iter().map(|&z| z.into()).collect(),
        kappa_j: kappas,
        kappa_v_lower: bounds.lower,
        kappa_v_upper: bounds.upper,
        kappa_v_direct: bounds.direct,
        eta,
        sigma_n: s[n - 1],
        sigma_n_minus_1: s[n - 2],
        defective,
    })
}

/// Row-echelon-style basis `P [D; X]` for the column space of an orthonormal
/// basis `B`, with `D` diagonal, `|D_jj| >= 1/sqrt(n)`, and unit columns.
#[derive(Debug, Clone)]
pub struct RrefBasis {
    /// `perm[t]` is the source row placed at position `t`; the first k entries
    /// are the pivot rows.
    pub perm: Vec<usize>,
    pub diag: Vec<Complex64>,
    /// The (n-k) x k block below the diagonal part.
    pub tail: DMatrix<Complex64>,
}

impl RrefBasis {
    /// Reassemble the n x k basis matrix `P [D; X]`.
    pub fn assemble(&self) -> DMatrix<Complex64> {
        let k = self.diag.len();
        let n = self.perm.len();
        let mut stacked = DMatrix::<Complex64>::zeros(n, k);
        for j in 0..k {
            stacked[(j, j)] = self.diag[j];
        }
        for i in 0..(n - k) {
            for j in 0..k {
                stacked[(k + i, j)] = self.tail[(i, j)];
            }
        }
        let mut out = DMatrix::<Complex64>::zeros(n, k);
        for (t, &src) in self.perm.iter().enumerate() {
            for j in 0..k {
                out[(src, j)] = stacked[(t, j)];
            }
        }
        out
    }
}

/// Select pivot rows by Gaussian elimination with complete pivoting, then
/// locally improve them (row swaps while any entry of `B B_S^{-1}` exceeds 1
/// in modulus). On exit every non-pivot entry has modulus <= 1, which forces
/// the pivot bound after column normalization.
pub fn rref_basis(b: &DMatrix<Complex64>) -> Result<RrefBasis> {
    let n = b.nrows();
    let k = b.ncols();
    if k == 0 || k > n {
        return Err(Error::domain("k", format!("need 1 <= k <= n, got k = {k}, n = {n}")));
    }

    // Complete pivoting pass for the initial pivot rows.
    let mut work = b.clone();
    let mut row_used = vec![false; n];
    let mut col_used = vec![false; k];
    let mut pivots: Vec<usize> = Vec::with_capacity(k);
    for _ in 0..k {
        let mut best = (0usize, 0usize, -1.0f64);
        for i in 0..n {
            if row_used[i] {
                continue;
            }
            for j in 0..k {
                if col_used[j] {
                    continue;
                }
                let m = work[(i, j)].norm();
                if m > best.2 {
                    best = (i, j, m);
                }
            }
        }
        let (pi, pj, pm) = best;
        if pm <= f64::EPSILON * (n as f64) {
            return Err(Error::RankDeficient(
                "columns are not linearly independent".into(),
            ));
        }
        row_used[pi] = true;
        col_used[pj] = true;
        pivots.push(pi);
        let pivot = work[(pi, pj)];
        for j in 0..k {
            if j == pj {
                continue;
            }
            let factor = work[(pi, j)] / pivot;
            if factor == Complex64::ZERO {
                continue;
            }
            for i in 0..n {
                let sub = work[(i, pj)] * factor;
                work[(i, j)] -= sub;
            }
        }
    }
    pivots.sort_unstable();

    // Local volume-maximizing swaps: C = B (B_S)^{-1}; while some |C_ij| > 1,
    // swapping row i into the pivot set strictly increases |det B_S|.
    let mut c;
    let max_swaps = 20 * n * k;
    let mut swaps = 0;
    loop {
        let bs = DMatrix::from_fn(k, k, |r, j| b[(pivots[r], j)]);
        let bs_inv = bs
            .lu()
            .try_inverse()
            .ok_or_else(|| Error::RankDeficient("pivot block is singular".into()))?;
        c = b * bs_inv;
        let mut worst = (0usize, 0usize, 1.0f64 + 1e-12);
        for i in 0..n {
            if pivots.contains(&i) {
                continue;
            }
            for j in 0..k {
                let m = c[(i, j)].norm();
                if m > worst.2 {
                    worst = (i, j, m);
                }
            }
        }
        if worst.2 <= 1.0 + 1e-12 {
            break;
        }
        pivots[worst.1] = worst.0;
        pivots.sort_unstable();
        swaps += 1;
        if swaps > max_swaps {
            return Err(Error::NonConvergence {
                what: "pivot row selection",
                iterations: max_swaps,
            });
        }
    }

    // After the loop, C restricted to pivot rows is a permutation-free k x k
    // identity in the pivot order; normalize columns.
    let non_pivots: Vec<usize> = (0..n).filter(|i| !pivots.contains(i)).collect();
    let mut perm = pivots.clone();
    perm.extend(&non_pivots);
    let mut diag = Vec::with_capacity(k);
    let mut tail = DMatrix::<Complex64>::zeros(n - k, k);
    for j in 0..k {
        let mut norm_sq = 0.0;
        for &i in perm.iter() {
            norm_sq += c[(i, j)].norm_sqr();
        }
        let norm = norm_sq.sqrt();
        diag.push(c[(pivots[j], j)] / norm);
        for (t, &i) in non_pivots.iter().enumerate() {
            tail[(t, j)] = c[(i, j)] / norm;
        }
    }
    Ok(RrefBasis { perm, diag, tail })
}
