//! Monte-Carlo campaigns: smallest-singular-value tail exponents, spectral
//! regularity under sparse perturbation across (n, rho), pseudospectral-area
//! scaling in eps, and the untouched-row (coupon-collector) sharpness probe.
//!
//! Every campaign is a deterministic function of its config: trial t of a
//! campaign with seed s derives its noise from `mix_seed(s, t)` and its random
//! family sample from the `FamilySample` stream at index t, so reruns (and
//! any parallel schedule) reproduce results exactly.

use std::path::PathBuf;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{serialize_maybe_inf, spectral_report};
use crate::eig::{operator_norm, shifted_sigma, DEFECT_THRESHOLD};
use crate::error::{Error, Result};
use crate::matrix::{DenseMatrix, SparseMatrix};
use crate::mmio::read_matrix;
use crate::noise::{k_param, sample_sparse_noise, NoiseSpec};
use crate::pseudospectrum::{pseudospectral_area_with, SigmaMinEvaluator};
use crate::rng::{mix_seed, sample_complex_gaussian, stream, Domain};

// ---------------------------------------------------------------------------
// Matrix families
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    /// The all-zero matrix; perturbing it gives the pure noise ensemble.
    Zero,
    Identity,
    /// Nilpotent single Jordan block (ones on the superdiagonal).
    JordanBlock,
    /// Banded Toeplitz: -1 on the subdiagonal, 1 on the diagonal and the
    /// first three superdiagonals. Diagonalizable but wildly nonnormal.
    GrcarLike,
    /// I.i.d. standard complex Gaussian entries, freshly sampled per trial.
    GinibreDense,
    FromFile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixFamily {
    pub kind: FamilyKind,
    pub n: usize,
    /// When present, the realized matrix is rescaled to this operator norm.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norm_target: Option<f64>,
    /// Required for (and only for) `FromFile`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

impl MatrixFamily {
    pub fn new(kind: FamilyKind, n: usize) -> Self {
        MatrixFamily {
            kind,
            n,
            norm_target: None,
            path: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::domain("family.n", "must be positive"));
        }
        if let Some(t) = self.norm_target {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::domain("family.norm_target", "must be positive and finite"));
            }
            if self.kind == FamilyKind::Zero {
                return Err(Error::domain(
                    "family.norm_target",
                    "the zero matrix cannot be rescaled to a nonzero norm",
                ));
            }
        }
        match (self.kind, &self.path) {
            (FamilyKind::FromFile, None) => {
                Err(Error::domain("family.path", "required for FromFile"))
            }
            (FamilyKind::FromFile, Some(_)) => Ok(()),
            (_, Some(_)) => Err(Error::domain(
                "family.path",
                "only meaningful for FromFile",
            )),
            _ => Ok(()),
        }
    }

    /// The trial-t base matrix. Only `GinibreDense` depends on (seed, trial).
    pub fn realize(&self, seed: u64, trial: u64) -> Result<DenseMatrix> {
        self.validate()?;
        let n = self.n;
        let base = match self.kind {
            FamilyKind::Zero => DenseMatrix::zeros(n),
            FamilyKind::Identity => DenseMatrix::identity(n),
            FamilyKind::JordanBlock => DenseMatrix::from_fn(n, |i, j| {
                if j == i + 1 {
                    Complex64::ONE
                } else {
                    Complex64::ZERO
                }
            })?,
            FamilyKind::GrcarLike => DenseMatrix::from_fn(n, |i, j| {
                if j + 1 == i {
                    -Complex64::ONE
                } else if j >= i && j <= i + 3 {
                    Complex64::ONE
                } else {
                    Complex64::ZERO
                }
            })?,
            FamilyKind::GinibreDense => {
                let mut rng = stream(seed, Domain::FamilySample, trial);
                DenseMatrix::from_fn(n, |_, _| sample_complex_gaussian(&mut rng))?
            }
            FamilyKind::FromFile => {
                let m = read_matrix(self.path.as_ref().unwrap())?.into_dense();
                if m.n() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        got: m.n(),
                    });
                }
                m
            }
        };
        match self.norm_target {
            None => Ok(base),
            Some(target) => {
                let norm = operator_norm(&base);
                if norm == 0.0 {
                    return Err(Error::domain(
                        "family.norm_target",
                        "realized matrix has zero norm",
                    ));
                }
                Ok(base.scaled(Complex64::new(target / norm, 0.0)))
            }
        }
    }
}

/// The trial-t pair (base matrix, unit-scale noise sample). Every campaign
/// that perturbs a family goes through this one derivation, so campaigns with
/// the same (family, rho, seed) see identical matrices trial by trial.
pub fn trial_matrix(
    family: &MatrixFamily,
    rho: f64,
    seed: u64,
    trial: u64,
) -> Result<(DenseMatrix, SparseMatrix)> {
    let m = family.realize(seed, trial)?;
    let spec = NoiseSpec::new(family.n, rho, 1.0, mix_seed(seed, trial))?;
    let noise = sample_sparse_noise(&spec)?;
    Ok((m, noise))
}

fn add_noise(m: &DenseMatrix, noise: &SparseMatrix) -> Result<DenseMatrix> {
    let mut out = m.clone();
    for i in 0..m.n() {
        for (j, v) in noise.row(i) {
            out.set(i, j, out.get(i, j) + v)?;
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Log-log slope fitting
// ---------------------------------------------------------------------------

/// Ordinary least squares of log y on log x over the points whose y value
/// lies in `[window.0, window.1]`. Returns (slope, stderr).
pub fn fit_log_slope(points: &[(f64, f64)], window: (f64, f64)) -> Result<(f64, f64)> {
    let filtered: Vec<(f64, f64)> = points
        .iter()
        .copied()
        .filter(|&(x, y)| x > 0.0 && y > 0.0 && y >= window.0 && y <= window.1)
        .collect();
    if filtered.len() < 3 {
        return Err(Error::domain(
            "points",
            format!(
                "slope fit needs at least 3 points inside the window, got {}",
                filtered.len()
            ),
        ));
    }
    let m = filtered.len() as f64;
    let lx: Vec<f64> = filtered.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = filtered.iter().map(|p| p.1.ln()).collect();
    let mean_x = lx.iter().sum::<f64>() / m;
    let mean_y = ly.iter().sum::<f64>() / m;
    let sxx: f64 = lx.iter().map(|x| (x - mean_x).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::domain("points", "degenerate x values in slope fit"));
    }
    let sxy: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (x - mean_x) * (y - mean_y))
        .sum();
    let slope = sxy / sxx;
    let rss: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (y - mean_y - slope * (x - mean_x)).powi(2))
        .sum();
    let stderr = (rss.max(0.0) / (m - 2.0) / sxx).sqrt();
    Ok((slope, stderr))
}

fn validate_eps_grid(eps_grid: &[f64], min_points: usize) -> Result<()> {
    if eps_grid.len() < min_points {
        return Err(Error::domain(
            "eps_grid",
            format!("needs at least {min_points} points"),
        ));
    }
    for w in eps_grid.windows(2) {
        if !(w[1] < w[0]) {
            return Err(Error::domain("eps_grid", "must be strictly decreasing"));
        }
    }
    if !(eps_grid[eps_grid.len() - 1] > 0.0) {
        return Err(Error::domain("eps_grid", "must be positive"));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Tail campaign
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailCampaignConfig {
    pub family: MatrixFamily,
    pub rho: f64,
    /// Order of the singular value: sigma_{n-m}.
    pub m: usize,
    /// Shift z as [re, im]; the statistic is sigma_{n-m}(A - zI).
    pub shift: [f64; 2],
    /// Strictly decreasing, at least 4 points.
    pub eps_grid: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
}

impl TailCampaignConfig {
    pub fn validate(&self) -> Result<()> {
        self.family.validate()?;
        NoiseSpec::new(self.family.n, self.rho, 1.0, 0)?;
        if self.m >= self.family.n {
            return Err(Error::domain("m", "must be below the dimension"));
        }
        validate_eps_grid(&self.eps_grid, 4)?;
        if self.trials < 100 {
            return Err(Error::domain("trials", "needs at least 100 trials"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailCampaignResult {
    /// (eps, fraction of trials with sigma <= eps), ascending in eps.
    pub empirical_cdf: Vec<(f64, f64)>,
    pub fitted_slope: Option<f64>,
    pub slope_stderr: Option<f64>,
    /// Set when too few CDF points fall in the fit window.
    pub fit_failure: Option<String>,
    pub trials_used: usize,
    /// Per-trial sigma_{n-m}(A - zI) samples, in trial order.
    #[serde(skip)]
    pub sigma_samples: Vec<f64>,
}

impl TailCampaignResult {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("eps,fraction\n");
        for (eps, frac) in &self.empirical_cdf {
            out.push_str(&format!("{eps},{frac}\n"));
        }
        out
    }
}

pub fn run_tail_campaign(cfg: &TailCampaignConfig) -> Result<TailCampaignResult> {
    cfg.validate()?;
    let z = Complex64::new(cfg.shift[0], cfg.shift[1]);
    let samples: Vec<f64> = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| {
            let (m, noise) = trial_matrix(&cfg.family, cfg.rho, cfg.seed, t)?;
            let a = add_noise(&m, &noise)?;
            shifted_sigma(&a, z, cfg.m)
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut cdf: Vec<(f64, f64)> = cfg
        .eps_grid
        .iter()
        .map(|&eps| {
            let hits = samples.iter().filter(|&&s| s <= eps).count();
            (eps, hits as f64 / cfg.trials as f64)
        })
        .collect();
    cdf.reverse();
    let window = (5.0 / cfg.trials as f64, 0.5);
    let (fitted_slope, slope_stderr, fit_failure) = match fit_log_slope(&cdf, window) {
        Ok((s, e)) => (Some(s), Some(e), None),
        Err(err) => (None, None, Some(err.to_string())),
    };
    Ok(TailCampaignResult {
        empirical_cdf: cdf,
        fitted_slope,
        slope_stderr,
        fit_failure,
        trials_used: cfg.trials,
        sigma_samples: samples,
    })
}

// ---------------------------------------------------------------------------
// Shatter campaign
// ---------------------------------------------------------------------------

/// Sparsity law rho(n), clamped to (0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RhoLaw {
    Fixed { value: f64 },
    /// rho = log^2(n) / n.
    LogSquaredOverN,
    /// rho = n^(alpha - 1) with alpha = 1/2.
    InverseSqrtN,
}

impl RhoLaw {
    pub fn value(&self, n: usize) -> f64 {
        let rho = match self {
            RhoLaw::Fixed { value } => *value,
            RhoLaw::LogSquaredOverN => (n as f64).ln().powi(2) / n as f64,
            RhoLaw::InverseSqrtN => 1.0 / (n as f64).sqrt(),
        };
        rho.min(1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShatterCampaignConfig {
    pub family_kind: FamilyKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norm_target: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    pub n_list: Vec<usize>,
    pub rho_laws: Vec<RhoLaw>,
    pub trials: usize,
    pub seed: u64,
}

impl ShatterCampaignConfig {
    fn family(&self, n: usize) -> MatrixFamily {
        MatrixFamily {
            kind: self.family_kind,
            n,
            norm_target: self.norm_target,
            path: self.path.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_list.is_empty() || self.rho_laws.is_empty() {
            return Err(Error::domain("n_list", "n_list and rho_laws must be nonempty"));
        }
        if self.trials == 0 {
            return Err(Error::domain("trials", "must be positive"));
        }
        for &n in &self.n_list {
            self.family(n).validate()?;
            for law in &self.rho_laws {
                // Requires n * rho > 1 per cell.
                k_param(n, law.value(n))?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShatterTrialRecord {
    pub trial: u64,
    #[serde(serialize_with = "serialize_maybe_inf")]
    pub kappa_v_lower: f64,
    #[serde(serialize_with = "serialize_maybe_inf")]
    pub kappa_v_upper: f64,
    pub eta: f64,
    pub sigma_n: f64,
    pub nnz: usize,
    pub untouched_rows: usize,
    pub defective: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShatterCellResult {
    pub n: usize,
    pub rho: f64,
    pub records: Vec<ShatterTrialRecord>,
    /// Quantiles (q25, q50, q75) of log kappa_V_upper over non-defective
    /// trials; "inf" when every trial was defective.
    #[serde(serialize_with = "crate::experiments::serialize_quantiles")]
    pub log_kappa_v_upper_quantiles: [f64; 3],
    #[serde(serialize_with = "crate::experiments::serialize_quantiles")]
    pub log_inv_eta_quantiles: [f64; 3],
    pub defective_trials: usize,
    pub trials_with_untouched_rows: usize,
    /// Reference tail-bound curves 10K log(||M|| + n^2 rho) and
    /// 35K log(||M|| + n^2 rho); recorded for comparison, never asserted.
    pub reference_log_kappa_v: f64,
    pub reference_log_inv_eta: f64,
}

pub(crate) fn serialize_quantiles<S: serde::Serializer>(
    q: &[f64; 3],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(3))?;
    for v in q {
        if v.is_finite() {
            seq.serialize_element(v)?;
        } else {
            seq.serialize_element("inf")?;
        }
    }
    seq.end()
}

fn quantiles3(values: &[f64]) -> [f64; 3] {
    if values.is_empty() {
        return [f64::INFINITY; 3];
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let pick = |p: f64| v[((p * (v.len() - 1) as f64).round() as usize).min(v.len() - 1)];
    [pick(0.25), pick(0.5), pick(0.75)]
}

pub fn run_shatter_campaign(cfg: &ShatterCampaignConfig) -> Result<Vec<ShatterCellResult>> {
    cfg.validate()?;
    let mut cells = Vec::new();
    for &n in &cfg.n_list {
        for law in &cfg.rho_laws {
            let rho = law.value(n);
            let family = cfg.family(n);
            let records: Vec<ShatterTrialRecord> = (0..cfg.trials as u64)
                .into_par_iter()
                .map(|t| {
                    let (m, noise) = trial_matrix(&family, rho, cfg.seed, t)?;
                    let a = add_noise(&m, &noise)?;
                    let report = spectral_report(&a, DEFECT_THRESHOLD)?;
                    let untouched = (0..n).filter(|&i| noise.row_nnz(i) == 0).count();
                    Ok(ShatterTrialRecord {
                        trial: t,
                        kappa_v_lower: report.kappa_v_lower,
                        kappa_v_upper: report.kappa_v_upper,
                        eta: report.eta,
                        sigma_n: report.sigma_n,
                        nnz: noise.nnz(),
                        untouched_rows: untouched,
                        defective: report.defective,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let log_kappas: Vec<f64> = records
                .iter()
                .filter(|r| r.kappa_v_upper.is_finite())
                .map(|r| r.kappa_v_upper.ln())
                .collect();
            let log_inv_etas: Vec<f64> = records
                .iter()
                .filter(|r| r.eta > 0.0)
                .map(|r| (1.0 / r.eta).ln())
                .collect();
            let norm_m = operator_norm(&family.realize(cfg.seed, 0)?);
            let k = k_param(n, rho)?.value;
            let ref_base = (norm_m + (n * n) as f64 * rho).ln();
            cells.push(ShatterCellResult {
                n,
                rho,
                defective_trials: records.iter().filter(|r| r.defective).count(),
                trials_with_untouched_rows: records
                    .iter()
                    .filter(|r| r.untouched_rows > 0)
                    .count(),
                log_kappa_v_upper_quantiles: quantiles3(&log_kappas),
                log_inv_eta_quantiles: quantiles3(&log_inv_etas),
                reference_log_kappa_v: 10.0 * k * ref_base,
                reference_log_inv_eta: 35.0 * k * ref_base,
                records,
            });
        }
    }
    Ok(cells)
}

/// CSV over all cells, one row per trial.
pub fn shatter_to_csv(cells: &[ShatterCellResult]) -> String {
    let mut out = String::from(
        "n,rho,trial,kappa_v_lower,kappa_v_upper,eta,sigma_n,nnz,untouched_rows,defective\n",
    );
    for cell in cells {
        for r in &cell.records {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                cell.n,
                cell.rho,
                r.trial,
                r.kappa_v_lower,
                r.kappa_v_upper,
                r.eta,
                r.sigma_n,
                r.nnz,
                r.untouched_rows,
                r.defective
            ));
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Area campaign
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AreaCampaignConfig {
    pub family: MatrixFamily,
    /// When present, each trial perturbs the family matrix with unit-scale
    /// noise at this sparsity; when absent the family matrix is used as-is.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    pub eps_grid: Vec<f64>,
    pub trials: usize,
    pub resolution: usize,
    pub seed: u64,
}

impl AreaCampaignConfig {
    pub fn validate(&self) -> Result<()> {
        self.family.validate()?;
        if let Some(rho) = self.rho {
            NoiseSpec::new(self.family.n, rho, 1.0, 0)?;
        }
        validate_eps_grid(&self.eps_grid, 2)?;
        if self.trials == 0 {
            return Err(Error::domain("trials", "must be positive"));
        }
        if self.resolution < 2 {
            return Err(Error::domain("resolution", "must be at least 2"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AreaPoint {
    pub eps: f64,
    pub mean_area: f64,
    pub mean_error_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AreaCampaignResult {
    /// Ascending in eps.
    pub per_eps: Vec<AreaPoint>,
    pub fitted_slope: Option<f64>,
    pub slope_stderr: Option<f64>,
    pub fit_failure: Option<String>,
    pub trials_used: usize,
}

impl AreaCampaignResult {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("eps,mean_area,mean_error_bound\n");
        for p in &self.per_eps {
            out.push_str(&format!("{},{},{}\n", p.eps, p.mean_area, p.mean_error_bound));
        }
        out
    }
}

pub fn run_area_campaign(cfg: &AreaCampaignConfig) -> Result<AreaCampaignResult> {
    cfg.validate()?;
    let eps_max = cfg.eps_grid[0];
    let eps_min = cfg.eps_grid[cfg.eps_grid.len() - 1];
    let per_trial: Vec<Vec<(f64, f64)>> = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| {
            let a = match cfg.rho {
                Some(rho) => {
                    let (m, noise) = trial_matrix(&cfg.family, rho, cfg.seed, t)?;
                    add_noise(&m, &noise)?
                }
                None => cfg.family.realize(cfg.seed, t)?,
            };
            let norm = operator_norm(&a);
            let radius = norm + eps_max;
            let h = 2.0 * radius / cfg.resolution as f64;
            if h > eps_min / 5.0 {
                return Err(Error::domain(
                    "resolution",
                    format!(
                        "cell size {h} too coarse for eps = {eps_min}: need eps >= 5 cells \
                         (resolution >= {})",
                        (10.0 * radius / eps_min).ceil()
                    ),
                ));
            }
            let evaluator = SigmaMinEvaluator::new(&a)?;
            cfg.eps_grid
                .iter()
                .map(|&eps| {
                    let est = pseudospectral_area_with(
                        &evaluator,
                        eps,
                        Complex64::ZERO,
                        radius,
                        cfg.resolution,
                    )?;
                    Ok((est.area, est.error_bound))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let mut per_eps: Vec<AreaPoint> = cfg
        .eps_grid
        .iter()
        .enumerate()
        .map(|(i, &eps)| AreaPoint {
            eps,
            mean_area: per_trial.iter().map(|t| t[i].0).sum::<f64>() / cfg.trials as f64,
            mean_error_bound: per_trial.iter().map(|t| t[i].1).sum::<f64>() / cfg.trials as f64,
        })
        .collect();
    per_eps.reverse();
    let points: Vec<(f64, f64)> = per_eps.iter().map(|p| (p.eps, p.mean_area)).collect();
    let (fitted_slope, slope_stderr, fit_failure) =
        match fit_log_slope(&points, (f64::MIN_POSITIVE, f64::MAX)) {
            Ok((s, e)) => (Some(s), Some(e), None),
            Err(err) => (None, None, Some(err.to_string())),
        };
    Ok(AreaCampaignResult {
        per_eps,
        fitted_slope,
        slope_stderr,
        fit_failure,
        trials_used: cfg.trials,
    })
}

// ---------------------------------------------------------------------------
// Coupon-collector probe
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouponCampaignConfig {
    pub n: usize,
    pub c_list: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
}

impl CouponCampaignConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 8 {
            return Err(Error::domain("n", "probe needs n >= 8"));
        }
        if self.c_list.is_empty() || self.c_list.iter().any(|&c| !(c > 0.0)) {
            return Err(Error::domain("c_list", "needs positive c values"));
        }
        if self.trials == 0 {
            return Err(Error::domain("trials", "must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CouponPoint {
    pub c: f64,
    pub rho: f64,
    /// Fraction of trials with at least one noise row left untouched.
    pub fraction: f64,
}

pub fn coupon_to_csv(points: &[CouponPoint]) -> String {
    let mut out = String::from("c,rho,fraction\n");
    for p in points {
        out.push_str(&format!("{},{},{}\n", p.c, p.rho, p.fraction));
    }
    out
}

/// Empirical probability of an all-zero noise row at rho = c log(n)/n. A row
/// is untouched iff all n of its Bernoulli draws miss, so only the mask
/// stream is consumed (matching the noise sampler's draw order exactly).
pub fn coupon_collector_probe(cfg: &CouponCampaignConfig) -> Result<Vec<CouponPoint>> {
    cfg.validate()?;
    let n = cfg.n;
    let mut out = Vec::with_capacity(cfg.c_list.len());
    for (idx, &c) in cfg.c_list.iter().enumerate() {
        let rho = (c * (n as f64).ln() / n as f64).min(1.0);
        let c_seed = mix_seed(cfg.seed, idx as u64);
        let hits: usize = (0..cfg.trials as u64)
            .into_par_iter()
            .map(|t| {
                let trial_seed = mix_seed(c_seed, t);
                let untouched = (0..n).any(|i| {
                    let mut rng = stream(trial_seed, Domain::NoiseRow, i as u64);
                    for _ in 0..n {
                        let u: f64 = rand::Rng::random(&mut rng);
                        if u < rho {
                            return false;
                        }
                    }
                    true
                });
                usize::from(untouched)
            })
            .sum();
        out.push(CouponPoint {
            c,
            rho,
            fraction: hits as f64 / cfg.trials as f64,
        });
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// One config type for all campaigns (the CLI surface)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "campaign", content = "params", rename_all = "snake_case")]
pub enum CampaignConfig {
    Tail(TailCampaignConfig),
    Shatter(ShatterCampaignConfig),
    Area(AreaCampaignConfig),
    Coupon(CouponCampaignConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum CampaignResult {
    Tail(TailCampaignResult),
    Shatter(Vec<ShatterCellResult>),
    Area(AreaCampaignResult),
    Coupon(Vec<CouponPoint>),
}

/// Dry-run summary: how much work the campaign would do.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CampaignPlan {
    pub trials_total: u64,
    /// Dominant kernel invocations: SVDs, eigendecompositions, sigma-min
    /// evaluations budgeted per (trial, eps), or row scans.
    pub estimated_kernel_calls: u64,
    pub description: String,
}

impl CampaignConfig {
    pub fn validate(&self) -> Result<()> {
        match self {
            CampaignConfig::Tail(c) => c.validate(),
            CampaignConfig::Shatter(c) => c.validate(),
            CampaignConfig::Area(c) => c.validate(),
            CampaignConfig::Coupon(c) => c.validate(),
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            CampaignConfig::Tail(c) => c.seed,
            CampaignConfig::Shatter(c) => c.seed,
            CampaignConfig::Area(c) => c.seed,
            CampaignConfig::Coupon(c) => c.seed,
        }
    }

    pub fn plan(&self) -> Result<CampaignPlan> {
        self.validate()?;
        Ok(match self {
            CampaignConfig::Tail(c) => CampaignPlan {
                trials_total: c.trials as u64,
                estimated_kernel_calls: c.trials as u64,
                description: format!(
                    "tail: {} trials at n = {}, one shifted SVD each",
                    c.trials, c.family.n
                ),
            },
            CampaignConfig::Shatter(c) => {
                let cells = (c.n_list.len() * c.rho_laws.len()) as u64;
                let trials = cells * c.trials as u64;
                CampaignPlan {
                    trials_total: trials,
                    estimated_kernel_calls: 2 * trials,
                    description: format!(
                        "shatter: {cells} cells x {} trials, one eig + one SVD each",
                        c.trials
                    ),
                }
            }
            CampaignConfig::Area(c) => {
                let trials = c.trials as u64;
                let evals = trials
                    * c.eps_grid.len() as u64
                    * (4 * c.resolution as u64).max(1024);
                CampaignPlan {
                    trials_total: trials,
                    estimated_kernel_calls: evals,
                    description: format!(
                        "area: {} trials x {} eps levels at resolution {}, \
                         ~4*resolution sigma-min evaluations per level",
                        c.trials,
                        c.eps_grid.len(),
                        c.resolution
                    ),
                }
            }
            CampaignConfig::Coupon(c) => {
                let trials = (c.c_list.len() * c.trials) as u64;
                CampaignPlan {
                    trials_total: trials,
                    estimated_kernel_calls: trials * c.n as u64,
                    description: format!(
                        "coupon: {} c-values x {} trials, {} row scans each",
                        c.c_list.len(),
                        c.trials,
                        c.n
                    ),
                }
            }
        })
    }

    pub fn run(&self) -> Result<CampaignResult> {
        Ok(match self {
            CampaignConfig::Tail(c) => CampaignResult::Tail(run_tail_campaign(c)?),
            CampaignConfig::Shatter(c) => CampaignResult::Shatter(run_shatter_campaign(c)?),
            CampaignConfig::Area(c) => CampaignResult::Area(run_area_campaign(c)?),
            CampaignConfig::Coupon(c) => CampaignResult::Coupon(coupon_collector_probe(c)?),
        })
    }
}

impl CampaignResult {
    pub fn to_csv(&self) -> String {
        match self {
            CampaignResult::Tail(r) => r.to_csv(),
            CampaignResult::Shatter(cells) => shatter_to_csv(cells),
            CampaignResult::Area(r) => r.to_csv(),
            CampaignResult::Coupon(points) => coupon_to_csv(points),
        }
    }
}
