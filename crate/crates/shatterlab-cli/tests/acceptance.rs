//! Acceptance gate: one test per release criterion, each printing a single
//! PASS/FAIL line. Run with `cargo test --test acceptance -- --nocapture`
//! to see the verdict lines; any FAIL also fails the test.

use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;

use num_complex::Complex64;
use shatterlab::diagnostics::{
    eigenvalue_condition_numbers, exponential_kappa_bound, kappa_v_bounds, min_eigenvalue_gap,
    rref_basis, weyl_pair_check,
};
use shatterlab::eig::{eig, operator_norm, shifted_sigma, singular_values};
use shatterlab::experiments::{
    fit_log_slope, CampaignConfig, CampaignResult, FamilyKind, MatrixFamily,
};
use shatterlab::matrix::{DenseMatrix, SparseMatrix};
use shatterlab::pseudospectrum::{pseudospectral_area, pseudospectral_area_with, SigmaMinEvaluator};
use shatterlab::rng::{mix_seed, sample_complex_gaussian, stream, Domain};
use shatterlab::specr::{exact_spectral_radius, realized_matrix, SpecrConfig};

fn criterion(num: u32, name: &str, body: impl FnOnce() -> String) {
    let result = catch_unwind(AssertUnwindSafe(body));
    match result {
        Ok(detail) if detail.is_empty() => println!("[acceptance {num:02}] {name}: PASS"),
        Ok(detail) => println!("[acceptance {num:02}] {name}: PASS ({detail})"),
        Err(payload) => {
            println!("[acceptance {num:02}] {name}: FAIL");
            std::panic::resume_unwind(payload);
        }
    }
}

fn load_config(name: &str) -> CampaignConfig {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name);
    let text = fs::read_to_string(&path).unwrap_or_else(|e| panic!("read {path:?}: {e}"));
    serde_json::from_str(&text).unwrap_or_else(|e| panic!("parse {path:?}: {e}"))
}

fn random_dense(n: usize, seed: u64, index: u64) -> DenseMatrix {
    let mut rng = stream(seed, Domain::Probe, index);
    DenseMatrix::from_fn(n, |_, _| sample_complex_gaussian(&mut rng)).unwrap()
}

// ---------------------------------------------------------------------------
// 1, 2: smallest-singular-value tail exponents of the dense noise ensemble
// ---------------------------------------------------------------------------

fn tail_slope(config_name: &str) -> (f64, f64) {
    let cfg = load_config(config_name);
    let CampaignResult::Tail(res) = cfg.run().unwrap() else {
        panic!("expected a tail campaign result");
    };
    assert!(res.fit_failure.is_none(), "fit failed: {:?}", res.fit_failure);
    (res.fitted_slope.unwrap(), res.slope_stderr.unwrap())
}

#[test]
fn acceptance_01_sigma_n_tail_exponent() {
    criterion(1, "sigma_n tail exponent near 2", || {
        let (slope, stderr) = tail_slope("tail_m0.json");
        assert!(
            (1.7..=2.3).contains(&slope),
            "slope {slope} +/- {stderr} outside [1.7, 2.3]"
        );
        format!("slope {slope:.3} +/- {stderr:.3}")
    });
}

#[test]
fn acceptance_02_sigma_n_minus_1_tail_exponent() {
    criterion(2, "sigma_{n-1} tail exponent near 4", || {
        let (slope, stderr) = tail_slope("tail_m1.json");
        assert!(
            (3.3..=4.7).contains(&slope),
            "slope {slope} +/- {stderr} outside [3.3, 4.7]"
        );
        format!("slope {slope:.3} +/- {stderr:.3}")
    });
}

// ---------------------------------------------------------------------------
// 3: sparse-regime regularity of the perturbed Jordan block
// ---------------------------------------------------------------------------

#[test]
fn acceptance_03_sparse_regime_regularity() {
    criterion(3, "sparse regime shatters the Jordan block", || {
        let cfg = load_config("shatter_jordan.json");
        let CampaignResult::Shatter(cells) = cfg.run().unwrap() else {
            panic!("expected a shatter campaign result");
        };
        assert_eq!(cells.len(), 3);
        let mut medians = Vec::new();
        for cell in &cells {
            for rec in &cell.records {
                if rec.untouched_rows == 0 {
                    assert!(
                        rec.eta > 1e-12,
                        "n = {}, trial {}: eta = {} with no untouched rows",
                        cell.n,
                        rec.trial,
                        rec.eta
                    );
                    assert!(
                        rec.kappa_v_lower.is_finite() && rec.kappa_v_upper.is_finite(),
                        "n = {}, trial {}: infinite kappa_V bounds",
                        cell.n,
                        rec.trial
                    );
                }
                if !rec.defective {
                    // Sandwich: max kappa_j <= kappa_V bound <= n * max kappa_j.
                    assert!(rec.kappa_v_lower <= rec.kappa_v_upper * (1.0 + 1e-9));
                    assert!(rec.kappa_v_upper <= cell.n as f64 * rec.kappa_v_lower * (1.0 + 1e-9));
                }
            }
            let median = cell.log_kappa_v_upper_quantiles[1];
            assert!(median.is_finite() && median > 0.0, "n = {}: median log kappa_V = {median}", cell.n);
            medians.push((cell.n, median));
        }
        // Medians grow with n (small slack for Monte-Carlo noise) ...
        for w in medians.windows(2) {
            assert!(
                w[1].1 >= w[0].1 - 0.5,
                "median log kappa_V dropped: {medians:?}"
            );
        }
        // ... but only polylogarithmically: the exponent of log kappa_V as a
        // power of log n stays small.
        let points: Vec<(f64, f64)> = medians
            .iter()
            .map(|&(n, med)| ((n as f64).ln(), med))
            .collect();
        let (exponent, _) = fit_log_slope(&points, (f64::MIN_POSITIVE, f64::MAX)).unwrap();
        assert!(
            (-1.0..=4.0).contains(&exponent),
            "log kappa_V grows like (log n)^{exponent}; medians {medians:?}"
        );
        format!("log kappa_V ~ (log n)^{exponent:.2}")
    });
}

// ---------------------------------------------------------------------------
// 4: deterministic inequality suite, 500 instances each, zero failures
// ---------------------------------------------------------------------------

#[test]
fn acceptance_04_deterministic_inequalities() {
    criterion(4, "inequality suite over 500 random instances", || {
        let n = 8;
        let eps = 1e-2;
        for i in 0..500u64 {
            let a = random_dense(n, 9004, i);
            let mut rng = stream(9004, Domain::Trial, i);

            // Weyl pair: the product of the two smallest eigenvalue distances
            // dominates sigma_n * sigma_{n-1} of the shifted matrix.
            let z = sample_complex_gaussian(&mut rng) * 3.0;
            assert!(weyl_pair_check(&a, z).unwrap(), "Weyl pair failed at instance {i}");

            // Normalize to operator norm 1 for the eta-based bounds.
            let norm = operator_norm(&a);
            let hat = a.scaled(Complex64::new(1.0 / norm, 0.0));
            let eta = min_eigenvalue_gap(&hat).unwrap();
            let bounds = kappa_v_bounds(&hat).unwrap();

            // Exponential ceiling: kappa_V <= n 2^n eta^(1-n) for ||A|| <= 1.
            let ceiling = exponential_kappa_bound(eta, n).unwrap();
            assert!(
                bounds.direct <= ceiling * (1.0 + 1e-9),
                "instance {i}: kappa_V {} above ceiling {ceiling}",
                bounds.direct
            );

            // Sandwich: lower <= upper <= n * lower (and the direct value
            // sits inside it).
            assert!(bounds.lower <= bounds.upper * (1.0 + 1e-9), "instance {i}");
            assert!(
                bounds.upper <= n as f64 * bounds.lower * (1.0 + 1e-9),
                "instance {i}"
            );
            assert!(
                bounds.lower <= bounds.direct * (1.0 + 1e-6)
                    && bounds.direct <= bounds.upper * (1.0 + 1e-6),
                "instance {i}: direct {} outside [{}, {}]",
                bounds.direct,
                bounds.lower,
                bounds.upper
            );

            // Disk containment: B(lambda_1, min(eta/n, kappa_1 eps) / 2) lies
            // inside the eps-pseudospectrum. Probe the center and a ring just
            // inside the boundary.
            let decomp = eig(&hat).unwrap();
            let lambda1 = decomp.eigenvalues[0];
            let kappa1 = eigenvalue_condition_numbers(&hat).unwrap()[0];
            let radius = 0.5 * (eta / n as f64).min(kappa1 * eps);
            for j in 0..=8 {
                let zp = if j == 0 {
                    lambda1
                } else {
                    let theta = 2.0 * std::f64::consts::PI * j as f64 / 8.0;
                    lambda1 + Complex64::from_polar(0.98 * radius, theta)
                };
                let sigma = shifted_sigma(&hat, zp, 0).unwrap();
                assert!(
                    sigma <= eps * (1.0 + 1e-9),
                    "instance {i}: sigma_min {sigma} > eps at disk point {j}"
                );
            }

            // Pivot bound of the row-echelon basis: |D_jj| >= 1/sqrt(n) for
            // an orthonormal input basis.
            let k = 1 + (i as usize % 7);
            let g = nalgebra::DMatrix::<Complex64>::from_fn(n, k, |_, _| {
                sample_complex_gaussian(&mut rng)
            });
            let q = g.qr().q();
            let basis = rref_basis(&q).unwrap();
            let floor = 1.0 / (n as f64).sqrt();
            for (j, d) in basis.diag.iter().enumerate() {
                assert!(
                    d.norm() >= floor - 1e-12,
                    "instance {i}: pivot {j} is {} < 1/sqrt(n)",
                    d.norm()
                );
            }
        }
        String::new()
    });
}

// ---------------------------------------------------------------------------
// 5: scale invariance of the diagnostics
// ---------------------------------------------------------------------------

#[test]
fn acceptance_05_scale_invariance() {
    criterion(5, "kappa scale-free, eta/sigma_n homogeneous", || {
        for i in 0..100u64 {
            let a = random_dense(8, 9005, i);
            let eig_a = eig(&a).unwrap();
            let kappa_a = eigenvalue_condition_numbers(&a).unwrap();
            let eta_a = min_eigenvalue_gap(&a).unwrap();
            let sigma_a = *singular_values(&a).last().unwrap();
            for s in [1e-3, 1e3] {
                let b = a.scaled(Complex64::new(s, 0.0));
                let eig_b = eig(&b).unwrap();
                let kappa_b = eigenvalue_condition_numbers(&b).unwrap();
                // Pair eigenvalues of sA with those of A by proximity.
                for (j, lam) in eig_a.eigenvalues.iter().enumerate() {
                    let (jm, _) = eig_b
                        .eigenvalues
                        .iter()
                        .enumerate()
                        .min_by(|(_, x), (_, y)| {
                            (*x / s - lam).norm().partial_cmp(&(*y / s - lam).norm()).unwrap()
                        })
                        .unwrap();
                    let rel = (kappa_b[jm] - kappa_a[j]).abs() / kappa_a[j];
                    assert!(
                        rel < 1e-8,
                        "instance {i}, s = {s}: kappa {} vs {} (rel {rel})",
                        kappa_b[jm],
                        kappa_a[j]
                    );
                }
                let eta_b = min_eigenvalue_gap(&b).unwrap();
                assert!(
                    (eta_b - s * eta_a).abs() / (s * eta_a) < 1e-8,
                    "instance {i}, s = {s}: eta {} vs {}",
                    eta_b,
                    s * eta_a
                );
                let sigma_b = *singular_values(&b).last().unwrap();
                assert!((sigma_b - s * sigma_a).abs() / (s * sigma_a) < 1e-8);
            }
        }
        String::new()
    });
}

// ---------------------------------------------------------------------------
// 6: Levy concentration estimator vs closed forms
// ---------------------------------------------------------------------------

#[test]
fn acceptance_06_levy_closed_forms() {
    use shatterlab::concentration::{
        levy_concentration, levy_dense_closed_form, levy_e1_closed_form, ConcentrationQuery,
    };
    criterion(6, "Levy estimates match closed forms to 3 SE", || {
        let trials = 100_000;
        let mut seed = 9006u64;
        // Coordinate vector e1: exact probability (1 - rho) + rho (1 - e^{-r^2}).
        let mut e1 = vec![Complex64::ZERO; 8];
        e1[0] = Complex64::ONE;
        for rho in [0.25, 0.5, 1.0] {
            for r in [0.5, 1.0, 2.0] {
                let q = ConcentrationQuery {
                    v: e1.clone(),
                    r,
                    rho,
                    trials,
                    seed,
                };
                seed += 1;
                let est = levy_concentration(&q).unwrap();
                let exact = levy_e1_closed_form(rho, r);
                let se = (exact * (1.0 - exact) / trials as f64).sqrt();
                assert!(
                    (est.value - exact).abs() <= 3.0 * se + 1e-9,
                    "e1 case rho = {rho}, r = {r}: {} vs {exact} (SE {se})",
                    est.value
                );
            }
        }
        // Dense rho = 1 with a generic unit vector: rotation invariance gives
        // 1 - e^{-r^2} independent of v.
        let mut rng = stream(9106, Domain::Probe, 0);
        let mut v: Vec<Complex64> = (0..16).map(|_| sample_complex_gaussian(&mut rng)).collect();
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        for x in &mut v {
            *x /= norm;
        }
        for r in [0.5, 1.0, 2.0] {
            let q = ConcentrationQuery {
                v: v.clone(),
                r,
                rho: 1.0,
                trials,
                seed,
            };
            seed += 1;
            let est = levy_concentration(&q).unwrap();
            let exact = levy_dense_closed_form(r);
            let se = (exact * (1.0 - exact) / trials as f64).sqrt();
            assert!(
                (est.value - exact).abs() <= 3.0 * se + 1e-9,
                "dense case r = {r}: {} vs {exact} (SE {se})",
                est.value
            );
        }
        String::new()
    });
}

// ---------------------------------------------------------------------------
// 7: spectral-radius estimator vs the dense-eigenvalue oracle
// ---------------------------------------------------------------------------

#[test]
fn acceptance_07_spectral_radius_estimator() {
    criterion(7, "power estimate within (1 +/- eps) of oracle", || {
        let n = 64;
        let trials = 50;
        let eps = 0.2;
        let family = MatrixFamily {
            kind: FamilyKind::GinibreDense,
            n,
            norm_target: Some(2.0),
            path: None,
        };
        let mut sandwich_hits = 0usize;
        for t in 0..trials as u64 {
            let dense = family.realize(9007, t).unwrap();
            let mut triplets = Vec::new();
            for i in 0..n {
                for j in 0..n {
                    triplets.push((i, j, dense.get(i, j)));
                }
            }
            let m = SparseMatrix::from_triplets(n, &triplets).unwrap();
            let cfg = SpecrConfig {
                rho: 0.25,
                eps,
                delta: 1e-3,
                seed: mix_seed(7007, t),
                k_override: None,
            };
            let outcome = shatterlab::specr::specr_estimate(&m, &cfg).unwrap();
            // The realized perturbation stays below delta in operator norm.
            assert!(
                outcome.perturbation_norm <= cfg.delta,
                "trial {t}: ||(delta/n) N|| = {} > delta",
                outcome.perturbation_norm
            );
            let spr = exact_spectral_radius(&realized_matrix(&m, &cfg).unwrap().to_dense()).unwrap();
            if outcome.estimate >= (1.0 - eps) * spr && outcome.estimate <= (1.0 + eps) * spr {
                sandwich_hits += 1;
            }
        }
        assert!(
            sandwich_hits * 10 >= trials * 9,
            "only {sandwich_hits}/{trials} trials inside the (1 +/- eps) sandwich"
        );
        format!("{sandwich_hits}/{trials} inside the sandwich")
    });
}

// ---------------------------------------------------------------------------
// 8: pseudospectral area quadrature
// ---------------------------------------------------------------------------

#[test]
fn acceptance_08_pseudospectral_area() {
    criterion(8, "area matches disks and scales like eps^2", || {
        // Normal matrix with well-separated eigenvalues: the eps = 0.1
        // pseudospectrum is exactly three disjoint disks of area pi eps^2.
        let eps = 0.1;
        let a = DenseMatrix::from_diagonal(&[
            Complex64::ZERO,
            Complex64::new(5.0, 0.0),
            Complex64::new(0.0, 2.5),
        ])
        .unwrap();
        let est = pseudospectral_area(&a, eps, Complex64::ZERO, 5.2, 2048).unwrap();
        let exact = 3.0 * std::f64::consts::PI * eps * eps;
        assert!(
            (est.area - exact).abs() <= est.error_bound,
            "normal case: area {} vs {exact}, bound {}",
            est.area,
            est.error_bound
        );

        // Random dense ensemble at n = 24: mean area over 200 trials follows
        // the eps^2 law across eps in [1e-2, 1e-1]. Resolution adapts per eps
        // so that every disk spans at least six cells.
        let n = 24;
        let trials = 200;
        let eps_grid = [0.1, 0.056, 0.032, 0.018, 0.01];
        let family = MatrixFamily::new(FamilyKind::GinibreDense, n);
        let mut mean_area = [0.0f64; 5];
        for t in 0..trials as u64 {
            let m = family.realize(9008, t).unwrap();
            let radius = operator_norm(&m) + eps_grid[0];
            let evaluator = SigmaMinEvaluator::new(&m).unwrap();
            for (idx, &e) in eps_grid.iter().enumerate() {
                let resolution = (2.0 * radius / (e / 6.0)).ceil() as usize;
                let est =
                    pseudospectral_area_with(&evaluator, e, Complex64::ZERO, radius, resolution)
                        .unwrap();
                mean_area[idx] += est.area / trials as f64;
            }
        }
        let points: Vec<(f64, f64)> = eps_grid
            .iter()
            .zip(mean_area.iter())
            .map(|(&e, &a)| (e, a))
            .collect();
        let (slope, stderr) = fit_log_slope(&points, (f64::MIN_POSITIVE, f64::MAX)).unwrap();
        assert!(
            (1.7..=2.3).contains(&slope),
            "area slope {slope} +/- {stderr} outside [1.7, 2.3]; means {mean_area:?}"
        );
        format!("area slope {slope:.3} +/- {stderr:.3}")
    });
}

// ---------------------------------------------------------------------------
// 9: untouched-row (coupon-collector) sharpness
// ---------------------------------------------------------------------------

#[test]
fn acceptance_09_untouched_row_sharpness() {
    criterion(9, "untouched rows vanish near c = 1 threshold", || {
        let cfg = load_config("coupon_sharpness.json");
        let CampaignResult::Coupon(points) = cfg.run().unwrap() else {
            panic!("expected a coupon campaign result");
        };
        let fraction_at = |c: f64| {
            points
                .iter()
                .find(|p| (p.c - c).abs() < 1e-12)
                .unwrap_or_else(|| panic!("no probe at c = {c}"))
                .fraction
        };
        let low = fraction_at(0.2);
        let high = fraction_at(3.0);
        assert!(low > 0.5, "fraction at c = 0.2 is {low}, expected > 0.5");
        assert!(high < 0.05, "fraction at c = 3 is {high}, expected < 0.05");
        format!("fraction {low:.3} at c = 0.2, {high:.4} at c = 3")
    });
}

// ---------------------------------------------------------------------------
// 10: byte-identical campaign replay from a manifest
// ---------------------------------------------------------------------------

#[test]
fn acceptance_10_manifest_replay() {
    criterion(10, "manifest re-run is byte-identical", || {
        let dir = tempfile::TempDir::new().unwrap();
        let cfg_path = dir.path().join("tail.json");
        fs::write(
            &cfg_path,
            r#"{"campaign":"tail","params":{"family":{"kind":"zero","n":8},"rho":1.0,"m":0,
                "shift":[0.0,0.0],"eps_grid":[0.5,0.2,0.1,0.05,0.02],"trials":200,"seed":10}}"#,
        )
        .unwrap();
        let d1 = dir.path().join("run1");
        let d2 = dir.path().join("run2");
        let run = |config: &Path, out: &Path| {
            let res = Command::new(env!("CARGO_BIN_EXE_shatterlab"))
                .args(["experiment", config.to_str().unwrap(), "--out-dir", out.to_str().unwrap()])
                .output()
                .unwrap();
            assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
        };
        run(&cfg_path, &d1);
        run(&d1.join("tail_manifest.json"), &d2);
        for name in ["tail_result.csv", "tail_summary.json"] {
            assert_eq!(
                fs::read(d1.join(name)).unwrap(),
                fs::read(d2.join(name)).unwrap(),
                "{name} differs on replay"
            );
        }
        String::new()
    });
}
