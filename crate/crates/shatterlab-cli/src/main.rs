//! Command-line front door: matrix file I/O, subcommands for each library
//! capability, machine-readable outputs, and reproducibility manifests.
//!
//! Exit codes: 0 success, 1 I/O or parse error, 2 domain/precondition error,
//! 3 numerical non-convergence.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use serde::Serialize;
use sha2::{Digest, Sha256};

use shatterlab::diagnostics::spectral_report;
use shatterlab::eig::{operator_norm, DEFECT_THRESHOLD};
use shatterlab::error::Error;
use shatterlab::experiments::{CampaignConfig, CampaignResult};
use shatterlab::mmio::{format_sparse, read_matrix};
use shatterlab::noise::{perturb_sparse, NoiseSpec};
use shatterlab::pseudospectrum::pseudospectrum_grid;
use shatterlab::rng::PRNG_SCHEME;
use shatterlab::specr::{exact_spectral_radius, realized_matrix, specr_estimate, SpecrConfig};

const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
const MANIFEST_SCHEMA: &str = "shatterlab-manifest-v1";

#[derive(Parser)]
#[command(
    name = "shatterlab",
    version,
    about = "Sparse random perturbations and spectral regularity diagnostics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Add a sparse Bernoulli-Gaussian perturbation to a matrix file.
    Perturb {
        /// Input matrix (Matrix Market, coordinate or array complex general).
        input: PathBuf,
        /// Entry-wise presence probability in (0, 1].
        #[arg(long)]
        rho: f64,
        /// Scale multiplying each present complex-Gaussian entry.
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        #[arg(long)]
        seed: u64,
        /// Output matrix file (coordinate format); a .manifest.json sidecar
        /// is written next to it.
        #[arg(long)]
        out: PathBuf,
    },
    /// Spectral regularity report: eigenvalues, condition numbers, gaps.
    Diagnose {
        input: PathBuf,
        /// Emit JSON (default).
        #[arg(long, conflicts_with = "csv")]
        json: bool,
        /// Emit long-format CSV (quantity,index,value) instead of JSON.
        #[arg(long)]
        csv: bool,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample sigma_min(zI - A) on a square grid; CSV of (re, im, sigma_min).
    Pseudospectrum {
        input: PathBuf,
        /// Pseudospectrum levels of interest (recorded in the manifest).
        #[arg(long = "eps", required = true, num_args = 1..)]
        eps: Vec<f64>,
        /// Grid center as "re,im".
        #[arg(long, default_value = "0,0")]
        center: String,
        /// Half-width of the grid square; defaults to ||A|| + max eps.
        #[arg(long)]
        radius: Option<f64>,
        /// Points per axis.
        #[arg(long, default_value_t = 200)]
        res: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Spectral-radius estimate with backward error at most delta.
    Specr {
        input: PathBuf,
        #[arg(long)]
        rho: f64,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        seed: u64,
        /// Override the step count k.
        #[arg(long)]
        k: Option<usize>,
        /// Also dense-solve the realized perturbed matrix and report the
        /// exact spectral radius next to the estimate.
        #[arg(long)]
        with_oracle: bool,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a Monte-Carlo campaign from a JSON config (or a manifest).
    Experiment {
        /// Campaign config, or a manifest written by a previous run.
        config: PathBuf,
        /// Directory for result CSV, summary JSON, and manifest.
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        /// Print the planned work and exit without running anything.
        #[arg(long)]
        dry_run: bool,
    },
}

fn main() -> ExitCode {
    init_thread_pool();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io(_) | Error::Parse { .. } | Error::Serialize(_) => 1,
        Error::NonConvergence { .. } => 3,
        _ => 2,
    }
}

/// SHATTERLAB_THREADS caps the worker count; defaults to all cores.
fn init_thread_pool() {
    if let Ok(v) = std::env::var("SHATTERLAB_THREADS") {
        if let Ok(k) = v.parse::<usize>() {
            if k >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Output plumbing
// ---------------------------------------------------------------------------

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), Error> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

#[derive(Serialize)]
struct RunManifest<C: Serialize> {
    schema: &'static str,
    command: &'static str,
    config_digest: String,
    seed: u64,
    tool_version: &'static str,
    timestamp: String,
    prng_scheme: &'static str,
    config: C,
}

fn iso_timestamp() -> String {
    time::OffsetDateTime::now_utc()
        .format(&time::format_description::well_known::Rfc3339)
        .unwrap_or_else(|_| "1970-01-01T00:00:00Z".into())
}

fn write_manifest<C: Serialize>(
    path: &Path,
    command: &'static str,
    seed: u64,
    config: C,
) -> Result<(), Error> {
    let config_json =
        serde_json::to_vec(&config).map_err(|e| Error::Serialize(e.to_string()))?;
    let digest = format!("sha256:{:x}", Sha256::digest(&config_json));
    let manifest = RunManifest {
        schema: MANIFEST_SCHEMA,
        command,
        config_digest: digest,
        seed,
        tool_version: TOOL_VERSION,
        timestamp: iso_timestamp(),
        prng_scheme: PRNG_SCHEME,
        config,
    };
    let mut bytes =
        serde_json::to_vec_pretty(&manifest).map_err(|e| Error::Serialize(e.to_string()))?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Error> {
    match out {
        Some(path) => write_atomic(path, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json_line<T: Serialize>(value: &T) -> Result<String, Error> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Serialize(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn parse_center(s: &str) -> Result<Complex64, Error> {
    let parts: Vec<&str> = s.split(',').collect();
    let bad = || Error::domain("center", format!("expected 're,im', got '{s}'"));
    if parts.len() != 2 {
        return Err(bad());
    }
    let re: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let im: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    Ok(Complex64::new(re, im))
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::Perturb { input, rho, scale, seed, out } => cmd_perturb(&input, rho, scale, seed, &out),
        Command::Diagnose { input, csv, out, .. } => cmd_diagnose(&input, csv, out.as_deref()),
        Command::Pseudospectrum { input, eps, center, radius, res, out } => {
            cmd_pseudospectrum(&input, &eps, &center, radius, res, &out)
        }
        Command::Specr { input, rho, eps, delta, seed, k, with_oracle, out } => {
            cmd_specr(&input, rho, eps, delta, seed, k, with_oracle, out.as_deref())
        }
        Command::Experiment { config, out_dir, dry_run } => cmd_experiment(&config, &out_dir, dry_run),
    }
}

#[derive(Serialize)]
struct PerturbConfig {
    input: PathBuf,
    rho: f64,
    scale: f64,
    seed: u64,
}

fn cmd_perturb(input: &Path, rho: f64, scale: f64, seed: u64, out: &Path) -> Result<(), Error> {
    let m = read_matrix(input)?.into_sparse()?;
    let spec = NoiseSpec::new(m.n(), rho, scale, seed)?;
    let perturbed = perturb_sparse(&m, &spec)?;
    write_atomic(out, format_sparse(&perturbed).as_bytes())?;
    write_manifest(
        &sidecar_path(out),
        "perturb",
        seed,
        PerturbConfig { input: input.to_owned(), rho, scale, seed },
    )
}

#[derive(Serialize)]
struct DiagnoseConfig {
    input: PathBuf,
    format: &'static str,
}

fn cmd_diagnose(input: &Path, csv: bool, out: Option<&Path>) -> Result<(), Error> {
    let a = read_matrix(input)?.into_dense();
    let report = spectral_report(&a, DEFECT_THRESHOLD)?;
    let text = if csv {
        let mut s = String::from("quantity,index,value\n");
        for (j, ev) in report.eigenvalues.iter().enumerate() {
            s.push_str(&format!("eigenvalue_re,{j},{}\n", ev.re));
            s.push_str(&format!("eigenvalue_im,{j},{}\n", ev.im));
        }
        for (j, k) in report.kappa_j.iter().enumerate() {
            s.push_str(&format!("kappa,{j},{k}\n"));
        }
        s.push_str(&format!("kappa_v_lower,,{}\n", report.kappa_v_lower));
        s.push_str(&format!("kappa_v_upper,,{}\n", report.kappa_v_upper));
        s.push_str(&format!("kappa_v_direct,,{}\n", report.kappa_v_direct));
        s.push_str(&format!("eta,,{}\n", report.eta));
        s.push_str(&format!("sigma_n,,{}\n", report.sigma_n));
        s.push_str(&format!("sigma_n_minus_1,,{}\n", report.sigma_n_minus_1));
        s.push_str(&format!("defective,,{}\n", report.defective));
        s
    } else {
        let mut value =
            serde_json::to_value(&report).map_err(|e| Error::Serialize(e.to_string()))?;
        value["schema"] = serde_json::Value::from("shatterlab-diagnose-v1");
        to_json_line(&value)?
    };
    emit(out, &text)?;
    if let Some(path) = out {
        write_manifest(
            &sidecar_path(path),
            "diagnose",
            0,
            DiagnoseConfig {
                input: input.to_owned(),
                format: if csv { "csv" } else { "json" },
            },
        )?;
    }
    Ok(())
}

#[derive(Serialize)]
struct PseudospectrumConfig {
    input: PathBuf,
    eps: Vec<f64>,
    center: [f64; 2],
    radius: f64,
    res: usize,
}

fn cmd_pseudospectrum(
    input: &Path,
    eps: &[f64],
    center: &str,
    radius: Option<f64>,
    res: usize,
    out: &Path,
) -> Result<(), Error> {
    if eps.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::domain("eps", "levels must be positive"));
    }
    let a = read_matrix(input)?.into_dense();
    let center = parse_center(center)?;
    let radius = match radius {
        Some(r) => r,
        None => operator_norm(&a) + eps.iter().cloned().fold(0.0, f64::max),
    };
    let grid = pseudospectrum_grid(&a, eps, center, radius, res)?;
    write_atomic(out, grid.to_csv().as_bytes())?;
    write_manifest(
        &sidecar_path(out),
        "pseudospectrum",
        0,
        PseudospectrumConfig {
            input: input.to_owned(),
            eps: eps.to_vec(),
            center: [center.re, center.im],
            radius,
            res,
        },
    )
}

#[derive(Serialize)]
struct SpecrFileConfig {
    input: PathBuf,
    #[serde(flatten)]
    cfg: SpecrConfig,
}

#[allow(clippy::too_many_arguments)]
fn cmd_specr(
    input: &Path,
    rho: f64,
    eps: f64,
    delta: f64,
    seed: u64,
    k: Option<usize>,
    with_oracle: bool,
    out: Option<&Path>,
) -> Result<(), Error> {
    let m = read_matrix(input)?.into_sparse()?;
    let cfg = SpecrConfig { rho, eps, delta, seed, k_override: k };
    let outcome = specr_estimate(&m, &cfg)?;
    let mut value =
        serde_json::to_value(&outcome).map_err(|e| Error::Serialize(e.to_string()))?;
    value["schema"] = serde_json::Value::from("shatterlab-specr-v1");
    if with_oracle {
        let realized = realized_matrix(&m, &cfg)?.to_dense();
        let spr = exact_spectral_radius(&realized)?;
        let rel = (outcome.estimate - spr).abs() / spr;
        value["oracle"] = serde_json::json!({
            "spr_realized": spr,
            "relative_error": rel,
            "sandwich_ok":
                outcome.estimate >= (1.0 - eps) * spr && outcome.estimate <= (1.0 + eps) * spr,
        });
    }
    emit(out, &to_json_line(&value)?)?;
    if let Some(path) = out {
        write_manifest(
            &sidecar_path(path),
            "specr",
            seed,
            SpecrFileConfig { input: input.to_owned(), cfg },
        )?;
    }
    Ok(())
}

fn campaign_kind(cfg: &CampaignConfig) -> &'static str {
    match cfg {
        CampaignConfig::Tail(_) => "tail",
        CampaignConfig::Shatter(_) => "shatter",
        CampaignConfig::Area(_) => "area",
        CampaignConfig::Coupon(_) => "coupon",
    }
}

/// Parse a campaign config, accepting either the bare config document or a
/// manifest from a previous run (whose `config` field is then used).
fn parse_campaign_config(path: &Path) -> Result<CampaignConfig, Error> {
    let text = fs::read_to_string(path)?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| Error::Parse {
        line: e.line(),
        msg: format!("invalid JSON: {e}"),
    })?;
    let config_value = match &value {
        serde_json::Value::Object(map)
            if map.get("schema").and_then(|s| s.as_str()) == Some(MANIFEST_SCHEMA) =>
        {
            map.get("config")
                .cloned()
                .ok_or_else(|| Error::Parse { line: 1, msg: "manifest has no config field".into() })?
        }
        _ => value,
    };
    serde_path_to_error::deserialize(config_value).map_err(|e| Error::Parse {
        line: 0,
        msg: format!("at /{}: {}", e.path().to_string().replace('.', "/"), e.inner()),
    })
}

fn cmd_experiment(config_path: &Path, out_dir: &Path, dry_run: bool) -> Result<(), Error> {
    let cfg = parse_campaign_config(config_path)?;
    cfg.validate()?;
    if dry_run {
        let plan = cfg.plan()?;
        print!("{}", to_json_line(&plan)?);
        return Ok(());
    }
    let result = cfg.run()?;
    fs::create_dir_all(out_dir)?;
    let kind = campaign_kind(&cfg);
    write_atomic(
        &out_dir.join(format!("{kind}_result.csv")),
        result.to_csv().as_bytes(),
    )?;
    let summary = serde_json::json!({
        "schema": "shatterlab-campaign-summary-v1",
        "tool_version": TOOL_VERSION,
        "prng_scheme": PRNG_SCHEME,
        "config": cfg,
        "result": summary_of(&result),
    });
    write_atomic(
        &out_dir.join(format!("{kind}_summary.json")),
        to_json_line(&summary)?.as_bytes(),
    )?;
    write_manifest(
        &out_dir.join(format!("{kind}_manifest.json")),
        "experiment",
        cfg.seed(),
        &cfg,
    )
}

/// The summary keeps fitted parameters and aggregates; bulky per-trial data
/// lives in the CSV.
fn summary_of(result: &CampaignResult) -> serde_json::Value {
    match result {
        CampaignResult::Tail(r) => serde_json::json!({
            "fitted_slope": r.fitted_slope,
            "slope_stderr": r.slope_stderr,
            "fit_failure": r.fit_failure,
            "trials_used": r.trials_used,
            "empirical_cdf": r.empirical_cdf,
        }),
        CampaignResult::Shatter(cells) => {
            let per_cell: Vec<serde_json::Value> = cells
                .iter()
                .map(|c| {
                    serde_json::json!({
                        "n": c.n,
                        "rho": c.rho,
                        "log_kappa_v_upper_quantiles":
                            quantile_json(&c.log_kappa_v_upper_quantiles),
                        "log_inv_eta_quantiles": quantile_json(&c.log_inv_eta_quantiles),
                        "defective_trials": c.defective_trials,
                        "trials_with_untouched_rows": c.trials_with_untouched_rows,
                        "reference_log_kappa_v": c.reference_log_kappa_v,
                        "reference_log_inv_eta": c.reference_log_inv_eta,
                    })
                })
                .collect();
            serde_json::Value::Array(per_cell)
        }
        CampaignResult::Area(r) => serde_json::json!({
            "fitted_slope": r.fitted_slope,
            "slope_stderr": r.slope_stderr,
            "fit_failure": r.fit_failure,
            "trials_used": r.trials_used,
            "per_eps": r.per_eps,
        }),
        CampaignResult::Coupon(points) => {
            serde_json::to_value(points).unwrap_or(serde_json::Value::Null)
        }
    }
}

fn quantile_json(q: &[f64; 3]) -> serde_json::Value {
    serde_json::Value::Array(
        q.iter()
            .map(|v| {
                if v.is_finite() {
                    serde_json::json!(v)
                } else {
                    serde_json::json!("inf")
                }
            })
            .collect(),
    )
}
