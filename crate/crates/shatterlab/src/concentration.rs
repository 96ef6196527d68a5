//! Small-ball (Levy concentration) estimation for sparse Gaussian inner
//! products, and the compressible/incompressible sphere partition.
//!
//! `p(v, r)` is the probability that `|<g .* b, v>|` lands in a radius-r ball,
//! where g is an i.i.d. standard complex Gaussian vector and b an i.i.d.
//! Bernoulli(rho) mask. The supremum over ball centers is attained at 0 for
//! this model (a mixture of radially symmetric Gaussians plus an atom at 0),
//! so the estimator evaluates the ball at 0 only; it must not be reused for
//! shifted models.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::{sample_complex_gaussian, stream, Domain};

/// One small-ball query: unit direction `v`, radius `r`, sparsity `rho`,
/// Monte-Carlo budget and seed.
#[derive(Debug, Clone)]
pub struct ConcentrationQuery {
    pub v: Vec<Complex64>,
    pub r: f64,
    pub rho: f64,
    pub trials: usize,
    pub seed: u64,
}

impl ConcentrationQuery {
    pub fn validate(&self) -> Result<()> {
        if self.v.is_empty() {
            return Err(Error::domain("v", "must be nonempty"));
        }
        let norm: f64 = self.v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::domain(
                "v",
                format!("must be a unit vector, got norm {norm}"),
            ));
        }
        if !(self.r > 0.0) {
            return Err(Error::domain("r", "radius must be positive"));
        }
        if !(self.rho > 0.0 && self.rho <= 1.0) {
            return Err(Error::domain("rho", "must lie in (0, 1]"));
        }
        if self.trials == 0 {
            return Err(Error::domain("trials", "must be positive"));
        }
        Ok(())
    }
}

/// Monte-Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

/// Estimate `p(v, r)`.
pub fn levy_concentration(q: &ConcentrationQuery) -> Result<Estimate> {
    q.validate()?;
    let n = q.v.len();
    let mut rng = stream(q.seed, Domain::Probe, 0);
    let mut hits = 0usize;
    for _ in 0..q.trials {
        let mut ip = Complex64::ZERO;
        for j in 0..n {
            let u: f64 = rng.random();
            if u < q.rho {
                let g = sample_complex_gaussian(&mut rng);
                ip += g * q.v[j].conj();
            }
        }
        if ip.norm() <= q.r {
            hits += 1;
        }
    }
    let p = hits as f64 / q.trials as f64;
    let std_error = (p * (1.0 - p) / q.trials as f64).sqrt();
    Ok(Estimate { value: p, std_error })
}

/// Side of the compressible/incompressible partition at threshold `s`, with a
/// 3-standard-error guard band.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SphereClass {
    Comp,
    Incomp,
    Boundary,
}

pub fn comp_incomp_classify(q: &ConcentrationQuery, s: f64) -> Result<SphereClass> {
    let est = levy_concentration(q)?;
    let band = 3.0 * est.std_error;
    if est.value - band >= s {
        Ok(SphereClass::Comp)
    } else if est.value + band <= s {
        Ok(SphereClass::Incomp)
    } else {
        Ok(SphereClass::Boundary)
    }
}

/// Check the compressible-vectors-are-nearly-sparse implication: if
/// `p(v, r) >= s` (established with a 3-SE guard) then the number of
/// coordinates with `|v_j| >= r sqrt(2/s)` is at most `log(2/s)/rho`.
/// Returns false only on a confident violation.
pub fn sparse_proximity_check(q: &ConcentrationQuery, s: f64) -> Result<bool> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::domain("s", "must lie in (0, 1)"));
    }
    let est = levy_concentration(q)?;
    if est.value - 3.0 * est.std_error < s {
        // Antecedent not confidently established.
        return Ok(true);
    }
    let threshold = q.r * (2.0 / s).sqrt();
    let count = q.v.iter().filter(|x| x.norm() >= threshold).count() as f64;
    Ok(count <= (2.0 / s).ln() / q.rho)
}

/// Closed form of `p(e1, r)`: the entry is absent with probability `1 - rho`,
/// otherwise `|g|^2` is Exp(1).
pub fn levy_e1_closed_form(rho: f64, r: f64) -> f64 {
    (1.0 - rho) + rho * (1.0 - (-r * r).exp())
}

/// Closed form for `rho = 1` and any unit `v`: by rotation invariance the
/// inner product is a single standard complex Gaussian.
pub fn levy_dense_closed_form(r: f64) -> f64 {
    1.0 - (-r * r).exp()
}
