//! James-Stein correction of the leading sample eigenvector.
//!
//! Given `Y`, take the top sample eigenpair `(s2, h)` with `ave(h) >= 0`,
//! set `eta = s h`, estimate the noise level from the bulk of the spectrum,
//! and pull the entries of `eta` toward their mean:
//!
//! ```text
//! nu2   = (tr(S) - (s2_1 + ... + s2_q)) / (min(n, p) - q) / p
//! c     = 1 - nu2 / var(eta)
//! eta_c = ave(eta) + c (eta - ave(eta))
//! h_js  = eta_c / |eta_c|
//! ```
//!
//! Only `q = 1` carries the asymptotic guarantees. Larger `q` changes
//! nothing but the noise estimate, which is a reasonable but not optimal
//! multi-spike extension.

use serde::{Deserialize, Serialize};

use crate::data::DataMatrix;
use crate::eig::{orient, top_eigenpairs_hdlss, SpectrumSummary};
use crate::error::{Error, Result};
use crate::metrics::{ave, compensated_sum, cov, norm, var};

const IDENTITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShrinkageEstimate {
    /// Oriented leading sample eigenvector.
    pub h: Vec<f64>,
    /// Leading eigenvalue `s2` of `S`.
    pub top_eigenvalue: f64,
    /// `eta = s h`.
    pub eta: Vec<f64>,
    pub nu_hat_sq: f64,
    pub c_raw: f64,
    /// `c_raw` clamped into `[0, 1]`.
    pub c: f64,
    pub clamped: bool,
    pub eta_js: Vec<f64>,
    pub h_js: Vec<f64>,
    pub q: usize,
    pub spectrum: SpectrumSummary,
}

/// Average non-spike eigenvalue of `S`, scaled by `1 / p`.
pub fn noise_estimate(
    trace_s: f64,
    top_eigenvalues: &[f64],
    p: usize,
    n: usize,
    q: usize,
) -> Result<f64> {
    let rank_cap = p.min(n);
    if q < 1 || q >= rank_cap {
        return Err(Error::InvalidParameter(format!(
            "q must satisfy 1 <= q < min(n, p) = {rank_cap}, got {q}"
        )));
    }
    if top_eigenvalues.len() < q {
        return Err(Error::LengthMismatch {
            left: top_eigenvalues.len(),
            right: q,
        });
    }
    let spikes = compensated_sum(top_eigenvalues[..q].iter().copied());
    let bulk = trace_s - spikes;
    if bulk < -1e-9 * trace_s.abs().max(f64::MIN_POSITIVE) {
        return Err(Error::InconsistentSpectrum(format!(
            "top {q} eigenvalues sum to {spikes}, above the trace {trace_s}"
        )));
    }
    Ok(bulk.max(0.0) / (rank_cap - q) as f64 / p as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub raw: f64,
    pub clamped: f64,
    pub was_clamped: bool,
}

/// `c = 1 - nu2 / var(eta)`, also returned clamped into `[0, 1]`.
pub fn shrinkage_coefficient(nu_hat_sq: f64, var_eta: f64) -> Result<Coefficient> {
    if !(var_eta > 0.0) {
        return Err(Error::Degenerate(format!(
            "var(eta) must be positive, got {var_eta}"
        )));
    }
    let raw = 1.0 - nu_hat_sq / var_eta;
    let clamped = raw.clamp(0.0, 1.0);
    Ok(Coefficient {
        raw,
        clamped,
        was_clamped: clamped != raw,
    })
}

/// `ave(eta) + c (eta_i - ave(eta))` entrywise.
pub fn shrink_vector(eta: &[f64], c: f64) -> Result<Vec<f64>> {
    let m = ave(eta)?;
    Ok(eta.iter().map(|e| m + c * (e - m)).collect())
}

/// The unit shrunk vector written through moments of `h`:
/// `(ave(h) + c (h - ave(h))) / (sqrt(p) sqrt(ave(h)^2 + c^2 var(h)))`.
pub fn normalized_shrink(h: &[f64], c: f64) -> Result<Vec<f64>> {
    let m = ave(h)?;
    let v = var(h)?;
    let denom = (h.len() as f64).sqrt() * (m * m + c * c * v).sqrt();
    if !(denom > 0.0) {
        return Err(Error::Degenerate("shrunk vector is zero".into()));
    }
    Ok(h.iter().map(|x| (m + c * (x - m)) / denom).collect())
}

pub fn js_estimate(y: &DataMatrix, q: usize) -> Result<ShrinkageEstimate> {
    let spectrum = top_eigenpairs_hdlss(y, q)?;
    let p = y.p();
    let top = &spectrum.top[0];
    let h = top.vector.clone();
    let s = top.value.sqrt();
    let eta: Vec<f64> = h.iter().map(|x| s * x).collect();

    let top_values: Vec<f64> = spectrum.top.iter().map(|e| e.value).collect();
    let nu_hat_sq = noise_estimate(spectrum.trace, &top_values, p, y.n(), q)?;
    let var_eta = var(&eta)?;
    let coef = shrinkage_coefficient(nu_hat_sq, var_eta)?;

    let eta_js = shrink_vector(&eta, coef.clamped)?;
    let len = norm(&eta_js);
    if !(len > 0.0) {
        return Err(Error::Degenerate(
            "shrunk vector is zero (c = 0 and ave(eta) = 0)".into(),
        ));
    }
    let m = ave(&eta)?;
    let moment_form = m * m + coef.clamped * coef.clamped * var_eta;
    let vector_form = len * len / p as f64;
    if (vector_form - moment_form).abs() > IDENTITY_TOL * moment_form.max(f64::MIN_POSITIVE) {
        return Err(Error::InconsistentSpectrum(format!(
            "|eta_js|^2 / p = {vector_form} but ave^2 + c^2 var = {moment_form}"
        )));
    }
    let h_js = orient(&eta_js.iter().map(|x| x / len).collect::<Vec<_>>())?;

    Ok(ShrinkageEstimate {
        h,
        top_eigenvalue: top.value,
        eta,
        nu_hat_sq,
        c_raw: coef.raw,
        c: coef.clamped,
        clamped: coef.was_clamped,
        eta_js,
        h_js,
        q,
        spectrum,
    })
}

/// Minimizer of `c -> mse(shrink(eta, c), theta)`: `cov(theta, eta) / var(eta)`.
pub fn oracle_c_mse(eta: &[f64], theta: &[f64]) -> Result<f64> {
    let v = var(eta)?;
    if !(v > 0.0) {
        return Err(Error::Degenerate("var(eta) is zero".into()));
    }
    Ok(cov(theta, eta)? / v)
}

/// Minimizer of `c -> sph(shrink(eta, c), theta)`:
/// `(ave(eta) / ave(theta)) oracle_c_mse`. Undefined when `ave(theta) = 0`.
pub fn oracle_c_sph(eta: &[f64], theta: &[f64]) -> Result<f64> {
    let c_mse = oracle_c_mse(eta, theta)?;
    let at = ave(theta)?;
    if at == 0.0 {
        return Err(Error::UndefinedRatio("ave(theta) is zero".into()));
    }
    Ok(ave(eta)? / at * c_mse)
}
