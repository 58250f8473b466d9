//! Vector statistics, the MSE and SPH losses, their closed forms under
//! shrinkage, and the limiting values predicted for the spiked model.
//!
//! `var` and `cov` divide by the vector length `d`, not `d - 1`. Every
//! identity in this crate relies on that population convention, so do not
//! swap in a library routine that uses the unbiased divisor.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Squared cosines above `1 + COSINE_SLACK` are reported instead of clamped.
pub const COSINE_SLACK: f64 = 1e-9;

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0_f64;
    let mut carry = 0.0_f64;
    for x in values {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            carry += (sum - t) + x;
        } else {
            carry += (x - t) + sum;
        }
        sum = t;
    }
    sum + carry
}

pub fn dot(u: &[f64], v: &[f64]) -> Result<f64> {
    same_len(u, v)?;
    Ok(compensated_sum(u.iter().zip(v).map(|(a, b)| a * b)))
}

pub fn norm(u: &[f64]) -> f64 {
    compensated_sum(u.iter().map(|a| a * a)).sqrt()
}

pub fn ave(u: &[f64]) -> Result<f64> {
    non_empty(u)?;
    Ok(compensated_sum(u.iter().copied()) / u.len() as f64)
}

pub fn var(u: &[f64]) -> Result<f64> {
    cov(u, u)
}

pub fn cov(u: &[f64], v: &[f64]) -> Result<f64> {
    same_len(u, v)?;
    non_empty(u)?;
    let mu = ave(u)?;
    let mv = ave(v)?;
    let s = compensated_sum(u.iter().zip(v).map(|(a, b)| (a - mu) * (b - mv)));
    Ok(s / u.len() as f64)
}

/// Mean squared entrywise error `<eta - theta, eta - theta> / p`.
pub fn mse(eta: &[f64], theta: &[f64]) -> Result<f64> {
    same_len(eta, theta)?;
    non_empty(eta)?;
    let s = compensated_sum(eta.iter().zip(theta).map(|(a, b)| (a - b) * (a - b)));
    Ok(s / eta.len() as f64)
}

/// Squared sine of the angle between `eta` and `theta`.
pub fn sph(eta: &[f64], theta: &[f64]) -> Result<f64> {
    same_len(eta, theta)?;
    non_empty(eta)?;
    let ne = norm(eta);
    let nt = norm(theta);
    if ne == 0.0 || nt == 0.0 {
        return Err(Error::Degenerate("sph of a zero vector".into()));
    }
    let cosine = dot(eta, theta)? / (ne * nt);
    one_minus_clamped(cosine * cosine)
}

fn one_minus_clamped(cos_sq: f64) -> Result<f64> {
    if !cos_sq.is_finite() {
        return Err(Error::Degenerate(format!("squared cosine is {cos_sq}")));
    }
    if cos_sq > 1.0 + COSINE_SLACK {
        return Err(Error::CosineOverflow { value: cos_sq });
    }
    Ok(1.0 - cos_sq.clamp(0.0, 1.0))
}

/// First and second moments of an `(eta, theta)` pair. The losses of the
/// shrunk vector `ave(eta) + c (eta - ave(eta))` depend on `c` only through
/// these five numbers, so a whole curve in `c` costs O(1) per point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShrinkMoments {
    pub ave_eta: f64,
    pub ave_theta: f64,
    pub var_eta: f64,
    pub var_theta: f64,
    pub cov_eta_theta: f64,
}

impl ShrinkMoments {
    pub fn from_vectors(eta: &[f64], theta: &[f64]) -> Result<Self> {
        Ok(Self {
            ave_eta: ave(eta)?,
            ave_theta: ave(theta)?,
            var_eta: var(eta)?,
            var_theta: var(theta)?,
            cov_eta_theta: cov(eta, theta)?,
        })
    }

    pub fn mse_at(&self, c: f64) -> f64 {
        mse_shrunk_closed_form(
            c,
            self.ave_eta,
            self.ave_theta,
            self.var_theta,
            self.var_eta,
            self.cov_eta_theta,
        )
    }

    pub fn sph_at(&self, c: f64) -> Result<f64> {
        sph_shrunk_closed_form(
            c,
            self.ave_eta,
            self.ave_theta,
            self.var_theta,
            self.var_eta,
            self.cov_eta_theta,
        )
    }
}

/// `mse(shrink(eta, c), theta)` from moments:
/// `(ave_eta - ave_theta)^2 + var_theta + c^2 var_eta - 2 c cov`.
pub fn mse_shrunk_closed_form(
    c: f64,
    ave_eta: f64,
    ave_theta: f64,
    var_theta: f64,
    var_eta: f64,
    cov_eta_theta: f64,
) -> f64 {
    let bias = ave_eta - ave_theta;
    bias * bias + var_theta + c * c * var_eta - 2.0 * c * cov_eta_theta
}

/// `sph(shrink(eta, c), theta)` from moments.
pub fn sph_shrunk_closed_form(
    c: f64,
    ave_eta: f64,
    ave_theta: f64,
    var_theta: f64,
    var_eta: f64,
    cov_eta_theta: f64,
) -> Result<f64> {
    let inner = ave_eta * ave_theta + c * cov_eta_theta;
    let denom = (ave_eta * ave_eta + c * c * var_eta) * (ave_theta * ave_theta + var_theta);
    if !(denom > 0.0) {
        return Err(Error::Degenerate(format!(
            "sph closed form has denominator {denom}"
        )));
    }
    one_minus_clamped(inner * inner / denom)
}

/// Limiting quantities of an `eta = theta + w` decomposition: `ave(theta) -> m`,
/// `var(theta) -> xi^2`, `var(w) -> nu^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoryParams {
    pub m: f64,
    pub xi: f64,
    pub nu: f64,
    pub snr: f64,
    pub r_inf: f64,
}

impl TheoryParams {
    pub fn new(m: f64, xi: f64, nu: f64) -> Result<Self> {
        if !(xi > 0.0 && xi.is_finite()) || !(nu > 0.0 && nu.is_finite()) || !m.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "need finite m and positive xi, nu (m={m}, xi={xi}, nu={nu})"
            )));
        }
        let ratio = m / xi;
        Ok(Self {
            m,
            xi,
            nu,
            snr: xi / nu,
            r_inf: 1.0 / (1.0 + ratio * ratio).sqrt(),
        })
    }

    pub fn c_inf(&self) -> f64 {
        c_inf_unchecked(self.snr)
    }

    pub fn d_inf(&self) -> f64 {
        d_inf_unchecked(self.snr, self.r_inf)
    }
}

/// Theory parameters of the spiked model for one realization of the scores:
/// `m = chi_n mu`, `xi = chi_n sigma`, `nu = delta / sqrt(n)`.
pub fn snr_and_incoherence(
    mu: f64,
    sigma: f64,
    delta: f64,
    n: usize,
    chi_n: f64,
) -> Result<TheoryParams> {
    if !(sigma > 0.0) || !(delta > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "sigma and delta must be positive (sigma={sigma}, delta={delta})"
        )));
    }
    check_n(n)?;
    if !(chi_n > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "chi_n must be positive, got {chi_n}"
        )));
    }
    TheoryParams::new(chi_n * mu, chi_n * sigma, delta / (n as f64).sqrt())
}

/// `c_inf = SNR^2 / (1 + SNR^2)`.
pub fn limit_c_inf(snr: f64) -> Result<f64> {
    check_snr(snr)?;
    Ok(c_inf_unchecked(snr))
}

/// `d_inf = c_inf + r_inf^2 / (1 + SNR^2) = (SNR^2 + r_inf^2) / (1 + SNR^2)`.
pub fn limit_d_inf(snr: f64, r_inf: f64) -> Result<f64> {
    check_snr(snr)?;
    check_r(r_inf)?;
    Ok(d_inf_unchecked(snr, r_inf))
}

fn c_inf_unchecked(snr: f64) -> f64 {
    let s2 = snr * snr;
    s2 / (1.0 + s2)
}

fn d_inf_unchecked(snr: f64, r_inf: f64) -> f64 {
    let s2 = snr * snr;
    (s2 + r_inf * r_inf) / (1.0 + s2)
}

/// Limiting `mse(eta, chi_n beta) = delta^2 / n`.
pub fn predicted_raw_mse(delta: f64, n: usize) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "delta must be positive, got {delta}"
        )));
    }
    check_n(n)?;
    Ok(delta * delta / n as f64)
}

/// Limiting `mse(eta, beta)`: the `theta = chi_n beta` value inflated by
/// `1 + (SNR^2 / r_inf^2) ((chi_n - 1) / chi_n)^2`.
pub fn predicted_raw_mse_vs_beta(
    delta: f64,
    n: usize,
    snr: f64,
    r_inf: f64,
    chi_n: f64,
) -> Result<f64> {
    if !(chi_n > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "chi_n must be positive, got {chi_n}"
        )));
    }
    check_snr(snr)?;
    check_r(r_inf)?;
    let base = predicted_raw_mse(delta, n)?;
    let rel = (chi_n - 1.0) / chi_n;
    Ok(base * (1.0 + snr * snr / (r_inf * r_inf) * rel * rel))
}

/// Limiting `sph(h, b) = r_inf^2 / (r_inf^2 + SNR^2)`.
pub fn predicted_raw_sph(snr: f64, r_inf: f64) -> Result<f64> {
    check_snr(snr)?;
    check_r(r_inf)?;
    let r2 = r_inf * r_inf;
    Ok(r2 / (r2 + snr * snr))
}

fn check_snr(snr: f64) -> Result<()> {
    if snr >= 0.0 && snr.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "snr must be finite and >= 0, got {snr}"
        )))
    }
}

fn check_r(r_inf: f64) -> Result<()> {
    if r_inf > 0.0 && r_inf <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "r_inf must lie in (0, 1], got {r_inf}"
        )))
    }
}

fn check_n(n: usize) -> Result<()> {
    if n >= 2 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "need n >= 2 samples, got {n}"
        )))
    }
}

fn non_empty(u: &[f64]) -> Result<()> {
    if u.is_empty() {
        Err(Error::Length { len: 0, min: 1 })
    } else {
        Ok(())
    }
}

fn same_len(u: &[f64], v: &[f64]) -> Result<()> {
    if u.len() == v.len() {
        Ok(())
    } else {
        Err(Error::LengthMismatch {
            left: u.len(),
            right: v.len(),
        })
    }
}
