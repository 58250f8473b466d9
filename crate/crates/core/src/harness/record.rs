use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::metrics::{
    dot, mse, norm, predicted_raw_mse, predicted_raw_mse_vs_beta, predicted_raw_sph,
    snr_and_incoherence, sph,
};
use crate::model::generate;
use crate::rng::RNG_ALGORITHM;
use crate::shrink::{js_estimate, oracle_c_mse, oracle_c_sph};

use super::config::ExperimentConfig;

/// Losses, coefficients, and limit predictions for one realization.
/// Limits use the trial's realized `chi_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub p: usize,
    pub trial_index: usize,
    pub chi_n: f64,
    pub snr: f64,
    pub r_inf: f64,
    pub mse_raw: f64,
    pub mse_js: f64,
    pub sph_raw: f64,
    pub sph_js: f64,
    pub ratio_mse: f64,
    pub ratio_sph: f64,
    pub c_used: f64,
    pub c_raw: f64,
    pub c_oracle_mse: Option<f64>,
    pub c_oracle_sph: Option<f64>,
    pub c_inf: f64,
    pub d_inf: f64,
    /// Top `min(n, p)` eigenvalues of `S` divided by `p`.
    pub eigvals_over_p: Vec<f64>,
    /// `|x_p - x_inf|` with `x_p` signed toward `x_inf`.
    pub dual_vector_deviation: f64,
    pub seed_material: String,
    pub nu_hat_sq: f64,
    pub mse_raw_pred: f64,
    pub sph_raw_pred: f64,
    pub eig_top_pred: f64,
    pub eig_bulk_pred: f64,
    pub mse_raw_beta: Option<f64>,
    pub mse_raw_beta_pred: Option<f64>,
    pub mse_js_beta: Option<f64>,
    pub sph_raw_beta: Option<f64>,
    pub sph_js_beta: Option<f64>,
    pub clamped: bool,
    pub q: usize,
}

/// Column order of `trials.csv`.
pub const CSV_HEADER: [&str; 32] = [
    "p",
    "trial_index",
    "chi_n",
    "snr",
    "r_inf",
    "mse_raw",
    "mse_js",
    "sph_raw",
    "sph_js",
    "ratio_mse",
    "ratio_sph",
    "c_used",
    "c_raw",
    "c_oracle_mse",
    "c_oracle_sph",
    "c_inf",
    "d_inf",
    "eigvals_over_p",
    "dual_vector_deviation",
    "seed_material",
    "nu_hat_sq",
    "mse_raw_pred",
    "sph_raw_pred",
    "eig_top_pred",
    "eig_bulk_pred",
    "mse_raw_beta",
    "mse_raw_beta_pred",
    "mse_js_beta",
    "sph_raw_beta",
    "sph_js_beta",
    "clamped",
    "q",
];

fn fmt(v: f64) -> String {
    format!("{v}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt).unwrap_or_default()
}

impl TrialRecord {
    pub fn csv_row(&self) -> Vec<String> {
        vec![
            self.p.to_string(),
            self.trial_index.to_string(),
            fmt(self.chi_n),
            fmt(self.snr),
            fmt(self.r_inf),
            fmt(self.mse_raw),
            fmt(self.mse_js),
            fmt(self.sph_raw),
            fmt(self.sph_js),
            fmt(self.ratio_mse),
            fmt(self.ratio_sph),
            fmt(self.c_used),
            fmt(self.c_raw),
            fmt_opt(self.c_oracle_mse),
            fmt_opt(self.c_oracle_sph),
            fmt(self.c_inf),
            fmt(self.d_inf),
            self.eigvals_over_p
                .iter()
                .map(|v| fmt(*v))
                .collect::<Vec<_>>()
                .join(";"),
            fmt(self.dual_vector_deviation),
            self.seed_material.clone(),
            fmt(self.nu_hat_sq),
            fmt(self.mse_raw_pred),
            fmt(self.sph_raw_pred),
            fmt(self.eig_top_pred),
            fmt(self.eig_bulk_pred),
            fmt_opt(self.mse_raw_beta),
            fmt_opt(self.mse_raw_beta_pred),
            fmt_opt(self.mse_js_beta),
            fmt_opt(self.sph_raw_beta),
            fmt_opt(self.sph_js_beta),
            self.clamped.to_string(),
            self.q.to_string(),
        ]
    }

    /// Scalar fields by name, for aggregation.
    pub fn scalars(&self) -> Vec<(String, Option<f64>)> {
        let mut out: Vec<(String, Option<f64>)> = vec![
            ("chi_n".into(), Some(self.chi_n)),
            ("snr".into(), Some(self.snr)),
            ("r_inf".into(), Some(self.r_inf)),
            ("mse_raw".into(), Some(self.mse_raw)),
            ("mse_js".into(), Some(self.mse_js)),
            ("sph_raw".into(), Some(self.sph_raw)),
            ("sph_js".into(), Some(self.sph_js)),
            ("ratio_mse".into(), Some(self.ratio_mse)),
            ("ratio_sph".into(), Some(self.ratio_sph)),
            ("c_used".into(), Some(self.c_used)),
            ("c_raw".into(), Some(self.c_raw)),
            ("c_oracle_mse".into(), self.c_oracle_mse),
            ("c_oracle_sph".into(), self.c_oracle_sph),
            ("c_inf".into(), Some(self.c_inf)),
            ("d_inf".into(), Some(self.d_inf)),
            (
                "dual_vector_deviation".into(),
                Some(self.dual_vector_deviation),
            ),
            ("nu_hat_sq".into(), Some(self.nu_hat_sq)),
            ("mse_raw_beta".into(), self.mse_raw_beta),
            ("mse_js_beta".into(), self.mse_js_beta),
            ("sph_raw_beta".into(), self.sph_raw_beta),
            ("sph_js_beta".into(), self.sph_js_beta),
        ];
        for (i, v) in self.eigvals_over_p.iter().enumerate() {
            out.push((format!("eigvals_over_p[{i}]"), Some(*v)));
        }
        out
    }
}

pub fn run_trial(config: &ExperimentConfig, p: usize, trial_index: usize) -> Result<TrialRecord> {
    let spec = config.spec_for(p, trial_index);
    let (y, truth) = generate(&spec)?;
    let est = js_estimate(&y, config.q)?;
    let theta = &truth.theta;

    let mse_raw = mse(&est.eta, theta)?;
    let mse_js = mse(&est.eta_js, theta)?;
    let sph_raw = sph(&est.eta, theta)?;
    let sph_js = sph(&est.eta_js, theta)?;

    let params = &config.model;
    let theory = snr_and_incoherence(params.mu, params.sigma, params.delta, params.n, truth.chi_n)?;
    let noise_level = predicted_raw_mse(params.delta, params.n)?;

    let mut eigvals_over_p: Vec<f64> = est
        .spectrum
        .eigenvalues
        .iter()
        .take(params.n.min(p))
        .map(|v| v / p as f64)
        .collect();
    eigvals_over_p.resize(params.n.min(p), 0.0);

    let mut x_p = est.spectrum.dual_vectors[0].clone();
    if dot(&x_p, &truth.x_inf)? < 0.0 {
        x_p.iter_mut().for_each(|v| *v = -*v);
    }
    let diff: Vec<f64> = x_p.iter().zip(&truth.x_inf).map(|(a, b)| a - b).collect();

    let against_beta = config.compare_against.beta();
    let (mse_raw_beta, mse_raw_beta_pred, mse_js_beta, sph_raw_beta, sph_js_beta) = if against_beta
    {
        (
            Some(mse(&est.eta, &truth.beta)?),
            Some(predicted_raw_mse_vs_beta(
                params.delta,
                params.n,
                theory.snr,
                theory.r_inf,
                truth.chi_n,
            )?),
            Some(mse(&est.eta_js, &truth.beta)?),
            Some(sph(&est.eta, &truth.beta)?),
            Some(sph(&est.eta_js, &truth.beta)?),
        )
    } else {
        (None, None, None, None, None)
    };

    Ok(TrialRecord {
        p,
        trial_index,
        chi_n: truth.chi_n,
        snr: theory.snr,
        r_inf: theory.r_inf,
        mse_raw,
        mse_js,
        sph_raw,
        sph_js,
        ratio_mse: ratio(mse_js, mse_raw),
        ratio_sph: ratio(sph_js, sph_raw),
        c_used: est.c,
        c_raw: est.c_raw,
        c_oracle_mse: oracle_c_mse(&est.eta, theta).ok(),
        c_oracle_sph: oracle_c_sph(&est.eta, theta).ok(),
        c_inf: theory.c_inf(),
        d_inf: theory.d_inf(),
        eigvals_over_p,
        dual_vector_deviation: norm(&diff),
        seed_material: format!(
            "{RNG_ALGORITHM}:master={}:trial={trial_index}:seed={:#018x}",
            config.master_seed, spec.seed
        ),
        nu_hat_sq: est.nu_hat_sq,
        mse_raw_pred: noise_level,
        sph_raw_pred: predicted_raw_sph(theory.snr, theory.r_inf)?,
        eig_top_pred: truth.chi_n
            * truth.chi_n
            * (params.sigma * params.sigma + params.mu * params.mu)
            + noise_level,
        eig_bulk_pred: noise_level,
        mse_raw_beta,
        mse_raw_beta_pred,
        mse_js_beta,
        sph_raw_beta,
        sph_js_beta,
        clamped: est.clamped,
        q: config.q,
    })
}

fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        f64::NAN
    }
}
