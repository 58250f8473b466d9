use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::config::{ExperimentConfig, Tolerances};
use super::record::TrialRecord;

/// A per-trial deviation from a limit, tracked across the p grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Tracked {
    /// `|mse_raw n / delta^2 - 1|`.
    MseRaw,
    /// `|sph_raw - r^2 / (r^2 + SNR^2)|`.
    SphRaw,
    /// `|mse_js / mse_raw - c_inf|`.
    RatioMse,
    /// `|sph_js / sph_raw - d_inf|`.
    RatioSph,
    /// `|mse(eta, beta) / predicted - 1|`.
    MseRawBeta,
    /// Relative error of the top eigenvalue over p.
    EigTop,
    /// Largest relative error of the remaining eigenvalues over p.
    EigBulk,
    /// `|x_p - x_inf|`.
    DualVector,
    /// `|c - c_inf|`.
    CoefUsed,
    /// `|c_mse - c_inf|`.
    CoefOracleMse,
    /// `|c_sph - c_inf|`.
    CoefOracleSph,
}

impl Tracked {
    pub const ALL: [Tracked; 11] = [
        Tracked::MseRaw,
        Tracked::SphRaw,
        Tracked::RatioMse,
        Tracked::RatioSph,
        Tracked::MseRawBeta,
        Tracked::EigTop,
        Tracked::EigBulk,
        Tracked::DualVector,
        Tracked::CoefUsed,
        Tracked::CoefOracleMse,
        Tracked::CoefOracleSph,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Tracked::MseRaw => "mse_raw_vs_noise",
            Tracked::SphRaw => "sph_raw_vs_limit",
            Tracked::RatioMse => "ratio_mse_vs_c_inf",
            Tracked::RatioSph => "ratio_sph_vs_d_inf",
            Tracked::MseRawBeta => "mse_raw_beta_vs_factor",
            Tracked::EigTop => "eig_top_rel",
            Tracked::EigBulk => "eig_bulk_rel",
            Tracked::DualVector => "dual_vector_deviation",
            Tracked::CoefUsed => "c_used_vs_c_inf",
            Tracked::CoefOracleMse => "c_oracle_mse_vs_c_inf",
            Tracked::CoefOracleSph => "c_oracle_sph_vs_c_inf",
        }
    }

    pub fn default_tolerance(self) -> f64 {
        match self {
            Tracked::MseRaw | Tracked::MseRawBeta | Tracked::EigTop | Tracked::EigBulk => 0.15,
            Tracked::SphRaw | Tracked::DualVector => 0.05,
            Tracked::RatioMse
            | Tracked::RatioSph
            | Tracked::CoefUsed
            | Tracked::CoefOracleMse
            | Tracked::CoefOracleSph => 0.10,
        }
    }

    pub fn deviation(self, r: &TrialRecord) -> Option<f64> {
        let v = match self {
            Tracked::MseRaw => (r.mse_raw / r.mse_raw_pred - 1.0).abs(),
            Tracked::SphRaw => (r.sph_raw - r.sph_raw_pred).abs(),
            Tracked::RatioMse => (r.ratio_mse - r.c_inf).abs(),
            Tracked::RatioSph => (r.ratio_sph - r.d_inf).abs(),
            Tracked::MseRawBeta => (r.mse_raw_beta? / r.mse_raw_beta_pred? - 1.0).abs(),
            Tracked::EigTop => (r.eigvals_over_p.first()? / r.eig_top_pred - 1.0).abs(),
            Tracked::EigBulk => r
                .eigvals_over_p
                .iter()
                .skip(1)
                .map(|v| (v / r.eig_bulk_pred - 1.0).abs())
                .reduce(f64::max)?,
            Tracked::DualVector => r.dual_vector_deviation,
            Tracked::CoefUsed => (r.c_used - r.c_inf).abs(),
            Tracked::CoefOracleMse => (r.c_oracle_mse? - r.c_inf).abs(),
            Tracked::CoefOracleSph => (r.c_oracle_sph? - r.c_inf).abs(),
        };
        v.is_finite().then_some(v)
    }

    /// Whether the limit behind this deviation exists for `config`.
    pub fn applies_to(self, config: &ExperimentConfig) -> bool {
        match self {
            Tracked::MseRawBeta => config.compare_against.beta(),
            // c_sph divides by ave(theta), whose limit is chi_n mu.
            Tracked::CoefOracleSph => config.model.mu != 0.0,
            _ => true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub median: f64,
    /// Median absolute deviation from the median, unscaled.
    pub mad: f64,
    pub count: usize,
}

pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    })
}

pub fn summarize(values: &[f64]) -> Option<Summary> {
    let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    let m = median(&finite)?;
    let spread: Vec<f64> = finite.iter().map(|v| (v - m).abs()).collect();
    Some(Summary {
        median: m,
        mad: median(&spread)?,
        count: finite.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub p: usize,
    pub trials_ok: usize,
    pub trials_failed: usize,
    pub metrics: BTreeMap<String, Summary>,
}

/// Per-p median and MAD of every record scalar and every tracked
/// deviation. Rows follow `p_grid`; `failed` holds `(p, count)` pairs.
pub fn aggregate(
    p_grid: &[usize],
    records: &[TrialRecord],
    failed: &[(usize, usize)],
) -> Result<Vec<AggregateRow>> {
    if records.is_empty() && failed.is_empty() {
        return Err(Error::InvalidParameter("nothing to aggregate".into()));
    }
    let mut rows = Vec::with_capacity(p_grid.len());
    for &p in p_grid {
        let cell: Vec<&TrialRecord> = records.iter().filter(|r| r.p == p).collect();
        let mut columns: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        for r in &cell {
            for (name, value) in r.scalars() {
                if let Some(v) = value {
                    columns.entry(name).or_default().push(v);
                }
            }
            for t in Tracked::ALL {
                if let Some(v) = t.deviation(r) {
                    columns
                        .entry(format!("dev:{}", t.name()))
                        .or_default()
                        .push(v);
                }
            }
        }
        let metrics = columns
            .into_iter()
            .filter_map(|(k, v)| summarize(&v).map(|s| (k, s)))
            .collect();
        rows.push(AggregateRow {
            p,
            trials_ok: cell.len(),
            trials_failed: failed
                .iter()
                .filter(|(fp, _)| *fp == p)
                .map(|(_, c)| c)
                .sum(),
            metrics,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    /// `(p, median deviation)` for every grid point with data.
    pub medians: Vec<(usize, f64)>,
    pub inversions: usize,
    pub monotone: bool,
    pub final_value: f64,
    pub tolerance: f64,
    pub within_tolerance: bool,
    pub passed: bool,
}

/// Non-increasing up to `max_inversions` rises of at most `ratio` relative.
pub fn is_median_decreasing(medians: &[f64], max_inversions: usize, ratio: f64) -> (bool, usize) {
    let mut inversions = 0;
    let mut ok = true;
    for w in medians.windows(2) {
        if w[1] > w[0] {
            inversions += 1;
            if w[1] > w[0] * (1.0 + ratio) {
                ok = false;
            }
        }
    }
    (ok && inversions <= max_inversions, inversions)
}

/// Verdicts for every applicable tracked deviation, plus the per-trial
/// bound on `mse_js / mse_raw` at the largest p. Empty for grids with
/// fewer than two points.
pub fn verdicts(
    config: &ExperimentConfig,
    rows: &[AggregateRow],
    records: &[TrialRecord],
) -> Vec<Verdict> {
    if config.p_grid.len() < 2 {
        return Vec::new();
    }
    let tol: &Tolerances = &config.tolerances;
    let mut out = Vec::new();
    for t in Tracked::ALL.into_iter().filter(|t| t.applies_to(config)) {
        let key = format!("dev:{}", t.name());
        let medians: Vec<(usize, f64)> = rows
            .iter()
            .filter_map(|r| r.metrics.get(&key).map(|s| (r.p, s.median)))
            .collect();
        let values: Vec<f64> = medians.iter().map(|m| m.1).collect();
        let (monotone, inversions) =
            is_median_decreasing(&values, tol.max_inversions, tol.inversion_ratio);
        let tolerance = tol.final_median_for(t);
        let last_p = *config.p_grid.last().expect("non-empty grid");
        let final_value = medians
            .last()
            .filter(|m| m.0 == last_p)
            .map_or(f64::NAN, |m| m.1);
        let within_tolerance = final_value <= tolerance;
        out.push(Verdict {
            name: t.name().to_string(),
            monotone: monotone && medians.len() >= 2,
            inversions,
            medians,
            final_value,
            tolerance,
            within_tolerance,
            passed: monotone && within_tolerance,
        });
    }

    let last_p = *config.p_grid.last().expect("non-empty grid");
    let worst = records
        .iter()
        .filter(|r| r.p == last_p)
        .map(|r| r.ratio_mse)
        .fold(f64::NAN, f64::max);
    let within = worst <= tol.max_final_ratio_mse;
    out.push(Verdict {
        name: "max_ratio_mse_at_final_p".into(),
        medians: Vec::new(),
        inversions: 0,
        monotone: true,
        final_value: worst,
        tolerance: tol.max_final_ratio_mse,
        within_tolerance: within,
        passed: within,
    });
    out
}
