use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ScoreDist, SpikedModelSpec};
use crate::rng::trial_seed;

use super::verdict::Tracked;

/// Model parameters shared by every cell of a sweep; `p` comes from the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub n: usize,
    pub mu: f64,
    pub sigma: f64,
    pub delta: f64,
    #[serde(default)]
    pub score_dist: ScoreDist,
}

impl ModelParams {
    pub fn spec(&self, p: usize, seed: u64) -> SpikedModelSpec {
        SpikedModelSpec {
            p,
            n: self.n,
            mu: self.mu,
            sigma: self.sigma,
            delta: self.delta,
            score_dist: self.score_dist,
            seed,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CompareAgainst {
    Theta,
    Beta,
    #[default]
    Both,
}

impl CompareAgainst {
    pub fn beta(self) -> bool {
        matches!(self, CompareAgainst::Beta | CompareAgainst::Both)
    }
}

/// Verdict thresholds. None of these come from convergence rates (there
/// are none to go on); they are desk-scale engineering choices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Final-p median bound per tracked deviation, keyed by its name.
    pub final_median: BTreeMap<String, f64>,
    /// Inversions tolerated in an otherwise non-increasing median sequence.
    pub max_inversions: usize,
    /// Largest relative rise allowed for a tolerated inversion.
    pub inversion_ratio: f64,
    /// Upper bound on `mse_js / mse_raw` for every trial at the largest p.
    pub max_final_ratio_mse: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            final_median: Tracked::ALL
                .iter()
                .map(|t| (t.name().to_string(), t.default_tolerance()))
                .collect(),
            max_inversions: 1,
            inversion_ratio: 0.10,
            max_final_ratio_mse: 1.05,
        }
    }
}

impl Tolerances {
    pub fn final_median_for(&self, tracked: Tracked) -> f64 {
        self.final_median
            .get(tracked.name())
            .copied()
            .unwrap_or_else(|| tracked.default_tolerance())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelParams,
    pub p_grid: Vec<usize>,
    pub trials: usize,
    #[serde(default = "default_q")]
    pub q: usize,
    pub master_seed: u64,
    #[serde(default)]
    pub compare_against: CompareAgainst,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

fn default_q() -> usize {
    1
}

impl Default for ExperimentConfig {
    /// `mu = sigma = delta = 1`, `n = 8`, `p` in `{2^8, 2^10, 2^12, 2^14}`,
    /// 20 trials.
    fn default() -> Self {
        Self {
            model: ModelParams {
                n: 8,
                mu: 1.0,
                sigma: 1.0,
                delta: 1.0,
                score_dist: ScoreDist::Gaussian,
            },
            p_grid: vec![1 << 8, 1 << 10, 1 << 12, 1 << 14],
            trials: 20,
            q: 1,
            master_seed: 20_240_601,
            compare_against: CompareAgainst::Both,
            output_path: None,
            workers: None,
            tolerances: Tolerances::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be >= 1".into()));
        }
        if self.p_grid.is_empty() {
            return Err(Error::InvalidParameter("p_grid is empty".into()));
        }
        if self.p_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(
                "p_grid must be strictly ascending".into(),
            ));
        }
        if self.q == 0 {
            return Err(Error::InvalidParameter("q must be >= 1".into()));
        }
        if self.workers == Some(0) {
            return Err(Error::InvalidParameter("workers must be >= 1".into()));
        }
        for &p in &self.p_grid {
            self.model.spec(p, 0).validate()?;
            if self.q >= p.min(self.model.n) {
                return Err(Error::InvalidParameter(format!(
                    "q = {} needs min(n, p) > q, but p = {p}, n = {}",
                    self.q, self.model.n
                )));
            }
            if p <= self.model.n {
                log::warn!(
                    "p = {p} is not above n = {}; the HDLSS limits do not apply",
                    self.model.n
                );
            }
        }
        Ok(())
    }

    pub fn spec_for(&self, p: usize, trial_index: usize) -> SpikedModelSpec {
        self.model
            .spec(p, trial_seed(self.master_seed, trial_index as u64))
    }
}
