//! Monte Carlo sweeps over the dimension `p`.
//!
//! Each `(p, trial)` cell generates data from the spiked model, runs the
//! estimator, and records losses next to their predicted limits. Cells are
//! independent and run on a rayon pool; results are sorted by
//! `(p, trial_index)` before aggregation, so the report does not depend on
//! scheduling. A trial's seed depends on the master seed and the trial
//! index only, which makes each trial a single sample path observed at
//! growing `p`.

mod config;
mod record;
mod verdict;

use std::fs;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use config::{CompareAgainst, ExperimentConfig, ModelParams, Tolerances};
pub use record::{run_trial, TrialRecord, CSV_HEADER};
pub use verdict::{
    aggregate, is_median_decreasing, median, summarize, verdicts, AggregateRow, Summary, Tracked,
    Verdict,
};

use crate::error::{Error, Result};
use crate::rng::RNG_ALGORITHM;

pub const WORKERS_ENV: &str = "STEINPC_WORKERS";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailedTrial {
    pub p: usize,
    pub trial_index: usize,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub rng_algorithm: String,
    pub workers: usize,
    pub elapsed_seconds: f64,
    pub version: String,
    pub tolerance_note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub config: ExperimentConfig,
    pub aggregates: Vec<AggregateRow>,
    pub verdicts: Vec<Verdict>,
    pub failures: Vec<FailedTrial>,
    pub metadata: RunMetadata,
    #[serde(skip)]
    pub records: Vec<TrialRecord>,
}

impl SweepReport {
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// One row per successful trial, in `(p, trial_index)` order.
    pub fn trials_csv(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
        w.write_record(CSV_HEADER)?;
        for r in &self.records {
            w.write_record(r.csv_row())?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::io("trials.csv", e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    /// Writes `trials.csv` and `report.json` into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let csv_path = dir.join("trials.csv");
        fs::write(&csv_path, self.trials_csv()?).map_err(|e| Error::io(&csv_path, e))?;
        let json_path = dir.join("report.json");
        fs::write(&json_path, self.to_json()?).map_err(|e| Error::io(&json_path, e))?;
        Ok(())
    }
}

/// Worker count: the config value, else `STEINPC_WORKERS`, else rayon's default.
pub fn resolve_workers(config: &ExperimentConfig) -> usize {
    config
        .workers
        .or_else(|| {
            std::env::var(WORKERS_ENV)
                .ok()?
                .parse()
                .ok()
                .filter(|w| *w > 0)
        })
        .unwrap_or_else(rayon::current_num_threads)
}

pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepReport> {
    config.validate()?;
    let started = Instant::now();
    let workers = resolve_workers(config);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;

    let cells: Vec<(usize, usize)> = config
        .p_grid
        .iter()
        .flat_map(|&p| (0..config.trials).map(move |t| (p, t)))
        .collect();
    let mut outcomes: Vec<((usize, usize), Result<TrialRecord>)> = pool.install(|| {
        cells
            .par_iter()
            .map(|&(p, t)| ((p, t), run_trial(config, p, t)))
            .collect()
    });
    outcomes.sort_by_key(|(cell, _)| *cell);

    let mut records = Vec::new();
    let mut failures = Vec::new();
    for ((p, trial_index), outcome) in outcomes {
        match outcome {
            Ok(r) => records.push(r),
            Err(e) => {
                log::warn!("trial {trial_index} at p = {p} failed: {e}");
                failures.push(FailedTrial {
                    p,
                    trial_index,
                    error: e.to_string(),
                });
            }
        }
    }
    let failed_counts: Vec<(usize, usize)> = config
        .p_grid
        .iter()
        .map(|&p| (p, failures.iter().filter(|f| f.p == p).count()))
        .collect();
    let aggregates = aggregate(&config.p_grid, &records, &failed_counts)?;
    let verdicts = verdicts(config, &aggregates, &records);

    let report = SweepReport {
        config: config.clone(),
        aggregates,
        verdicts,
        failures,
        metadata: RunMetadata {
            rng_algorithm: RNG_ALGORITHM.to_string(),
            workers,
            elapsed_seconds: started.elapsed().as_secs_f64(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            tolerance_note: "no convergence rates are known for these limits; \
                             all thresholds are desk-scale engineering choices"
                .to_string(),
        },
        records,
    };
    if let Some(dir) = &config.output_path {
        report.write_to(dir)?;
    }
    Ok(report)
}
