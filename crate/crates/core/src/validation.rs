//! Self-checks runnable from an installed binary.
//!
//! The quick suites compare the library against brute-force references on
//! random inputs: moment formulas against losses of explicitly shrunk
//! vectors, the optimal coefficients against golden-section search, the
//! dual eigensolver against a direct decomposition of `S`, and the two
//! perturbation inequalities. The full run adds the convergence sweeps.

use std::time::Instant;

use rand::Rng;
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::eig::{
    davis_kahan_check, jacobi_eigh, sample_covariance, top_eigenpairs_hdlss, weyl_check,
    DavisKahanOutcome, SymmetricMatrix, DEFAULT_DIRECT_CAP,
};
use crate::error::Result;
use crate::harness::{run_sweep, ExperimentConfig};
use crate::metrics::{dot, mse, sph, ShrinkMoments};
use crate::model::generate;
use crate::model::{ScoreDist, SpikedModelSpec};
use crate::rng::{substream, Purpose};
use crate::shrink::{oracle_c_mse, oracle_c_sph, shrink_vector};

const SUITE_SEED: u64 = 0x5eed_7e57;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub name: String,
    pub cases: usize,
    pub failures: usize,
    /// Largest observed error, in the units of `tolerance`, floored at zero.
    pub worst: f64,
    pub tolerance: f64,
    pub elapsed_seconds: f64,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub full: bool,
    pub suites: Vec<SuiteResult>,
    pub passed: bool,
}

struct Tally {
    name: &'static str,
    tolerance: f64,
    started: Instant,
    cases: usize,
    failures: usize,
    worst: f64,
    notes: Vec<String>,
}

impl Tally {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Self {
            name,
            tolerance,
            started: Instant::now(),
            cases: 0,
            failures: 0,
            worst: 0.0,
            notes: Vec::new(),
        }
    }

    /// Records one case with error `err`; errors compare against `tolerance`.
    fn case(&mut self, err: f64) {
        self.cases += 1;
        if err.is_nan() || err > self.tolerance {
            self.failures += 1;
        }
        if err.is_nan() || err > self.worst {
            self.worst = err;
        }
    }

    fn error(&mut self, what: impl std::fmt::Display) {
        self.cases += 1;
        self.failures += 1;
        if self.notes.len() < 5 {
            self.notes.push(what.to_string());
        }
    }

    fn finish(self) -> SuiteResult {
        SuiteResult {
            name: self.name.to_string(),
            cases: self.cases,
            failures: self.failures,
            worst: self.worst,
            tolerance: self.tolerance,
            elapsed_seconds: self.started.elapsed().as_secs_f64(),
            passed: self.failures == 0 && self.cases > 0,
            notes: self.notes,
        }
    }
}

fn gaussian_vec(rng: &mut ChaCha20Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.sample(StandardNormal)).collect()
}

/// A random `(eta, theta)` pair with nonzero means and correlated entries.
fn random_pair(rng: &mut ChaCha20Rng) -> (Vec<f64>, Vec<f64>) {
    let p = rng.random_range(3..60);
    let shift_eta: f64 = rng.random_range(-2.0..2.0);
    let shift_theta: f64 = rng.random_range(-2.0..2.0);
    let slope: f64 = rng.random_range(-1.5..1.5);
    let base = gaussian_vec(rng, p);
    let eta: Vec<f64> = base.iter().map(|x| x + shift_eta).collect();
    let theta: Vec<f64> = base
        .iter()
        .map(|x| slope * x + shift_theta + 0.5 * rng.sample::<f64, _>(StandardNormal))
        .collect();
    (eta, theta)
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Moment formulas against losses of explicitly shrunk vectors.
pub fn identity_suite(cases: usize) -> SuiteResult {
    let mut t = Tally::new("exact_identities", 1e-10);
    let mut rng = substream(SUITE_SEED, Purpose::Validation, 1);
    for _ in 0..cases {
        let (eta, theta) = random_pair(&mut rng);
        let c: f64 = rng.random_range(0.0..1.0);
        let outcome = (|| -> Result<f64> {
            let m = ShrinkMoments::from_vectors(&eta, &theta)?;
            let shrunk = shrink_vector(&eta, c)?;
            let e_mse = rel_err(m.mse_at(c), mse(&shrunk, &theta)?);
            let e_sph = rel_err(m.sph_at(c)?, sph(&shrunk, &theta)?);
            Ok(e_mse.max(e_sph))
        })();
        match outcome {
            Ok(err) => t.case(err),
            Err(e) => t.error(e),
        }
    }
    t.finish()
}

/// Golden-section minimizer of `f` on `[lo, hi]`.
fn golden_section<T: PartialOrd, F: FnMut(f64) -> T>(
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    0.5 * (lo + hi)
}

/// Grid scan of `coarse` over `[-10, 10]`, then golden section of `fine`
/// within two grid steps of the best point. `None` when the grid minimum
/// sits on the boundary.
fn minimize_scalar<T: PartialOrd>(
    coarse: impl Fn(f64) -> f64,
    fine: impl FnMut(f64) -> T,
) -> Option<f64> {
    const STEPS: usize = 2000;
    let (lo, hi) = (-10.0, 10.0);
    let h = (hi - lo) / STEPS as f64;
    let best = (0..=STEPS)
        .map(|i| (i, coarse(lo + i as f64 * h)))
        .min_by(|a, b| a.1.total_cmp(&b.1))?
        .0;
    if best == 0 || best == STEPS {
        return None;
    }
    let center = lo + best as f64 * h;
    Some(golden_section(
        fine,
        center - 2.0 * h,
        center + 2.0 * h,
        1e-12 * center.abs().max(1.0),
    ))
}

/// Loss evaluations in double-double arithmetic. In plain doubles a flat
/// minimum can only be located to about `sqrt(eps)`, too coarse to test
/// coefficients to 1e-6. Only sums and products are used, so the
/// comparisons are exact to roughly 30 digits.
mod extended {
    use std::cmp::Ordering;

    use twofloat::TwoFloat;

    /// `p` times the shrunk vector.
    fn shrink_scaled(eta: &[f64], c: f64) -> Vec<TwoFloat> {
        let total = eta.iter().fold(TwoFloat::from(0.0), |acc, e| acc + *e);
        let p = eta.len() as f64;
        eta.iter()
            .map(|e| total + (TwoFloat::from(*e) * p - total) * c)
            .collect()
    }

    /// Sum of squared errors of the scaled vectors.
    pub fn mse(eta: &[f64], theta: &[f64], c: f64) -> TwoFloat {
        let p = eta.len() as f64;
        shrink_scaled(eta, c)
            .iter()
            .zip(theta)
            .fold(TwoFloat::from(0.0), |acc, (x, t)| {
                let d = *x - TwoFloat::from(*t) * p;
                acc + d * d
            })
    }

    /// `1 - num / den`, ordered by cross-multiplication.
    pub struct Sph {
        num: TwoFloat,
        den: TwoFloat,
    }

    impl PartialEq for Sph {
        fn eq(&self, other: &Self) -> bool {
            self.partial_cmp(other) == Some(Ordering::Equal)
        }
    }

    impl PartialOrd for Sph {
        fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
            (other.num * self.den).partial_cmp(&(self.num * other.den))
        }
    }

    pub fn sph(eta: &[f64], theta: &[f64], c: f64) -> Sph {
        let s = shrink_scaled(eta, c);
        let zero = TwoFloat::from(0.0);
        let ab = s.iter().zip(theta).fold(zero, |acc, (x, t)| acc + *x * *t);
        let aa = s.iter().fold(zero, |acc, x| acc + *x * *x);
        let bb = theta
            .iter()
            .fold(zero, |acc, t| acc + TwoFloat::from(*t) * *t);
        Sph {
            num: ab * ab,
            den: aa * bb,
        }
    }
}

/// Closed-form optimal coefficients against direct numerical minimization.
pub fn oracle_suite(cases: usize) -> SuiteResult {
    let mut t = Tally::new("oracle_equivalence", 1e-6);
    let mut rng = substream(SUITE_SEED, Purpose::Validation, 2);
    let mut done_mse = 0;
    let mut done_sph = 0;
    let mut skipped = 0;
    while done_mse < cases || done_sph < cases {
        let (eta, theta) = random_pair(&mut rng);
        let plain_mse = |c: f64| {
            shrink_vector(&eta, c)
                .and_then(|s| mse(&s, &theta))
                .unwrap_or(f64::INFINITY)
        };
        let plain_sph = |c: f64| {
            shrink_vector(&eta, c)
                .and_then(|s| sph(&s, &theta))
                .unwrap_or(f64::INFINITY)
        };
        if done_mse < cases {
            let found = minimize_scalar(plain_mse, |c| extended::mse(&eta, &theta, c));
            match (found, oracle_c_mse(&eta, &theta)) {
                (Some(found), Ok(c)) => {
                    t.case((found - c).abs());
                    done_mse += 1;
                }
                (None, _) => skipped += 1,
                (_, Err(e)) => t.error(e),
            }
        }
        if done_sph < cases {
            let found = minimize_scalar(plain_sph, |c| extended::sph(&eta, &theta, c));
            match (found, oracle_c_sph(&eta, &theta)) {
                (Some(found), Ok(c)) => {
                    t.case((found - c).abs());
                    done_sph += 1;
                }
                (None, _) => skipped += 1,
                (_, Err(e)) => t.error(e),
            }
        }
    }
    if skipped > 0 {
        t.notes.push(format!(
            "{skipped} draws had their minimizer outside [-10, 10] and were redrawn"
        ));
    }
    t.finish()
}

/// Dual-path eigenpairs against a direct decomposition of `S`.
pub fn duality_suite(cases: usize) -> SuiteResult {
    let mut t = Tally::new("duality", 1e-8);
    let mut rng = substream(SUITE_SEED, Purpose::Validation, 3);
    for case in 0..cases {
        let n = rng.random_range(3..=12);
        let p = rng.random_range(n + 1..=200);
        let spec = SpikedModelSpec {
            p,
            n,
            mu: rng.random_range(-1.0..2.0),
            sigma: rng.random_range(0.5..2.0),
            delta: rng.random_range(0.3..2.0),
            score_dist: ScoreDist::Gaussian,
            seed: rng.random(),
        };
        let q = rng.random_range(1..n.min(p));
        let outcome = (|| -> Result<f64> {
            let (y, _) = generate(&spec)?;
            let dual = top_eigenpairs_hdlss(&y, q)?;
            let direct = jacobi_eigh(&sample_covariance(&y, DEFAULT_DIRECT_CAP)?)?;
            let mut worst = 0.0f64;
            for (a, b) in dual.top.iter().zip(&direct) {
                let value_err = rel_err(a.value, b.value);
                let align = 1.0 - dot(&a.vector, &b.vector)?.abs();
                worst = worst.max(value_err).max(align);
            }
            Ok(worst)
        })();
        match outcome {
            Ok(err) => t.case(err),
            Err(e) => t.error(format!("case {case}: {e}")),
        }
    }
    t.finish()
}

fn random_symmetric(rng: &mut ChaCha20Rng, d: usize, scale: f64) -> SymmetricMatrix {
    SymmetricMatrix::from_upper(d, |_, _| scale * rng.sample::<f64, _>(StandardNormal))
}

fn random_orthonormal(rng: &mut ChaCha20Rng, d: usize) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(d);
    while basis.len() < d {
        let mut v = gaussian_vec(rng, d);
        for _ in 0..2 {
            for b in &basis {
                let proj: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= proj * y);
            }
        }
        let len = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if len > 1e-6 {
            basis.push(v.into_iter().map(|x| x / len).collect());
        }
    }
    basis
}

/// Weyl on unconstrained pairs, Davis-Kahan on pairs with every
/// eigenvalue gap of `A` at least 0.5. Errors are `lhs - rhs` of the bound.
pub fn perturbation_suite(cases: usize) -> SuiteResult {
    let mut t = Tally::new("perturbation_bounds", 1e-9);
    let mut rng = substream(SUITE_SEED, Purpose::Validation, 4);
    for _ in 0..cases {
        let d = rng.random_range(2..=16);
        let a = random_symmetric(&mut rng, d, 1.0);
        let scale = 10f64.powf(rng.random_range(-6.0..0.0));
        let delta = random_symmetric(&mut rng, d, scale);
        match weyl_check(&a, &delta) {
            Ok(r) => t.case(-r.margin),
            Err(e) => t.error(e),
        }
    }
    for _ in 0..cases {
        let d = rng.random_range(2..=16);
        let mut values = Vec::with_capacity(d);
        let mut v: f64 = rng.random_range(-5.0..5.0);
        for _ in 0..d {
            values.push(v);
            v -= 0.5 + rng.random_range(0.0..2.0);
        }
        let a = SymmetricMatrix::from_spectrum(&values, &random_orthonormal(&mut rng, d));
        let scale = 10f64.powf(rng.random_range(-6.0..-0.5));
        let delta = random_symmetric(&mut rng, d, scale);
        let j = rng.random_range(0..d);
        match davis_kahan_check(&a, &delta, j) {
            Ok(DavisKahanOutcome::Checked {
                deviation, bound, ..
            }) => t.case(deviation - bound),
            Ok(DavisKahanOutcome::GapDegenerate { gap }) => {
                t.error(format!("gap {gap} despite construction"))
            }
            Err(e) => t.error(e),
        }
    }
    t.finish()
}

fn sweep_suite(name: &'static str, config: ExperimentConfig) -> SuiteResult {
    let mut t = Tally::new(name, 0.0);
    match run_sweep(&config) {
        Ok(report) => {
            for v in &report.verdicts {
                t.cases += 1;
                if !v.passed {
                    t.failures += 1;
                    t.notes.push(format!(
                        "{}: final {} vs tolerance {}, inversions {}",
                        v.name, v.final_value, v.tolerance, v.inversions
                    ));
                }
            }
            if !report.failures.is_empty() {
                t.notes
                    .push(format!("{} trials failed", report.failures.len()));
            }
        }
        Err(e) => t.error(e),
    }
    t.finish()
}

/// The `mu = 0` sweep used by the full run.
pub fn mu_zero_config() -> ExperimentConfig {
    let mut c = ExperimentConfig::default();
    c.model.mu = 0.0;
    c
}

pub fn run_validation(full: bool) -> ValidationReport {
    let mut suites = vec![
        identity_suite(1000),
        oracle_suite(500),
        duality_suite(100),
        perturbation_suite(1000),
    ];
    if full {
        suites.push(sweep_suite("sweep_default", ExperimentConfig::default()));
        suites.push(sweep_suite("sweep_mu_zero", mu_zero_config()));
    }
    let passed = suites.iter().all(|s| s.passed);
    ValidationReport {
        full,
        suites,
        passed,
    }
}
