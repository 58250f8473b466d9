//! Single-spike covariance model `Sigma = Gamma + beta beta^T`.
//!
//! The noise covariance is realized as `Gamma = delta^2 (I - b b^T)` with
//! `b = beta / |beta|`: each noise column is an isotropic Gaussian with its
//! `b` component projected out. This gives `Gamma b = 0` exactly and puts
//! `p - 1` eigenvalues at `delta^2`, so the average eigenvalue tends to
//! `delta^2`. The eigenvectors of `Gamma` are never formed.
//!
//! Scores are drawn directly from their limiting distribution, so the
//! generated data satisfy `Y = beta X^T + E` with `Y^T beta / <beta, beta> = X`
//! at every `p`.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::metrics::{ave, compensated_sum, norm};
use crate::rng::{substream, Purpose, RNG_ALGORITHM};

/// Score distribution; every option has mean 0 and variance 1.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoreDist {
    #[default]
    Gaussian,
    Rademacher,
    Uniform,
}

impl ScoreDist {
    pub fn sample<R: Rng + ?Sized>(self, rng: &mut R) -> f64 {
        match self {
            ScoreDist::Gaussian => rng.sample(StandardNormal),
            ScoreDist::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            ScoreDist::Uniform => {
                let half_width = 3f64.sqrt();
                rng.random_range(-half_width..half_width)
            }
        }
    }
}

impl std::str::FromStr for ScoreDist {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(ScoreDist::Gaussian),
            "rademacher" => Ok(ScoreDist::Rademacher),
            "uniform" => Ok(ScoreDist::Uniform),
            other => Err(Error::InvalidParameter(format!(
                "unknown score distribution {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpikedModelSpec {
    pub p: usize,
    pub n: usize,
    pub mu: f64,
    pub sigma: f64,
    pub delta: f64,
    #[serde(default)]
    pub score_dist: ScoreDist,
    pub seed: u64,
}

impl SpikedModelSpec {
    pub fn validate(&self) -> Result<()> {
        if self.p < 2 {
            return Err(Error::InvalidParameter(format!(
                "p must be >= 2, got {}",
                self.p
            )));
        }
        if self.n < 2 {
            return Err(Error::InvalidParameter(format!(
                "n must be >= 2, got {}",
                self.n
            )));
        }
        if !self.mu.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "mu must be finite, got {}",
                self.mu
            )));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "sigma must be positive and finite, got {}",
                self.sigma
            )));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "delta must be positive and finite, got {}",
                self.delta
            )));
        }
        Ok(())
    }
}

/// Latent quantities behind one generated data matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub beta: Vec<f64>,
    pub b: Vec<f64>,
    pub scores: Vec<f64>,
    pub chi_n: f64,
    pub x_inf: Vec<f64>,
    pub theta: Vec<f64>,
    #[serde(skip)]
    pub noise: Option<DataMatrix>,
}

/// `beta_i = mu + sigma z_i` with the `z_i` read in order from one stream,
/// so `beta` at dimension `p` is a prefix of `beta` at any larger dimension.
/// The sign is flipped when needed so that `ave(beta) >= 0`.
pub fn build_beta(spec: &SpikedModelSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    let mut rng = substream(spec.seed, Purpose::Beta, 0);
    let mut beta: Vec<f64> = (0..spec.p)
        .map(|_| spec.mu + spec.sigma * rng.sample::<f64, _>(StandardNormal))
        .collect();
    if ave(&beta)? < 0.0 {
        beta.iter_mut().for_each(|v| *v = -*v);
    }
    Ok(beta)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreDraw {
    pub scores: Vec<f64>,
    pub chi_n: f64,
    pub x_inf: Vec<f64>,
}

impl ScoreDraw {
    pub fn from_scores(scores: Vec<f64>) -> Result<Self> {
        let len = norm(&scores);
        if !(len > 0.0) {
            return Err(Error::Degenerate("all scores are zero".into()));
        }
        let chi_n = len / (scores.len() as f64).sqrt();
        let x_inf = scores.iter().map(|s| s / len).collect();
        Ok(Self {
            scores,
            chi_n,
            x_inf,
        })
    }
}

pub fn draw_scores(spec: &SpikedModelSpec) -> Result<ScoreDraw> {
    spec.validate()?;
    for attempt in 0..16u64 {
        let mut rng = substream(spec.seed, Purpose::Scores, attempt);
        let scores: Vec<f64> = (0..spec.n)
            .map(|_| spec.score_dist.sample(&mut rng))
            .collect();
        match ScoreDraw::from_scores(scores) {
            Ok(draw) => return Ok(draw),
            Err(_) => log::warn!(
                "all-zero score draw (seed {}, attempt {attempt}); redrawing",
                spec.seed
            ),
        }
    }
    Err(Error::Degenerate(
        "score draws kept coming back all zero".into(),
    ))
}

/// `delta (z - <b, z> b)` for unit `b`.
pub fn project_out(delta: f64, b: &[f64], z: &[f64]) -> Result<Vec<f64>> {
    let along = crate::metrics::dot(b, z)?;
    Ok(z.iter()
        .zip(b)
        .map(|(zi, bi)| delta * (zi - along * bi))
        .collect())
}

pub fn build_noise_column<R: Rng + ?Sized>(delta: f64, b: &[f64], rng: &mut R) -> Result<Vec<f64>> {
    let z: Vec<f64> = (0..b.len()).map(|_| rng.sample(StandardNormal)).collect();
    project_out(delta, b, &z)
}

/// Generates `Y = beta X^T + E` and the ground truth behind it.
pub fn generate(spec: &SpikedModelSpec) -> Result<(DataMatrix, GroundTruth)> {
    spec.validate()?;
    let beta = build_beta(spec)?;
    let beta_len = norm(&beta);
    if !(beta_len > 0.0) {
        return Err(Error::Degenerate("beta is the zero vector".into()));
    }
    let b: Vec<f64> = beta.iter().map(|v| v / beta_len).collect();
    let draw = draw_scores(spec)?;

    let mut data = Vec::with_capacity(spec.p * spec.n);
    let mut noise = Vec::with_capacity(spec.p * spec.n);
    for (k, &score) in draw.scores.iter().enumerate() {
        let mut rng = substream(spec.seed, Purpose::Noise, k as u64);
        let eps = build_noise_column(spec.delta, &b, &mut rng)?;
        data.extend(beta.iter().zip(&eps).map(|(bi, ei)| bi * score + ei));
        noise.extend(eps);
    }
    let y = DataMatrix::from_column_major(spec.p, spec.n, data)?;
    let noise = DataMatrix::from_column_major(spec.p, spec.n, noise)?;
    let theta = beta.iter().map(|v| draw.chi_n * v).collect();
    Ok((
        y,
        GroundTruth {
            beta,
            b,
            scores: draw.scores,
            chi_n: draw.chi_n,
            x_inf: draw.x_inf,
            theta,
            noise: Some(noise),
        },
    ))
}

/// Archival form of [`GroundTruth`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroundTruthRecord {
    pub rng_algorithm: String,
    pub seed: u64,
    pub spec: SpikedModelSpec,
    #[serde(flatten)]
    pub truth: GroundTruth,
}

impl GroundTruthRecord {
    pub fn new(spec: &SpikedModelSpec, truth: GroundTruth) -> Self {
        Self {
            rng_algorithm: RNG_ALGORITHM.to_string(),
            seed: spec.seed,
            spec: spec.clone(),
            truth,
        }
    }
}

/// Empirical checks of the model assumptions on one generated instance.
#[derive(Debug, Clone, Copy)]
pub struct AssumptionDeviations {
    pub beta_mean: f64,
    pub beta_var: f64,
    pub noise_mean: f64,
    pub noise_energy: f64,
}

pub fn assumption_deviations(
    spec: &SpikedModelSpec,
    truth: &GroundTruth,
) -> Result<AssumptionDeviations> {
    let noise = truth
        .noise
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("ground truth carries no noise matrix".into()))?;
    let p = spec.p as f64;
    let mut noise_mean = 0.0_f64;
    let mut noise_energy = 0.0_f64;
    for col in noise.columns() {
        noise_mean = noise_mean.max(ave(col)?.abs());
        let e = compensated_sum(col.iter().map(|v| v * v)) / p;
        noise_energy = noise_energy.max((e - spec.delta * spec.delta).abs());
    }
    Ok(AssumptionDeviations {
        beta_mean: (ave(&truth.beta)? - spec.mu).abs(),
        beta_var: (crate::metrics::var(&truth.beta)? - spec.sigma * spec.sigma).abs(),
        noise_mean,
        noise_energy,
    })
}
