//! James-Stein correction of the first principal component for data with
//! many more variables than observations.
//!
//! The sample eigenvector of a spiked covariance model stays a fixed angle
//! away from the population eigenvector when `p` grows with `n` held fixed.
//! [`shrink::js_estimate`] pulls its entries toward their common mean by an
//! amount read off the bulk of the spectrum, which removes part of that
//! error. The remaining modules supply the generative model, the dual
//! eigensolver, the loss functions with their limits, and a sweep harness
//! that checks the limits empirically.
//!
//! ```
//! use steinpc_core::{generate, js_estimate, sph, SpikedModelSpec, ScoreDist};
//!
//! let spec = SpikedModelSpec {
//!     p: 2000, n: 6, mu: 1.0, sigma: 1.0, delta: 1.0,
//!     score_dist: ScoreDist::Gaussian, seed: 7,
//! };
//! let (y, truth) = generate(&spec).unwrap();
//! let est = js_estimate(&y, 1).unwrap();
//! let before = sph(&est.h, &truth.b).unwrap();
//! let after = sph(&est.h_js, &truth.b).unwrap();
//! assert!(after < before);
//! ```

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod data;
pub mod eig;
pub mod error;
pub mod harness;
pub mod io;
pub mod metrics;
pub mod model;
pub mod rng;
pub mod shrink;
pub mod validation;

pub use data::DataMatrix;
pub use eig::{top_eigenpairs_hdlss, EigenPair, SpectrumSummary, SymmetricMatrix};
pub use error::{Error, Result};
pub use harness::{run_sweep, ExperimentConfig, SweepReport, TrialRecord};
pub use io::Layout;
pub use metrics::{ave, cov, mse, sph, var, TheoryParams};
pub use model::{generate, GroundTruth, GroundTruthRecord, ScoreDist, SpikedModelSpec};
pub use shrink::{js_estimate, ShrinkageEstimate};
