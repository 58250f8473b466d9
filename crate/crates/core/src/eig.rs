//! Symmetric eigendecomposition for the high-dimension, low-sample-size
//! regime.
//!
//! With `p >> n` the `p x p` sample covariance `S = Y Y^T / n` is never
//! formed. Its nonzero spectrum is read off the `n x n` dual matrix
//! `L = Y^T Y / p`: a dual pair `(l2, u)` maps to `(l2 p / n, Y u / (sqrt(p) l))`.
//!
//! Cyclic Jacobi is the only solver. The matrices it sees are small
//! (`n x n`, or `p x p` below the direct-path cap), where it is accurate
//! to working precision and needs no pivoting logic.

use serde::{Deserialize, Serialize};

use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::metrics::{ave, compensated_sum, dot, norm};

pub const DEFAULT_DIRECT_CAP: usize = 512;
pub const MAX_JACOBI_DIM: usize = 2048;
pub const DEFAULT_MAX_SWEEPS: usize = 64;
/// Eigenvalues at or below this fraction of the largest count as zero.
pub const RANK_TOL: f64 = 1e-12;
/// Slack for the Weyl and Davis-Kahan inequalities.
pub const BOUND_SLACK: f64 = 1e-9;

const ORIENT_TOL: f64 = 1e-14;

/// Dense symmetric matrix, stored in full row-major form.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SymmetricMatrix {
    /// Fills the upper triangle from `f(i, j)` (`i <= j`) and mirrors it.
    pub fn from_upper<F: FnMut(usize, usize) -> f64>(dim: usize, mut f: F) -> Self {
        let mut data = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in i..dim {
                let v = f(i, j);
                data[i * dim + j] = v;
                data[j * dim + i] = v;
            }
        }
        Self { dim, data }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::LengthMismatch {
                    left: row.len(),
                    right: dim,
                });
            }
            for (j, v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "non-finite entry at ({i}, {j})"
                    )));
                }
                if *v != rows[j][i] {
                    return Err(Error::InvalidParameter(format!(
                        "matrix not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self {
            dim,
            data: rows.concat(),
        })
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_upper(dim, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn diagonal(values: &[f64]) -> Self {
        Self::from_upper(values.len(), |i, j| if i == j { values[i] } else { 0.0 })
    }

    /// `sum_k lambda_k v_k v_k^T` for orthonormal `vectors`.
    pub fn from_spectrum(values: &[f64], vectors: &[Vec<f64>]) -> Self {
        let dim = vectors.first().map_or(0, Vec::len);
        Self::from_upper(dim, |i, j| {
            compensated_sum(values.iter().zip(vectors).map(|(l, v)| l * v[i] * v[j]))
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn trace(&self) -> f64 {
        compensated_sum((0..self.dim).map(|i| self.get(i, i)))
    }

    pub fn frobenius(&self) -> f64 {
        norm(&self.data)
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        self.data
            .chunks_exact(self.dim)
            .map(|row| compensated_sum(row.iter().zip(v).map(|(a, b)| a * b)))
            .collect()
    }

    pub fn add(&self, other: &SymmetricMatrix) -> Result<SymmetricMatrix> {
        if self.dim != other.dim {
            return Err(Error::LengthMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        Ok(Self {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn scaled(&self, alpha: f64) -> SymmetricMatrix {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|a| a * alpha).collect(),
        }
    }
}

fn off_diagonal_norm(m: &[f64], d: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..d {
        for j in 0..d {
            if i != j {
                s += m[i * d + j] * m[i * d + j];
            }
        }
    }
    s.sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Vec<f64>,
}

/// Which matrix the HDLSS routine decomposed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectrumPath {
    /// `L = Y^T Y / p`, used when `p >= n`.
    Dual,
    /// `S = Y Y^T / n`, used when `p < n`.
    Direct,
}

/// Leading part of the spectrum of `S = Y Y^T / n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSummary {
    /// Nonzero eigenvalues of `S`, descending.
    pub eigenvalues: Vec<f64>,
    /// `tr(S)`.
    pub trace: f64,
    /// Top `q` eigenpairs of `S`, each vector oriented by [`orient`].
    pub top: Vec<EigenPair>,
    /// Dual vectors `u = Y^T v / (sqrt(n) s)` of the top pairs, length `n`.
    pub dual_vectors: Vec<Vec<f64>>,
    pub path: SpectrumPath,
}

/// `S = Y Y^T / n`, refused above `cap` rows.
pub fn sample_covariance(y: &DataMatrix, cap: usize) -> Result<SymmetricMatrix> {
    if y.p() > cap {
        return Err(Error::DirectPathTooLarge { p: y.p(), cap });
    }
    Ok(sample_covariance_unchecked(y))
}

fn sample_covariance_unchecked(y: &DataMatrix) -> SymmetricMatrix {
    let n = y.n() as f64;
    SymmetricMatrix::from_upper(y.p(), |i, j| {
        compensated_sum((0..y.n()).map(|k| y.get(i, k) * y.get(j, k))) / n
    })
}

/// `L = Y^T Y / p`.
pub fn dual_covariance(y: &DataMatrix) -> SymmetricMatrix {
    let p = y.p() as f64;
    SymmetricMatrix::from_upper(y.n(), |i, j| {
        compensated_sum(y.column(i).iter().zip(y.column(j)).map(|(a, b)| a * b)) / p
    })
}

pub fn jacobi_eigh(a: &SymmetricMatrix) -> Result<Vec<EigenPair>> {
    jacobi_eigh_with(a, DEFAULT_MAX_SWEEPS)
}

/// Full eigendecomposition by cyclic Jacobi rotations, pairs sorted by
/// descending eigenvalue.
pub fn jacobi_eigh_with(a: &SymmetricMatrix, max_sweeps: usize) -> Result<Vec<EigenPair>> {
    let d = a.dim();
    if d == 0 {
        return Ok(Vec::new());
    }
    if d > MAX_JACOBI_DIM {
        return Err(Error::InvalidParameter(format!(
            "jacobi_eigh supports dimension <= {MAX_JACOBI_DIM}, got {d}"
        )));
    }
    if a.data.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(
            "matrix has non-finite entries".into(),
        ));
    }
    let scale = a.frobenius();
    let mut m = a.data.clone();
    let mut v = SymmetricMatrix::identity(d).data;

    let mut sweeps = 0;
    loop {
        let off = off_diagonal_norm(&m, d);
        if off == 0.0 || off <= 1e-15 * scale {
            break;
        }
        if sweeps == max_sweeps {
            if off <= 1e-12 * scale {
                break;
            }
            return Err(Error::NoConvergence {
                sweeps,
                off_norm: off,
                norm: scale,
            });
        }
        sweeps += 1;
        let mut rotated = false;
        for p in 0..d - 1 {
            for q in p + 1..d {
                let apq = m[p * d + q];
                if apq == 0.0 {
                    continue;
                }
                let app = m[p * d + p];
                let aqq = m[q * d + q];
                // Past the first sweeps, drop elements that no longer move
                // the diagonal at working precision.
                let g = 100.0 * apq.abs();
                if sweeps > 4 && app.abs() + g == app.abs() && aqq.abs() + g == aqq.abs() {
                    m[p * d + q] = 0.0;
                    m[q * d + p] = 0.0;
                    continue;
                }
                rotated = true;
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta.is_infinite() {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..d {
                    let akp = m[k * d + p];
                    let akq = m[k * d + q];
                    m[k * d + p] = c * akp - s * akq;
                    m[k * d + q] = s * akp + c * akq;
                }
                for k in 0..d {
                    let apk = m[p * d + k];
                    let aqk = m[q * d + k];
                    m[p * d + k] = c * apk - s * aqk;
                    m[q * d + k] = s * apk + c * aqk;
                }
                m[p * d + q] = 0.0;
                m[q * d + p] = 0.0;
                for k in 0..d {
                    let vkp = v[k * d + p];
                    let vkq = v[k * d + q];
                    v[k * d + p] = c * vkp - s * vkq;
                    v[k * d + q] = s * vkp + c * vkq;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut pairs: Vec<EigenPair> = (0..d)
        .map(|j| {
            let vector: Vec<f64> = (0..d).map(|k| v[k * d + j]).collect();
            EigenPair {
                value: m[j * d + j],
                vector,
            }
        })
        .collect();
    pairs.sort_by(|x, y| y.value.total_cmp(&x.value));
    Ok(pairs)
}

/// Largest absolute eigenvalue.
pub fn spectral_norm(a: &SymmetricMatrix) -> Result<f64> {
    Ok(jacobi_eigh(a)?
        .iter()
        .map(|p| p.value.abs())
        .fold(0.0, f64::max))
}

/// Signs `v` so that its entry mean is nonnegative. Vectors with mean
/// within 1e-14 of zero are signed so their first non-negligible entry is
/// positive.
pub fn orient(v: &[f64]) -> Result<Vec<f64>> {
    if v.is_empty() || norm(v) == 0.0 {
        return Err(Error::Degenerate("cannot orient a zero vector".into()));
    }
    let m = ave(v)?;
    let flip = if m.abs() > ORIENT_TOL {
        m < 0.0
    } else {
        v.iter()
            .find(|x| x.abs() > ORIENT_TOL)
            .is_some_and(|x| *x < 0.0)
    };
    Ok(if flip {
        v.iter().map(|x| -x).collect()
    } else {
        v.to_vec()
    })
}

/// Top-`q` spectrum of `S = Y Y^T / n` through the smaller of `S` and `L`.
pub fn top_eigenpairs_hdlss(y: &DataMatrix, q: usize) -> Result<SpectrumSummary> {
    let (p, n) = (y.p(), y.n());
    let rank_cap = p.min(n);
    if q < 1 || q >= rank_cap {
        return Err(Error::InvalidParameter(format!(
            "q must satisfy 1 <= q < min(n, p) = {rank_cap}, got {q}"
        )));
    }
    let trace = y.frobenius_sq() / n as f64;
    let (pf, nf) = (p as f64, n as f64);

    let (path, pairs) = if p >= n {
        (SpectrumPath::Dual, jacobi_eigh(&dual_covariance(y))?)
    } else {
        (
            SpectrumPath::Direct,
            jacobi_eigh(&sample_covariance_unchecked(y))?,
        )
    };

    let top_value = pairs.first().map_or(0.0, |e| e.value);
    if !(top_value > 0.0) {
        return Err(Error::RankDegenerate { top: top_value });
    }
    let cutoff = RANK_TOL * top_value;
    let nonzero: Vec<&EigenPair> = pairs.iter().filter(|e| e.value > cutoff).collect();
    if nonzero.len() < q {
        return Err(Error::RankDegenerate {
            top: pairs[q - 1].value,
        });
    }

    let mut top = Vec::with_capacity(q);
    let mut dual_vectors = Vec::with_capacity(q);
    let eigenvalues: Vec<f64> = match path {
        SpectrumPath::Dual => nonzero.iter().map(|e| e.value * pf / nf).collect(),
        SpectrumPath::Direct => nonzero.iter().map(|e| e.value).collect(),
    };
    for (pair, &s2) in nonzero.iter().zip(&eigenvalues).take(q) {
        let s = s2.sqrt();
        let v = match path {
            SpectrumPath::Dual => {
                let ell = pair.value.sqrt();
                let denom = pf.sqrt() * ell;
                let mapped: Vec<f64> = y.mul_vec(&pair.vector).iter().map(|x| x / denom).collect();
                let len = norm(&mapped);
                mapped.iter().map(|x| x / len).collect()
            }
            SpectrumPath::Direct => pair.vector.clone(),
        };
        let v = orient(&v)?;
        let u: Vec<f64> = y
            .tr_mul_vec(&v)
            .iter()
            .map(|x| x / (nf.sqrt() * s))
            .collect();
        top.push(EigenPair {
            value: s2,
            vector: v,
        });
        dual_vectors.push(u);
    }

    let total = compensated_sum(eigenvalues.iter().copied());
    if (total - trace).abs() > 1e-9 * trace.max(f64::MIN_POSITIVE) {
        return Err(Error::InconsistentSpectrum(format!(
            "eigenvalues sum to {total}, trace is {trace}"
        )));
    }

    Ok(SpectrumSummary {
        eigenvalues,
        trace,
        top,
        dual_vectors,
        path,
    })
}

/// `|S v - s2 v|` computed as `Y (Y^T v) / n` without forming `S`.
pub fn residual(y: &DataMatrix, pair: &EigenPair) -> f64 {
    let n = y.n() as f64;
    let sv = y.mul_vec(&y.tr_mul_vec(&pair.vector));
    let diff: Vec<f64> = sv
        .iter()
        .zip(&pair.vector)
        .map(|(a, v)| a / n - pair.value * v)
        .collect();
    norm(&diff)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeylReport {
    /// `max_j |alpha_j - zeta_j|`.
    pub max_deviation: f64,
    /// Spectral norm of the perturbation.
    pub bound: f64,
    /// `bound - max_deviation`.
    pub margin: f64,
}

/// Checks `max_j |alpha_j - zeta_j| <= |Delta|` for the sorted spectra of
/// `A` and `A + Delta`.
pub fn weyl_check(a: &SymmetricMatrix, delta: &SymmetricMatrix) -> Result<WeylReport> {
    let perturbed = a.add(delta)?;
    let alpha = jacobi_eigh(a)?;
    let zeta = jacobi_eigh(&perturbed)?;
    let bound = spectral_norm(delta)?;
    let (index, max_deviation) = alpha
        .iter()
        .zip(&zeta)
        .map(|(x, z)| (x.value - z.value).abs())
        .enumerate()
        .fold(
            (0, 0.0),
            |best, (j, dev)| if dev > best.1 { (j, dev) } else { best },
        );
    if max_deviation > bound + BOUND_SLACK {
        return Err(Error::BoundViolation {
            check: "weyl",
            index,
            lhs: max_deviation,
            rhs: bound,
        });
    }
    Ok(WeylReport {
        max_deviation,
        bound,
        margin: bound - max_deviation,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum DavisKahanOutcome {
    Checked {
        deviation: f64,
        bound: f64,
        gap: f64,
    },
    GapDegenerate {
        gap: f64,
    },
}

/// Checks `|a_j - b_j| <= 3 |Delta| / gap_j` for the `j`-th eigenvectors
/// (0-based, descending) of `A` and `A + Delta`, after signing `b_j` so that
/// `<a_j, b_j> >= 0`. The gap takes `alpha_0 = +inf` and `alpha_{d+1} = -inf`.
pub fn davis_kahan_check(
    a: &SymmetricMatrix,
    delta: &SymmetricMatrix,
    j: usize,
) -> Result<DavisKahanOutcome> {
    let d = a.dim();
    if j >= d {
        return Err(Error::InvalidParameter(format!(
            "index {j} out of range for dimension {d}"
        )));
    }
    let alpha = jacobi_eigh(a)?;
    let above = if j == 0 {
        f64::INFINITY
    } else {
        alpha[j - 1].value - alpha[j].value
    };
    let below = if j + 1 == d {
        f64::INFINITY
    } else {
        alpha[j].value - alpha[j + 1].value
    };
    let gap = above.min(below);
    let scale = alpha
        .iter()
        .map(|e| e.value.abs())
        .fold(0.0, f64::max)
        .max(1.0);
    if gap <= 1e-12 * scale {
        return Ok(DavisKahanOutcome::GapDegenerate { gap });
    }
    let beta = jacobi_eigh(&a.add(delta)?)?;
    let aj = &alpha[j].vector;
    let mut bj = beta[j].vector.clone();
    if dot(aj, &bj)? < 0.0 {
        bj.iter_mut().for_each(|x| *x = -*x);
    }
    let diff: Vec<f64> = aj.iter().zip(&bj).map(|(x, y)| x - y).collect();
    let deviation = norm(&diff);
    let bound = 3.0 * spectral_norm(delta)? / gap;
    if deviation > bound + BOUND_SLACK {
        return Err(Error::BoundViolation {
            check: "davis-kahan",
            index: j,
            lhs: deviation,
            rhs: bound,
        });
    }
    Ok(DavisKahanOutcome::Checked {
        deviation,
        bound,
        gap,
    })
}
