//! Matrix means used to build the Hellinger-type distances.

use crate::error::{Error, Result};
use crate::linalg::{check_same_dim, CMatrix, Complex, HermitianMatrix, SpdMatrix};

/// Positive weights normalized to sum to one.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightVector {
    weights: Vec<f64>,
}

impl WeightVector {
    pub fn new(raw: Vec<f64>) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::InvalidParameter {
                name: "weights",
                reason: "at least one weight is required".into(),
            });
        }
        if let Some(bad) = raw.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::InvalidParameter {
                name: "weights",
                reason: format!("weights must be positive and finite, got {bad}"),
            });
        }
        let total: f64 = raw.iter().sum();
        Ok(Self {
            weights: raw.into_iter().map(|w| w / total).collect(),
        })
    }

    pub fn uniform(m: usize) -> Result<Self> {
        Self::new(vec![1.0; m])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &f64> {
        self.weights.iter()
    }
}

/// Validate a family against its weights and return the common dimension.
pub(crate) fn check_family(mats: &[SpdMatrix], w: &WeightVector) -> Result<usize> {
    let first = mats.first().ok_or(Error::NoMatrices)?;
    if mats.len() != w.len() {
        return Err(Error::LengthMismatch {
            matrices: mats.len(),
            weights: w.len(),
        });
    }
    for a in mats {
        check_same_dim(first.dim(), a.dim())?;
    }
    Ok(first.dim())
}

/// `Σ w_j M_j` over arbitrary square matrices, summed left to right.
pub(crate) fn weighted_sum<'a, I>(dim: usize, terms: I) -> CMatrix
where
    I: IntoIterator<Item = (f64, &'a CMatrix)>,
{
    terms
        .into_iter()
        .fold(CMatrix::zeros(dim, dim), |acc, (w, m)| acc + m * Complex::new(w, 0.0))
}

pub fn arithmetic_mean(mats: &[SpdMatrix], w: &WeightVector) -> Result<SpdMatrix> {
    let dim = check_family(mats, w)?;
    let sum = weighted_sum(dim, w.iter().copied().zip(mats.iter().map(SpdMatrix::matrix)));
    SpdMatrix::from_hermitian_part(&sum)
}

/// Weighted geometric mean `A #_t B = A^{1/2}(A^{−1/2}BA^{−1/2})^t A^{1/2}`, `t ∈ [0, 1]`.
pub fn geometric_mean_t(a: &SpdMatrix, b: &SpdMatrix, t: f64) -> Result<SpdMatrix> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidParameter {
            name: "t",
            reason: format!("must lie in [0, 1], got {t}"),
        });
    }
    check_same_dim(a.dim(), b.dim())?;
    let a_half = a.sqrt();
    let a_inv_half = a.inv_sqrt()?;
    let inner = SpdMatrix::from_hermitian_part(&(a_inv_half.matrix() * b.matrix() * a_inv_half.matrix()))?;
    let powered = inner.pow(t)?;
    SpdMatrix::from_hermitian_part(&(a_half.matrix() * powered.matrix() * a_half.matrix()))
}

/// Pusz–Woronowicz geometric mean `A # B`.
pub fn geometric_mean(a: &SpdMatrix, b: &SpdMatrix) -> Result<SpdMatrix> {
    geometric_mean_t(a, b, 0.5)
}

/// `exp((log A + log B)/2)`.
pub fn log_euclidean_pair(a: &SpdMatrix, b: &SpdMatrix) -> Result<SpdMatrix> {
    check_same_dim(a.dim(), b.dim())?;
    SpdMatrix::exp_of(&(&a.log() + &b.log()).scale(0.5))
}

/// `exp(Σ w_j log A_j)`.
pub fn log_euclidean_multi(mats: &[SpdMatrix], w: &WeightVector) -> Result<SpdMatrix> {
    SpdMatrix::exp_of(&weighted_log_sum(mats, w)?)
}

/// `Σ w_j log A_j`.
pub(crate) fn weighted_log_sum(mats: &[SpdMatrix], w: &WeightVector) -> Result<HermitianMatrix> {
    let dim = check_family(mats, w)?;
    let logs: Vec<HermitianMatrix> = mats.iter().map(SpdMatrix::log).collect();
    let sum = weighted_sum(dim, w.iter().copied().zip(logs.iter().map(HermitianMatrix::matrix)));
    HermitianMatrix::from_hermitian_part(&sum)
}

/// Fidelity `tr (A^{1/2}BA^{1/2})^{1/2}`.
pub fn fidelity(a: &SpdMatrix, b: &SpdMatrix) -> Result<f64> {
    check_same_dim(a.dim(), b.dim())?;
    let a_half = a.sqrt();
    let inner = HermitianMatrix::from_hermitian_part(&(a_half.matrix() * b.matrix() * a_half.matrix()))?;
    // the inner matrix is PD in exact arithmetic; clamp roundoff below zero
    inner.eigh()?.trace_of(|l| l.max(0.0).sqrt())
}

/// `(Σ w_j A_j^{1/2})²`, the minimiser of `Σ w_j d₁²(X, A_j)`.
pub fn q_half(mats: &[SpdMatrix], w: &WeightVector) -> Result<SpdMatrix> {
    let dim = check_family(mats, w)?;
    let roots: Vec<SpdMatrix> = mats.iter().map(SpdMatrix::sqrt).collect();
    let s = weighted_sum(dim, w.iter().copied().zip(roots.iter().map(SpdMatrix::matrix)));
    SpdMatrix::from_hermitian_part(&(&s * &s))
}
