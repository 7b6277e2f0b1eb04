//! Dense Hermitian and positive definite matrices, and the spectral calculus
//! every other module is built on.
//!
//! All matrix functions are evaluated through an eigendecomposition
//! `H = V diag(λ) V*`, so `f(H) = V diag(f(λ)) V*` holds exactly up to the
//! accuracy of the eigensolver. An [`SpdMatrix`] keeps its decomposition, which
//! makes square roots, inverses and logarithms of the same matrix cheap.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Complex scalar used throughout the crate.
pub type Complex = Complex64;

/// Dense complex square matrix (not necessarily Hermitian).
pub type CMatrix = DMatrix<Complex64>;

/// Absolute tolerance on `|m_ij - conj(m_ji)|` accepted at construction.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Relative eigenvalue floor for positive definiteness: `λ_min > SPD_REL_TOL · max(1, ρ)`.
pub const SPD_REL_TOL: f64 = 1e-12;

const EIGEN_MAX_ITER: usize = 10_000;

/// Hermitian part `(M + M*)/2` of a square matrix.
fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * Complex::new(0.5, 0.0)
}

fn check_square_finite(m: &CMatrix) -> Result<()> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Err(Error::Empty);
    }
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let z = m[(i, j)];
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::NonFinite { row: i, col: j });
            }
        }
    }
    Ok(())
}

/// An `n×n` complex Hermitian matrix.
///
/// Construction checks `|m_ij − conj(m_ji)| ≤ 1e-12` and then stores the exact
/// Hermitian part, so the stored value is Hermitian to the last bit.
#[derive(Clone, PartialEq)]
pub struct HermitianMatrix {
    inner: CMatrix,
}

impl HermitianMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        check_square_finite(&m)?;
        let n = m.nrows();
        let mut deviation = 0.0f64;
        for i in 0..n {
            for j in i..n {
                deviation = deviation.max((m[(i, j)] - m[(j, i)].conj()).norm());
            }
        }
        if deviation > HERMITIAN_TOL {
            return Err(Error::NotHermitian {
                deviation,
                tolerance: HERMITIAN_TOL,
            });
        }
        Ok(Self {
            inner: hermitian_part(&m),
        })
    }

    /// Hermitian part `(M + M*)/2` of any finite square matrix, without the
    /// symmetry check. Used for results of computations that are Hermitian in
    /// exact arithmetic.
    pub fn from_hermitian_part(m: &CMatrix) -> Result<Self> {
        check_square_finite(m)?;
        Ok(Self {
            inner: hermitian_part(m),
        })
    }

    /// Real matrix from row-major entries.
    pub fn from_real(dim: usize, entries: &[f64]) -> Result<Self> {
        Self::from_parts(dim, entries, None)
    }

    /// Matrix from row-major real and (optional) imaginary parts.
    pub fn from_parts(dim: usize, real: &[f64], imag: Option<&[f64]>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Empty);
        }
        let expected = dim * dim;
        if real.len() != expected {
            return Err(Error::EntryCount {
                expected,
                found: real.len(),
            });
        }
        if let Some(im) = imag {
            if im.len() != expected {
                return Err(Error::EntryCount {
                    expected,
                    found: im.len(),
                });
            }
        }
        let m = CMatrix::from_fn(dim, dim, |i, j| {
            let k = i * dim + j;
            Complex::new(real[k], imag.map_or(0.0, |im| im[k]))
        });
        Self::new(m)
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        let v = DVector::from_iterator(diag.len(), diag.iter().map(|&d| Complex::new(d, 0.0)));
        Self::new(CMatrix::from_diagonal(&v))
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            inner: CMatrix::identity(dim, dim),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            inner: CMatrix::zeros(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.inner
    }

    pub fn into_matrix(self) -> CMatrix {
        self.inner
    }

    pub fn get(&self, i: usize, j: usize) -> Complex {
        self.inner[(i, j)]
    }

    pub fn trace(&self) -> f64 {
        self.inner.diagonal().iter().map(|z| z.re).sum()
    }

    /// Frobenius norm `‖H‖₂`.
    pub fn norm(&self) -> f64 {
        self.inner.norm()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            inner: &self.inner * Complex::new(s, 0.0),
        }
    }

    /// `K H K*`, Hermitian for any square `K`.
    pub fn congruence_by(&self, k: &CMatrix) -> Result<Self> {
        if k.nrows() != self.dim() || k.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: k.nrows(),
            });
        }
        Self::from_hermitian_part(&(k * &self.inner * k.adjoint()))
    }

    /// Largest absolute imaginary part of any entry.
    pub fn max_imag(&self) -> f64 {
        self.inner.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    pub fn eigh(&self) -> Result<EigenDecomposition> {
        eigh(self)
    }
}

impl fmt::Debug for HermitianMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HermitianMatrix{}", self.inner)
    }
}

impl Add for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn add(self, rhs: &HermitianMatrix) -> HermitianMatrix {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch in addition");
        HermitianMatrix {
            inner: &self.inner + &rhs.inner,
        }
    }
}

impl Sub for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn sub(self, rhs: &HermitianMatrix) -> HermitianMatrix {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch in subtraction");
        HermitianMatrix {
            inner: &self.inner - &rhs.inner,
        }
    }
}

impl Mul<f64> for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn mul(self, rhs: f64) -> HermitianMatrix {
        self.scale(rhs)
    }
}

/// Spectrum (ascending) and unitary eigenvector basis (columns) of a Hermitian matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenDecomposition {
    eigenvalues: Vec<f64>,
    eigenvectors: CMatrix,
}

impl EigenDecomposition {
    fn sorted(values: Vec<f64>, vectors: CMatrix) -> Self {
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let eigenvalues = order.iter().map(|&k| values[k]).collect();
        let eigenvectors = CMatrix::from_fn(vectors.nrows(), vectors.ncols(), |i, j| {
            vectors[(i, order[j])]
        });
        Self {
            eigenvalues,
            eigenvectors,
        }
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &CMatrix {
        &self.eigenvectors
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues[self.eigenvalues.len() - 1]
    }

    /// `V diag(d) V*` for an arbitrary real diagonal `d`.
    pub fn recompose(&self, d: &[f64]) -> CMatrix {
        let mut scaled = self.eigenvectors.clone();
        for (j, &dj) in d.iter().enumerate() {
            scaled.column_mut(j).scale_mut(dj);
        }
        scaled * self.eigenvectors.adjoint()
    }

    /// `V f(Λ) V*`, failing if `f` is not finite at some eigenvalue.
    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Result<HermitianMatrix> {
        let d = self.mapped_values(&f)?;
        HermitianMatrix::from_hermitian_part(&self.recompose(&d))
    }

    /// `Σ f(λ_i)`, i.e. `tr f(H)` without forming the matrix.
    pub fn trace_of<F: Fn(f64) -> f64>(&self, f: F) -> Result<f64> {
        Ok(self.mapped_values(&f)?.iter().sum())
    }

    fn mapped_values<F: Fn(f64) -> f64>(&self, f: &F) -> Result<Vec<f64>> {
        self.eigenvalues
            .iter()
            .map(|&l| {
                let v = f(l);
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::SpectralDomain { eigenvalue: l })
                }
            })
            .collect()
    }

    /// Express a matrix in this eigenbasis: `V* M V`.
    pub fn to_basis(&self, m: &CMatrix) -> CMatrix {
        self.eigenvectors.adjoint() * m * &self.eigenvectors
    }

    /// Map back from this eigenbasis: `V M V*`.
    pub fn from_basis(&self, m: &CMatrix) -> CMatrix {
        &self.eigenvectors * m * self.eigenvectors.adjoint()
    }
}

/// Eigendecomposition of a Hermitian matrix with ascending eigenvalues.
pub fn eigh(h: &HermitianMatrix) -> Result<EigenDecomposition> {
    let dim = h.dim();
    let eig = h
        .inner
        .clone()
        .try_symmetric_eigen(f64::EPSILON, EIGEN_MAX_ITER)
        .ok_or(Error::EigenNoConvergence { dim })?;
    let values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::EigenNoConvergence { dim });
    }
    Ok(EigenDecomposition::sorted(values, eig.eigenvectors))
}

/// `f(H) = V f(Λ) V*`.
pub fn apply_spectral<F: Fn(f64) -> f64>(f: F, h: &HermitianMatrix) -> Result<HermitianMatrix> {
    eigh(h)?.map(f)
}

/// A Hermitian matrix with strictly positive spectrum, stored with its eigendecomposition.
#[derive(Clone)]
pub struct SpdMatrix {
    base: HermitianMatrix,
    eig: EigenDecomposition,
}

impl SpdMatrix {
    pub fn new(base: HermitianMatrix) -> Result<Self> {
        let eig = eigh(&base)?;
        Self::check(&eig)?;
        Ok(Self { base, eig })
    }

    fn check(eig: &EigenDecomposition) -> Result<()> {
        let rho = eig
            .eigenvalues
            .iter()
            .fold(0.0f64, |acc, l| acc.max(l.abs()));
        let threshold = SPD_REL_TOL * rho.max(1.0);
        let min = eig.min_eigenvalue();
        if min > threshold {
            Ok(())
        } else {
            Err(Error::NotPositiveDefinite {
                min_eigenvalue: min,
                threshold,
            })
        }
    }

    /// SPD matrix from the Hermitian part of a computed product.
    pub fn from_hermitian_part(m: &CMatrix) -> Result<Self> {
        Self::new(HermitianMatrix::from_hermitian_part(m)?)
    }

    pub fn from_real(dim: usize, entries: &[f64]) -> Result<Self> {
        Self::new(HermitianMatrix::from_real(dim, entries)?)
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        Self::new(HermitianMatrix::from_diagonal(diag)?)
    }

    pub fn identity(dim: usize) -> Self {
        Self::new(HermitianMatrix::identity(dim)).expect("identity is positive definite")
    }

    /// Build from an eigenbasis and positive values without a new decomposition.
    fn from_spectrum(vectors: &CMatrix, values: Vec<f64>) -> Result<Self> {
        let eig = EigenDecomposition::sorted(values, vectors.clone());
        Self::check(&eig)?;
        let base = HermitianMatrix::from_hermitian_part(&eig.recompose(&eig.eigenvalues))?;
        Ok(Self { base, eig })
    }

    /// `exp(H)` of a Hermitian matrix, which is always positive definite.
    pub fn exp_of(h: &HermitianMatrix) -> Result<Self> {
        let eig = eigh(h)?;
        let values = eig.eigenvalues.iter().map(|l| l.exp()).collect::<Vec<_>>();
        if let Some(&bad) = eig.eigenvalues.iter().find(|l| !l.exp().is_finite()) {
            return Err(Error::SpectralDomain { eigenvalue: bad });
        }
        Self::from_spectrum(&eig.eigenvectors, values)
    }

    pub fn as_hermitian(&self) -> &HermitianMatrix {
        &self.base
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.base.inner
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn eigen(&self) -> &EigenDecomposition {
        &self.eig
    }

    pub fn trace(&self) -> f64 {
        self.base.trace()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eig.min_eigenvalue()
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eig.max_eigenvalue()
    }

    pub fn condition_number(&self) -> f64 {
        self.max_eigenvalue() / self.min_eigenvalue()
    }

    fn map_positive<F: Fn(f64) -> f64>(&self, f: F) -> Result<Self> {
        let values = self.eig.eigenvalues.iter().map(|&l| f(l)).collect();
        Self::from_spectrum(&self.eig.eigenvectors, values)
    }

    pub fn sqrt(&self) -> SpdMatrix {
        self.map_positive(f64::sqrt)
            .expect("square root of a positive definite matrix is positive definite")
    }

    pub fn inv_sqrt(&self) -> Result<SpdMatrix> {
        self.map_positive(|l| 1.0 / l.sqrt())
    }

    pub fn inverse(&self) -> Result<SpdMatrix> {
        self.map_positive(|l| 1.0 / l)
    }

    /// `A^t` for real `t`.
    pub fn pow(&self, t: f64) -> Result<SpdMatrix> {
        self.map_positive(|l| l.powf(t))
    }

    pub fn log(&self) -> HermitianMatrix {
        self.eig
            .map(f64::ln)
            .expect("logarithm is finite on a positive spectrum")
    }

    /// `tr f(A)` from the stored spectrum.
    pub fn trace_of<F: Fn(f64) -> f64>(&self, f: F) -> Result<f64> {
        self.eig.trace_of(f)
    }

    pub fn scale(&self, s: f64) -> Result<SpdMatrix> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "scale",
                reason: format!("must be positive and finite, got {s}"),
            });
        }
        self.map_positive(|l| l * s)
    }
}

impl PartialEq for SpdMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.base == other.base
    }
}

impl fmt::Debug for SpdMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SpdMatrix{}", self.base.inner)
    }
}

impl From<SpdMatrix> for HermitianMatrix {
    fn from(a: SpdMatrix) -> Self {
        a.base
    }
}

pub(crate) fn check_same_dim(a: usize, b: usize) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: a,
            found: b,
        })
    }
}

/// The square root of `AB` with positive eigenvalues,
/// `A^{1/2}(A^{1/2}BA^{1/2})^{1/2}A^{−1/2}`.
///
/// `AB` is not Hermitian unless `A` and `B` commute, so the result is a plain
/// square matrix.
pub fn product_sqrt(a: &SpdMatrix, b: &SpdMatrix) -> Result<CMatrix> {
    check_same_dim(a.dim(), b.dim())?;
    let a_half = a.sqrt();
    let a_inv_half = a.inv_sqrt()?;
    let inner = SpdMatrix::from_hermitian_part(&(a_half.matrix() * b.matrix() * a_half.matrix()))?;
    Ok(a_half.matrix() * inner.sqrt().matrix() * a_inv_half.matrix())
}

/// `K A K*` for invertible `K`.
pub fn congruence(k: &CMatrix, a: &SpdMatrix) -> Result<SpdMatrix> {
    if k.nrows() != k.ncols() {
        return Err(Error::NotSquare {
            rows: k.nrows(),
            cols: k.ncols(),
        });
    }
    check_same_dim(a.dim(), k.nrows())?;
    let sv = k
        .clone()
        .try_svd(false, false, f64::EPSILON, EIGEN_MAX_ITER)
        .ok_or(Error::SvdNoConvergence { dim: k.nrows() })?
        .singular_values;
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
    let ratio = if smax > 0.0 { smin / smax } else { 0.0 };
    if ratio.is_nan() || ratio <= 1e-12 {
        return Err(Error::Singular { ratio });
    }
    SpdMatrix::from_hermitian_part(&(k * a.matrix() * k.adjoint()))
}

/// `⟨A, B⟩ = tr A*B`.
pub fn frobenius_inner(a: &CMatrix, b: &CMatrix) -> Result<Complex> {
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            found: b.nrows(),
        });
    }
    Ok(a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum())
}

/// Frobenius norm of the commutator `AB − BA`.
pub fn commutator_norm(a: &CMatrix, b: &CMatrix) -> f64 {
    (a * b - b * a).norm()
}

/// `tr A` of a general square matrix.
pub fn trace(m: &CMatrix) -> Complex {
    m.diagonal().iter().sum()
}

/// Smallest and largest eigenvalue of a Hermitian matrix.
pub fn spectral_range(h: &HermitianMatrix) -> Result<(f64, f64)> {
    let e = eigh(h)?;
    Ok((e.min_eigenvalue(), e.max_eigenvalue()))
}
