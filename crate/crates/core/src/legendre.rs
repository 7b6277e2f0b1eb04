//! Counterexample showing that the Legendre condition cannot be dropped from
//! the uniqueness theorem for Bregman barycentres.
//!
//! Vector case: `φ(y) = Σ|y_i|^p` composed with the affine map
//! `g(x) = e + Lx`, `L = [[N−1, −2], [−2, N−1]]`. The points
//! `ā = g⁻¹(N, 0)`, `b̄ = g⁻¹(0, N)` lie in the open orthant, yet
//! `Ψ̄(x) = ½(Φ̄(x, ā) + Φ̄(x, b̄))` is minimised over the closed orthant at
//! the boundary point `0`, where `∇Ψ̄(0) = (N−3)p(1 − N^{p−1}/2)·e > 0`.
//!
//! Matrix case: the same construction with `T(X) = (N−1)X − 2τXτ`,
//! `τ = [[0, 1], [1, 0]]`, `G(X) = I + T(X)` and `φ(X) = tr|X|^p`.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{frobenius_inner, CMatrix, Complex, HermitianMatrix};
use crate::sample::{random_psd, rng_from_seed};

pub type Vec2 = [f64; 2];

/// Parameters `N > 3` and `p > 1` with `1 − N^{p−1}/2 > 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CexParams {
    n: f64,
    p: f64,
}

impl CexParams {
    pub fn new(n: f64, p: f64) -> Result<Self> {
        if !(n > 3.0 && n.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "N",
                reason: format!("must exceed 3, got {n}"),
            });
        }
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "p",
                reason: format!("must exceed 1, got {p}"),
            });
        }
        let params = Self { n, p };
        if params.gradient_constant() <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "p",
                reason: format!("1 - N^(p-1)/2 must be positive, got {}", 1.0 - n.powf(p - 1.0) / 2.0),
            });
        }
        Ok(params)
    }

    /// Skips the sign condition; used to exhibit the sign flip.
    pub fn new_unchecked(n: f64, p: f64) -> Self {
        Self { n, p }
    }

    pub fn n(&self) -> f64 {
        self.n
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// `(N−3)·p·(1 − N^{p−1}/2)`.
    pub fn gradient_constant(&self) -> f64 {
        (self.n - 3.0) * self.p * (1.0 - self.n.powf(self.p - 1.0) / 2.0)
    }

    fn det(&self) -> f64 {
        self.n * self.n - 2.0 * self.n - 3.0
    }
}

impl Default for CexParams {
    fn default() -> Self {
        Self { n: 5.0, p: 1.2 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VectorInstance {
    pub l: [[f64; 2]; 2],
    pub a: Vec2,
    pub b: Vec2,
    pub abar: Vec2,
    pub bbar: Vec2,
}

pub fn build_vector_instance(params: &CexParams) -> Result<VectorInstance> {
    let n = params.n;
    let d = params.det();
    let abar = [(n * n - 2.0 * n - 1.0) / d, (n - 1.0) / d];
    let bbar = [abar[1], abar[0]];
    if abar.iter().any(|&v| v <= 0.0) {
        return Err(Error::InvalidParameter {
            name: "N",
            reason: format!("preimages must be strictly positive, got {abar:?}"),
        });
    }
    Ok(VectorInstance {
        l: [[n - 1.0, -2.0], [-2.0, n - 1.0]],
        a: [n, 0.0],
        b: [0.0, n],
        abar,
        bbar,
    })
}

fn mat_vec(l: &[[f64; 2]; 2], x: Vec2) -> Vec2 {
    [l[0][0] * x[0] + l[0][1] * x[1], l[1][0] * x[0] + l[1][1] * x[1]]
}

fn dot(x: Vec2, y: Vec2) -> f64 {
    x[0] * y[0] + x[1] * y[1]
}

fn abs_pow(x: f64, p: f64) -> f64 {
    x.abs().powf(p)
}

/// Derivative of `|x|^p`, continuous for `p > 1`.
fn abs_pow_grad(x: f64, p: f64) -> f64 {
    p * x.signum() * x.abs().powf(p - 1.0)
}

impl VectorInstance {
    fn g(&self, x: Vec2) -> Vec2 {
        let lx = mat_vec(&self.l, x);
        [1.0 + lx[0], 1.0 + lx[1]]
    }

    fn phibar(&self, p: f64, x: Vec2) -> f64 {
        self.g(x).iter().map(|&y| abs_pow(y, p)).sum()
    }

    /// `Lᵀ∇φ(g(x))`; `L` is symmetric.
    fn grad_phibar(&self, p: f64, x: Vec2) -> Vec2 {
        self.pullback_grad(p, self.g(x))
    }

    fn pullback_grad(&self, p: f64, y: Vec2) -> Vec2 {
        mat_vec(&self.l, [abs_pow_grad(y[0], p), abs_pow_grad(y[1], p)])
    }

    /// `Φ̄(x, ȳ)` for an anchor with known image `y = g(ȳ)`. Using `y` itself
    /// matters: `|·|^{p−1}` amplifies the roundoff in a computed zero
    /// coordinate of `g(ȳ)`.
    fn bregman_to_anchor(&self, p: f64, x: Vec2, anchor: Vec2, image: Vec2) -> f64 {
        let grad = self.pullback_grad(p, image);
        let phi_anchor: f64 = image.iter().map(|&y| abs_pow(y, p)).sum();
        self.phibar(p, x) - phi_anchor - dot(grad, [x[0] - anchor[0], x[1] - anchor[1]])
    }
}

/// `Ψ̄(x) = ½(Φ̄(x, ā) + Φ̄(x, b̄))`.
pub fn psibar_vector(params: &CexParams, x: Vec2) -> Result<f64> {
    let inst = build_vector_instance(params)?;
    Ok(0.5
        * (inst.bregman_to_anchor(params.p, x, inst.abar, inst.a)
            + inst.bregman_to_anchor(params.p, x, inst.bbar, inst.b)))
}

/// `Lᵀ∇φ(g(x)) − ½(Lᵀ∇φ(a) + Lᵀ∇φ(b))`.
pub fn grad_psibar_vector(params: &CexParams, x: Vec2) -> Result<Vec2> {
    let inst = build_vector_instance(params)?;
    let gx = inst.grad_phibar(params.p, x);
    let ga = inst.pullback_grad(params.p, inst.a);
    let gb = inst.pullback_grad(params.p, inst.b);
    Ok([gx[0] - 0.5 * (ga[0] + gb[0]), gx[1] - 0.5 * (ga[1] + gb[1])])
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VectorStrictnessReport {
    pub samples: usize,
    pub gradient_at_zero: Vec2,
    pub min_gap: f64,
    pub min_gap_witness: Vec2,
    /// Smallest `Ψ̄(x) − Ψ̄(0) − ⟨∇Ψ̄(0), x⟩` over the samples.
    pub min_excess_over_tangent: f64,
    pub violations: Vec<Vec2>,
    pub passed: bool,
}

/// Random points of the closed orthant minus the origin: direction uniform in
/// angle, radius log-uniform in `[1e-6, 1e3]`.
fn orthant_sample<R: Rng + ?Sized>(rng: &mut R) -> Vec2 {
    let theta = rng.random_range(0.0..=std::f64::consts::FRAC_PI_2);
    let r = 10f64.powf(rng.random_range(-6.0..3.0));
    [r * theta.cos(), r * theta.sin()]
}

pub fn verify_vector_strictness(params: &CexParams, samples: usize, seed: u64) -> Result<VectorStrictnessReport> {
    let grad0 = grad_psibar_vector(params, [0.0, 0.0])?;
    let psi0 = psibar_vector(params, [0.0, 0.0])?;
    let mut rng = rng_from_seed(seed);
    let mut report = VectorStrictnessReport {
        samples,
        gradient_at_zero: grad0,
        min_gap: f64::INFINITY,
        min_gap_witness: [0.0, 0.0],
        min_excess_over_tangent: f64::INFINITY,
        violations: Vec::new(),
        passed: true,
    };
    for _ in 0..samples {
        let x = orthant_sample(&mut rng);
        let gap = psibar_vector(params, x)? - psi0;
        let tangent = dot(grad0, x);
        if gap < report.min_gap {
            report.min_gap = gap;
            report.min_gap_witness = x;
        }
        // roundoff in Ψ̄ is a few ulps of its O(1) value
        let excess = gap - tangent;
        report.min_excess_over_tangent = report.min_excess_over_tangent.min(excess);
        if gap <= 0.0 || excess < -1e-12 * psi0.abs().max(1.0) {
            report.violations.push(x);
        }
    }
    report.passed = report.violations.is_empty() && grad0.iter().all(|&g| g > 0.0);
    Ok(report)
}

fn tau() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0].map(|v| Complex::new(v, 0.0)))
}

fn check_two_by_two(x: &HermitianMatrix) -> Result<()> {
    if x.dim() == 2 {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: 2,
            found: x.dim(),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MatrixMaps {
    pub t: HermitianMatrix,
    pub t_inv: HermitianMatrix,
    pub g: HermitianMatrix,
}

fn t_map(params: &CexParams, x: &HermitianMatrix) -> Result<HermitianMatrix> {
    let tau = tau();
    let conj = &tau * x.matrix() * &tau;
    HermitianMatrix::from_hermitian_part(&(x.matrix() * Complex::new(params.n - 1.0, 0.0) - conj * Complex::new(2.0, 0.0)))
}

fn t_inv_map(params: &CexParams, x: &HermitianMatrix) -> Result<HermitianMatrix> {
    let tau = tau();
    let conj = &tau * x.matrix() * &tau;
    let num = x.matrix() * Complex::new(params.n - 1.0, 0.0) + conj * Complex::new(2.0, 0.0);
    HermitianMatrix::from_hermitian_part(&(num / Complex::new(params.det(), 0.0)))
}

fn g_map(params: &CexParams, x: &HermitianMatrix) -> Result<HermitianMatrix> {
    Ok(&HermitianMatrix::identity(2) + &t_map(params, x)?)
}

/// `T(X)`, `T⁻¹(X)` and `G(X) = I + T(X)` for a 2×2 Hermitian `X`.
pub fn matrix_maps(params: &CexParams, x: &HermitianMatrix) -> Result<MatrixMaps> {
    check_two_by_two(x)?;
    Ok(MatrixMaps {
        t: t_map(params, x)?,
        t_inv: t_inv_map(params, x)?,
        g: g_map(params, x)?,
    })
}

fn check_p(p: f64) -> Result<()> {
    if p > 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "p",
            reason: format!("must exceed 1, got {p}"),
        })
    }
}

/// `∇ tr X^p = pX^{p−1}` for positive semidefinite `X`.
pub fn grad_schatten_p(x: &HermitianMatrix, p: f64) -> Result<HermitianMatrix> {
    check_p(p)?;
    let eig = x.eigh()?;
    let tol = 1e-12 * eig.max_eigenvalue().abs().max(1.0);
    if eig.min_eigenvalue() < -tol {
        return Err(Error::NotPositiveSemidefinite {
            min_eigenvalue: eig.min_eigenvalue(),
        });
    }
    eig.map(|l| p * l.max(0.0).powf(p - 1.0))
}

/// `tr|H|^p` and its gradient `p·sign(H)|H|^{p−1}` for any Hermitian `H`.
/// `G(X)` leaves the positive cone for some positive semidefinite `X`, so the
/// matrix objective needs the indefinite case.
fn schatten_p(h: &HermitianMatrix, p: f64) -> Result<f64> {
    h.eigh()?.trace_of(|l| abs_pow(l, p))
}

fn schatten_p_grad(h: &HermitianMatrix, p: f64) -> Result<HermitianMatrix> {
    h.eigh()?.map(|l| abs_pow_grad(l, p))
}

fn inner(x: &HermitianMatrix, y: &HermitianMatrix) -> Result<f64> {
    Ok(frobenius_inner(x.matrix(), y.matrix())?.re)
}

struct MatrixInstance {
    params: CexParams,
    abar: HermitianMatrix,
    bbar: HermitianMatrix,
    /// `G(Ā) = diag(a)` and `G(B̄) = diag(b)`, taken exactly.
    a: HermitianMatrix,
    b: HermitianMatrix,
}

impl MatrixInstance {
    fn new(params: &CexParams) -> Result<Self> {
        let v = build_vector_instance(params)?;
        Ok(Self {
            params: *params,
            abar: HermitianMatrix::from_diagonal(&v.abar)?,
            bbar: HermitianMatrix::from_diagonal(&v.bbar)?,
            a: HermitianMatrix::from_diagonal(&v.a)?,
            b: HermitianMatrix::from_diagonal(&v.b)?,
        })
    }

    fn phibar(&self, x: &HermitianMatrix) -> Result<f64> {
        schatten_p(&g_map(&self.params, x)?, self.params.p)
    }

    /// `T(∇φ(Y))`; `T` is self-adjoint for the trace pairing.
    fn pullback_grad(&self, y: &HermitianMatrix) -> Result<HermitianMatrix> {
        t_map(&self.params, &schatten_p_grad(y, self.params.p)?)
    }

    fn grad_phibar(&self, x: &HermitianMatrix) -> Result<HermitianMatrix> {
        self.pullback_grad(&g_map(&self.params, x)?)
    }

    fn bregman_to_anchor(&self, x: &HermitianMatrix, anchor: &HermitianMatrix, image: &HermitianMatrix) -> Result<f64> {
        let phi_anchor = schatten_p(image, self.params.p)?;
        Ok(self.phibar(x)? - phi_anchor - inner(&self.pullback_grad(image)?, &(x - anchor))?)
    }

    fn psibar(&self, x: &HermitianMatrix) -> Result<f64> {
        Ok(0.5 * (self.bregman_to_anchor(x, &self.abar, &self.a)? + self.bregman_to_anchor(x, &self.bbar, &self.b)?))
    }

    fn grad_psibar(&self, x: &HermitianMatrix) -> Result<HermitianMatrix> {
        let anchor = &self.pullback_grad(&self.a)? + &self.pullback_grad(&self.b)?;
        Ok(&self.grad_phibar(x)? - &anchor.scale(0.5))
    }
}

/// `Ψ̄(X) = ½(Φ̄(X, Ā) + Φ̄(X, B̄))` with `Ā = diag(ā)`, `B̄ = diag(b̄)`.
pub fn psibar_matrix(params: &CexParams, x: &HermitianMatrix) -> Result<f64> {
    check_two_by_two(x)?;
    MatrixInstance::new(params)?.psibar(x)
}

pub fn grad_psibar_matrix(params: &CexParams, x: &HermitianMatrix) -> Result<HermitianMatrix> {
    check_two_by_two(x)?;
    MatrixInstance::new(params)?.grad_psibar(x)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MatrixCexReport {
    pub params: CexParams,
    pub gradient_constant: f64,
    /// `‖∇Ψ̄(0) − c·I‖₂` against the closed form `c = (N−3)p(1 − N^{p−1}/2)`.
    pub gradient_at_zero_error: f64,
    pub gradient_at_zero_min_eigenvalue: f64,
    pub psd_samples: usize,
    pub min_psd_gap: f64,
    pub psd_violations: usize,
    pub grid_points: usize,
    /// Smallest `‖∇Ψ̄(X)‖₂` over the grid of positive definite `X`.
    pub min_stationarity_residual: f64,
    pub min_residual_witness_spectrum: Vec2,
    /// `‖∇Ψ̄(X)‖₂ ≥ c` on the closed cone by monotonicity of `∇Ψ̄`.
    pub residual_lower_bound: f64,
    pub passed: bool,
}

/// Log-spaced eigenvalues in `[1e-6, 1e3]`, rotated by real and complex
/// unitaries.
fn grid_points() -> Vec<(Vec2, HermitianMatrix)> {
    let levels: Vec<f64> = (0..=18).map(|k| 10f64.powf(-6.0 + 0.5 * k as f64)).collect();
    let mut out = Vec::new();
    for &l1 in &levels {
        for &l2 in &levels {
            for k in 0..8 {
                let theta = std::f64::consts::PI * k as f64 / 8.0;
                for phase in [0.0, std::f64::consts::FRAC_PI_2] {
                    let (c, s) = (theta.cos(), theta.sin());
                    let e = Complex::from_polar(1.0, phase);
                    let u = CMatrix::from_row_slice(
                        2,
                        2,
                        &[Complex::new(c, 0.0), -e.conj() * s, e * s, Complex::new(c, 0.0)],
                    );
                    let d = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
                        Complex::new(l1, 0.0),
                        Complex::new(l2, 0.0),
                    ]));
                    let x = HermitianMatrix::from_hermitian_part(&(&u * d * u.adjoint())).expect("finite");
                    out.push(([l1, l2], x));
                }
            }
        }
    }
    out
}

pub fn verify_matrix_cex(params: &CexParams, samples: usize, seed: u64) -> Result<MatrixCexReport> {
    let inst = MatrixInstance::new(params)?;
    let c = params.gradient_constant();
    let zero = HermitianMatrix::zeros(2);
    let grad0 = inst.grad_psibar(&zero)?;
    let grad0_error = (grad0.matrix() - HermitianMatrix::identity(2).scale(c).matrix()).norm();
    let grad0_min = grad0.eigh()?.min_eigenvalue();
    let psi0 = inst.psibar(&zero)?;

    let mut rng = rng_from_seed(seed);
    let mut min_gap = f64::INFINITY;
    let mut violations = 0;
    for _ in 0..samples {
        let x = random_psd(2, &mut rng);
        let gap = inst.psibar(&x)? - psi0;
        min_gap = min_gap.min(gap);
        if gap <= 0.0 {
            violations += 1;
        }
    }

    let grid = grid_points();
    let mut min_residual = f64::INFINITY;
    let mut witness = [0.0, 0.0];
    for (spectrum, x) in &grid {
        let r = inst.grad_psibar(x)?.norm();
        if r < min_residual {
            min_residual = r;
            witness = *spectrum;
        }
    }

    let passed = grad0_error <= 1e-9 && grad0_min > 0.0 && violations == 0 && min_residual > 0.0;
    Ok(MatrixCexReport {
        params: *params,
        gradient_constant: c,
        gradient_at_zero_error: grad0_error,
        gradient_at_zero_min_eigenvalue: grad0_min,
        psd_samples: samples,
        min_psd_gap: min_gap,
        psd_violations: violations,
        grid_points: grid.len(),
        min_stationarity_residual: min_residual,
        min_residual_witness_spectrum: witness,
        residual_lower_bound: c,
        passed,
    })
}
