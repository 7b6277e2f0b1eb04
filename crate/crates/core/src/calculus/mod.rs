//! Fréchet derivatives of spectral matrix functions and exact gradients of
//! `Φ₃` and `tr L(A, ·)`.
//!
//! The derivative engine is the divided-difference (Daleckii–Krein) kernel: if
//! `X = V diag(λ) V*` then `Df(X)(Y) = V (K ∘ V*YV) V*` with
//! `K_ij = (f(λ_i) − f(λ_j))/(λ_i − λ_j)` and `K_ii = f′(λ_i)`. The resolvent
//! integral forms are available through [`quadrature`] as independent checks.

pub mod quadrature;

use nalgebra::DMatrix;

use crate::error::Result;
use crate::linalg::{check_same_dim, CMatrix, Complex, EigenDecomposition, HermitianMatrix, SpdMatrix};
use crate::means::log_euclidean_pair;

pub use quadrature::{quad_check, IntegrationMeasure, QuadratureRule, Representation};

/// Scalar functions with a closed-form derivative.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ScalarFunction {
    Sqrt,
    Log,
    Exp,
    /// `x ↦ x^t`.
    Pow(f64),
}

impl ScalarFunction {
    pub fn value(self, x: f64) -> f64 {
        match self {
            Self::Sqrt => x.sqrt(),
            Self::Log => x.ln(),
            Self::Exp => x.exp(),
            Self::Pow(t) => x.powf(t),
        }
    }

    pub fn derivative(self, x: f64) -> f64 {
        match self {
            Self::Sqrt => 0.5 / x.sqrt(),
            Self::Log => 1.0 / x,
            Self::Exp => x.exp(),
            Self::Pow(t) => t * x.powf(t - 1.0),
        }
    }

    /// First divided difference `f[x, y]`, written to avoid cancellation when
    /// `x ≈ y`.
    pub fn divided_difference(self, x: f64, y: f64) -> f64 {
        if x == y {
            return self.derivative(x);
        }
        let d = x - y;
        match self {
            Self::Sqrt => 1.0 / (x.sqrt() + y.sqrt()),
            Self::Log => (d / y).ln_1p() / d,
            Self::Exp => y.exp() * d.exp_m1() / d,
            Self::Pow(t) => y.powf(t) * (t * (d / y).ln_1p()).exp_m1() / d,
        }
    }
}

/// Divided-difference kernel of `f` in the eigenbasis of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct DividedDifferenceKernel {
    eigen: EigenDecomposition,
    kernel: DMatrix<f64>,
}

impl DividedDifferenceKernel {
    pub fn new(f: ScalarFunction, eigen: EigenDecomposition) -> Self {
        let l = eigen.eigenvalues();
        let n = l.len();
        let mut kernel = DMatrix::zeros(n, n);
        for i in 0..n {
            kernel[(i, i)] = f.derivative(l[i]);
            for j in (i + 1)..n {
                let k = f.divided_difference(l[i], l[j]);
                kernel[(i, j)] = k;
                kernel[(j, i)] = k;
            }
        }
        Self { eigen, kernel }
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.kernel
    }

    pub fn eigen(&self) -> &EigenDecomposition {
        &self.eigen
    }

    /// `V (K ∘ V*YV) V*`.
    pub fn apply(&self, y: &HermitianMatrix) -> Result<HermitianMatrix> {
        check_same_dim(self.eigen.dim(), y.dim())?;
        let mut inner = self.eigen.to_basis(y.matrix());
        for j in 0..inner.ncols() {
            for i in 0..inner.nrows() {
                inner[(i, j)] *= self.kernel[(i, j)];
            }
        }
        HermitianMatrix::from_hermitian_part(&self.eigen.from_basis(&inner))
    }
}

/// `Df(X)(Y)`.
pub fn frechet(f: ScalarFunction, x: &SpdMatrix, y: &HermitianMatrix) -> Result<HermitianMatrix> {
    DividedDifferenceKernel::new(f, x.eigen().clone()).apply(y)
}

fn sandwich(outer: &SpdMatrix, inner: &CMatrix) -> CMatrix {
    outer.matrix() * inner * outer.matrix()
}

/// Derivative at `X` in direction `Y` of `g(X) = A # X`, by the chain rule on
/// `A^{1/2}(A^{−1/2}XA^{−1/2})^{1/2}A^{1/2}`.
pub fn frechet_geometric(a: &SpdMatrix, x: &SpdMatrix, y: &HermitianMatrix) -> Result<HermitianMatrix> {
    check_same_dim(a.dim(), x.dim())?;
    check_same_dim(a.dim(), y.dim())?;
    let a_half = a.sqrt();
    let a_inv_half = a.inv_sqrt()?;
    let m = SpdMatrix::from_hermitian_part(&sandwich(&a_inv_half, x.matrix()))?;
    let y_inner = HermitianMatrix::from_hermitian_part(&sandwich(&a_inv_half, y.matrix()))?;
    let d = frechet(ScalarFunction::Sqrt, &m, &y_inner)?;
    HermitianMatrix::from_hermitian_part(&sandwich(&a_half, d.matrix()))
}

fn inverse_hpd(m: &CMatrix) -> Option<CMatrix> {
    m.clone().cholesky().map(|c| c.inverse())
}

/// The same derivative from the resolvent integral
/// `∫₀^∞ (λ + XA^{−1})^{−1} Y (λ + A^{−1}X)^{−1} dν(λ)`, evaluated as
/// `∫ A(λA + X)^{−1} Y (λA + X)^{−1} A dν(λ)` with a Cholesky inverse per node.
pub fn frechet_geometric_quadrature(
    a: &SpdMatrix,
    x: &SpdMatrix,
    y: &HermitianMatrix,
) -> Result<HermitianMatrix> {
    check_same_dim(a.dim(), x.dim())?;
    check_same_dim(a.dim(), y.dim())?;
    let n = a.dim();
    // centre of the spectrum of A^{-1}X
    let scale = ((x.min_eigenvalue() * x.max_eigenvalue())
        / (a.min_eigenvalue() * a.max_eigenvalue()))
    .sqrt();
    let am = a.matrix();
    let integral = quadrature::integrate_matrix(
        IntegrationMeasure::Nu,
        scale,
        QuadratureRule::default(),
        n,
        |lambda| {
            let shifted = am * Complex::new(lambda, 0.0) + x.matrix();
            let r = inverse_hpd(&shifted).expect("λA + X is positive definite");
            let left = am * &r;
            &left * y.matrix() * left.adjoint()
        },
    )?;
    HermitianMatrix::from_hermitian_part(&integral)
}

/// `D log(X)(Y) = ∫₀^∞ (λ + X)^{−1} Y (λ + X)^{−1} dλ` by quadrature.
pub fn frechet_log_quadrature(x: &SpdMatrix, y: &HermitianMatrix) -> Result<HermitianMatrix> {
    check_same_dim(x.dim(), y.dim())?;
    let n = x.dim();
    let scale = (x.min_eigenvalue() * x.max_eigenvalue()).sqrt();
    let integral = quadrature::integrate_matrix(
        IntegrationMeasure::Lebesgue,
        scale,
        QuadratureRule::default(),
        n,
        |lambda| {
            let shifted = x.matrix() + CMatrix::identity(n, n) * Complex::new(lambda, 0.0);
            let r = inverse_hpd(&shifted).expect("λ + X is positive definite");
            &r * y.matrix() * &r
        },
    )?;
    HermitianMatrix::from_hermitian_part(&integral)
}

/// Gradient `G` of `X ↦ Φ₃(A, X)`, i.e. `DΦ₃(A,X)(Y) = tr GY`.
///
/// With `M = A^{−1/2}XA^{−1/2}`, `G = I − 2A^{−1/2} Dsqrt(M)(A) A^{−1/2}`
/// (the Daleckii–Krein map is self-adjoint for the trace pairing).
pub fn grad_phi3(a: &SpdMatrix, x: &SpdMatrix) -> Result<HermitianMatrix> {
    check_same_dim(a.dim(), x.dim())?;
    let a_inv_half = a.inv_sqrt()?;
    let m = SpdMatrix::from_hermitian_part(&sandwich(&a_inv_half, x.matrix()))?;
    let d = frechet(ScalarFunction::Sqrt, &m, a.as_hermitian())?;
    let pulled = HermitianMatrix::from_hermitian_part(&sandwich(&a_inv_half, d.matrix()))?;
    Ok(&HermitianMatrix::identity(a.dim()) - &pulled.scale(2.0))
}

/// `D²Φ₃(A,A)(Y,Y) = ½ tr YA^{−1}Y`, evaluated as `½‖A^{−1/2}Y‖₂²`.
pub fn hessian_phi3_diag(a: &SpdMatrix, y: &HermitianMatrix) -> Result<f64> {
    check_same_dim(a.dim(), y.dim())?;
    let a_inv_half = a.inv_sqrt()?;
    Ok(0.5 * (a_inv_half.matrix() * y.matrix()).norm_squared())
}

/// Gradient of `X ↦ tr L(A, X)`: `½ Dlog(X)(L(A, X))`.
pub fn d_tr_log_euclidean(a: &SpdMatrix, x: &SpdMatrix) -> Result<HermitianMatrix> {
    check_same_dim(a.dim(), x.dim())?;
    let l = log_euclidean_pair(a, x)?;
    Ok(frechet(ScalarFunction::Log, x, l.as_hermitian())?.scale(0.5))
}

/// Gradient of `X ↦ Φ₄(A, X) = tr(A + X) − 2 tr L(A, X)`.
pub fn grad_phi4(a: &SpdMatrix, x: &SpdMatrix) -> Result<HermitianMatrix> {
    let g = d_tr_log_euclidean(a, x)?;
    Ok(&HermitianMatrix::identity(a.dim()) - &g.scale(2.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distances::{divergence, DistanceKind};
    use crate::means::geometric_mean;
    use crate::sample::{random_hermitian, random_spd, rng_from_seed};
    use approx::assert_abs_diff_eq;

    fn shifted(x: &SpdMatrix, y: &HermitianMatrix, h: f64) -> SpdMatrix {
        SpdMatrix::new(x.as_hermitian() + &y.scale(h)).unwrap()
    }

    fn fd_frechet(f: ScalarFunction, x: &SpdMatrix, y: &HermitianMatrix, h: f64) -> CMatrix {
        let plus = x.eigen().clone();
        let _ = plus;
        let fp = crate::linalg::apply_spectral(|v| f.value(v), &(x.as_hermitian() + &y.scale(h))).unwrap();
        let fm = crate::linalg::apply_spectral(|v| f.value(v), &(x.as_hermitian() - &y.scale(h))).unwrap();
        (fp.matrix() - fm.matrix()) / Complex::new(2.0 * h, 0.0)
    }

    #[test]
    fn kernel_for_sqrt_matches_closed_form() {
        let mut rng = rng_from_seed(41);
        let x = random_spd(5, 1e3, &mut rng);
        let k = DividedDifferenceKernel::new(ScalarFunction::Sqrt, x.eigen().clone());
        let l = x.eigen().eigenvalues();
        for i in 0..5 {
            for j in 0..5 {
                assert_abs_diff_eq!(k.values()[(i, j)], 1.0 / (l[i].sqrt() + l[j].sqrt()), epsilon = 1e-12);
                assert_eq!(k.values()[(i, j)], k.values()[(j, i)]);
            }
        }
    }

    #[test]
    fn divided_differences_are_stable_near_ties() {
        for f in [ScalarFunction::Log, ScalarFunction::Exp, ScalarFunction::Pow(0.3), ScalarFunction::Sqrt] {
            let x = 1.7;
            let near = f.divided_difference(x, x * (1.0 + 1e-12));
            assert_abs_diff_eq!(near, f.derivative(x), epsilon = 1e-10);
            let far = f.divided_difference(1.0, 3.0);
            assert_abs_diff_eq!(far, (f.value(1.0) - f.value(3.0)) / -2.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn frechet_at_identity() {
        let mut rng = rng_from_seed(42);
        let y = random_hermitian(3, &mut rng);
        let id = SpdMatrix::identity(3);
        let ds = frechet(ScalarFunction::Sqrt, &id, &y).unwrap();
        assert!((ds.matrix() - y.scale(0.5).matrix()).norm() < 1e-14);
        let dl = frechet(ScalarFunction::Log, &id, &y).unwrap();
        assert!((dl.matrix() - y.matrix()).norm() < 1e-14);
    }

    #[test]
    fn frechet_matches_finite_differences() {
        let mut rng = rng_from_seed(43);
        for f in [ScalarFunction::Sqrt, ScalarFunction::Log, ScalarFunction::Exp, ScalarFunction::Pow(0.7)] {
            for _ in 0..10 {
                let x = random_spd(4, 50.0, &mut rng);
                let y = random_hermitian(4, &mut rng);
                let exact = frechet(f, &x, &y).unwrap();
                let fd = fd_frechet(f, &x, &y, 1e-5);
                assert!((exact.matrix() - &fd).norm() <= 1e-6 * exact.norm().max(1.0), "{f:?}");
            }
        }
    }

    #[test]
    fn frechet_is_linear() {
        let mut rng = rng_from_seed(44);
        let x = random_spd(4, 20.0, &mut rng);
        let y1 = random_hermitian(4, &mut rng);
        let y2 = random_hermitian(4, &mut rng);
        let combo = &y1.scale(2.5) + &y2.scale(-0.75);
        for f in [ScalarFunction::Sqrt, ScalarFunction::Log, ScalarFunction::Exp] {
            let lhs = frechet(f, &x, &combo).unwrap();
            let rhs = &frechet(f, &x, &y1).unwrap().scale(2.5) + &frechet(f, &x, &y2).unwrap().scale(-0.75);
            assert!((lhs.matrix() - rhs.matrix()).norm() <= 1e-11 * lhs.norm().max(1.0));
        }
    }

    #[test]
    fn frechet_geometric_at_base_point_is_half() {
        let mut rng = rng_from_seed(45);
        let a = random_spd(3, 40.0, &mut rng);
        let y = random_hermitian(3, &mut rng);
        let d = frechet_geometric(&a, &a, &y).unwrap();
        assert!((d.matrix() - y.scale(0.5).matrix()).norm() < 1e-12);
        // A = I reduces to the derivative of the square root
        let x = random_spd(3, 40.0, &mut rng);
        let d_id = frechet_geometric(&SpdMatrix::identity(3), &x, &y).unwrap();
        let d_sqrt = frechet(ScalarFunction::Sqrt, &x, &y).unwrap();
        assert!((d_id.matrix() - d_sqrt.matrix()).norm() < 1e-12);
    }

    #[test]
    fn frechet_geometric_matches_fd_and_quadrature() {
        let mut rng = rng_from_seed(46);
        for _ in 0..5 {
            let a = random_spd(3, 30.0, &mut rng);
            let x = random_spd(3, 30.0, &mut rng);
            let y = random_hermitian(3, &mut rng);
            let exact = frechet_geometric(&a, &x, &y).unwrap();
            let h = 1e-5;
            let gp = geometric_mean(&a, &shifted(&x, &y, h)).unwrap();
            let gm = geometric_mean(&a, &shifted(&x, &y, -h)).unwrap();
            let fd = (gp.matrix() - gm.matrix()) / Complex::new(2.0 * h, 0.0);
            assert!((exact.matrix() - &fd).norm() <= 1e-6 * exact.norm().max(1.0));
            let quad = frechet_geometric_quadrature(&a, &x, &y).unwrap();
            assert!((exact.matrix() - quad.matrix()).norm() <= 1e-7 * exact.norm());
        }
    }

    #[test]
    fn log_derivative_matches_quadrature() {
        let mut rng = rng_from_seed(47);
        let x = random_spd(4, 100.0, &mut rng);
        let y = random_hermitian(4, &mut rng);
        let exact = frechet(ScalarFunction::Log, &x, &y).unwrap();
        let quad = frechet_log_quadrature(&x, &y).unwrap();
        assert!((exact.matrix() - quad.matrix()).norm() <= 1e-9 * exact.norm());
    }

    #[test]
    fn grad_phi3_examples() {
        let mut rng = rng_from_seed(48);
        let a = random_spd(4, 100.0, &mut rng);
        assert!(grad_phi3(&a, &a).unwrap().norm() <= 1e-10);

        let ad = [1.0, 4.0, 0.3];
        let xd = [2.0, 1.0, 0.9];
        let g = grad_phi3(&SpdMatrix::from_diagonal(&ad).unwrap(), &SpdMatrix::from_diagonal(&xd).unwrap()).unwrap();
        for i in 0..3 {
            assert_abs_diff_eq!(g.get(i, i).re, 1.0 - (ad[i] / xd[i]).sqrt(), epsilon = 1e-13);
        }
    }

    #[test]
    fn grad_phi3_matches_directional_fd() {
        let mut rng = rng_from_seed(49);
        let a = random_spd(3, 20.0, &mut rng);
        let x = random_spd(3, 20.0, &mut rng);
        let g = grad_phi3(&a, &x).unwrap();
        for _ in 0..20 {
            let y = random_hermitian(3, &mut rng);
            let h = 1e-5;
            let fd = (divergence(DistanceKind::D3, &a, &shifted(&x, &y, h)).unwrap()
                - divergence(DistanceKind::D3, &a, &shifted(&x, &y, -h)).unwrap())
                / (2.0 * h);
            let exact = crate::linalg::frobenius_inner(g.matrix(), y.matrix()).unwrap().re;
            assert!((fd - exact).abs() <= 1e-6 * exact.abs().max(1.0));
        }
    }

    #[test]
    fn hessian_examples() {
        let id = SpdMatrix::identity(2);
        assert_abs_diff_eq!(hessian_phi3_diag(&id, &HermitianMatrix::identity(2)).unwrap(), 1.0, epsilon = 1e-15);
        let a = SpdMatrix::from_diagonal(&[1.0, 2.0]).unwrap();
        assert_abs_diff_eq!(hessian_phi3_diag(&a, &HermitianMatrix::identity(2)).unwrap(), 0.75, epsilon = 1e-15);
    }

    #[test]
    fn log_euclidean_gradient_examples() {
        let id = SpdMatrix::identity(3);
        let g = d_tr_log_euclidean(&id, &id).unwrap();
        assert!((g.matrix() - HermitianMatrix::identity(3).scale(0.5).matrix()).norm() < 1e-14);

        let ad = [1.0, 4.0];
        let xd = [2.0, 0.5];
        let g = d_tr_log_euclidean(&SpdMatrix::from_diagonal(&ad).unwrap(), &SpdMatrix::from_diagonal(&xd).unwrap())
            .unwrap();
        for i in 0..2 {
            assert_abs_diff_eq!(g.get(i, i).re, 0.5 * (ad[i] / xd[i]).sqrt(), epsilon = 1e-13);
        }

        let mut rng = rng_from_seed(50);
        let a = random_spd(3, 20.0, &mut rng);
        let g = d_tr_log_euclidean(&a, &a).unwrap();
        assert!((g.matrix() - HermitianMatrix::identity(3).scale(0.5).matrix()).norm() < 1e-12);
        assert!(grad_phi4(&a, &a).unwrap().norm() < 1e-12);
    }

    #[test]
    fn log_euclidean_gradient_matches_fd() {
        let mut rng = rng_from_seed(51);
        let a = random_spd(3, 20.0, &mut rng);
        let x = random_spd(3, 20.0, &mut rng);
        let g = d_tr_log_euclidean(&a, &x).unwrap();
        for _ in 0..10 {
            let y = random_hermitian(3, &mut rng);
            let h = 1e-5;
            let tp = log_euclidean_pair(&a, &shifted(&x, &y, h)).unwrap().trace();
            let tm = log_euclidean_pair(&a, &shifted(&x, &y, -h)).unwrap().trace();
            let fd = (tp - tm) / (2.0 * h);
            let exact = crate::linalg::frobenius_inner(g.matrix(), y.matrix()).unwrap().re;
            assert!((fd - exact).abs() <= 1e-6 * exact.abs().max(1.0));
        }
    }
}
