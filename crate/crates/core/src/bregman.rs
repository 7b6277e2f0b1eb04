//! Tracial Bregman divergences `Φ(A,B) = tr ψ(A) − tr ψ(B) − tr ψ′(B)(A − B)`
//! built from a scalar mother function, with their left and right barycentres.

use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{check_same_dim, frobenius_inner, HermitianMatrix, SpdMatrix};
use crate::means::{arithmetic_mean, check_family, log_euclidean_pair, weighted_sum, WeightVector};

/// Divergences this far below zero (relative to the size of the traces
/// involved) are treated as roundoff and clamped.
const CLAMP_TOL: f64 = 1e-10;

/// Smooth strictly convex `ψ` on `(0, ∞)` with an analytic inverse of `ψ′`.
pub trait MotherFunction: fmt::Debug {
    fn name(&self) -> String;
    fn psi(&self, x: f64) -> f64;
    fn dpsi(&self, x: f64) -> f64;
    fn inv_dpsi(&self, y: f64) -> f64;
    /// Open interval `J = ψ′((0, ∞))`.
    fn derivative_image(&self) -> (f64, f64);

    /// Sampled convexity and inverse checks on a log-spaced grid over `[1e-6, 1e6]`.
    fn check_invariants(&self) -> Result<()> {
        let grid: Vec<f64> = (0..=240).map(|k| 10f64.powf(-6.0 + k as f64 * 0.05)).collect();
        for pair in grid.windows(2) {
            if self.dpsi(pair[1]) <= self.dpsi(pair[0]) {
                return Err(Error::InvalidParameter {
                    name: "mother function",
                    reason: format!("{}: ψ′ is not increasing near {}", self.name(), pair[0]),
                });
            }
        }
        for &x in &grid {
            let back = self.inv_dpsi(self.dpsi(x));
            if (back - x).abs() > 1e-10 * x {
                return Err(Error::InvalidParameter {
                    name: "mother function",
                    reason: format!("{}: (ψ′)⁻¹(ψ′({x})) = {back}", self.name()),
                });
            }
        }
        Ok(())
    }
}

/// Built-in mother functions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Mother {
    /// `x log x − x`; the tracial divergence is the Umegaki relative entropy
    /// corrected by `tr(B − A)`. Of Legendre type.
    Entropy,
    /// `x²/2`; the divergence is `½‖A − B‖₂²`.
    Square,
    /// `x^p`, `p > 1`.
    Power(f64),
}

impl Mother {
    pub fn power(p: f64) -> Result<Self> {
        if p > 1.0 && p.is_finite() {
            Ok(Self::Power(p))
        } else {
            Err(Error::InvalidParameter {
                name: "p",
                reason: format!("power mother function needs p > 1, got {p}"),
            })
        }
    }
}

impl MotherFunction for Mother {
    fn name(&self) -> String {
        match self {
            Self::Entropy => "entropy".into(),
            Self::Square => "square".into(),
            Self::Power(p) => format!("power({p})"),
        }
    }

    fn psi(&self, x: f64) -> f64 {
        match *self {
            Self::Entropy => {
                if x == 0.0 {
                    0.0
                } else {
                    x * x.ln() - x
                }
            }
            Self::Square => 0.5 * x * x,
            Self::Power(p) => x.powf(p),
        }
    }

    fn dpsi(&self, x: f64) -> f64 {
        match *self {
            Self::Entropy => x.ln(),
            Self::Square => x,
            Self::Power(p) => p * x.powf(p - 1.0),
        }
    }

    fn inv_dpsi(&self, y: f64) -> f64 {
        match *self {
            Self::Entropy => y.exp(),
            Self::Square => y,
            Self::Power(p) => (y / p).powf(1.0 / (p - 1.0)),
        }
    }

    fn derivative_image(&self) -> (f64, f64) {
        match self {
            Self::Entropy => (f64::NEG_INFINITY, f64::INFINITY),
            Self::Square | Self::Power(_) => (0.0, f64::INFINITY),
        }
    }
}

fn check_positive(x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "x",
            reason: format!("Bregman divergence needs positive arguments, got {x}"),
        })
    }
}

fn clamp_small_negative(value: f64, scale: f64) -> Result<f64> {
    let tolerance = CLAMP_TOL * scale.max(1.0);
    if value >= 0.0 {
        Ok(value)
    } else if value >= -tolerance {
        Ok(0.0)
    } else {
        Err(Error::NegativeRadicand {
            what: "bregman",
            value,
            tolerance,
        })
    }
}

/// `ψ(x) − ψ(y) − ψ′(y)(x − y)`.
pub fn bregman_scalar(m: &dyn MotherFunction, x: f64, y: f64) -> Result<f64> {
    check_positive(x)?;
    check_positive(y)?;
    let (px, py, lin) = (m.psi(x), m.psi(y), m.dpsi(y) * (x - y));
    clamp_small_negative(px - py - lin, px.abs() + py.abs() + lin.abs())
}

/// `tr ψ(A) − tr ψ(B) − tr ψ′(B)(A − B)`.
pub fn bregman_tracial(m: &dyn MotherFunction, a: &SpdMatrix, b: &SpdMatrix) -> Result<f64> {
    check_same_dim(a.dim(), b.dim())?;
    let tr_a = a.trace_of(|x| m.psi(x))?;
    let tr_b = b.trace_of(|x| m.psi(x))?;
    let grad_b = b.eigen().map(|x| m.dpsi(x))?;
    let diff = a.matrix() - b.matrix();
    let lin = frobenius_inner(grad_b.matrix(), &diff)?.re;
    clamp_small_negative(tr_a - tr_b - lin, tr_a.abs() + tr_b.abs() + lin.abs())
}

/// Umegaki relative entropy `S(A|B) = tr A(log A − log B)`.
pub fn relative_entropy(a: &SpdMatrix, b: &SpdMatrix) -> Result<f64> {
    check_same_dim(a.dim(), b.dim())?;
    let diff = &a.log() - &b.log();
    Ok(frobenius_inner(a.matrix(), diff.matrix())?.re)
}

/// Minimiser of `X ↦ Σ w_j Φ(A_j, X)`: the arithmetic mean for every `ψ`.
pub fn right_barycentre(_m: &dyn MotherFunction, mats: &[SpdMatrix], w: &WeightVector) -> Result<SpdMatrix> {
    arithmetic_mean(mats, w)
}

/// Minimiser of `X ↦ Σ w_j Φ(X, A_j)`: `(ψ′)⁻¹(Σ w_j ψ′(A_j))`.
pub fn left_barycentre(m: &dyn MotherFunction, mats: &[SpdMatrix], w: &WeightVector) -> Result<SpdMatrix> {
    let dim = check_family(mats, w)?;
    let grads = mats
        .iter()
        .map(|a| a.eigen().map(|x| m.dpsi(x)))
        .collect::<Result<Vec<_>>>()?;
    let s = HermitianMatrix::from_hermitian_part(&weighted_sum(
        dim,
        w.iter().copied().zip(grads.iter().map(HermitianMatrix::matrix)),
    ))?;
    let eig = s.eigh()?;
    let (lower, upper) = m.derivative_image();
    if let Some(&bad) = eig.eigenvalues().iter().find(|&&y| !(y > lower && y < upper)) {
        return Err(Error::OutsideDerivativeImage {
            eigenvalue: bad,
            lower,
            upper,
        });
    }
    SpdMatrix::new(eig.map(|y| m.inv_dpsi(y))?)
}

/// `Σ w_j Φ(μ, A_j)` with `μ` the left barycentre.
pub fn variance(m: &dyn MotherFunction, mats: &[SpdMatrix], w: &WeightVector) -> Result<f64> {
    let mu = left_barycentre(m, mats, w)?;
    let mut total = 0.0;
    for (wj, a) in w.iter().zip(mats) {
        total += wj * bregman_tracial(m, &mu, a)?;
    }
    Ok(total)
}

/// `min_X Φ(X, A) + Φ(X, B)` for the entropy divergence, attained at
/// `L(A, B) = exp((log A + log B)/2)`. Equals `Φ₄(A, B)`.
pub fn phi4_via_min(a: &SpdMatrix, b: &SpdMatrix) -> Result<f64> {
    let l = log_euclidean_pair(a, b)?;
    Ok(bregman_tracial(&Mother::Entropy, &l, a)? + bregman_tracial(&Mother::Entropy, &l, b)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distances::{divergence, DistanceKind};
    use crate::means::log_euclidean_multi;
    use crate::sample::{random_hermitian, random_spd, rng_from_seed};
    use approx::assert_abs_diff_eq;
    use rand::Rng;

    const BUILTINS: [Mother; 4] = [Mother::Entropy, Mother::Square, Mother::Power(1.2), Mother::Power(3.0)];

    #[test]
    fn builtins_satisfy_invariants() {
        for m in BUILTINS {
            m.check_invariants().unwrap();
        }
        assert!(Mother::power(1.0).is_err());
    }

    #[test]
    fn scalar_examples() {
        assert_eq!(bregman_scalar(&Mother::Entropy, 1.0, 1.0).unwrap(), 0.0);
        let e = std::f64::consts::E;
        assert_abs_diff_eq!(bregman_scalar(&Mother::Entropy, 1.0, e).unwrap(), e - 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(bregman_scalar(&Mother::Square, 3.0, 1.5).unwrap(), 1.125, epsilon = 1e-15);
        assert!(bregman_scalar(&Mother::Square, 0.0, 1.0).is_err());
    }

    #[test]
    fn tracial_reduces_on_diagonals() {
        let a = [0.5, 2.0, 7.0];
        let b = [1.5, 0.25, 7.5];
        let (am, bm) = (SpdMatrix::from_diagonal(&a).unwrap(), SpdMatrix::from_diagonal(&b).unwrap());
        for m in BUILTINS {
            let expect: f64 = a.iter().zip(&b).map(|(x, y)| bregman_scalar(&m, *x, *y).unwrap()).sum();
            assert_abs_diff_eq!(bregman_tracial(&m, &am, &bm).unwrap(), expect, epsilon = 1e-12);
            assert_eq!(bregman_tracial(&m, &am, &am).unwrap(), 0.0);
        }
    }

    #[test]
    fn entropy_divergence_matches_relative_entropy_form() {
        let mut rng = rng_from_seed(61);
        for _ in 0..20 {
            let a = random_spd(3, 50.0, &mut rng);
            let b = random_spd(3, 50.0, &mut rng);
            let expect = relative_entropy(&a, &b).unwrap() - (a.trace() - b.trace());
            assert_abs_diff_eq!(bregman_tracial(&Mother::Entropy, &a, &b).unwrap(), expect, epsilon = 1e-10);
        }
    }

    #[test]
    fn relative_entropy_examples() {
        let a = SpdMatrix::from_diagonal(&[0.5, 0.5]).unwrap();
        let b = SpdMatrix::from_diagonal(&[0.25, 0.75]).unwrap();
        let expect = 0.5 * 2f64.ln() + 0.5 * (2.0f64 / 3.0).ln();
        assert_abs_diff_eq!(relative_entropy(&a, &b).unwrap(), expect, epsilon = 1e-15);
        assert_abs_diff_eq!(relative_entropy(&a, &a).unwrap(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn barycentres() {
        let mut rng = rng_from_seed(62);
        let a = random_spd(3, 30.0, &mut rng);
        let b = random_spd(3, 30.0, &mut rng);
        let w = WeightVector::uniform(2).unwrap();
        let pair = [a.clone(), b.clone()];

        let r1 = right_barycentre(&Mother::Entropy, &pair, &w).unwrap();
        let r2 = right_barycentre(&Mother::Square, &pair, &w).unwrap();
        assert!((r1.matrix() - r2.matrix()).norm() <= 1e-12);

        let l = left_barycentre(&Mother::Entropy, &pair, &w).unwrap();
        let direct = log_euclidean_pair(&a, &b).unwrap();
        assert!((l.matrix() - direct.matrix()).norm() <= 1e-10 * direct.matrix().norm());

        let sq = left_barycentre(&Mother::Square, &pair, &w).unwrap();
        assert!((sq.matrix() - r1.matrix()).norm() <= 1e-12 * r1.matrix().norm());

        let same = left_barycentre(&Mother::Entropy, &[a.clone(), a.clone()], &w).unwrap();
        assert!((same.matrix() - a.matrix()).norm() <= 1e-12 * a.matrix().norm());
    }

    #[test]
    fn left_barycentre_is_stationary() {
        let mut rng = rng_from_seed(63);
        let fam: Vec<SpdMatrix> = (0..4).map(|_| random_spd(3, 20.0, &mut rng)).collect();
        let w = WeightVector::new(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        for m in [Mother::Entropy, Mother::Power(1.5)] {
            let x = left_barycentre(&m, &fam, &w).unwrap();
            let objective = |x: &SpdMatrix| -> f64 {
                fam.iter().zip(w.iter()).map(|(a, wj)| wj * bregman_tracial(&m, x, a).unwrap()).sum()
            };
            for _ in 0..5 {
                let y = random_hermitian(3, &mut rng);
                let h = 1e-5;
                let xp = SpdMatrix::new(x.as_hermitian() + &y.scale(h)).unwrap();
                let xm = SpdMatrix::new(x.as_hermitian() - &y.scale(h)).unwrap();
                assert!(((objective(&xp) - objective(&xm)) / (2.0 * h)).abs() <= 1e-6);
            }
        }
    }

    #[test]
    fn scalar_kolmogorov_mean() {
        let mut rng = rng_from_seed(64);
        for m in BUILTINS {
            let xs: Vec<f64> = (0..4).map(|_| rng.random_range(0.1..10.0)).collect();
            let w = WeightVector::new(vec![0.4, 0.1, 0.3, 0.2]).unwrap();
            let fam: Vec<SpdMatrix> = xs.iter().map(|x| SpdMatrix::from_diagonal(&[*x]).unwrap()).collect();
            let got = left_barycentre(&m, &fam, &w).unwrap().matrix()[(0, 0)].re;
            let s: f64 = xs.iter().zip(w.iter()).map(|(x, wj)| wj * m.dpsi(*x)).sum();
            assert_abs_diff_eq!(got, m.inv_dpsi(s), epsilon = 1e-12 * got);
        }
        // entropy on scalars is the weighted geometric mean
        let fam = [SpdMatrix::from_diagonal(&[2.0]).unwrap(), SpdMatrix::from_diagonal(&[8.0]).unwrap()];
        let g = left_barycentre(&Mother::Entropy, &fam, &WeightVector::uniform(2).unwrap()).unwrap();
        assert_abs_diff_eq!(g.matrix()[(0, 0)].re, 4.0, epsilon = 1e-14);
    }

    #[test]
    fn variance_identities() {
        let mut rng = rng_from_seed(65);
        let fam: Vec<SpdMatrix> = (0..5).map(|_| random_spd(4, 40.0, &mut rng)).collect();
        let w = WeightVector::new(vec![1.0, 2.0, 3.0, 1.0, 0.5]).unwrap();
        let v = variance(&Mother::Entropy, &fam, &w).unwrap();
        let expect = arithmetic_mean(&fam, &w).unwrap().trace() - log_euclidean_multi(&fam, &w).unwrap().trace();
        assert_abs_diff_eq!(v, expect, epsilon = 1e-10);

        let pair = [fam[0].clone(), fam[1].clone()];
        let v2 = variance(&Mother::Entropy, &pair, &WeightVector::uniform(2).unwrap()).unwrap();
        assert_abs_diff_eq!(v2, 0.5 * divergence(DistanceKind::D4, &fam[0], &fam[1]).unwrap(), epsilon = 1e-10);

        let same = vec![fam[2].clone(); 3];
        assert!(variance(&Mother::Entropy, &same, &WeightVector::uniform(3).unwrap()).unwrap() <= 1e-12);
    }

    #[test]
    fn phi4_characterisation() {
        let mut rng = rng_from_seed(66);
        for _ in 0..20 {
            let a = random_spd(3, 100.0, &mut rng);
            let b = random_spd(3, 100.0, &mut rng);
            let direct = divergence(DistanceKind::D4, &a, &b).unwrap();
            assert_abs_diff_eq!(phi4_via_min(&a, &b).unwrap(), direct, epsilon = 1e-9);
        }
        let a = SpdMatrix::from_diagonal(&[1.0, 9.0]).unwrap();
        let b = SpdMatrix::from_diagonal(&[4.0, 1.0]).unwrap();
        assert_abs_diff_eq!(phi4_via_min(&a, &b).unwrap(), 1.0 + 4.0, epsilon = 1e-12);
    }

    #[test]
    fn outside_image_is_rejected() {
        #[derive(Debug)]
        struct Narrow;
        impl MotherFunction for Narrow {
            fn name(&self) -> String {
                "narrow".into()
            }
            fn psi(&self, x: f64) -> f64 {
                x * x
            }
            fn dpsi(&self, x: f64) -> f64 {
                2.0 * x
            }
            fn inv_dpsi(&self, y: f64) -> f64 {
                y / 2.0
            }
            fn derivative_image(&self) -> (f64, f64) {
                (0.0, 1.0)
            }
        }
        let fam = [SpdMatrix::from_diagonal(&[3.0]).unwrap()];
        let r = left_barycentre(&Narrow, &fam, &WeightVector::uniform(1).unwrap());
        assert!(matches!(r, Err(Error::OutsideDerivativeImage { .. })));
    }
}
