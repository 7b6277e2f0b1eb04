//! Seeded random matrices for verification suites and tests.
//!
//! Every random stream is a `ChaCha20Rng` seeded with
//! `ChaCha20Rng::seed_from_u64(seed)` (rand_core's PCG32 expansion of the
//! 64-bit seed into the 256-bit key). Normal variates use
//! `rand_distr::StandardNormal`.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::linalg::{CMatrix, Complex, HermitianMatrix, SpdMatrix};

pub type SampleRng = ChaCha20Rng;

pub fn rng_from_seed(seed: u64) -> SampleRng {
    ChaCha20Rng::seed_from_u64(seed)
}

fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Haar-distributed `n×n` unitary matrix (QR of a complex Ginibre matrix with
/// the phases of `R`'s diagonal folded back into `Q`).
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let z = CMatrix::from_fn(n, n, |_, _| complex_normal(rng));
    let qr = z.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex::new(1.0, 0.0) };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    q
}

/// Real orthogonal matrix with the same construction over the reals.
pub fn random_orthogonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let z = nalgebra::DMatrix::<f64>::from_fn(n, n, |_, _| rng.sample(StandardNormal));
    let qr = z.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            let mut col = q.column_mut(j);
            col *= -1.0;
        }
    }
    q.map(|x| Complex::new(x, 0.0))
}

/// Hermitian matrix with independent complex Gaussian entries (GUE-like).
pub fn random_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> HermitianMatrix {
    let z = CMatrix::from_fn(n, n, |_, _| complex_normal(rng));
    HermitianMatrix::from_hermitian_part(&z).expect("finite square matrix")
}

fn log_spaced_spectrum<R: Rng + ?Sized>(n: usize, cond: f64, rng: &mut R) -> Vec<f64> {
    // endpoints pinned so the condition number is exactly `cond` (for n ≥ 2),
    // centred so the spectrum sits in [cond^{-1/2}, cond^{1/2}]
    let log_c = cond.max(1.0).ln();
    (0..n)
        .map(|i| {
            let u = match (i, n) {
                (_, 1) => rng.random::<f64>(),
                (0, _) => 0.0,
                (i, n) if i == n - 1 => 1.0,
                _ => rng.random::<f64>(),
            };
            ((u - 0.5) * log_c).exp()
        })
        .collect()
}

fn with_spectrum(q: &CMatrix, spectrum: &[f64]) -> CMatrix {
    let d = DVector::from_iterator(spectrum.len(), spectrum.iter().map(|&l| Complex::new(l, 0.0)));
    q * CMatrix::from_diagonal(&d) * q.adjoint()
}

/// Complex positive definite matrix with condition number `cond` and spectrum
/// log-spaced at random inside `[cond^{-1/2}, cond^{1/2}]`.
pub fn random_spd<R: Rng + ?Sized>(n: usize, cond: f64, rng: &mut R) -> SpdMatrix {
    let spectrum = log_spaced_spectrum(n, cond, rng);
    let q = random_unitary(n, rng);
    SpdMatrix::from_hermitian_part(&with_spectrum(&q, &spectrum))
        .expect("well-conditioned sample is positive definite")
}

/// Real symmetric positive definite matrix, otherwise as [`random_spd`].
pub fn random_real_spd<R: Rng + ?Sized>(n: usize, cond: f64, rng: &mut R) -> SpdMatrix {
    let spectrum = log_spaced_spectrum(n, cond, rng);
    let q = random_orthogonal(n, rng);
    SpdMatrix::from_hermitian_part(&with_spectrum(&q, &spectrum))
        .expect("well-conditioned sample is positive definite")
}

/// Family of positive definite matrices that are simultaneously diagonal in a
/// random unitary basis.
pub fn random_commuting_family<R: Rng + ?Sized>(
    n: usize,
    m: usize,
    cond: f64,
    rng: &mut R,
) -> Vec<SpdMatrix> {
    let q = random_unitary(n, rng);
    (0..m)
        .map(|_| {
            let spectrum = log_spaced_spectrum(n, cond, rng);
            SpdMatrix::from_hermitian_part(&with_spectrum(&q, &spectrum))
                .expect("well-conditioned sample is positive definite")
        })
        .collect()
}

/// Positive semidefinite matrix of random rank `1..=n` whose nonzero
/// eigenvalues are log-uniform in `[1e-4, 1e2]`.
pub fn random_psd<R: Rng + ?Sized>(n: usize, rng: &mut R) -> HermitianMatrix {
    let rank = rng.random_range(1..=n);
    let spectrum: Vec<f64> = (0..n)
        .map(|i| {
            if i < rank {
                10f64.powf(rng.random_range(-4.0..2.0))
            } else {
                0.0
            }
        })
        .collect();
    let q = random_unitary(n, rng);
    HermitianMatrix::from_hermitian_part(&with_spectrum(&q, &spectrum)).expect("finite")
}

/// Log-uniform condition number in `[1, max_cond]`.
pub fn random_condition<R: Rng + ?Sized>(max_cond: f64, rng: &mut R) -> f64 {
    max_cond.max(1.0).powf(rng.random::<f64>())
}

/// Random positive weights (not normalized) in `[0.1, 1)`.
pub fn random_weights<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Vec<f64> {
    (0..m).map(|_| rng.random_range(0.1..1.0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unitary_is_unitary() {
        let mut rng = rng_from_seed(1);
        for n in 1..6 {
            let u = random_unitary(n, &mut rng);
            assert!((u.adjoint() * &u - CMatrix::identity(n, n)).norm() < 1e-13);
        }
    }

    #[test]
    fn spd_has_requested_condition() {
        let mut rng = rng_from_seed(2);
        let a = random_spd(4, 1e4, &mut rng);
        assert!((a.condition_number() / 1e4 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn seeding_is_deterministic() {
        let a = random_spd(3, 10.0, &mut rng_from_seed(42));
        let b = random_spd(3, 10.0, &mut rng_from_seed(42));
        assert_eq!(a, b);
    }

    #[test]
    fn commuting_family_commutes() {
        let mut rng = rng_from_seed(3);
        let fam = random_commuting_family(3, 4, 100.0, &mut rng);
        for a in &fam {
            for b in &fam {
                let c = crate::linalg::commutator_norm(a.matrix(), b.matrix());
                assert!(c < 1e-10 * a.matrix().norm() * b.matrix().norm());
            }
        }
    }
}
