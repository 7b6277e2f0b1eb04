//! Hellinger-type distances `d(A,B) = [tr(A+B) − 2 tr G(A,B)]^{1/2}` for the
//! four choices of geometric mean `G`, their squares `Φ₁…Φ₄`, and the scalar
//! Hellinger distance on probability vectors.
//!
//! | kind | `G(A,B)`                   | metric? |
//! |------|----------------------------|---------|
//! | D1   | `A^{1/2}B^{1/2}`           | yes     |
//! | D2   | `(A^{1/2}BA^{1/2})^{1/2}`  | yes (Bures–Wasserstein) |
//! | D3   | `A # B`                    | no      |
//! | D4   | `exp((log A + log B)/2)`   | no      |

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{check_same_dim, product_sqrt, trace, CMatrix, SpdMatrix};
use crate::means::{fidelity, geometric_mean, log_euclidean_pair};

/// Tolerance for clamping a negative radicand to zero, relative to `max(1, tr(A+B))`.
pub const RADICAND_TOL: f64 = 1e-10;

/// Discrete probability vector.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbabilityVector {
    entries: Vec<f64>,
}

impl ProbabilityVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Empty);
        }
        if let Some(bad) = entries.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(Error::InvalidParameter {
                name: "probability",
                reason: format!("entries must be nonnegative, got {bad}"),
            });
        }
        let total: f64 = entries.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter {
                name: "probability",
                reason: format!("entries must sum to 1, got {total}"),
            });
        }
        Ok(Self { entries })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.entries
    }
}

/// `d_H(p,q) = (1/√2)‖√p − √q‖₂`.
pub fn hellinger(p: &ProbabilityVector, q: &ProbabilityVector) -> Result<f64> {
    check_same_dim(p.entries.len(), q.entries.len())?;
    let s: f64 = p
        .entries
        .iter()
        .zip(&q.entries)
        .map(|(a, b)| (a.sqrt() - b.sqrt()).powi(2))
        .sum();
    Ok((0.5 * s).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DistanceKind {
    D1,
    D2,
    D3,
    D4,
}

impl DistanceKind {
    pub const ALL: [DistanceKind; 4] = [Self::D1, Self::D2, Self::D3, Self::D4];
}

impl fmt::Display for DistanceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::D1 => "d1",
            Self::D2 => "d2",
            Self::D3 => "d3",
            Self::D4 => "d4",
        };
        f.write_str(s)
    }
}

impl FromStr for DistanceKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "d1" => Ok(Self::D1),
            "d2" => Ok(Self::D2),
            "d3" => Ok(Self::D3),
            "d4" => Ok(Self::D4),
            other => Err(Error::InvalidParameter {
                name: "kind",
                reason: format!("unknown distance kind {other:?}"),
            }),
        }
    }
}

fn clamp_radicand(what: &'static str, value: f64, scale: f64) -> Result<f64> {
    let tolerance = RADICAND_TOL * scale.max(1.0);
    if value >= 0.0 {
        Ok(value)
    } else if value >= -tolerance {
        Ok(0.0)
    } else {
        Err(Error::NegativeRadicand {
            what,
            value,
            tolerance,
        })
    }
}

/// Squared distance `Φ_kind(A,B) = d_kind(A,B)²`.
pub fn divergence(kind: DistanceKind, a: &SpdMatrix, b: &SpdMatrix) -> Result<f64> {
    check_same_dim(a.dim(), b.dim())?;
    let scale = a.trace() + b.trace();
    match kind {
        // ‖A^{1/2} − B^{1/2}‖₂², nonnegative by construction
        DistanceKind::D1 => Ok((a.sqrt().matrix() - b.sqrt().matrix()).norm_squared()),
        DistanceKind::D2 => clamp_radicand("d2", scale - 2.0 * fidelity(a, b)?, scale),
        DistanceKind::D3 => phi3(a, b),
        DistanceKind::D4 => {
            let l = log_euclidean_pair(a, b)?;
            let tr_l = l.trace_of(|x| x)?;
            clamp_radicand("d4", scale - 2.0 * tr_l, scale)
        }
    }
}

/// `Φ₃(A,B) = tr(A + B − 2A#B) = ‖(I − M^{1/2})A^{1/2}‖₂²` with
/// `M = A^{−1/2}BA^{−1/2}`; the second form has no cancellation near `A = B`.
fn phi3(a: &SpdMatrix, b: &SpdMatrix) -> Result<f64> {
    let a_half = a.sqrt();
    let a_inv_half = a.inv_sqrt()?;
    let m = SpdMatrix::from_hermitian_part(&(a_inv_half.matrix() * b.matrix() * a_inv_half.matrix()))?;
    // 1 − √μ = (1 − μ)/(1 + √μ)
    let defect = m.eigen().map(|mu| (1.0 - mu) / (1.0 + mu.sqrt()))?;
    Ok((defect.matrix() * a_half.matrix()).norm_squared())
}

pub fn distance(kind: DistanceKind, a: &SpdMatrix, b: &SpdMatrix) -> Result<f64> {
    Ok(divergence(kind, a, b)?.sqrt())
}

/// The four traces `tr A#B ≤ tr L(A,B) ≤ tr A^{1/2}B^{1/2} ≤ tr (AB)^{1/2}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TraceChain {
    pub geometric: f64,
    pub log_euclidean: f64,
    pub sqrt_product: f64,
    pub product_sqrt: f64,
}

impl TraceChain {
    pub fn values(&self) -> [f64; 4] {
        [
            self.geometric,
            self.log_euclidean,
            self.sqrt_product,
            self.product_sqrt,
        ]
    }

    /// Consecutive differences; all are nonnegative in exact arithmetic.
    pub fn gaps(&self) -> [f64; 3] {
        let v = self.values();
        [v[1] - v[0], v[2] - v[1], v[3] - v[2]]
    }

    pub fn min_gap(&self) -> f64 {
        self.gaps().into_iter().fold(f64::INFINITY, f64::min)
    }
}

pub fn trace_chain(a: &SpdMatrix, b: &SpdMatrix) -> Result<TraceChain> {
    check_same_dim(a.dim(), b.dim())?;
    Ok(TraceChain {
        geometric: geometric_mean(a, b)?.trace_of(|x| x)?,
        log_euclidean: log_euclidean_pair(a, b)?.trace_of(|x| x)?,
        sqrt_product: trace(&(a.sqrt().matrix() * b.sqrt().matrix())).re,
        product_sqrt: trace(&product_sqrt(a, b)?).re,
    })
}

/// `min_U ‖A^{1/2} − B^{1/2}U‖₂` over unitaries, with the minimising `U`.
///
/// The minimiser is the unitary polar factor of `B^{1/2}A^{1/2}`: with
/// `A^{1/2}B^{1/2} = WΣV*`, `U = VW*`.
pub fn d2_unitary(a: &SpdMatrix, b: &SpdMatrix) -> Result<(f64, CMatrix)> {
    check_same_dim(a.dim(), b.dim())?;
    let a_half = a.sqrt();
    let b_half = b.sqrt();
    let m = a_half.matrix() * b_half.matrix();
    let svd = m
        .try_svd(true, true, f64::EPSILON, 10_000)
        .ok_or(Error::SvdNoConvergence { dim: a.dim() })?;
    let (w, v_t) = match (svd.u, svd.v_t) {
        (Some(w), Some(v_t)) => (w, v_t),
        _ => return Err(Error::SvdNoConvergence { dim: a.dim() }),
    };
    let u = v_t.adjoint() * w.adjoint();
    let value = (a_half.matrix() - b_half.matrix() * &u).norm();
    Ok((value, u))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::{random_spd, random_unitary, rng_from_seed};
    use approx::assert_abs_diff_eq;

    fn m(entries: [f64; 4]) -> SpdMatrix {
        SpdMatrix::from_real(2, &entries).unwrap()
    }

    #[test]
    fn hellinger_examples() {
        let p = ProbabilityVector::new(vec![0.5, 0.5]).unwrap();
        let q = ProbabilityVector::new(vec![1.0, 0.0]).unwrap();
        let r = ProbabilityVector::new(vec![0.0, 1.0]).unwrap();
        assert_eq!(hellinger(&p, &p).unwrap(), 0.0);
        assert_abs_diff_eq!(hellinger(&q, &r).unwrap(), 1.0, epsilon = 1e-15);
        // √(1 − √½)
        assert_abs_diff_eq!(hellinger(&p, &q).unwrap(), 0.541_196_100_146_197, epsilon = 1e-12);
        assert!(ProbabilityVector::new(vec![0.5, 0.6]).is_err());
        assert!(ProbabilityVector::new(vec![1.5, -0.5]).is_err());
        let three = ProbabilityVector::new(vec![0.2, 0.3, 0.5]).unwrap();
        assert!(hellinger(&p, &three).is_err());
    }

    #[test]
    fn hellinger_matches_trace_form() {
        // d_H² = tr A(p,q) − tr G(p,q)
        let p = ProbabilityVector::new(vec![0.1, 0.2, 0.7]).unwrap();
        let q = ProbabilityVector::new(vec![0.3, 0.3, 0.4]).unwrap();
        let tr_g: f64 = p.as_slice().iter().zip(q.as_slice()).map(|(a, b)| (a * b).sqrt()).sum();
        assert_abs_diff_eq!(hellinger(&p, &q).unwrap().powi(2), 1.0 - tr_g, epsilon = 1e-15);
    }

    #[test]
    fn triangle_counterexample_values() {
        let a = m([2.0, 5.0, 5.0, 17.0]);
        let b = m([13.0, 8.0, 8.0, 5.0]);
        assert_abs_diff_eq!(distance(DistanceKind::D3, &a, &b).unwrap(), 5.0347, epsilon = 5e-4);
        let a = m([4.0, -7.0, -7.0, 13.0]);
        let b = m([8.0, -2.0, -2.0, 1.0]);
        assert_abs_diff_eq!(distance(DistanceKind::D4, &a, &b).unwrap(), 3.3349, epsilon = 5e-4);
    }

    #[test]
    fn self_distance_is_zero() {
        let mut rng = rng_from_seed(31);
        let a = random_spd(4, 1e3, &mut rng);
        for kind in [DistanceKind::D1, DistanceKind::D3, DistanceKind::D4] {
            let v = divergence(kind, &a, &a).unwrap();
            assert!(v <= 1e-12, "{kind} {v}");
        }
        // the trace form of Φ₂ cancels at the scale of tr(A + B)
        let v = divergence(DistanceKind::D2, &a, &a).unwrap();
        assert!(v <= 1e-12 * 2.0 * a.trace());
    }

    #[test]
    fn phi1_phi2_divergence_axioms_by_differences() {
        let mut rng = rng_from_seed(34);
        for _ in 0..10 {
            let a = random_spd(3, 50.0, &mut rng);
            let y = crate::sample::random_hermitian(3, &mut rng);
            for kind in [DistanceKind::D1, DistanceKind::D2] {
                let phi = |t: f64| {
                    let b = SpdMatrix::new(a.as_hermitian() + &y.scale(t)).unwrap();
                    divergence(kind, &a, &b).unwrap()
                };
                let h = 1e-3;
                let (plus, minus) = (phi(h), phi(-h));
                // odd part is third order
                assert!((plus - minus).abs() <= 1e-2 * (plus + minus), "{kind}");
                let (c1, c2) = (plus / (h * h), phi(h / 2.0) / (h * h / 4.0));
                assert!(c1 > 0.0 && (c1 - c2).abs() <= 1e-2 * c1, "{kind} {c1} {c2}");
            }
        }
    }

    #[test]
    fn commuting_phi3_reduction() {
        let a = SpdMatrix::from_diagonal(&[1.0, 4.0]).unwrap();
        let b = SpdMatrix::from_diagonal(&[9.0, 16.0]).unwrap();
        for kind in DistanceKind::ALL {
            assert_abs_diff_eq!(divergence(kind, &a, &b).unwrap(), 8.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn symmetric_in_arguments() {
        let mut rng = rng_from_seed(32);
        for _ in 0..20 {
            let a = random_spd(3, 100.0, &mut rng);
            let b = random_spd(3, 100.0, &mut rng);
            for kind in DistanceKind::ALL {
                let ab = distance(kind, &a, &b).unwrap();
                let ba = distance(kind, &b, &a).unwrap();
                assert_abs_diff_eq!(ab, ba, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn trace_chain_collapses() {
        let mut rng = rng_from_seed(33);
        let a = random_spd(3, 100.0, &mut rng);
        let c = trace_chain(&a, &a).unwrap();
        for v in c.values() {
            assert_abs_diff_eq!(v, a.trace(), epsilon = 1e-11);
        }
        let x = SpdMatrix::from_diagonal(&[1.0, 2.0, 5.0]).unwrap();
        let y = SpdMatrix::from_diagonal(&[3.0, 0.5, 7.0]).unwrap();
        let expect = 3f64.sqrt() + 1.0 + 35f64.sqrt();
        for v in trace_chain(&x, &y).unwrap().values() {
            assert_abs_diff_eq!(v, expect, epsilon = 1e-12);
        }
    }

    #[test]
    fn trace_chain_strict_for_noncommuting() {
        let mut rng = rng_from_seed(34);
        let a = random_spd(3, 100.0, &mut rng);
        let b = random_spd(3, 100.0, &mut rng);
        let c = trace_chain(&a, &b).unwrap();
        assert!(c.gaps().iter().all(|&g| g > 0.0), "{c:?}");
    }

    #[test]
    fn d2_unitary_examples() {
        let mut rng = rng_from_seed(35);
        let a = random_spd(3, 30.0, &mut rng);
        let (v, u) = d2_unitary(&a, &a).unwrap();
        assert!(v < 1e-7);
        assert!((u - CMatrix::identity(3, 3)).norm() < 1e-10);

        let x = SpdMatrix::from_diagonal(&[1.0, 4.0]).unwrap();
        let y = SpdMatrix::from_diagonal(&[9.0, 2.0]).unwrap();
        let (v, u) = d2_unitary(&x, &y).unwrap();
        assert!((u - CMatrix::identity(2, 2)).norm() < 1e-12);
        assert_abs_diff_eq!(v, (x.sqrt().matrix() - y.sqrt().matrix()).norm(), epsilon = 1e-12);
    }

    #[test]
    fn d2_unitary_is_minimal_and_matches_d2() {
        let mut rng = rng_from_seed(36);
        let a = random_spd(3, 30.0, &mut rng);
        let b = random_spd(3, 30.0, &mut rng);
        let (v, u) = d2_unitary(&a, &b).unwrap();
        assert!((u.adjoint() * &u - CMatrix::identity(3, 3)).norm() < 1e-12);
        assert_abs_diff_eq!(v, distance(DistanceKind::D2, &a, &b).unwrap(), epsilon = 1e-9);
        let (ah, bh) = (a.sqrt(), b.sqrt());
        for _ in 0..200 {
            let w = random_unitary(3, &mut rng);
            assert!(v <= (ah.matrix() - bh.matrix() * w).norm() + 1e-12);
        }
    }

    #[test]
    fn kind_parsing() {
        assert_eq!("D3".parse::<DistanceKind>().unwrap(), DistanceKind::D3);
        assert!("d5".parse::<DistanceKind>().is_err());
        assert_eq!(DistanceKind::D4.to_string(), "d4");
    }

    #[test]
    fn radicand_clamp_policy() {
        assert_eq!(clamp_radicand("t", -1e-11, 1.0).unwrap(), 0.0);
        assert_eq!(clamp_radicand("t", 0.5, 1.0).unwrap(), 0.5);
        assert!(matches!(
            clamp_radicand("t", -1e-3, 1.0),
            Err(Error::NegativeRadicand { .. })
        ));
    }
}
