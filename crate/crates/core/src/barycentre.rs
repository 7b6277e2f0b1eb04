//! Barycentres `argmin_X Σ w_j d²(X, A_j)` through their fixed-point
//! equations `X = Σ w_j 𝒢(X, A_j)`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::Serialize;

use crate::distances::{divergence, DistanceKind};
use crate::error::{Error, Result};
use crate::linalg::{check_same_dim, commutator_norm, product_sqrt, CMatrix, Complex, SpdMatrix};
use crate::means::{arithmetic_mean, check_family, geometric_mean, geometric_mean_t, log_euclidean_pair, weighted_sum, WeightVector};
use crate::sample::{random_unitary, rng_from_seed};

/// Which inner mean `𝒢(X, A)` defines the fixed-point equation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum MeanKind {
    /// `(X^{1/2}AX^{1/2})^{1/2}`; the Bures–Wasserstein barycentre.
    Wasserstein,
    /// `X #_t A`, `t ∈ (0, 1)`. For `t = ½` the objective is `Σ w_j Φ₃`, but
    /// the fixed point only minimises it when the family commutes.
    PowerT(f64),
    /// `exp((log X + log A)/2)`; the `d₄` barycentre.
    LogEuclidType,
}

impl MeanKind {
    pub fn power(t: f64) -> Result<Self> {
        if t > 0.0 && t < 1.0 {
            Ok(Self::PowerT(t))
        } else {
            Err(Error::InvalidParameter {
                name: "t",
                reason: format!("power mean needs t in (0, 1), got {t}"),
            })
        }
    }

    fn validate(self) -> Result<Self> {
        match self {
            Self::PowerT(t) => Self::power(t),
            other => Ok(other),
        }
    }

    /// The divergence whose barycentre this is.
    pub fn distance(self) -> Result<DistanceKind> {
        match self {
            Self::Wasserstein => Ok(DistanceKind::D2),
            Self::PowerT(0.5) => Ok(DistanceKind::D3),
            Self::LogEuclidType => Ok(DistanceKind::D4),
            other => Err(Error::UnsupportedObjective(other.to_string())),
        }
    }
}

impl fmt::Display for MeanKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Wasserstein => write!(f, "wasserstein"),
            Self::PowerT(t) => write!(f, "power({t})"),
            Self::LogEuclidType => write!(f, "log-euclid"),
        }
    }
}

impl FromStr for MeanKind {
    type Err = Error;

    /// Accepts `wasserstein`, `log-euclid` and `power` (t = ½) or `power:<t>`.
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        match lower.as_str() {
            "wasserstein" | "d2" => Ok(Self::Wasserstein),
            "log-euclid" | "logeuclid" | "d4" => Ok(Self::LogEuclidType),
            "power" | "d3" => Ok(Self::PowerT(0.5)),
            other => match other.strip_prefix("power:") {
                Some(t) => {
                    let t: f64 = t.parse().map_err(|_| Error::InvalidParameter {
                        name: "t",
                        reason: format!("not a number: {t:?}"),
                    })?;
                    Self::power(t)
                }
                None => Err(Error::InvalidParameter {
                    name: "kind",
                    reason: format!("unknown mean kind {s:?}"),
                }),
            },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SolverConfig {
    /// Bound on the relative residual `‖X − Σ w_j 𝒢(X, A_j)‖₂ / ‖X‖₂`.
    pub tol: f64,
    pub max_iter: usize,
    pub damping: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 500,
            damping: 1.0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "tol",
                reason: format!("must be positive, got {}", self.tol),
            });
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter {
                name: "max_iter",
                reason: "must be positive".into(),
            });
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "damping",
                reason: format!("must lie in (0, 1], got {}", self.damping),
            });
        }
        Ok(())
    }
}

/// Residual increases in a row that trigger halving the damping.
const STALL_LIMIT: usize = 5;
const MIN_DAMPING: f64 = 1.0 / 16.0;
/// Relative slack allowed when checking `αI ≤ X_k ≤ βI`.
const BRACKET_SLACK: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolverReport {
    pub kind: String,
    /// Evaluations of the fixed-point map.
    pub iterations: usize,
    pub final_residual: f64,
    pub converged: bool,
    /// `(α, β)`: the smallest and largest eigenvalue over all inputs.
    pub spectral_bounds: (f64, f64),
    /// Extreme eigenvalues seen over all iterates.
    pub iterate_range: (f64, f64),
    pub bracket_respected: bool,
    pub final_damping: f64,
    pub residual_history: Vec<f64>,
}

/// `𝒢(X, A)` for the chosen kind.
pub fn mean_map(kind: MeanKind, x: &SpdMatrix, a: &SpdMatrix) -> Result<SpdMatrix> {
    check_same_dim(x.dim(), a.dim())?;
    match kind.validate()? {
        MeanKind::Wasserstein => {
            let x_half = x.sqrt();
            let inner = SpdMatrix::from_hermitian_part(&(x_half.matrix() * a.matrix() * x_half.matrix()))?;
            Ok(inner.sqrt())
        }
        MeanKind::PowerT(t) => geometric_mean_t(x, a, t),
        MeanKind::LogEuclidType => log_euclidean_pair(x, a),
    }
}

/// `Σ w_j 𝒢(X, A_j)`, summed left to right.
pub fn fixed_point_map(kind: MeanKind, x: &SpdMatrix, mats: &[SpdMatrix], w: &WeightVector) -> Result<SpdMatrix> {
    let dim = check_family(mats, w)?;
    check_same_dim(dim, x.dim())?;
    let images = mats.iter().map(|a| mean_map(kind, x, a)).collect::<Result<Vec<_>>>()?;
    SpdMatrix::from_hermitian_part(&weighted_sum(dim, w.iter().copied().zip(images.iter().map(SpdMatrix::matrix))))
}

/// `‖X − Σ w_j 𝒢(X, A_j)‖₂ / ‖X‖₂`.
pub fn relative_residual(kind: MeanKind, x: &SpdMatrix, mats: &[SpdMatrix], w: &WeightVector) -> Result<f64> {
    let fx = fixed_point_map(kind, x, mats, w)?;
    Ok((x.matrix() - fx.matrix()).norm() / x.matrix().norm())
}

fn family_bounds(mats: &[SpdMatrix]) -> (f64, f64) {
    mats.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), a| {
        (lo.min(a.min_eigenvalue()), hi.max(a.max_eigenvalue()))
    })
}

/// Picard iteration from the arithmetic mean.
pub fn solve(kind: MeanKind, mats: &[SpdMatrix], w: &WeightVector, cfg: &SolverConfig) -> Result<(SpdMatrix, SolverReport)> {
    let start = arithmetic_mean(mats, w)?;
    solve_from(kind, mats, w, cfg, start)
}

/// Picard iteration `X ← (1−d)X + d·Σ w_j 𝒢(X, A_j)` from a given start.
pub fn solve_from(
    kind: MeanKind,
    mats: &[SpdMatrix],
    w: &WeightVector,
    cfg: &SolverConfig,
    start: SpdMatrix,
) -> Result<(SpdMatrix, SolverReport)> {
    let kind = kind.validate()?;
    cfg.validate()?;
    let dim = check_family(mats, w)?;
    check_same_dim(dim, start.dim())?;
    let (alpha, beta) = family_bounds(mats);

    let mut report = SolverReport {
        kind: kind.to_string(),
        iterations: 0,
        final_residual: f64::INFINITY,
        converged: false,
        spectral_bounds: (alpha, beta),
        iterate_range: (f64::INFINITY, 0.0),
        bracket_respected: true,
        final_damping: cfg.damping,
        residual_history: Vec::new(),
    };
    let mut damping = cfg.damping;
    let mut increases = 0;
    let mut x = start;
    for iteration in 1..=cfg.max_iter {
        let (lo, hi) = (x.min_eigenvalue(), x.max_eigenvalue());
        report.iterate_range = (report.iterate_range.0.min(lo), report.iterate_range.1.max(hi));
        let inside = lo >= alpha * (1.0 - BRACKET_SLACK) && hi <= beta * (1.0 + BRACKET_SLACK);
        if !inside {
            report.bracket_respected = false;
            if kind == MeanKind::LogEuclidType {
                return Err(Error::BracketViolation {
                    iteration,
                    min: lo,
                    max: hi,
                    alpha,
                    beta,
                });
            }
        }

        let fx = fixed_point_map(kind, &x, mats, w)?;
        let residual = (x.matrix() - fx.matrix()).norm() / x.matrix().norm();
        if let Some(&prev) = report.residual_history.last() {
            if residual > prev {
                increases += 1;
                if increases >= STALL_LIMIT && damping > MIN_DAMPING {
                    damping = (damping / 2.0).max(MIN_DAMPING);
                    increases = 0;
                }
            } else {
                increases = 0;
            }
        }
        report.residual_history.push(residual);
        report.iterations = iteration;
        report.final_residual = residual;
        report.final_damping = damping;
        if residual <= cfg.tol {
            report.converged = true;
            return Ok((x, report));
        }
        if iteration == cfg.max_iter {
            break;
        }
        let next = x.matrix() * Complex::new(1.0 - damping, 0.0) + fx.matrix() * Complex::new(damping, 0.0);
        x = SpdMatrix::from_hermitian_part(&next)?;
    }
    Ok((x, report))
}

/// Random positive definite matrix with spectrum uniform in `[α, β]`.
fn random_in_bracket<R: Rng + ?Sized>(dim: usize, alpha: f64, beta: f64, rng: &mut R) -> Result<SpdMatrix> {
    let q = random_unitary(dim, rng);
    let spectrum = nalgebra::DVector::from_iterator(
        dim,
        (0..dim).map(|_| Complex::new(rng.random_range(alpha..=beta), 0.0)),
    );
    SpdMatrix::from_hermitian_part(&(&q * CMatrix::from_diagonal(&spectrum) * q.adjoint()))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UniquenessReport {
    pub starts: usize,
    pub all_converged: bool,
    /// Largest `‖X_i − X_j‖₂` between solutions from different starts.
    pub max_pairwise_distance: f64,
}

/// Solve from `starts` random points of `{αI ≤ X ≤ βI}` and compare.
pub fn uniqueness_check(
    kind: MeanKind,
    mats: &[SpdMatrix],
    w: &WeightVector,
    cfg: &SolverConfig,
    starts: usize,
    seed: u64,
) -> Result<UniquenessReport> {
    let dim = check_family(mats, w)?;
    let (alpha, beta) = family_bounds(mats);
    let mut rng = rng_from_seed(seed);
    let mut solutions = Vec::with_capacity(starts);
    let mut all_converged = true;
    for _ in 0..starts {
        let x0 = random_in_bracket(dim, alpha, beta, &mut rng)?;
        let (x, report) = solve_from(kind, mats, w, cfg, x0)?;
        all_converged &= report.converged;
        solutions.push(x);
    }
    let mut max_pairwise_distance: f64 = 0.0;
    for i in 0..solutions.len() {
        for j in (i + 1)..solutions.len() {
            max_pairwise_distance = max_pairwise_distance.max((solutions[i].matrix() - solutions[j].matrix()).norm());
        }
    }
    Ok(UniquenessReport {
        starts,
        all_converged,
        max_pairwise_distance,
    })
}

/// `Σ w_j d²(X, A_j)` for the divergence matching `kind`.
pub fn objective(kind: MeanKind, x: &SpdMatrix, mats: &[SpdMatrix], w: &WeightVector) -> Result<f64> {
    let d = kind.validate()?.distance()?;
    check_family(mats, w)?;
    let mut total = 0.0;
    for (wj, a) in w.iter().zip(mats) {
        total += wj * divergence(d, x, a)?;
    }
    Ok(total)
}

/// Equal-weight two-point solutions: `¼(A + B + (AB)^{1/2} + (BA)^{1/2})` for
/// Wasserstein and `¼(A + B + 2A#B)` for the power mean with `t = ½`.
pub fn closed_form_m2(kind: MeanKind, a: &SpdMatrix, b: &SpdMatrix) -> Result<SpdMatrix> {
    check_same_dim(a.dim(), b.dim())?;
    let quarter = Complex::new(0.25, 0.0);
    match kind {
        MeanKind::Wasserstein => {
            let ab = product_sqrt(a, b)?;
            // (BA)^{1/2} = ((AB)^{1/2})*
            let sum = a.matrix() + b.matrix() + &ab + ab.adjoint();
            SpdMatrix::from_hermitian_part(&(sum * quarter))
        }
        MeanKind::PowerT(0.5) => {
            let g = geometric_mean(a, b)?;
            let sum = a.matrix() + b.matrix() + g.matrix() * Complex::new(2.0, 0.0);
            SpdMatrix::from_hermitian_part(&(sum * quarter))
        }
        other => Err(Error::UnsupportedClosedForm(other.to_string())),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct D4GuessReport {
    /// `‖[A, B]‖₂ / (‖A‖₂‖B‖₂)`.
    pub relative_commutator: f64,
    /// Commuting inputs satisfy the guess exactly, so nothing is learned.
    pub inconclusive: bool,
    /// `‖C − ½(L(C, A) + L(C, B))‖₂` for `C = ¼(A + B + 2L(A, B))`.
    pub residual: f64,
    pub guess_norm: f64,
    /// `‖C − X*‖₂` against the solver's fixed point.
    pub distance_to_solution: f64,
    pub solver: SolverReport,
    /// `residual > 1e-6·‖C‖₂` on a conclusive pair.
    pub refuted: bool,
}

/// Test the analogue `¼(A + B + 2L(A, B))` of the two-point closed forms for
/// the `d₄` barycentre equation.
pub fn refute_d4_guess(a: &SpdMatrix, b: &SpdMatrix, cfg: &SolverConfig) -> Result<D4GuessReport> {
    check_same_dim(a.dim(), b.dim())?;
    let relative_commutator = commutator_norm(a.matrix(), b.matrix()) / (a.matrix().norm() * b.matrix().norm());
    let inconclusive = relative_commutator <= 1e-6;
    let l = log_euclidean_pair(a, b)?;
    let c = SpdMatrix::from_hermitian_part(
        &((a.matrix() + b.matrix() + l.matrix() * Complex::new(2.0, 0.0)) * Complex::new(0.25, 0.0)),
    )?;
    let pair = [a.clone(), b.clone()];
    let w = WeightVector::uniform(2)?;
    let fc = fixed_point_map(MeanKind::LogEuclidType, &c, &pair, &w)?;
    let residual = (c.matrix() - fc.matrix()).norm();
    let guess_norm = c.matrix().norm();
    let (x, solver) = solve(MeanKind::LogEuclidType, &pair, &w, cfg)?;
    Ok(D4GuessReport {
        relative_commutator,
        inconclusive,
        residual,
        guess_norm,
        distance_to_solution: (c.matrix() - x.matrix()).norm(),
        solver,
        refuted: !inconclusive && residual > 1e-6 * guess_norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::means::q_half;
    use crate::sample::{random_commuting_family, random_hermitian, random_spd, random_weights};
    use approx::assert_abs_diff_eq;

    const KINDS: [MeanKind; 4] = [MeanKind::Wasserstein, MeanKind::PowerT(0.5), MeanKind::PowerT(0.3), MeanKind::LogEuclidType];

    #[test]
    fn mean_map_examples() {
        let mut rng = rng_from_seed(81);
        let a = random_spd(3, 50.0, &mut rng);
        for kind in KINDS {
            let m = mean_map(kind, &a, &a).unwrap();
            assert!((m.matrix() - a.matrix()).norm() <= 1e-12 * a.matrix().norm());
        }
        let x = SpdMatrix::from_diagonal(&[1.0, 4.0, 0.5]).unwrap();
        let b = SpdMatrix::from_diagonal(&[9.0, 1.0, 2.0]).unwrap();
        let expect = SpdMatrix::from_diagonal(&[3.0, 2.0, 1.0]).unwrap();
        for kind in [MeanKind::Wasserstein, MeanKind::PowerT(0.5), MeanKind::LogEuclidType] {
            let m = mean_map(kind, &x, &b).unwrap();
            assert!((m.matrix() - expect.matrix()).norm() <= 1e-13);
        }
        assert!(mean_map(MeanKind::PowerT(1.0), &x, &b).is_err());
    }

    #[test]
    fn parse_kinds() {
        assert_eq!("wasserstein".parse::<MeanKind>().unwrap(), MeanKind::Wasserstein);
        assert_eq!("power".parse::<MeanKind>().unwrap(), MeanKind::PowerT(0.5));
        assert_eq!("power:0.25".parse::<MeanKind>().unwrap(), MeanKind::PowerT(0.25));
        assert_eq!("log-euclid".parse::<MeanKind>().unwrap(), MeanKind::LogEuclidType);
        assert!("power:2".parse::<MeanKind>().is_err());
        assert!("cartan".parse::<MeanKind>().is_err());
    }

    #[test]
    fn constant_family_is_immediate() {
        let mut rng = rng_from_seed(82);
        let a = random_spd(4, 100.0, &mut rng);
        let fam = vec![a.clone(); 3];
        let w = WeightVector::uniform(3).unwrap();
        for kind in KINDS {
            let (x, r) = solve(kind, &fam, &w, &SolverConfig::default()).unwrap();
            assert!(r.converged && r.iterations == 1, "{kind}: {r:?}");
            assert!((x.matrix() - a.matrix()).norm() <= 1e-12 * a.matrix().norm());
        }
    }

    #[test]
    fn random_families_converge() {
        let mut rng = rng_from_seed(83);
        for _ in 0..5 {
            let m = rng.random_range(2..=5);
            let dim = rng.random_range(2..=5);
            let fam: Vec<SpdMatrix> = (0..m).map(|_| random_spd(dim, 50.0, &mut rng)).collect();
            let w = WeightVector::new(random_weights(m, &mut rng)).unwrap();
            for kind in KINDS {
                let (x, r) = solve(kind, &fam, &w, &SolverConfig::default()).unwrap();
                assert!(r.converged, "{kind}: {r:?}");
                assert!(r.bracket_respected);
                assert!(relative_residual(kind, &x, &fam, &w).unwrap() <= 1e-12);
            }
        }
    }

    #[test]
    fn solutions_are_stationary() {
        let mut rng = rng_from_seed(84);
        let fam: Vec<SpdMatrix> = (0..4).map(|_| random_spd(3, 30.0, &mut rng)).collect();
        let w = WeightVector::new(random_weights(4, &mut rng)).unwrap();
        for kind in [MeanKind::Wasserstein, MeanKind::LogEuclidType] {
            let (x, _) = solve(kind, &fam, &w, &SolverConfig::default()).unwrap();
            let f0 = objective(kind, &x, &fam, &w).unwrap();
            for _ in 0..10 {
                let y = random_hermitian(3, &mut rng);
                let y = y.scale(1.0 / y.norm());
                let h = 1e-5;
                let xp = SpdMatrix::new(x.as_hermitian() + &y.scale(h)).unwrap();
                let xm = SpdMatrix::new(x.as_hermitian() - &y.scale(h)).unwrap();
                let fp = objective(kind, &xp, &fam, &w).unwrap();
                let fm = objective(kind, &xm, &fam, &w).unwrap();
                assert!(((fp - fm) / (2.0 * h)).abs() <= 1e-6, "{kind}");
                assert!(fp > f0 && fm > f0);
            }
        }
        assert!(matches!(
            objective(MeanKind::PowerT(0.3), &fam[0], &fam, &w),
            Err(Error::UnsupportedObjective(_))
        ));
    }

    /// `X = Σ w_j X#A_j` is not a critical point of `Σ w_j Φ₃(X, A_j)` once
    /// the family does not commute: congruence by `X^{1/2}` preserves the
    /// geometric mean but not the trace.
    #[test]
    fn power_half_fixed_point_is_not_phi3_critical() {
        let mut rng = rng_from_seed(84);
        let fam: Vec<SpdMatrix> = (0..4).map(|_| random_spd(3, 30.0, &mut rng)).collect();
        let w = WeightVector::new(random_weights(4, &mut rng)).unwrap();
        let (x, r) = solve(MeanKind::PowerT(0.5), &fam, &w, &SolverConfig::default()).unwrap();
        assert!(r.converged);
        let mut grad = crate::linalg::HermitianMatrix::zeros(3);
        for (wj, a) in w.iter().zip(&fam) {
            grad = &grad + &crate::calculus::grad_phi3(a, &x).unwrap().scale(*wj);
        }
        assert!(grad.norm() > 1e-3, "{}", grad.norm());
        let y = grad.scale(1.0 / grad.norm());
        let h = 1e-5;
        let fp = objective(MeanKind::PowerT(0.5), &SpdMatrix::new(x.as_hermitian() + &y.scale(h)).unwrap(), &fam, &w).unwrap();
        let fm = objective(MeanKind::PowerT(0.5), &SpdMatrix::new(x.as_hermitian() - &y.scale(h)).unwrap(), &fam, &w).unwrap();
        assert_abs_diff_eq!((fp - fm) / (2.0 * h), grad.norm(), epsilon = 1e-6);

        // on a commuting family the two characterisations agree
        let fam = random_commuting_family(3, 4, 30.0, &mut rng);
        let (x, _) = solve(MeanKind::PowerT(0.5), &fam, &w, &SolverConfig::default()).unwrap();
        let mut grad = crate::linalg::HermitianMatrix::zeros(3);
        for (wj, a) in w.iter().zip(&fam) {
            grad = &grad + &crate::calculus::grad_phi3(a, &x).unwrap().scale(*wj);
        }
        assert!(grad.norm() <= 1e-10);
    }

    #[test]
    fn commuting_family_collapses() {
        let mut rng = rng_from_seed(85);
        let fam = random_commuting_family(4, 4, 100.0, &mut rng);
        let w = WeightVector::new(random_weights(4, &mut rng)).unwrap();
        let q = q_half(&fam, &w).unwrap();
        for kind in [MeanKind::Wasserstein, MeanKind::PowerT(0.5), MeanKind::LogEuclidType] {
            let (x, _) = solve(kind, &fam, &w, &SolverConfig::default()).unwrap();
            assert!((x.matrix() - q.matrix()).norm() <= 1e-8 * q.matrix().norm(), "{kind}");
        }
    }

    #[test]
    fn restarts_agree() {
        let mut rng = rng_from_seed(86);
        let fam: Vec<SpdMatrix> = (0..3).map(|_| random_spd(3, 20.0, &mut rng)).collect();
        let w = WeightVector::uniform(3).unwrap();
        for kind in KINDS {
            let r = uniqueness_check(kind, &fam, &w, &SolverConfig::default(), 5, 9).unwrap();
            assert!(r.all_converged && r.max_pairwise_distance <= 1e-8, "{kind}: {r:?}");
        }
    }

    #[test]
    fn permutation_and_congruence() {
        let mut rng = rng_from_seed(87);
        let fam: Vec<SpdMatrix> = (0..4).map(|_| random_spd(3, 20.0, &mut rng)).collect();
        let raw = random_weights(4, &mut rng);
        let w = WeightVector::new(raw.clone()).unwrap();
        let order = [2, 0, 3, 1];
        let fam_p: Vec<SpdMatrix> = order.iter().map(|&i| fam[i].clone()).collect();
        let w_p = WeightVector::new(order.iter().map(|&i| raw[i]).collect()).unwrap();
        let cfg = SolverConfig::default();
        for kind in KINDS {
            let (x, _) = solve(kind, &fam, &w, &cfg).unwrap();
            let (xp, _) = solve(kind, &fam_p, &w_p, &cfg).unwrap();
            assert!((x.matrix() - xp.matrix()).norm() <= 1e-12 * x.matrix().norm().max(1.0), "{kind}");
        }

        let k = CMatrix::from_fn(3, 3, |i, j| Complex::new((i + 2 * j) as f64 * 0.1 + if i == j { 1.0 } else { 0.0 }, 0.05 * i as f64));
        let fam_k: Vec<SpdMatrix> = fam.iter().map(|a| crate::linalg::congruence(&k, a).unwrap()).collect();
        for kind in [MeanKind::PowerT(0.5), MeanKind::PowerT(0.3)] {
            let (x, _) = solve(kind, &fam, &w, &cfg).unwrap();
            let (xk, _) = solve(kind, &fam_k, &w, &cfg).unwrap();
            let mapped = crate::linalg::congruence(&k, &x).unwrap();
            assert!((xk.matrix() - mapped.matrix()).norm() <= 1e-8 * xk.matrix().norm());
        }
    }

    #[test]
    fn closed_forms() {
        let mut rng = rng_from_seed(88);
        let w = WeightVector::uniform(2).unwrap();
        for _ in 0..20 {
            let a = random_spd(3, 50.0, &mut rng);
            let b = random_spd(3, 50.0, &mut rng);
            let pair = [a.clone(), b.clone()];
            for kind in [MeanKind::Wasserstein, MeanKind::PowerT(0.5)] {
                let c = closed_form_m2(kind, &a, &b).unwrap();
                assert!(relative_residual(kind, &c, &pair, &w).unwrap() <= 1e-8);
                let (x, _) = solve(kind, &pair, &w, &SolverConfig::default()).unwrap();
                assert!((x.matrix() - c.matrix()).norm() <= 1e-8 * c.matrix().norm());
            }
        }
        let a = random_spd(2, 5.0, &mut rng);
        let same = closed_form_m2(MeanKind::Wasserstein, &a, &a).unwrap();
        assert!((same.matrix() - a.matrix()).norm() <= 1e-12 * a.matrix().norm());
        assert!(closed_form_m2(MeanKind::LogEuclidType, &a, &a).is_err());
    }

    #[test]
    fn d4_guess() {
        let cfg = SolverConfig::default();
        let a = SpdMatrix::from_real(2, &[2.0, 5.0, 5.0, 17.0]).unwrap();
        let b = SpdMatrix::from_real(2, &[13.0, 8.0, 8.0, 5.0]).unwrap();
        let r = refute_d4_guess(&a, &b, &cfg).unwrap();
        assert!(r.refuted && r.residual > 0.1, "{r:?}");
        assert!(r.distance_to_solution > 0.0);

        let a = SpdMatrix::from_diagonal(&[1.0, 9.0]).unwrap();
        let b = SpdMatrix::from_diagonal(&[4.0, 2.0]).unwrap();
        let r = refute_d4_guess(&a, &b, &cfg).unwrap();
        assert!(r.inconclusive && !r.refuted);
        assert_abs_diff_eq!(r.residual, 0.0, epsilon = 1e-13);
    }
}
