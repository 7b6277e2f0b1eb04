//! Verification suites behind `hellinger verify`.

use std::fmt;
use std::str::FromStr;

use clap::ValueEnum;
use rand::Rng;

use crate::barycentre::{closed_form_m2, refute_d4_guess, relative_residual, MeanKind, SolverConfig};
use crate::bregman::{left_barycentre, phi4_via_min, right_barycentre, variance, Mother, MotherFunction};
use crate::calculus::grad_phi3;
use crate::cli::report::CheckRow;
use crate::distances::{d2_unitary, distance, divergence, trace_chain, DistanceKind};
use crate::error::Result;
use crate::legendre::{grad_psibar_vector, psibar_vector, verify_matrix_cex, verify_vector_strictness, CexParams};
use crate::linalg::{SpdMatrix, HermitianMatrix};
use crate::means::{arithmetic_mean, log_euclidean_multi, WeightVector};
use crate::sample::{
    random_commuting_family, random_condition, random_hermitian, random_spd, random_unitary, random_weights,
    rng_from_seed, SampleRng,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Counterexamples,
    TraceChain,
    DivergenceAxioms,
    Bregman,
    LegendreCex,
    D4Guess,
    All,
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.to_possible_value().expect("no skipped variants").get_name())
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        <Self as ValueEnum>::from_str(s, true)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct VerifyOptions {
    pub seed: u64,
    pub samples: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { seed: 42, samples: 1000 }
    }
}

pub fn run_suite(suite: Suite, opts: &VerifyOptions) -> Result<Vec<CheckRow>> {
    match suite {
        Suite::Counterexamples => counterexamples(),
        Suite::TraceChain => trace_chain_suite(opts),
        Suite::DivergenceAxioms => divergence_axioms(opts),
        Suite::Bregman => bregman_suite(opts),
        Suite::LegendreCex => legendre_suite(opts),
        Suite::D4Guess => d4_guess_suite(opts),
        Suite::All => {
            let mut rows = Vec::new();
            for s in [
                Suite::Counterexamples,
                Suite::TraceChain,
                Suite::DivergenceAxioms,
                Suite::Bregman,
                Suite::LegendreCex,
                Suite::D4Guess,
            ] {
                rows.extend(run_suite(s, opts)?);
            }
            Ok(rows)
        }
    }
}

/// Each suite draws from its own stream so that suites are reproducible in
/// isolation.
fn suite_rng(opts: &VerifyOptions, salt: u64) -> SampleRng {
    rng_from_seed(opts.seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

fn m2(entries: [f64; 4]) -> SpdMatrix {
    SpdMatrix::from_real(2, &entries).expect("fixed example is positive definite")
}

pub fn counterexamples() -> Result<Vec<CheckRow>> {
    let s = "counterexamples";
    let mut rows = Vec::new();
    let cases = [
        (
            DistanceKind::D3,
            [[2.0, 5.0, 5.0, 17.0], [13.0, 8.0, 8.0, 5.0], [5.0, 3.0, 3.0, 10.0]],
            5.0347,
            4.6768,
        ),
        (
            DistanceKind::D4,
            [[4.0, -7.0, -7.0, 13.0], [8.0, -2.0, -2.0, 1.0], [5.0, -4.0, -4.0, 5.0]],
            3.3349,
            3.3146,
        ),
    ];
    for (kind, [a, b, c], direct_expect, path_expect) in cases {
        let (a, b, c) = (m2(a), m2(b), m2(c));
        let direct = distance(kind, &a, &b)?;
        let path = distance(kind, &a, &c)? + distance(kind, &c, &b)?;
        rows.push(CheckRow::new(
            s,
            format!("{kind}(A,B) = {direct_expect}"),
            direct,
            (direct - direct_expect).abs() <= 5e-4,
            "within 5e-4",
        ));
        rows.push(CheckRow::new(
            s,
            format!("{kind}(A,C)+{kind}(C,B) = {path_expect}"),
            path,
            (path - path_expect).abs() <= 5e-4,
            "within 5e-4",
        ));
        rows.push(CheckRow::above(s, format!("{kind} triangle violation"), direct - path, 0.0));
    }
    Ok(rows)
}

fn random_pair(rng: &mut SampleRng, max_dim: usize, max_cond: f64) -> (SpdMatrix, SpdMatrix) {
    let n = rng.random_range(2..=max_dim);
    let ca = random_condition(max_cond, rng);
    let cb = random_condition(max_cond, rng);
    (random_spd(n, ca, rng), random_spd(n, cb, rng))
}

pub fn trace_chain_suite(opts: &VerifyOptions) -> Result<Vec<CheckRow>> {
    let s = "trace-chain";
    let mut rng = suite_rng(opts, 1);
    let mut min_gap = f64::INFINITY;
    let mut min_order_gap = f64::INFINITY;
    for _ in 0..opts.samples {
        let (a, b) = random_pair(&mut rng, 6, 1e4);
        min_gap = min_gap.min(trace_chain(&a, &b)?.min_gap());
        let phi = |k| divergence(k, &a, &b);
        let (p1, p2) = (phi(DistanceKind::D1)?, phi(DistanceKind::D2)?);
        let (p3, p4) = (phi(DistanceKind::D3)?, phi(DistanceKind::D4)?);
        // d2 ≤ d1 ≤ d4 ≤ d3
        min_order_gap = min_order_gap.min((p1 - p2).min(p4 - p1).min(p3 - p4));
    }
    Ok(vec![
        CheckRow::new(s, format!("min trace-chain gap, {} pairs", opts.samples), min_gap, min_gap >= -1e-10, ">= -1e-10"),
        CheckRow::new(s, "min gap in d2<=d1<=d4<=d3 (squared)", min_order_gap, min_order_gap >= -1e-10, ">= -1e-10"),
    ])
}

/// `2Φ₃(A, A+tY)/t²` extrapolated to `t → 0` (two Richardson levels).
pub fn hessian_richardson(a: &SpdMatrix, y: &HermitianMatrix) -> Result<f64> {
    let t0 = 0.05 * a.min_eigenvalue() / y.norm();
    let q = |t: f64| -> Result<f64> {
        let x = SpdMatrix::new(a.as_hermitian() + &y.scale(t))?;
        Ok(2.0 * divergence(DistanceKind::D3, a, &x)? / (t * t))
    };
    let (q0, q1, q2) = (q(t0)?, q(t0 / 2.0)?, q(t0 / 4.0)?);
    let r1 = 2.0 * q1 - q0;
    let r2 = 2.0 * q2 - q1;
    Ok((4.0 * r2 - r1) / 3.0)
}

pub fn divergence_axioms(opts: &VerifyOptions) -> Result<Vec<CheckRow>> {
    let s = "divergence-axioms";
    let mut rng = suite_rng(opts, 2);
    let mut self_div: f64 = 0.0;
    let mut grad3: f64 = 0.0;
    let mut grad4: f64 = 0.0;
    let mut hess: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.random_range(2..=5);
        let cond = random_condition(1e3, &mut rng);
        let a = random_spd(n, cond, &mut rng);
        let y = random_hermitian(n, &mut rng);
        self_div = self_div
            .max(divergence(DistanceKind::D3, &a, &a)?)
            .max(divergence(DistanceKind::D4, &a, &a)?);
        grad3 = grad3.max(grad_phi3(&a, &a)?.norm());
        let u = y.scale(1.0 / y.norm());
        let h = 1e-4 * a.min_eigenvalue();
        let fd = (divergence(DistanceKind::D4, &a, &SpdMatrix::new(a.as_hermitian() + &u.scale(h))?)?
            - divergence(DistanceKind::D4, &a, &SpdMatrix::new(a.as_hermitian() - &u.scale(h))?)?)
            / (2.0 * h);
        grad4 = grad4.max(fd.abs());
        let exact = 0.5 * (a.inv_sqrt()?.matrix() * y.matrix()).norm_squared();
        hess = hess.max((hessian_richardson(&a, &y)? / exact - 1.0).abs());
    }
    let mut rows = vec![
        CheckRow::at_most(s, "max Phi3(A,A), Phi4(A,A)", self_div, 1e-12),
        CheckRow::at_most(s, "max |grad Phi3(A,.)| at A (analytic)", grad3, 1e-10),
        CheckRow::at_most(s, "max |D Phi4(A,.)(Y)| at A (FD)", grad4, 1e-6),
        CheckRow::at_most(s, "Hessian 2Phi3(A,A+tY)/t^2 rel. error", hess, 1e-4),
    ];
    rows.extend(metric_sanity(opts, &mut rng)?);
    Ok(rows)
}

fn metric_sanity(opts: &VerifyOptions, rng: &mut SampleRng) -> Result<Vec<CheckRow>> {
    let s = "divergence-axioms";
    let mut tri: f64 = f64::INFINITY;
    for _ in 0..opts.samples {
        let n = rng.random_range(2..=5);
        let mats: Vec<SpdMatrix> = (0..3)
            .map(|_| {
                let c = random_condition(1e3, rng);
                random_spd(n, c, rng)
            })
            .collect();
        for kind in [DistanceKind::D1, DistanceKind::D2] {
            let slack = distance(kind, &mats[0], &mats[2])? + distance(kind, &mats[2], &mats[1])?
                - distance(kind, &mats[0], &mats[1])?;
            tri = tri.min(slack);
        }
    }
    let mut unitary_gap: f64 = 0.0;
    let mut beaten = 0usize;
    for i in 0..100 {
        let (a, b) = random_pair(rng, 5, 1e3);
        let d2 = distance(DistanceKind::D2, &a, &b)?;
        let (via_u, _) = d2_unitary(&a, &b)?;
        unitary_gap = unitary_gap.max((d2 - via_u).abs());
        if i == 0 {
            let (ah, bh) = (a.sqrt(), b.sqrt());
            for _ in 0..500 {
                let u = random_unitary(a.dim(), rng);
                if (ah.matrix() - bh.matrix() * u).norm() < d2 - 1e-12 {
                    beaten += 1;
                }
            }
        }
    }
    Ok(vec![
        CheckRow::new(s, "d1,d2 triangle slack (min)", tri, tri >= -1e-10, ">= -1e-10"),
        CheckRow::at_most(s, "|d2 - min_U |A^1/2 - B^1/2 U||", unitary_gap, 1e-9),
        CheckRow::at_most(s, "random unitaries beating d2 (of 500)", beaten as f64, 0.0),
    ])
}

pub fn bregman_suite(opts: &VerifyOptions) -> Result<Vec<CheckRow>> {
    let s = "bregman";
    let mut rng = suite_rng(opts, 3);
    let (mut right, mut left, mut var, mut phi4, mut kolmo) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..50 {
        let m = rng.random_range(2..=5);
        let n = rng.random_range(2..=5);
        let fam: Vec<SpdMatrix> = (0..m).map(|_| random_spd(n, 100.0, &mut rng)).collect();
        let w = WeightVector::new(random_weights(m, &mut rng))?;
        let arith = arithmetic_mean(&fam, &w)?;
        for mother in [Mother::Entropy, Mother::Square, Mother::Power(1.5)] {
            let r = right_barycentre(&mother, &fam, &w)?;
            right = right.max((r.matrix() - arith.matrix()).norm() / arith.matrix().norm());
        }
        let le = log_euclidean_multi(&fam, &w)?;
        let l = left_barycentre(&Mother::Entropy, &fam, &w)?;
        left = left.max((l.matrix() - le.matrix()).norm() / le.matrix().norm());
        let v = variance(&Mother::Entropy, &fam, &w)?;
        var = var.max((v - (arith.trace() - le.trace())).abs());
        phi4 = phi4.max((phi4_via_min(&fam[0], &fam[1])? - divergence(DistanceKind::D4, &fam[0], &fam[1])?).abs());

        let scalars: Vec<f64> = (0..m).map(|_| 10f64.powf(rng.random_range(-2.0..2.0))).collect();
        let ones: Vec<SpdMatrix> = scalars.iter().map(|&x| SpdMatrix::from_diagonal(&[x])).collect::<Result<_>>()?;
        for mother in [Mother::Entropy, Mother::Square, Mother::Power(1.5)] {
            let got = left_barycentre(&mother, &ones, &w)?.matrix()[(0, 0)].re;
            let sum: f64 = scalars.iter().zip(w.iter()).map(|(x, wj)| wj * mother.dpsi(*x)).sum();
            let expect = mother.inv_dpsi(sum);
            kolmo = kolmo.max((got - expect).abs() / expect);
        }
    }
    Ok(vec![
        CheckRow::at_most(s, "right barycentre = arithmetic mean (rel)", right, 1e-12),
        CheckRow::at_most(s, "entropy left barycentre = log-Euclidean (rel)", left, 1e-10),
        CheckRow::at_most(s, "variance = tr A - tr L", var, 1e-10),
        CheckRow::at_most(s, "phi4_via_min = Phi4", phi4, 1e-9),
        CheckRow::at_most(s, "1x1 Kolmogorov mean (rel)", kolmo, 1e-12),
    ])
}

pub fn legendre_suite(opts: &VerifyOptions) -> Result<Vec<CheckRow>> {
    let s = "legendre-cex";
    let params = CexParams::default();
    let c = params.gradient_constant();
    let g = grad_psibar_vector(&params, [0.0, 0.0])?;
    let closed = (g[0] - c).abs().max((g[1] - c).abs());
    let h = 1e-6;
    let mut fd_err: f64 = 0.0;
    for i in 0..2 {
        let mut xp = [0.0, 0.0];
        let mut xm = [0.0, 0.0];
        xp[i] = h;
        xm[i] = -h;
        let fd = (psibar_vector(&params, xp)? - psibar_vector(&params, xm)?) / (2.0 * h);
        fd_err = fd_err.max((fd - g[i]).abs());
    }
    let vector = verify_vector_strictness(&params, opts.samples, opts.seed)?;
    let matrix = verify_matrix_cex(&params, opts.samples, opts.seed)?;
    Ok(vec![
        CheckRow::new(s, "grad Psi(0) = (N-3)p(1-N^(p-1)/2) e", g[0], closed <= 1e-9, format!("within 1e-9 of {c:.6}")),
        CheckRow::at_most(s, "grad Psi(0) vs central FD", fd_err, 1e-6),
        CheckRow::above(s, format!("vector min gap Psi(x)-Psi(0), {} samples", opts.samples), vector.min_gap, 0.0),
        CheckRow::at_most(s, "vector samples below tangent bound", vector.violations.len() as f64, 0.0),
        CheckRow::at_most(s, "matrix grad Psi(0) - cI", matrix.gradient_at_zero_error, 1e-9),
        CheckRow::above(s, format!("matrix min gap Psi(X)-Psi(0), {} PSD samples", opts.samples), matrix.min_psd_gap, 0.0),
        CheckRow::above(
            s,
            format!("min stationarity residual, {} grid points", matrix.grid_points),
            matrix.min_stationarity_residual,
            0.0,
        ),
    ])
}

pub fn d4_guess_suite(opts: &VerifyOptions) -> Result<Vec<CheckRow>> {
    let s = "d4-guess";
    let mut rng = suite_rng(opts, 5);
    let cfg = SolverConfig::default();
    let w = WeightVector::uniform(2)?;
    let mut closed: f64 = 0.0;
    let mut refuted = 0usize;
    let mut min_ratio = f64::INFINITY;
    let trials = 100;
    for _ in 0..trials {
        let (a, b) = random_pair(&mut rng, 5, 1e2);
        let pair = [a.clone(), b.clone()];
        for kind in [MeanKind::Wasserstein, MeanKind::PowerT(0.5)] {
            let c = closed_form_m2(kind, &a, &b)?;
            closed = closed.max(relative_residual(kind, &c, &pair, &w)?);
        }
        // Condition numbers in [10, 1e3].
        let n = rng.random_range(2..=5);
        let (ca, cb) = (10.0 * random_condition(1e2, &mut rng), 10.0 * random_condition(1e2, &mut rng));
        let r = refute_d4_guess(&random_spd(n, ca, &mut rng), &random_spd(n, cb, &mut rng), &cfg)?;
        if r.refuted {
            refuted += 1;
        }
        min_ratio = min_ratio.min(r.residual / r.guess_norm);
    }
    let fixed = refute_d4_guess(&m2([2.0, 5.0, 5.0, 17.0]), &m2([13.0, 8.0, 8.0, 5.0]), &cfg)?;
    let comm = random_commuting_family(3, 2, 50.0, &mut rng);
    let commuting = refute_d4_guess(&comm[0], &comm[1], &cfg)?;
    Ok(vec![
        CheckRow::at_most(s, "m=2 closed forms, max relative residual", closed, 1e-8),
        CheckRow::new(
            s,
            format!("d4 guess refuted on random pairs ({refuted}/{trials})"),
            min_ratio,
            refuted == trials,
            "residual > 1e-6 |C| on every pair",
        ),
        CheckRow::above(s, "d4 guess residual on the [[2,5],[5,17]] pair", fixed.residual, 1e-6 * fixed.guess_norm),
        CheckRow::new(s, "commuting pair flagged inconclusive", commuting.residual, commuting.inconclusive, "inconclusive"),
    ])
}
