//! Quadrature over `(0, ∞)` for the resolvent integral representations.
//!
//! Integrals `∫₀^∞ h(λ) dμ(λ)` are mapped to `(0, 1)` by
//! `λ = c·(u/(1−u))²`, then evaluated with Gauss–Legendre rules whose node
//! count doubles until two successive estimates agree. For integrands that
//! decay like `λ^{-3/2}` (measure `ν`) or `λ^{-2}` (Lebesgue) the transformed
//! integrand is smooth on `[0, 1]`, so convergence is geometric. The scale
//! `c` centres the map on the integrand's features.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, Complex};

/// The measure `dμ(λ)` an integral is taken against.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IntegrationMeasure {
    /// `dν(λ) = (1/π) λ^{1/2} dλ`.
    Nu,
    /// `dλ`.
    Lebesgue,
}

impl IntegrationMeasure {
    fn density(self, lambda: f64) -> f64 {
        match self {
            Self::Nu => lambda.sqrt() / PI,
            Self::Lebesgue => 1.0,
        }
    }
}

/// Node-doubling schedule and stopping rule.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureRule {
    pub initial_nodes: usize,
    pub max_nodes: usize,
    /// Stop when `|I_2n − I_n| ≤ rel_tol · max(1, |I_2n|)`.
    pub rel_tol: f64,
}

impl Default for QuadratureRule {
    fn default() -> Self {
        Self {
            initial_nodes: 32,
            max_nodes: 4096,
            rel_tol: 1e-13,
        }
    }
}

struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

/// Gauss–Legendre nodes and weights on `[0, 1]` (Newton iteration on `P_n`).
fn gauss_legendre(n: usize) -> Arc<GaussLegendre> {
    static CACHE: OnceLock<Mutex<BTreeMap<usize, Arc<GaussLegendre>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(BTreeMap::new()));
    if let Some(rule) = cache.lock().expect("quadrature cache").get(&n) {
        return Arc::clone(rule);
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            dp = nf * (x * pn - pn1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // map [-1, 1] → [0, 1]
        nodes[i] = 0.5 * (1.0 - x);
        nodes[n - 1 - i] = 0.5 * (1.0 + x);
        weights[i] = 0.5 * w;
        weights[n - 1 - i] = 0.5 * w;
    }
    let rule = Arc::new(GaussLegendre { nodes, weights });
    cache
        .lock()
        .expect("quadrature cache")
        .insert(n, Arc::clone(&rule));
    rule
}

/// `λ(u) = c (u/(1−u))²` and its Jacobian.
fn substitution(u: f64, scale: f64) -> (f64, f64) {
    let s = u / (1.0 - u);
    let lambda = scale * s * s;
    let jac = scale * 2.0 * s / ((1.0 - u) * (1.0 - u));
    (lambda, jac)
}

/// Generic adaptive driver over any vector-like accumulator.
fn integrate_with<T, F, Add, Dist>(
    measure: IntegrationMeasure,
    scale: f64,
    rule: QuadratureRule,
    f: F,
    zero: T,
    add_scaled: Add,
    dist: Dist,
) -> Result<T>
where
    T: Clone,
    F: Fn(f64) -> T,
    Add: Fn(&mut T, &T, f64),
    Dist: Fn(&T, &T) -> (f64, f64),
{
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "scale",
            reason: format!("quadrature scale must be positive, got {scale}"),
        });
    }
    let estimate = |n: usize| {
        let gl = gauss_legendre(n);
        let mut acc = zero.clone();
        for (&u, &w) in gl.nodes.iter().zip(&gl.weights) {
            let (lambda, jac) = substitution(u, scale);
            let factor = w * jac * measure.density(lambda);
            if factor != 0.0 && factor.is_finite() {
                add_scaled(&mut acc, &f(lambda), factor);
            }
        }
        acc
    };
    let mut n = rule.initial_nodes.max(2);
    let mut prev = estimate(n);
    let mut change = f64::INFINITY;
    while n * 2 <= rule.max_nodes {
        n *= 2;
        let next = estimate(n);
        let (diff, size) = dist(&next, &prev);
        change = diff;
        prev = next;
        if diff <= rule.rel_tol * size.max(1.0) {
            return Ok(prev);
        }
    }
    Err(Error::QuadratureNoConvergence { change, nodes: n })
}

/// `∫₀^∞ h(λ) dμ(λ)` for scalar `h`.
pub fn integrate_scalar<F: Fn(f64) -> f64>(
    measure: IntegrationMeasure,
    scale: f64,
    rule: QuadratureRule,
    h: F,
) -> Result<f64> {
    integrate_with(
        measure,
        scale,
        rule,
        h,
        0.0,
        |acc, v, w| *acc += v * w,
        |a, b| ((a - b).abs(), a.abs()),
    )
}

/// `∫₀^∞ H(λ) dμ(λ)` for matrix-valued `H`, convergence in Frobenius norm.
pub fn integrate_matrix<F: Fn(f64) -> CMatrix>(
    measure: IntegrationMeasure,
    scale: f64,
    rule: QuadratureRule,
    dim: usize,
    h: F,
) -> Result<CMatrix> {
    integrate_with(
        measure,
        scale,
        rule,
        h,
        CMatrix::zeros(dim, dim),
        |acc, v, w| *acc += v * Complex::new(w, 0.0),
        |a, b| ((a - b).norm(), a.norm()),
    )
}

/// Integral representations that can be checked against closed forms.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Representation {
    /// `x^{1/2} = 1/√2 + ∫ (λ/(λ²+1) − 1/(λ+x)) dν(λ)`.
    SqrtResolvent,
    /// `(1/π) ∫ λ^{1/2}/(1+λ)² dλ`, the factor in `Dg(A)(Y) = ½Y`; exact value ½.
    FirstDerivativeConstant,
    /// `(2/π) ∫ λ^{1/2}/(1+λ)³ dλ`; exact value ¼.
    SecondDerivativeConstant,
}

impl Representation {
    /// Closed-form value the quadrature should reproduce.
    pub fn exact(self, x: f64) -> f64 {
        match self {
            Self::SqrtResolvent => x.sqrt(),
            Self::FirstDerivativeConstant => 0.5,
            // B(3/2, 3/2)·2/π = (π/8)(2/π)
            Self::SecondDerivativeConstant => 0.25,
        }
    }
}

/// Evaluate a representation by quadrature. `x` is the argument of the
/// square-root representation and is ignored by the constants.
pub fn quad_check(representation: Representation, x: f64) -> Result<f64> {
    let rule = QuadratureRule::default();
    match representation {
        Representation::SqrtResolvent => {
            if !(x > 0.0 && x.is_finite()) {
                return Err(Error::InvalidParameter {
                    name: "x",
                    reason: format!("must be positive, got {x}"),
                });
            }
            // λ/(λ²+1) − 1/(λ+x) combined over a common denominator; features
            // sit at λ ≈ 1 and λ ≈ x
            let integral = integrate_scalar(IntegrationMeasure::Nu, x.sqrt(), rule, |l| {
                (l * x - 1.0) / ((l * l + 1.0) * (l + x))
            })?;
            Ok(std::f64::consts::FRAC_1_SQRT_2 + integral)
        }
        Representation::FirstDerivativeConstant => {
            integrate_scalar(IntegrationMeasure::Nu, 1.0, rule, |l| 1.0 / ((1.0 + l) * (1.0 + l)))
        }
        Representation::SecondDerivativeConstant => Ok(2.0
            * integrate_scalar(IntegrationMeasure::Nu, 1.0, rule, |l| {
                1.0 / ((1.0 + l) * (1.0 + l) * (1.0 + l))
            })?),
    }
}
