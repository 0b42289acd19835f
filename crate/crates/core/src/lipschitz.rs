//! Closed-form and exact λ(n, k, δ): the worst-case Lipschitz constant of a
//! δ-perturbed n-player k-action anonymous game.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{check_delta, Error, Result};
use crate::pb::m_stat;
use crate::walk::{passage_prob, point_prob, WalkParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LambdaMethod {
    /// Passage probability of a rate-`2δ/k` walk, `k ≥ 3`.
    ClosedFormK3,
    /// Two-block Bernoulli maximum `M(n − 2, δ)`, `k = 2`.
    ExactM,
    /// Return probability of a rate-`δ(1 − δ/2)` walk, `k = 2`, `n` even.
    EvenWalk,
    /// Exact value from `M` with the even-neighbour bracket, `k = 2`, `n` odd.
    OddBracket,
    /// Brute-force total-variation maximum.
    Oracle,
}

impl LambdaMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            LambdaMethod::ClosedFormK3 => "closed-form-k3",
            LambdaMethod::ExactM => "exact-M",
            LambdaMethod::EvenWalk => "even-walk",
            LambdaMethod::OddBracket => "odd-bracket",
            LambdaMethod::Oracle => "oracle",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaResult {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub method: LambdaMethod,
    pub asymptotic: Option<f64>,
}

impl LambdaResult {
    pub fn exact(value: f64, method: LambdaMethod) -> Self {
        LambdaResult {
            value,
            lower: value,
            upper: value,
            method,
            asymptotic: None,
        }
    }
}

fn check_nk(n: usize, k: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("need n >= 2, got {n}")));
    }
    if k < 2 {
        return Err(Error::InvalidParameter(format!("need k >= 2, got {k}")));
    }
    Ok(())
}

/// `(1 − δ) · P(S_{n−2} ∈ {0, 1})` for a walk of rate `2δ/k`.
pub fn lambda_k3(n: usize, k: usize, delta: f64) -> Result<LambdaResult> {
    check_nk(n, k)?;
    if k < 3 {
        return Err(Error::InvalidParameter(format!(
            "the walk formula needs k >= 3, got {k}; use lambda_k2"
        )));
    }
    check_delta(delta)?;
    let walk = WalkParams::new(n - 2, 2.0 * delta / k as f64)?;
    Ok(LambdaResult::exact(
        (1.0 - delta) * passage_prob(walk),
        LambdaMethod::ClosedFormK3,
    ))
}

/// `(1 − δ) · M(n − 2, δ)`, exact for every `n ≥ 2`.
pub fn lambda_k2(n: usize, delta: f64) -> Result<LambdaResult> {
    check_nk(n, 2)?;
    let m = m_stat(n - 2, delta)?;
    Ok(LambdaResult::exact((1.0 - delta) * m.value, LambdaMethod::ExactM))
}

/// `(1 − δ) · P(S_{n/2 − 1} = 0)` for a walk of rate `δ(1 − δ/2)`, `n` even.
pub fn lambda_k2_even(n: usize, delta: f64) -> Result<f64> {
    check_nk(n, 2)?;
    if !n.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!("need even n, got {n}")));
    }
    check_delta(delta)?;
    let walk = WalkParams::new(n / 2 - 1, delta * (1.0 - delta / 2.0))?;
    Ok((1.0 - delta) * point_prob(walk, 0))
}

/// `[λ_{n+1}, sqrt(λ_{n−1} · λ_{n+1})]` for odd `n ≥ 3`, from the even
/// neighbours.
pub fn lambda_k2_odd_bounds(n: usize, delta: f64) -> Result<(f64, f64)> {
    if n < 3 || n.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!("need odd n >= 3, got {n}")));
    }
    let below = lambda_k2_even(n - 1, delta)?;
    let above = lambda_k2_even(n + 1, delta)?;
    Ok((above, (below * above).sqrt()))
}

/// Large-`nδ/k` approximation of λ(n, k, δ).
pub fn asymptotic_estimate(n: usize, k: usize, delta: f64) -> Result<f64> {
    if n < 1 || k < 2 {
        return Err(Error::InvalidParameter(format!("need n >= 1 and k >= 2, got n = {n}, k = {k}")));
    }
    check_delta(delta)?;
    let n = n as f64;
    Ok(if k == 2 {
        (1.0 - delta) / (PI * n * delta * (1.0 - delta / 2.0)).sqrt()
    } else {
        (1.0 - delta) * (k as f64 / (PI * n * delta)).sqrt()
    })
}

/// λ(n, k, δ) by the appropriate exact route, with the asymptotic estimate
/// attached. For `k = 2` and odd `n` the even-neighbour bracket is reported
/// alongside the exact value.
pub fn lambda(n: usize, k: usize, delta: f64) -> Result<LambdaResult> {
    check_nk(n, k)?;
    check_delta(delta)?;
    let mut out = if k >= 3 {
        lambda_k3(n, k, delta)?
    } else {
        let mut r = lambda_k2(n, delta)?;
        if n % 2 == 1 && n >= 3 {
            let (lower, upper) = lambda_k2_odd_bounds(n, delta)?;
            r.lower = lower;
            r.upper = upper;
            r.method = LambdaMethod::OddBracket;
        }
        r
    };
    out.asymptotic = Some(asymptotic_estimate(n, k, delta)?);
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPoint {
    pub delta: f64,
    pub lambda: f64,
    pub iterations: usize,
}

impl FixedPoint {
    pub fn residual(&self) -> f64 {
        (self.lambda - self.delta).abs()
    }
}

/// Solves `λ(n, k, δ) = δ` by bisection on `(0, 1)`.
///
/// `λ − δ` is positive near 0 and negative near 1. Monotonicity in `δ` is not
/// assumed: the bisection limit is returned once its residual is within `tol`.
pub fn delta_star(n: usize, k: usize, tol: f64) -> Result<FixedPoint> {
    check_nk(n, k)?;
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    let g = |d: f64| -> Result<(f64, f64)> {
        let lam = lambda(n, k, d)?.value;
        Ok((lam - d, lam))
    };
    let (mut lo, mut hi) = (1e-12, 1.0 - 1e-12);
    let (g_lo, _) = g(lo)?;
    let (g_hi, _) = g(hi)?;
    if !(g_lo > 0.0 && g_hi < 0.0) {
        return Err(Error::NoBracket { lo, hi, g_lo, g_hi });
    }
    for iterations in 1..=200 {
        let mid = 0.5 * (lo + hi);
        let (gm, lam) = g(mid)?;
        if gm.abs() <= tol {
            return Ok(FixedPoint {
                delta: mid,
                lambda: lam,
                iterations,
            });
        }
        if gm > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::Integrity(format!(
        "bisection for n = {n}, k = {k} stalled before reaching residual {tol}"
    )))
}
