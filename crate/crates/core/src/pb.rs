//! Poisson–Binomial laws: sums of independent, non-identical Bernoulli
//! terms, optionally signed and shifted by an integer.

use serde::{Deserialize, Serialize};

use crate::error::{check_delta, Error, Result};
use crate::pmf::IntegerPmf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

/// `shift + Σ sign_i · X_i` with independent `X_i ~ Bernoulli(probs[i])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PBParams {
    pub probs: Vec<f64>,
    pub shift: i64,
    pub signs: Option<Vec<Sign>>,
}

impl PBParams {
    pub fn new(probs: Vec<f64>) -> Self {
        PBParams {
            probs,
            shift: 0,
            signs: None,
        }
    }

    pub fn with_shift(mut self, shift: i64) -> Self {
        self.shift = shift;
        self
    }

    pub fn with_signs(mut self, signs: Vec<Sign>) -> Self {
        self.signs = Some(signs);
        self
    }

    fn validate(&self) -> Result<()> {
        if let Some(&p) = self.probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::InvalidProbability(p));
        }
        if let Some(signs) = &self.signs {
            if signs.len() != self.probs.len() {
                return Err(Error::InvalidParameter(format!(
                    "{} signs for {} terms",
                    signs.len(),
                    self.probs.len()
                )));
            }
        }
        Ok(())
    }

    fn sign(&self, i: usize) -> Sign {
        self.signs.as_ref().map_or(Sign::Plus, |s| s[i])
    }

    pub fn mean(&self) -> f64 {
        let signed: f64 = (0..self.probs.len())
            .map(|i| match self.sign(i) {
                Sign::Plus => self.probs[i],
                Sign::Minus => -self.probs[i],
            })
            .sum();
        self.shift as f64 + signed
    }

    pub fn variance(&self) -> f64 {
        self.probs.iter().map(|p| p * (1.0 - p)).sum()
    }
}

/// Exact pmf by sequential convolution, in term order.
pub fn pb_pmf(p: &PBParams) -> Result<IntegerPmf> {
    p.validate()?;
    let mut pmf = IntegerPmf::point_mass(p.shift);
    for (i, &q) in p.probs.iter().enumerate() {
        let term = match p.sign(i) {
            Sign::Plus => IntegerPmf {
                offset: 0,
                probs: vec![1.0 - q, q],
            },
            Sign::Minus => IntegerPmf {
                offset: -1,
                probs: vec![q, 1.0 - q],
            },
        };
        pmf = pmf.convolve(&term);
    }
    Ok(pmf)
}

/// Smallest most likely value.
pub fn pb_mode(p: &PBParams) -> Result<i64> {
    Ok(pb_pmf(p)?.mode())
}

/// `d_TV(X, X + 1)`.
///
/// For a unimodal law this is the largest point mass. Both that and the
/// direct half-L1 distance are computed; disagreement beyond `1e-12` is an
/// integrity error.
pub fn tv_shift(p: &PBParams) -> Result<f64> {
    let pmf = pb_pmf(p)?;
    let by_mode = pmf.max_prob();
    let direct = pmf.tv_distance(&pmf.shifted(1));
    if (by_mode - direct).abs() > 1e-12 {
        return Err(Error::Integrity(format!(
            "d_TV(X, X+1): max mass {by_mode} vs half-L1 {direct}"
        )));
    }
    Ok(by_mode)
}

/// Standard normal density.
pub fn std_normal_density(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalApprox {
    pub max_error: f64,
    pub sigma: f64,
}

/// `max_t |σ·P(X = t) − φ((t − μ)/σ)|` over all integers `t`.
///
/// Outside the stored range the error is `φ((t − μ)/σ)`, which decreases
/// away from `μ`, so scanning one extra point on each side covers all of ℤ.
pub fn normal_approx_error(p: &PBParams) -> Result<NormalApprox> {
    let pmf = pb_pmf(p)?;
    let sigma = p.variance().sqrt();
    if sigma == 0.0 {
        return Err(Error::InvalidParameter(
            "normal approximation needs positive variance".into(),
        ));
    }
    let mu = p.mean();
    let max_error = (pmf.min() - 1..=pmf.max() + 1)
        .map(|t| (sigma * pmf.prob(t) - std_normal_density((t as f64 - mu) / sigma)).abs())
        .fold(0.0, f64::max);
    Ok(NormalApprox { max_error, sigma })
}

/// Binomial(m, q) pmf on `0..=m`.
///
/// Built outward from the mode with the ratio recurrence and normalised at
/// the end; tails that underflow become zero instead of poisoning the bulk.
pub fn binomial_pmf(m: usize, q: f64) -> Vec<f64> {
    let mut pmf = vec![0.0; m + 1];
    if q <= 0.0 {
        pmf[0] = 1.0;
        return pmf;
    }
    if q >= 1.0 {
        pmf[m] = 1.0;
        return pmf;
    }
    let odds = q / (1.0 - q);
    let mode = (((m + 1) as f64 * q).floor() as usize).min(m);
    pmf[mode] = 1.0;
    for t in mode + 1..=m {
        pmf[t] = pmf[t - 1] * ((m - t + 1) as f64 / t as f64) * odds;
    }
    for t in (0..mode).rev() {
        pmf[t] = pmf[t + 1] * ((t + 1) as f64 / (m - t) as f64) / odds;
    }
    let total: f64 = pmf.iter().sum();
    pmf.iter_mut().for_each(|x| *x /= total);
    pmf
}

/// Maximal point mass of a two-block Bernoulli sum, with its maximiser.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MStatResult {
    pub value: f64,
    pub argmax_l: usize,
    pub argmax_s: usize,
}

/// `M(n, δ) = max_{l, s} P(X_1 + … + X_l + (1 − X_{l+1}) + … + (1 − X_n) = s)`
/// with i.i.d. `X_i ~ Bernoulli(δ/2)`; `M(0, δ) = 1`.
///
/// The sum for `l` is `n` minus the sum for `n − l` in distribution, so only
/// `l ≥ ⌈n/2⌉` is scanned. Within each `l` the law is Poisson–Binomial and
/// hence unimodal; the maximiser is found by climbing from the rounded mean.
/// Ties go to the smallest `l`, then the smallest `s`.
pub fn m_stat(n: usize, delta: f64) -> Result<MStatResult> {
    check_delta(delta)?;
    let q = delta / 2.0;
    let mut best = MStatResult {
        value: 0.0,
        argmax_l: 0,
        argmax_s: 0,
    };
    if n == 0 {
        best.value = 1.0;
        return Ok(best);
    }
    for l in n.div_ceil(2)..=n {
        let ones = binomial_pmf(l, q);
        let zeros = binomial_pmf(n - l, q);
        let flipped = n - l;
        // P(Y + flipped - Z = s) = Σ_y P(Y = y) P(Z = y + flipped - s)
        let at = |s: usize| -> f64 {
            let lag = flipped as i64 - s as i64;
            let y_lo = (-lag).max(0);
            let y_hi = (l as i64).min(flipped as i64 - lag);
            (y_lo..=y_hi)
                .map(|y| ones[y as usize] * zeros[(y + lag) as usize])
                .sum()
        };
        let mean = l as f64 * q + flipped as f64 * (1.0 - q);
        let mut s = (mean.floor().max(0.0) as usize).min(n);
        let mut cur = at(s);
        while s > 0 {
            let left = at(s - 1);
            if left < cur {
                break;
            }
            s -= 1;
            cur = left;
        }
        while s < n {
            let right = at(s + 1);
            if right <= cur {
                break;
            }
            s += 1;
            cur = right;
        }
        if cur > best.value {
            best = MStatResult {
                value: cur,
                argmax_l: l,
                argmax_s: s,
            };
        }
    }
    Ok(best)
}

/// `P_n`: the probability that two i.i.d. Binomial(n, δ/2) variables agree.
pub fn p_stat(n: usize, delta: f64) -> Result<f64> {
    check_delta(delta)?;
    Ok(binomial_pmf(n, delta / 2.0).iter().map(|b| b * b).sum())
}
