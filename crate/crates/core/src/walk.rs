//! Exact laws of the lazy symmetric random walk on the integers.
//!
//! A walk with rate `r` stays put with probability `1 - r` and moves one step
//! up or down with probability `r / 2` each, starting from 0.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pmf::IntegerPmf;

/// Step count and laziness rate of a walk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalkParams {
    steps: usize,
    rate: f64,
}

impl WalkParams {
    pub fn new(steps: usize, rate: f64) -> Result<Self> {
        if !(rate > 0.0 && rate <= 1.0) {
            return Err(Error::InvalidRate(rate));
        }
        Ok(WalkParams { steps, rate })
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }
}

/// One lazy step applied to the band `[centre - reach, centre + reach]` of
/// `cur`, writing into `next`. `cur` must be zero outside that band.
///
/// The neighbour sum is formed as `left + right` at `t` and `right + left`
/// at `-t`; float addition commutes, so a symmetric input stays exactly
/// symmetric.
fn lazy_step(cur: &[f64], next: &mut [f64], centre: usize, reach: usize, rate: f64) {
    let stay = 1.0 - rate;
    let half = 0.5 * rate;
    let lo = centre - reach;
    let hi = centre + reach;
    for i in lo..=hi {
        let left = if i > 0 { cur[i - 1] } else { 0.0 };
        let right = if i + 1 < cur.len() { cur[i + 1] } else { 0.0 };
        next[i] = stay * cur[i] + half * (left + right);
    }
}

/// The law of the walk after `p.steps()` steps, on the full range `[-n, n]`.
pub fn walk_pmf(p: WalkParams) -> IntegerPmf {
    let n = p.steps;
    let width = 2 * n + 1;
    let mut cur = vec![0.0; width];
    let mut next = vec![0.0; width];
    cur[n] = 1.0;
    for step in 1..=n {
        lazy_step(&cur, &mut next, n, step, p.rate);
        std::mem::swap(&mut cur, &mut next);
    }
    IntegerPmf {
        offset: -(n as i64),
        probs: cur,
    }
}

/// `P(S_n = t)`, zero outside `[-n, n]`.
pub fn point_prob(p: WalkParams, t: i64) -> f64 {
    if t.unsigned_abs() as usize > p.steps {
        return 0.0;
    }
    walk_pmf(p).prob(t)
}

/// `P(S_n ∈ {0, 1})`.
pub fn passage_prob(p: WalkParams) -> f64 {
    let pmf = walk_pmf(p);
    pmf.prob(0) + pmf.prob(1)
}

/// `P(S_1 < 1, ..., S_n < 1)`, the mass that never reaches +1.
///
/// Runs the walk on `[-n, 0]` with an absorbing barrier at +1 and discards
/// absorbed mass each step. By the reflection principle this equals
/// [`passage_prob`], but the computation shares nothing with it.
pub fn stay_below_prob(p: WalkParams) -> f64 {
    let n = p.steps;
    // index i <-> position i - n, so the barrier +1 sits at index n + 1.
    let mut cur = vec![0.0; n + 1];
    let mut next = vec![0.0; n + 1];
    cur[n] = 1.0;
    let stay = 1.0 - p.rate;
    let half = 0.5 * p.rate;
    for step in 1..=n {
        let lo = n.saturating_sub(step);
        for i in lo..=n {
            let below = if i > 0 { cur[i - 1] } else { 0.0 };
            let above = if i < n { cur[i + 1] } else { 0.0 };
            next[i] = stay * cur[i] + half * below + half * above;
        }
        std::mem::swap(&mut cur, &mut next);
    }
    cur.iter().sum()
}
