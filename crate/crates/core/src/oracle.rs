//! Brute-force λ(n, k, δ) straight from the total-variation characterisation.
//!
//! Actions are 0-based throughout: the two actions the deviating player
//! switches between are 0 and 1.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_delta, Error, Result};

/// Occupancy counts over `k` actions.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CountVector(pub Vec<usize>);

impl CountVector {
    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn k(&self) -> usize {
        self.0.len()
    }

    /// The canonical profile realising these counts, sorted by action.
    pub fn canonical_profile(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .flat_map(|(j, &c)| std::iter::repeat_n(j, c))
            .collect()
    }
}

pub(crate) fn binomial(n: usize, r: usize) -> usize {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    (0..r).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Number of compositions of `m` into `k` nonnegative parts.
pub fn count_vectors_len(m: usize, k: usize) -> usize {
    binomial(m + k - 1, k - 1)
}

/// All count vectors with total `m` over `k` actions, in ascending
/// lexicographic order.
pub fn enumerate_count_vectors(m: usize, k: usize) -> Vec<CountVector> {
    let mut out = Vec::with_capacity(count_vectors_len(m, k));
    let mut cur = vec![0; k];
    fill(&mut cur, 0, m, &mut out);
    out
}

fn fill(cur: &mut Vec<usize>, pos: usize, left: usize, out: &mut Vec<CountVector>) {
    if pos + 1 == cur.len() {
        cur[pos] = left;
        out.push(CountVector(cur.clone()));
        return;
    }
    for v in 0..=left {
        cur[pos] = v;
        fill(cur, pos + 1, left - v, out);
    }
}

/// Position of `counts` in [`enumerate_count_vectors`] for its total.
pub fn count_vector_rank(counts: &[usize]) -> usize {
    let k = counts.len();
    let mut left: usize = counts.iter().sum();
    let mut rank = 0;
    for (i, &c) in counts.iter().enumerate().take(k - 1) {
        let parts = k - 1 - i;
        for v in 0..c {
            rank += binomial(left - v + parts - 1, parts - 1);
        }
        left -= c;
    }
    rank
}

/// Law of one perturbed action: `1 − δ + δ/k` on `j`, `δ/k` elsewhere.
pub fn perturbed_action_law(j: usize, k: usize, delta: f64) -> Result<Vec<f64>> {
    if j >= k {
        return Err(Error::InvalidParameter(format!("action {j} out of range for k = {k}")));
    }
    Ok(action_law(j, k, delta))
}

/// [`perturbed_action_law`] without validation; `delta = 0` gives the pure action.
pub(crate) fn action_law(j: usize, k: usize, delta: f64) -> Vec<f64> {
    let off = delta / k as f64;
    let mut law = vec![off; k];
    law[j] = 1.0 - delta + off;
    law
}

/// Law of the occupancy vector of a perturbed profile, indexed by
/// lexicographic rank among count vectors of total `m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountDistribution {
    pub m: usize,
    pub k: usize,
    pub probs: Vec<f64>,
}

impl CountDistribution {
    pub fn prob(&self, counts: &[usize]) -> f64 {
        if counts.len() != self.k || counts.iter().sum::<usize>() != self.m {
            return 0.0;
        }
        self.probs[count_vector_rank(counts)]
    }
}

/// Law of `N(a^δ)` by convolving the perturbed action laws one player at a
/// time, players taken in ascending action order.
pub fn count_distribution(profile: &[usize], k: usize, delta: f64) -> Result<CountDistribution> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!("need k >= 2, got {k}")));
    }
    if let Some(&j) = profile.iter().find(|&&j| j >= k) {
        return Err(Error::InvalidParameter(format!("action {j} out of range for k = {k}")));
    }
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::InvalidDelta(delta));
    }
    let mut sorted = profile.to_vec();
    sorted.sort_unstable();
    Ok(count_distribution_sorted(&sorted, k, delta))
}

pub(crate) fn count_distribution_sorted(sorted: &[usize], k: usize, delta: f64) -> CountDistribution {
    let mut probs = vec![1.0];
    let mut vectors = enumerate_count_vectors(0, k);
    for (t, &a) in sorted.iter().enumerate() {
        let law = action_law(a, k, delta);
        let mut next = vec![0.0; count_vectors_len(t + 1, k)];
        for (v, &p) in vectors.iter_mut().zip(&probs) {
            if p == 0.0 {
                continue;
            }
            for (j, &w) in law.iter().enumerate() {
                v.0[j] += 1;
                next[count_vector_rank(&v.0)] += p * w;
                v.0[j] -= 1;
            }
        }
        probs = next;
        vectors = enumerate_count_vectors(t + 1, k);
    }
    CountDistribution {
        m: sorted.len(),
        k,
        probs,
    }
}

/// `d_TV(e_{j1} + N, e_{j2} + N)` for `N ~ d`.
pub fn shifted_tv(d: &CountDistribution, j1: usize, j2: usize) -> Result<f64> {
    if j1 >= d.k || j2 >= d.k {
        return Err(Error::InvalidParameter(format!(
            "actions ({j1}, {j2}) out of range for k = {}",
            d.k
        )));
    }
    if j1 == j2 {
        return Ok(0.0);
    }
    let mass_below = |w: &mut Vec<usize>, j: usize| -> f64 {
        if w[j] == 0 {
            return 0.0;
        }
        w[j] -= 1;
        let p = d.probs[count_vector_rank(w)];
        w[j] += 1;
        p
    };
    let mut l1 = 0.0;
    for CountVector(mut w) in enumerate_count_vectors(d.m + 1, d.k) {
        let a = mass_below(&mut w, j1);
        let b = mass_below(&mut w, j2);
        l1 += (a - b).abs();
    }
    Ok(0.5 * l1)
}

/// Largest instance the oracle will attempt.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleBudget {
    pub max_n: usize,
    pub max_k: usize,
}

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget { max_n: 14, max_k: 4 }
    }
}

/// Classes whose distance is within this of the maximum count as maximisers.
pub const WITNESS_TIE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub value: f64,
    /// Smallest (lexicographic) count class of the `n − 2` bystanders
    /// attaining the maximum, up to [`WITNESS_TIE`].
    pub worst_class: CountVector,
}

/// `(1 − δ) · max_a d_TV(e_0 + N(a^δ), e_1 + N(a^δ))` over bystander
/// profiles `a ∈ [k]^{n−2}`, enumerated by count class.
pub fn lambda_oracle(n: usize, k: usize, delta: f64, budget: OracleBudget) -> Result<OracleResult> {
    if n < 2 || k < 2 {
        return Err(Error::InvalidParameter(format!("need n >= 2 and k >= 2, got n = {n}, k = {k}")));
    }
    check_delta(delta)?;
    if n > budget.max_n || k > budget.max_k {
        return Err(Error::BudgetExceeded(format!(
            "oracle limited to n <= {} and k <= {}, got n = {n}, k = {k}",
            budget.max_n, budget.max_k
        )));
    }
    let classes = enumerate_count_vectors(n - 2, k);
    let tvs: Vec<f64> = classes
        .par_iter()
        .map(|class| {
            let d = count_distribution_sorted(&class.canonical_profile(), k, delta);
            shifted_tv(&d, 0, 1).expect("actions 0 and 1 exist for k >= 2")
        })
        .collect();
    let max = tvs.iter().copied().fold(0.0, f64::max);
    // classes that tie in exact arithmetic differ here by rounding only
    let best = tvs
        .iter()
        .position(|&tv| tv >= max - WITNESS_TIE)
        .expect("at least one class");
    Ok(OracleResult {
        value: (1.0 - delta) * max,
        worst_class: classes[best].clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumeration_examples() {
        let cv = |v: &[usize]| CountVector(v.to_vec());
        assert_eq!(enumerate_count_vectors(0, 3), vec![cv(&[0, 0, 0])]);
        assert_eq!(enumerate_count_vectors(1, 2), vec![cv(&[0, 1]), cv(&[1, 0])]);
        assert_eq!(
            enumerate_count_vectors(2, 2),
            vec![cv(&[0, 2]), cv(&[1, 1]), cv(&[2, 0])]
        );
    }

    #[test]
    fn enumeration_is_sorted_ranked_and_counted() {
        for k in 2..=5 {
            for m in 0..=7 {
                let all = enumerate_count_vectors(m, k);
                assert_eq!(all.len(), count_vectors_len(m, k));
                assert!(all.windows(2).all(|w| w[0] < w[1]));
                for (i, v) in all.iter().enumerate() {
                    assert_eq!(v.total(), m);
                    assert_eq!(count_vector_rank(&v.0), i);
                }
            }
        }
    }

    #[test]
    fn action_law_examples() {
        assert_eq!(perturbed_action_law(0, 2, 0.5).unwrap(), vec![0.75, 0.25]);
        let law = perturbed_action_law(2, 3, 0.3).unwrap();
        for (got, want) in law.iter().zip([0.1, 0.1, 0.8]) {
            assert!((got - want).abs() < 1e-15);
        }
        let law = perturbed_action_law(0, 4, 0.8).unwrap();
        for (got, want) in law.iter().zip([0.4, 0.2, 0.2, 0.2]) {
            assert!((got - want).abs() < 1e-15);
        }
        assert!(perturbed_action_law(3, 3, 0.3).is_err());
    }

    #[test]
    fn count_distribution_examples() {
        let empty = count_distribution(&[], 3, 0.4).unwrap();
        assert_eq!(empty.probs, vec![1.0]);
        assert_eq!(empty.prob(&[0, 0, 0]), 1.0);

        let one = count_distribution(&[0], 2, 0.5).unwrap();
        assert_eq!(one.prob(&[1, 0]), 0.75);
        assert_eq!(one.prob(&[0, 1]), 0.25);

        let two = count_distribution(&[2, 2], 3, 0.3).unwrap();
        assert!((two.prob(&[0, 0, 2]) - 0.64).abs() < 1e-15);
        assert!((two.probs.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn count_distribution_matches_profile_enumeration() {
        let (k, delta) = (3, 0.35);
        let profile = [2, 0, 1, 2];
        let d = count_distribution(&profile, k, delta).unwrap();
        let mut brute = vec![0.0; d.probs.len()];
        for code in 0..k.pow(profile.len() as u32) {
            let (mut c, mut counts, mut prob) = (code, vec![0; k], 1.0);
            for &a in &profile {
                let j = c % k;
                c /= k;
                counts[j] += 1;
                prob *= action_law(a, k, delta)[j];
            }
            brute[count_vector_rank(&counts)] += prob;
        }
        for (got, want) in d.probs.iter().zip(&brute) {
            assert!((got - want).abs() < 1e-15);
        }
    }

    #[test]
    fn permuted_profiles_agree_bit_for_bit() {
        let a = count_distribution(&[0, 2, 1, 2, 0], 3, 0.2).unwrap();
        let b = count_distribution(&[2, 0, 2, 0, 1], 3, 0.2).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn shifted_tv_examples() {
        let empty = count_distribution(&[], 3, 0.5).unwrap();
        assert_eq!(shifted_tv(&empty, 0, 1).unwrap(), 1.0);
        let d = count_distribution(&[1, 2, 0], 3, 0.5).unwrap();
        assert_eq!(shifted_tv(&d, 2, 2).unwrap(), 0.0);
        assert!(shifted_tv(&d, 0, 3).is_err());
    }

    #[test]
    fn shifted_tv_single_bystander_on_action_three() {
        // N ∈ {e0, e1, e2} w.p. (0.1, 0.1, 0.8). e0 + N lands on
        // (2,0,0) .1, (1,1,0) .1, (1,0,1) .8 and e1 + N on
        // (1,1,0) .1, (0,2,0) .1, (0,1,1) .8: the overlap is 0.1.
        let d = count_distribution(&[2], 3, 0.3).unwrap();
        let tv = shifted_tv(&d, 0, 1).unwrap();
        assert!((tv - 0.9).abs() < 1e-15);
    }

    #[test]
    fn oracle_examples() {
        let budget = OracleBudget::default();
        let r = lambda_oracle(2, 3, 0.5, budget).unwrap();
        assert_eq!(r.value, 0.5);
        let r = lambda_oracle(4, 2, 0.5, budget).unwrap();
        assert!((r.value - 0.3125).abs() < 1e-15);
        let r = lambda_oracle(4, 3, 0.5, budget).unwrap();
        assert_eq!(r.worst_class, CountVector(vec![0, 0, 2]));
    }

    #[test]
    fn oracle_budget_and_params() {
        let budget = OracleBudget { max_n: 6, max_k: 3 };
        assert!(matches!(lambda_oracle(7, 3, 0.5, budget), Err(Error::BudgetExceeded(_))));
        assert!(matches!(lambda_oracle(5, 4, 0.5, budget), Err(Error::BudgetExceeded(_))));
        assert!(lambda_oracle(1, 3, 0.5, budget).is_err());
        assert!(lambda_oracle(4, 3, 1.0, budget).is_err());
    }

    #[test]
    fn witness_is_a_single_bystander_action() {
        let budget = OracleBudget::default();
        for n in 3..=7 {
            for k in 3..=4 {
                for delta in [0.1, 0.5, 0.9] {
                    let r = lambda_oracle(n, k, delta, budget).unwrap();
                    let on_three = count_distribution(&vec![2; n - 2], k, delta).unwrap();
                    let tv = shifted_tv(&on_three, 0, 1).unwrap();
                    assert!((r.value - (1.0 - delta) * tv).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn relabelling_bystander_actions_is_harmless() {
        // swap actions 2 and 3 in every class: the maximum cannot move
        let (k, delta) = (4, 0.4);
        for m in 0..=5 {
            for class in enumerate_count_vectors(m, k) {
                let mut swapped = class.0.clone();
                swapped.swap(2, 3);
                let a = count_distribution(&class.canonical_profile(), k, delta).unwrap();
                let b = count_distribution(&CountVector(swapped).canonical_profile(), k, delta).unwrap();
                let ta = shifted_tv(&a, 0, 1).unwrap();
                let tb = shifted_tv(&b, 0, 1).unwrap();
                assert!((ta - tb).abs() < 1e-14);
            }
        }
    }
}
