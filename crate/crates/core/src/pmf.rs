use serde::{Deserialize, Serialize};

/// A probability mass function on a contiguous range of integers.
///
/// `probs[i]` is the mass at `offset + i`. The full range is kept even when
/// tail entries are zero, so two pmfs built from the same parameters share
/// the same layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegerPmf {
    pub offset: i64,
    pub probs: Vec<f64>,
}

impl IntegerPmf {
    pub fn point_mass(at: i64) -> Self {
        IntegerPmf {
            offset: at,
            probs: vec![1.0],
        }
    }

    /// Mass at `t`; zero outside the stored range.
    pub fn prob(&self, t: i64) -> f64 {
        let idx = t - self.offset;
        if idx < 0 {
            return 0.0;
        }
        self.probs.get(idx as usize).copied().unwrap_or(0.0)
    }

    /// Smallest integer in the stored range.
    pub fn min(&self) -> i64 {
        self.offset
    }

    /// Largest integer in the stored range.
    pub fn max(&self) -> i64 {
        self.offset + self.probs.len() as i64 - 1
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.iter().map(|(t, p)| t as f64 * p).sum()
    }

    /// `(t, P(t))` pairs over the stored range in increasing `t`.
    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.probs
            .iter()
            .enumerate()
            .map(move |(i, &p)| (self.offset + i as i64, p))
    }

    /// Largest point mass.
    pub fn max_prob(&self) -> f64 {
        self.probs.iter().copied().fold(0.0, f64::max)
    }

    /// Smallest `t` attaining the largest point mass.
    pub fn mode(&self) -> i64 {
        let mut best = 0;
        for (i, &p) in self.probs.iter().enumerate() {
            if p > self.probs[best] {
                best = i;
            }
        }
        self.offset + best as i64
    }

    /// The law of `X + other` for independent `X ~ self`, `Y ~ other`.
    pub fn convolve(&self, other: &IntegerPmf) -> IntegerPmf {
        let mut probs = vec![0.0; self.probs.len() + other.probs.len() - 1];
        for (i, &a) in self.probs.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (j, &b) in other.probs.iter().enumerate() {
                probs[i + j] += a * b;
            }
        }
        IntegerPmf {
            offset: self.offset + other.offset,
            probs,
        }
    }

    /// Total variation distance, half the L1 distance between the two laws.
    pub fn tv_distance(&self, other: &IntegerPmf) -> f64 {
        let lo = self.min().min(other.min());
        let hi = self.max().max(other.max());
        0.5 * (lo..=hi)
            .map(|t| (self.prob(t) - other.prob(t)).abs())
            .sum::<f64>()
    }

    /// The law of `X + by`.
    pub fn shifted(&self, by: i64) -> IntegerPmf {
        IntegerPmf {
            offset: self.offset + by,
            probs: self.probs.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn out_of_range_is_zero() {
        let p = IntegerPmf {
            offset: -1,
            probs: vec![0.25, 0.5, 0.25],
        };
        assert_eq!(p.prob(-2), 0.0);
        assert_eq!(p.prob(2), 0.0);
        assert_eq!(p.prob(0), 0.5);
        assert_eq!((p.min(), p.max()), (-1, 1));
        assert_eq!(p.mean(), 0.0);
    }

    #[test]
    fn mode_breaks_ties_low() {
        let p = IntegerPmf {
            offset: 3,
            probs: vec![0.1, 0.45, 0.45],
        };
        assert_eq!(p.mode(), 4);
    }

    #[test]
    fn tv_of_unit_shift_of_point_mass() {
        let p = IntegerPmf::point_mass(0);
        assert_eq!(p.tv_distance(&p.shifted(1)), 1.0);
        assert_eq!(p.tv_distance(&p), 0.0);
    }
}
