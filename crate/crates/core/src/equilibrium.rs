//! Anonymous games, δ-perturbed payoffs, regret and exhaustive ε-Nash search.
//!
//! Here `δ = 0` is accepted and means the unperturbed game.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::{action_law, count_distribution_sorted, count_vectors_len, enumerate_count_vectors, CountVector};

/// An `n`-player `k`-action anonymous game. Player `i`'s payoff depends on
/// its own action and the occupancy vector of the other `n − 1` players.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnonymousGame {
    n: usize,
    k: usize,
    /// Flattened `[player][own action][rank of opponents' counts]`.
    payoffs: Vec<f64>,
}

impl AnonymousGame {
    /// Builds a game from `payoffs[player][action][rank]`, where `rank` is the
    /// lexicographic rank of the opponents' count vector (total `n − 1`).
    pub fn new(n: usize, k: usize, payoffs: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        if n < 2 || k < 2 {
            return Err(Error::MalformedGame(format!("need n >= 2 and k >= 2, got n = {n}, k = {k}")));
        }
        let classes = count_vectors_len(n - 1, k);
        if payoffs.len() != n {
            return Err(Error::MalformedGame(format!("expected {n} players, found {}", payoffs.len())));
        }
        let mut flat = Vec::with_capacity(n * k * classes);
        for (i, per_action) in payoffs.into_iter().enumerate() {
            if per_action.len() != k {
                return Err(Error::MalformedGame(format!(
                    "player {i}: expected {k} actions, found {}",
                    per_action.len()
                )));
            }
            for (j, row) in per_action.into_iter().enumerate() {
                if row.len() != classes {
                    return Err(Error::MalformedGame(format!(
                        "player {i} action {j}: expected {classes} count vectors, found {}",
                        row.len()
                    )));
                }
                if let Some((r, v)) = row.iter().enumerate().find(|(_, v)| !(0.0..=1.0).contains(*v)) {
                    return Err(Error::MalformedGame(format!(
                        "player {i} action {j} rank {r}: payoff {v} outside [0, 1]"
                    )));
                }
                flat.extend(row);
            }
        }
        Ok(AnonymousGame { n, k, payoffs: flat })
    }

    /// Builds a game from `f(player, own action, opponents' counts)`.
    pub fn from_fn(n: usize, k: usize, mut f: impl FnMut(usize, usize, &CountVector) -> f64) -> Result<Self> {
        if n < 2 || k < 2 {
            return Err(Error::MalformedGame(format!("need n >= 2 and k >= 2, got n = {n}, k = {k}")));
        }
        let opponents = enumerate_count_vectors(n - 1, k);
        let table = (0..n)
            .map(|i| {
                (0..k)
                    .map(|j| opponents.iter().map(|c| f(i, j, c)).collect())
                    .collect()
            })
            .collect();
        Self::new(n, k, table)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    fn classes(&self) -> usize {
        count_vectors_len(self.n - 1, self.k)
    }

    fn row(&self, player: usize, action: usize) -> &[f64] {
        let c = self.classes();
        let start = (player * self.k + action) * c;
        &self.payoffs[start..start + c]
    }

    /// Payoff to `player` for `action` against the opponent class of `rank`.
    pub fn payoff(&self, player: usize, action: usize, rank: usize) -> f64 {
        self.row(player, action)[rank]
    }

    /// The table as `[player][action][rank]`.
    pub fn to_nested(&self) -> Vec<Vec<Vec<f64>>> {
        (0..self.n)
            .map(|i| (0..self.k).map(|j| self.row(i, j).to_vec()).collect())
            .collect()
    }

    fn check_profile(&self, a: &[usize]) -> Result<()> {
        if a.len() != self.n {
            return Err(Error::InvalidParameter(format!(
                "profile has {} entries for {} players",
                a.len(),
                self.n
            )));
        }
        if let Some(&j) = a.iter().find(|&&j| j >= self.k) {
            return Err(Error::InvalidParameter(format!("action {j} out of range for k = {}", self.k)));
        }
        Ok(())
    }

    /// `E[g_i(j, N(a_{−i}^δ))]` for every own action `j`, unperturbed.
    fn expected_by_own_action(&self, a: &[usize], i: usize, delta: f64) -> Vec<f64> {
        let mut opponents: Vec<usize> = a.iter().enumerate().filter(|&(p, _)| p != i).map(|(_, &j)| j).collect();
        opponents.sort_unstable();
        let d = count_distribution_sorted(&opponents, self.k, delta);
        (0..self.k)
            .map(|j| self.row(i, j).iter().zip(&d.probs).map(|(g, p)| g * p).sum())
            .collect()
    }
}

fn check_perturbation(delta: f64) -> Result<()> {
    if (0.0..1.0).contains(&delta) {
        Ok(())
    } else {
        Err(Error::InvalidDelta(delta))
    }
}

fn mix(law: &[f64], values: &[f64]) -> f64 {
    law.iter().zip(values).map(|(w, v)| w * v).sum()
}

/// `g_i^δ(a)`: player `i`'s expected payoff when every player perturbs.
pub fn perturbed_payoff(g: &AnonymousGame, a: &[usize], i: usize, delta: f64) -> Result<f64> {
    g.check_profile(a)?;
    check_perturbation(delta)?;
    if i >= g.n {
        return Err(Error::InvalidParameter(format!("player {i} out of range")));
    }
    let by_action = g.expected_by_own_action(a, i, delta);
    Ok(mix(&action_law(a[i], g.k, delta), &by_action))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlayerRegret {
    pub best_deviation: usize,
    pub regret: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretReport {
    pub max_regret: f64,
    pub per_player: Vec<PlayerRegret>,
}

impl RegretReport {
    fn from_players(per_player: Vec<PlayerRegret>) -> Self {
        let max_regret = per_player.iter().map(|p| p.regret).fold(0.0, f64::max);
        RegretReport { max_regret, per_player }
    }
}

/// Best-response gap of `values[own]`; ties keep the current action.
fn best_gap(values: &[f64], current: f64, own: usize) -> PlayerRegret {
    let mut best = own;
    for (b, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = b;
        }
    }
    PlayerRegret {
        best_deviation: best,
        regret: (values[best] - current).max(0.0),
    }
}

/// Pure-deviation regret of profile `a` in the perturbed game `g^δ`.
pub fn regret(g: &AnonymousGame, a: &[usize], delta: f64) -> Result<RegretReport> {
    g.check_profile(a)?;
    check_perturbation(delta)?;
    let per_player = (0..g.n)
        .map(|i| {
            // the uniform component is common to every own action, so the
            // gain of deviating to b is exactly (1 − δ)(E_b − E_{a_i})
            let by_action = g.expected_by_own_action(a, i, delta);
            let own = a[i];
            let mut best = own;
            for (b, &v) in by_action.iter().enumerate() {
                if v > by_action[best] {
                    best = b;
                }
            }
            PlayerRegret {
                best_deviation: best,
                regret: (1.0 - delta) * (by_action[best] - by_action[own]),
            }
        })
        .collect();
    Ok(RegretReport::from_players(per_player))
}

/// Regret in the unperturbed game `g` of the mixed profile `a^δ`: each
/// player compares its perturbed payoff with its best pure action against
/// the perturbed opponents.
pub fn regret_in_base_game(g: &AnonymousGame, a: &[usize], delta: f64) -> Result<RegretReport> {
    g.check_profile(a)?;
    check_perturbation(delta)?;
    let per_player = (0..g.n)
        .map(|i| {
            let by_action = g.expected_by_own_action(a, i, delta);
            let current = mix(&action_law(a[i], g.k, delta), &by_action);
            best_gap(&by_action, current, a[i])
        })
        .collect();
    Ok(RegretReport::from_players(per_player))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchBudget {
    pub max_profiles: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget { max_profiles: 10_000_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum EpsNashSearch {
    /// Lexicographically first profile with max regret ≤ ε.
    Found { profile: Vec<usize>, report: RegretReport },
    /// Every profile was checked; none reaches ε. `min_max_regret` is the
    /// smallest max-regret seen, attained first at `best_profile`.
    Absent { min_max_regret: f64, best_profile: Vec<usize> },
}

fn profile_count(g: &AnonymousGame, budget: SearchBudget) -> Result<u64> {
    let total = (g.k as u64).checked_pow(g.n as u32).filter(|&t| t <= budget.max_profiles);
    total.ok_or_else(|| {
        Error::BudgetExceeded(format!(
            "{}^{} profiles exceeds the search budget of {}",
            g.k, g.n, budget.max_profiles
        ))
    })
}

/// Profiles in lexicographic order, player 0 most significant.
fn decode_profile(mut code: u64, n: usize, k: usize) -> Vec<usize> {
    let mut a = vec![0; n];
    for slot in a.iter_mut().rev() {
        *slot = (code % k as u64) as usize;
        code /= k as u64;
    }
    a
}

/// Exhaustive scan for a pure ε-Nash profile of `g^δ`.
pub fn find_eps_nash(g: &AnonymousGame, delta: f64, eps: f64, budget: SearchBudget) -> Result<EpsNashSearch> {
    check_perturbation(delta)?;
    let total = profile_count(g, budget)?;
    let mut best: Option<(f64, Vec<usize>)> = None;
    for code in 0..total {
        let a = decode_profile(code, g.n, g.k);
        let report = regret(g, &a, delta)?;
        if report.max_regret <= eps {
            return Ok(EpsNashSearch::Found { profile: a, report });
        }
        if best.as_ref().is_none_or(|(r, _)| report.max_regret < *r) {
            best = Some((report.max_regret, a));
        }
    }
    let (min_max_regret, best_profile) = best.expect("at least one profile");
    Ok(EpsNashSearch::Absent {
        min_max_regret,
        best_profile,
    })
}

/// Preferred parity of the attendance count in a [`party_game`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    fn matches(self, count: usize) -> bool {
        count.is_multiple_of(2) == (self == Parity::Even)
    }
}

pub const ATTEND: usize = 0;
pub const STAY: usize = 1;

/// Two-action party game: an attendee scores 1 when the number of attendees
/// (itself included) has its preferred parity and 0 otherwise; staying home
/// pays 1/2. The numeric payoffs are a modelling choice; any stay payoff
/// strictly between 0 and 1 keeps every pure profile unstable.
pub fn party_game(preferences: &[Parity]) -> Result<AnonymousGame> {
    let n = preferences.len();
    AnonymousGame::from_fn(n, 2, |i, j, others| {
        if j == STAY {
            0.5
        } else if preferences[i].matches(others.0[ATTEND] + 1) {
            1.0
        } else {
            0.0
        }
    })
}

/// A game with i.i.d. Uniform[0, 1) payoffs drawn in table order.
pub fn random_game<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<AnonymousGame> {
    AnonymousGame::from_fn(n, k, |_, _, _| rng.random::<f64>())
}

/// [`random_game`] driven by ChaCha8 seeded with `seed`.
pub fn seeded_random_game(n: usize, k: usize, seed: u64) -> Result<AnonymousGame> {
    random_game(n, k, &mut ChaCha8Rng::seed_from_u64(seed))
}
