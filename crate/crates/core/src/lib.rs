//! Worst-case Lipschitz constants of δ-perturbed anonymous games.
//!
//! λ(n, k, δ) is the largest change any single opponent can cause in a
//! player's expected payoff, over every `n`-player `k`-action anonymous game
//! whose players all perturb their pure actions towards uniform with
//! probability δ. This crate computes it three ways:
//!
//! * for `k ≥ 3`, as `(1 − δ)` times the probability that a lazy symmetric
//!   walk of rate `2δ/k` sits in `{0, 1}` after `n − 2` steps ([`lipschitz::lambda_k3`]);
//! * for `k = 2`, from the maximal point mass of a two-block Bernoulli sum
//!   ([`lipschitz::lambda_k2`]), which reduces to a walk return probability for
//!   even `n`;
//! * by brute-force total-variation maximisation over bystander count
//!   classes ([`oracle::lambda_oracle`]), the reference the formulas are
//!   checked against.
//!
//! On top of that sit an ε-Nash search for small anonymous games
//! ([`equilibrium`]) and a Monte Carlo mirror coupling ([`coupling`]).

pub mod coupling;
pub mod equilibrium;
pub mod error;
pub mod lipschitz;
pub mod oracle;
pub mod pb;
pub mod pmf;
pub mod walk;

pub use coupling::{simulate_coupling, simulate_meet_time, CouplingEstimate, CouplingParams, CouplingRun, MeetTimeHistogram};
pub use equilibrium::{find_eps_nash, party_game, random_game, regret, seeded_random_game, AnonymousGame, EpsNashSearch, Parity, RegretReport, SearchBudget};
pub use error::{Error, Result};
pub use lipschitz::{asymptotic_estimate, delta_star, lambda, FixedPoint, LambdaMethod, LambdaResult};
pub use oracle::{lambda_oracle, CountDistribution, CountVector, OracleBudget, OracleResult};
pub use pb::{m_stat, p_stat, MStatResult, PBParams, Sign};
pub use pmf::IntegerPmf;
pub use walk::WalkParams;
