//! Monte Carlo mirror coupling of `e_0 + N(a^δ)` and `e_1 + N(a^δ)`.
//!
//! Two copies of the perturbed profile share their randomisation coins. While
//! the running totals differ, a uniform draw landing on action 0 in one copy
//! lands on action 1 in the other and vice versa; once the totals agree the
//! copies move identically. The probability that the totals still differ
//! after `n` steps equals the walk passage probability at rate `2δ/k`.
//!
//! RNG contract: ChaCha8 seeded from a single `u64`; replications are split
//! into fixed batches of [`BATCH_SIZE`] and batch `b` uses stream `b`, so the
//! output depends only on the seed and parameters, never on thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_delta, Error, Result};

pub const BATCH_SIZE: u64 = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingParams {
    pub steps: usize,
    pub k: usize,
    pub delta: f64,
    pub samples: u64,
    pub seed: u64,
    /// Actions of the `steps` perturbed players; defaults to all on action 2
    /// (all on action 0 when `k = 2`).
    pub baseline: Option<Vec<usize>>,
}

impl CouplingParams {
    pub fn new(steps: usize, k: usize, delta: f64, samples: u64, seed: u64) -> Self {
        CouplingParams {
            steps,
            k,
            delta,
            samples,
            seed,
            baseline: None,
        }
    }

    fn resolved_baseline(&self) -> Result<Vec<usize>> {
        if self.k < 2 {
            return Err(Error::InvalidParameter(format!("need k >= 2, got {}", self.k)));
        }
        check_delta(self.delta)?;
        if self.samples == 0 {
            return Err(Error::InvalidParameter("need at least one sample".into()));
        }
        match &self.baseline {
            None => Ok(vec![if self.k >= 3 { 2 } else { 0 }; self.steps]),
            Some(b) if b.len() != self.steps => Err(Error::InvalidParameter(format!(
                "baseline has {} actions for {} steps",
                b.len(),
                self.steps
            ))),
            Some(b) => match b.iter().find(|&&j| j >= self.k) {
                Some(j) => Err(Error::InvalidParameter(format!("action {j} out of range for k = {}", self.k))),
                None => Ok(b.clone()),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub samples: u64,
    pub seed: u64,
}

impl CouplingEstimate {
    fn from_count(unequal: u64, samples: u64, seed: u64) -> Self {
        let estimate = unequal as f64 / samples as f64;
        CouplingEstimate {
            estimate,
            std_error: (estimate * (1.0 - estimate) / samples as f64).sqrt(),
            samples,
            seed,
        }
    }
}

/// Steps of the gap process `S = 1 − (Z)_0 + (Z')_0` taken before it hits 1.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapTransitions {
    pub down: u64,
    pub stay: u64,
    pub up: u64,
}

impl GapTransitions {
    pub fn total(&self) -> u64 {
        self.down + self.stay + self.up
    }
}

/// Everything tallied across replications.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingRun {
    pub estimate: CouplingEstimate,
    /// `x_counts[i][j]`: replications in which player `i` realised action `j`
    /// in the first copy.
    pub x_counts: Vec<Vec<u64>>,
    /// The same for the mirrored copy.
    pub mirrored_counts: Vec<Vec<u64>>,
    /// `first_meet[t]`: replications whose totals first agree after step `t`;
    /// index 0 is always zero and index `steps + 1` counts "never".
    pub first_meet: Vec<u64>,
    pub transitions: GapTransitions,
    /// Steps after meeting at which the totals differed again. Always zero.
    pub separations: u64,
}

#[derive(Clone)]
struct Tally {
    unequal: u64,
    x_counts: Vec<Vec<u64>>,
    mirrored_counts: Vec<Vec<u64>>,
    first_meet: Vec<u64>,
    transitions: GapTransitions,
    separations: u64,
}

impl Tally {
    fn new(steps: usize, k: usize) -> Self {
        Tally {
            unequal: 0,
            x_counts: vec![vec![0; k]; steps],
            mirrored_counts: vec![vec![0; k]; steps],
            first_meet: vec![0; steps + 2],
            transitions: GapTransitions::default(),
            separations: 0,
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        self.unequal += other.unequal;
        for (a, b) in self.x_counts.iter_mut().zip(other.x_counts) {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        }
        for (a, b) in self.mirrored_counts.iter_mut().zip(other.mirrored_counts) {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        }
        self.first_meet.iter_mut().zip(other.first_meet).for_each(|(x, y)| *x += y);
        self.transitions.down += other.transitions.down;
        self.transitions.stay += other.transitions.stay;
        self.transitions.up += other.transitions.up;
        self.separations += other.separations;
        self
    }
}

fn replicate<R: Rng>(rng: &mut R, k: usize, delta: f64, baseline: &[usize], tally: &mut Tally) {
    let mut z = vec![0u64; k];
    let mut z_mirror = vec![0u64; k];
    z[0] = 1;
    z_mirror[1] = 1;
    let mut met = false;
    let mut gap: i64 = 0;
    for (i, &a) in baseline.iter().enumerate() {
        let chi = rng.random_bool(delta);
        let u = rng.random_range(0..k);
        let u_mirror = if !met && u < 2 { 1 - u } else { u };
        let (x, x_mirror) = if chi { (u, u_mirror) } else { (a, a) };
        z[x] += 1;
        z_mirror[x_mirror] += 1;
        tally.x_counts[i][x] += 1;
        tally.mirrored_counts[i][x_mirror] += 1;

        let equal = z == z_mirror;
        if met {
            if !equal {
                tally.separations += 1;
            }
            continue;
        }
        let next_gap = 1 - z[0] as i64 + z_mirror[0] as i64;
        match next_gap - gap {
            -1 => tally.transitions.down += 1,
            0 => tally.transitions.stay += 1,
            _ => tally.transitions.up += 1,
        }
        gap = next_gap;
        if equal {
            met = true;
            tally.first_meet[i + 1] += 1;
        }
    }
    if !met {
        tally.unequal += 1;
        tally.first_meet[baseline.len() + 1] += 1;
    }
}

/// Runs the coupling and returns every tally.
pub fn simulate_coupling_run(params: &CouplingParams) -> Result<CouplingRun> {
    let baseline = params.resolved_baseline()?;
    let (k, delta) = (params.k, params.delta);
    let batches = params.samples.div_ceil(BATCH_SIZE);
    let tally = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
            rng.set_stream(b);
            let reps = BATCH_SIZE.min(params.samples - b * BATCH_SIZE);
            let mut t = Tally::new(params.steps, k);
            for _ in 0..reps {
                replicate(&mut rng, k, delta, &baseline, &mut t);
            }
            t
        })
        .reduce(|| Tally::new(params.steps, k), Tally::merge);
    Ok(CouplingRun {
        estimate: CouplingEstimate::from_count(tally.unequal, params.samples, params.seed),
        x_counts: tally.x_counts,
        mirrored_counts: tally.mirrored_counts,
        first_meet: tally.first_meet,
        transitions: tally.transitions,
        separations: tally.separations,
    })
}

/// Estimates `P(Z_n ≠ Z'_n)` with the default baseline profile.
pub fn simulate_coupling(n: usize, k: usize, delta: f64, samples: u64, seed: u64) -> Result<CouplingEstimate> {
    Ok(simulate_coupling_run(&CouplingParams::new(n, k, delta, samples, seed))?.estimate)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeetTimeHistogram {
    /// Same layout as [`CouplingRun::first_meet`].
    pub first_meet: Vec<u64>,
    pub transitions: GapTransitions,
    pub samples: u64,
    pub seed: u64,
}

/// Distribution of the first step at which the coupled totals agree.
pub fn simulate_meet_time(n: usize, k: usize, delta: f64, samples: u64, seed: u64) -> Result<MeetTimeHistogram> {
    let run = simulate_coupling_run(&CouplingParams::new(n, k, delta, samples, seed))?;
    Ok(MeetTimeHistogram {
        first_meet: run.first_meet,
        transitions: run.transitions,
        samples,
        seed,
    })
}
