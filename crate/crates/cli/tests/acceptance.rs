//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any failed.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use anonlip::coupling::{simulate_coupling_run, CouplingParams};
use anonlip::lipschitz::{lambda_k2, lambda_k2_even, lambda_k3};
use anonlip::pb::{normal_approx_error, pb_mode, pb_pmf, tv_shift};
use anonlip::walk::{passage_prob, stay_below_prob};
use anonlip::{
    find_eps_nash, lambda, lambda_oracle, party_game, seeded_random_game, EpsNashSearch, OracleBudget, PBParams,
    Parity, SearchBudget, WalkParams,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const DELTA_GRID: [f64; 5] = [0.1, 0.25, 0.5, 0.75, 0.9];
const ORACLE_TOL: f64 = 1e-9;
const EXACT_TOL: f64 = 1e-12;
const RATE_GRID: [f64; 6] = [0.01, 0.1, 0.25, 0.5, 0.75, 1.0];
const REFLECTION_BUDGET: Duration = Duration::from_secs(5);
const ASYMPTOTIC_TOL: f64 = 0.05;
const ASYMPTOTIC_REGIME: f64 = 100.0;
const NORMAL_CALIBRATION_FACTOR: f64 = 2.0;
const COUPLING_SAMPLES: u64 = 1_000_000;
const COUPLING_SIGMAS: f64 = 4.0;
const COUPLING_BUDGET: Duration = Duration::from_secs(60);
const REGRET_SLACK: f64 = 1e-9;
const PARTY_MIN_REGRET: f64 = 0.5;
const PARTY_DELTA: f64 = 0.3;
const SEED: u64 = 20_240_601;

type Outcome = Result<String, String>;
type Check = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn k3_oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for k in [3, 4] {
        for n in 2..=8 {
            for delta in DELTA_GRID {
                let f = lambda_k3(n, k, delta).map_err(|e| e.to_string())?.value;
                let o = lambda_oracle(n, k, delta, OracleBudget::default()).map_err(|e| e.to_string())?.value;
                let d = (f - o).abs();
                worst = worst.max(d);
                ensure(d <= ORACLE_TOL, || format!("n={n} k={k} δ={delta}: |{f} - {o}| = {d:e}"))?;
            }
        }
    }
    ensure(start.elapsed() < Duration::from_secs(60), || format!("took {:?}", start.elapsed()))?;
    Ok(format!("70 cells, max |k3 - oracle| = {worst:.2e} <= {ORACLE_TOL:e}"))
}

fn k2_oracle_equivalence() -> Outcome {
    let mut worst_oracle: f64 = 0.0;
    for n in 2..=12 {
        for delta in DELTA_GRID {
            let f = lambda_k2(n, delta).map_err(|e| e.to_string())?.value;
            let o = lambda_oracle(n, 2, delta, OracleBudget::default()).map_err(|e| e.to_string())?.value;
            let d = (f - o).abs();
            worst_oracle = worst_oracle.max(d);
            ensure(d <= ORACLE_TOL, || format!("n={n} δ={delta}: |{f} - {o}| = {d:e}"))?;
        }
    }
    let mut worst_even: f64 = 0.0;
    for n in (2..=100).step_by(2) {
        for delta in DELTA_GRID {
            let m = lambda_k2(n, delta).map_err(|e| e.to_string())?.value;
            let w = lambda_k2_even(n, delta).map_err(|e| e.to_string())?;
            let d = (m - w).abs();
            worst_even = worst_even.max(d);
            ensure(d <= EXACT_TOL, || format!("even n={n} δ={delta}: |{m} - {w}| = {d:e}"))?;
        }
    }
    Ok(format!(
        "max |k2 - oracle| = {worst_oracle:.2e}, max |k2 - even walk| = {worst_even:.2e}"
    ))
}

fn odd_sandwich() -> Outcome {
    let mut cells = 0;
    for n in (3..=99).step_by(2) {
        for delta in DELTA_GRID {
            let v = lambda_k2(n, delta).map_err(|e| e.to_string())?.value;
            let above = lambda_k2_even(n + 1, delta).map_err(|e| e.to_string())?;
            let below = lambda_k2_even(n - 1, delta).map_err(|e| e.to_string())?;
            let upper = (below * above).sqrt();
            ensure(above <= v && v <= upper + EXACT_TOL, || {
                format!("n={n} δ={delta}: {v} not in [{above}, {upper}]")
            })?;
            cells += 1;
        }
    }
    Ok(format!("{cells} odd cells inside [λ(n+1), sqrt(λ(n-1)λ(n+1))]"))
}

fn reflection_principle() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for r in RATE_GRID {
        for n in 0..=200 {
            let p = WalkParams::new(n, r).map_err(|e| e.to_string())?;
            let d = (stay_below_prob(p) - passage_prob(p)).abs();
            worst = worst.max(d);
            ensure(d <= EXACT_TOL, || format!("n={n} r={r}: diff {d:e}"))?;
        }
    }
    let took = start.elapsed();
    ensure(took < REFLECTION_BUDGET, || format!("took {took:?}"))?;
    Ok(format!("max diff {worst:.2e} in {took:.2?}"))
}

fn pb_mode_property() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst_tv: f64 = 0.0;
    for i in 0..200 {
        let len = rng.random_range(1..=30);
        let probs: Vec<f64> = (0..len).map(|_| rng.random::<f64>()).collect();
        let p = PBParams::new(probs);
        let mu = p.mean();
        let mode = pb_mode(&p).map_err(|e| e.to_string())? as f64;
        ensure(mode == mu.floor() || mode == mu.ceil(), || format!("instance {i}: mode {mode}, mean {mu}"))?;
        let pmf = pb_pmf(&p).map_err(|e| e.to_string())?;
        let direct = pmf.tv_distance(&pmf.shifted(1));
        let by_mode = tv_shift(&p).map_err(|e| format!("instance {i}: {e}"))?;
        worst_tv = worst_tv.max((direct - by_mode).abs());
        ensure((direct - by_mode).abs() <= EXACT_TOL, || format!("instance {i}: {direct} vs {by_mode}"))?;
    }
    Ok(format!("200 instances, max TV disagreement {worst_tv:.2e}"))
}

fn asymptotic_convergence() -> Outcome {
    let mut summary = Vec::new();
    for k in [2, 3, 5] {
        for delta in [0.1, 0.3] {
            let mut prev_err = f64::INFINITY;
            let mut last = 0.0;
            for e in 7..=14 {
                let n = 1usize << e;
                let r = lambda(n, k, delta).map_err(|e| e.to_string())?;
                let ratio = r.value / r.asymptotic.expect("estimate attached");
                let err = (ratio - 1.0).abs();
                if n as f64 * delta / k as f64 >= ASYMPTOTIC_REGIME {
                    ensure(err <= ASYMPTOTIC_TOL, || format!("k={k} δ={delta} n={n}: |ratio-1| = {err}"))?;
                }
                ensure(err <= prev_err, || format!("k={k} δ={delta} n={n}: |ratio-1| rose {prev_err} -> {err}"))?;
                prev_err = err;
                last = err;
            }
            summary.push(format!("k={k},δ={delta}:{last:.1e}"));
        }
    }
    Ok(format!("|ratio-1| at n=2^14: {}", summary.join(" ")))
}

fn normal_error_decay() -> Outcome {
    let scaled = |m: usize| -> Result<f64, String> {
        let a = normal_approx_error(&PBParams::new(vec![0.5; m])).map_err(|e| e.to_string())?;
        Ok(a.max_error * a.sigma)
    };
    let bound = NORMAL_CALIBRATION_FACTOR * scaled(16)?;
    let mut seen = Vec::new();
    for m in [16, 64, 256, 1024, 4096] {
        let v = scaled(m)?;
        ensure(v <= bound, || format!("m={m}: error·σ = {v} > {bound}"))?;
        seen.push(format!("{m}:{v:.3e}"));
    }
    Ok(format!("error·σ {} <= {bound:.3e}", seen.join(" ")))
}

fn coupling_simulation() -> Outcome {
    let mut lines = Vec::new();
    for (n, k, delta) in [(20, 3, 0.3), (50, 4, 0.5), (10, 2, 0.2)] {
        let start = Instant::now();
        let run = simulate_coupling_run(&CouplingParams::new(n, k, delta, COUPLING_SAMPLES, SEED))
            .map_err(|e| e.to_string())?;
        let took = start.elapsed();
        ensure(took < COUPLING_BUDGET, || format!("({n},{k},{delta}) took {took:?}"))?;
        let est = run.estimate;
        let exact = passage_prob(WalkParams::new(n, 2.0 * delta / k as f64).map_err(|e| e.to_string())?);
        let z = (est.estimate - exact) / est.std_error;
        ensure(z.abs() <= COUPLING_SIGMAS, || format!("({n},{k},{delta}): estimate {} exact {exact} z {z}", est.estimate))?;

        let t = run.transitions;
        let total = t.total() as f64;
        let move_rate = delta / k as f64;
        for (name, count, p) in [("down", t.down, move_rate), ("stay", t.stay, 1.0 - 2.0 * move_rate), ("up", t.up, move_rate)] {
            let freq = count as f64 / total;
            let zt = (freq - p) / (p * (1.0 - p) / total).sqrt();
            ensure(zt.abs() <= COUPLING_SIGMAS, || format!("({n},{k},{delta}) {name}: freq {freq} vs {p}, z {zt}"))?;
        }
        lines.push(format!("({n},{k},{delta}) z={z:+.2} {took:.1?}"));
    }
    Ok(lines.join(", "))
}

fn random_game_regret_bound() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut found = 0;
    for i in 0..50 {
        let n = rng.random_range(2..=7);
        let k = rng.random_range(2..=3);
        let game = seeded_random_game(n, k, SEED + i).map_err(|e| e.to_string())?;
        for delta in [0.1, 0.3] {
            let eps = 2.0 * k as f64 * lambda(n, k, delta).map_err(|e| e.to_string())?.value + REGRET_SLACK;
            match find_eps_nash(&game, delta, eps, SearchBudget::default()).map_err(|e| e.to_string())? {
                EpsNashSearch::Found { report, .. } => {
                    ensure(report.max_regret <= eps, || format!("game {i}: regret {}", report.max_regret))?;
                    found += 1;
                }
                EpsNashSearch::Absent { min_max_regret, .. } => {
                    return Err(format!("game {i} (n={n}, k={k}, δ={delta}): best regret {min_max_regret} > {eps}"))
                }
            }
        }
    }
    Ok(format!("{found}/100 game-δ pairs have a pure profile within 2kλ"))
}

fn party_demonstration() -> Outcome {
    let mut games = 0;
    for n in 2..=8usize {
        for mask in 1..(1u32 << n) - 1 {
            let prefs: Vec<Parity> = (0..n)
                .map(|i| if mask >> i & 1 == 1 { Parity::Odd } else { Parity::Even })
                .collect();
            let g = party_game(&prefs).map_err(|e| e.to_string())?;
            match find_eps_nash(&g, 0.0, 0.25, SearchBudget::default()).map_err(|e| e.to_string())? {
                EpsNashSearch::Absent { min_max_regret, .. } => {
                    ensure(min_max_regret >= PARTY_MIN_REGRET, || format!("n={n} mask={mask:b}: {min_max_regret}"))?
                }
                EpsNashSearch::Found { profile, .. } => {
                    return Err(format!("n={n} mask={mask:b}: unperturbed 1/4-Nash {profile:?}"))
                }
            }
            let eps = 2.0 * 2.0 * lambda(n, 2, PARTY_DELTA).map_err(|e| e.to_string())?.value + REGRET_SLACK;
            ensure(
                matches!(
                    find_eps_nash(&g, PARTY_DELTA, eps, SearchBudget::default()).map_err(|e| e.to_string())?,
                    EpsNashSearch::Found { .. }
                ),
                || format!("n={n} mask={mask:b}: no profile within auto ε at δ = {PARTY_DELTA}"),
            )?;
            games += 1;
        }
    }
    Ok(format!("{games} mixed-preference games: unperturbed min-max regret >= 1/2, perturbed within 2kλ"))
}

fn cli_output(args: &[&str], threads: Option<&str>) -> Result<Vec<u8>, String> {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_anonlip"));
    cmd.args(args);
    if let Some(t) = threads {
        cmd.env("RAYON_NUM_THREADS", t);
    }
    let out = cmd.output().map_err(|e| e.to_string())?;
    ensure(out.status.success(), || {
        format!("{args:?} failed: {}", String::from_utf8_lossy(&out.stderr))
    })?;
    Ok(out.stdout)
}

fn determinism() -> Outcome {
    let runs: [&[&str]; 8] = [
        &["sweep", "--n-range", "2,400,7", "--k", "2", "--deltas", "0.1,0.3,0.5"],
        &["sweep", "--n-range", "2,400,7", "--k", "3", "--deltas", "0.1,0.3,0.5", "--format", "json"],
        &["lambda", "--n", "9", "--k", "2", "--delta", "0.3", "--method", "both", "--json"],
        &["coupling", "--n", "20", "--k", "3", "--delta", "0.3", "--samples", "200000", "--seed", "7", "--json"],
        &["meet-time", "--n", "12", "--k", "2", "--delta", "0.4", "--samples", "100000", "--seed", "3", "--json"],
        &["equilibrium", "--random", "6", "--actions", "3", "--seed", "11", "--delta", "0.1", "--eps", "0.2", "--json"],
        &["delta-star", "--n", "100", "--k", "3", "--json"],
        &["verify", "--json"],
    ];
    for args in runs {
        let a = cli_output(args, None)?;
        let b = cli_output(args, None)?;
        let single = cli_output(args, Some("1"))?;
        ensure(a == b, || format!("{args:?}: repeated runs differ"))?;
        ensure(a == single, || format!("{args:?}: output depends on thread count"))?;
    }
    Ok(format!("{} commands byte-identical across repeats and thread counts", runs.len()))
}

fn main() -> ExitCode {
    let criteria: [Check; 11] = [
        ("AC1 k>=3 walk formula equals oracle", k3_oracle_equivalence),
        ("AC2 k=2 M-formula equals oracle and even walk", k2_oracle_equivalence),
        ("AC3 odd-n bracket", odd_sandwich),
        ("AC4 reflection identity", reflection_principle),
        ("AC5 PB mode and shift TV", pb_mode_property),
        ("AC6 asymptotic ratio convergence", asymptotic_convergence),
        ("AC7 normal approximation decay", normal_error_decay),
        ("AC8 coupling simulation", coupling_simulation),
        ("AC9 pure 2kλ-Nash in random games", random_game_regret_bound),
        ("AC10 party game", party_demonstration),
        ("AC11 deterministic output", determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        let took = start.elapsed();
        match outcome {
            Ok(detail) => println!("PASS  {name:<48} {detail} [{took:.1?}]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name:<48} {detail} [{took:.1?}]");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
