use std::fmt::Write as _;
use std::path::PathBuf;

use anonlip::equilibrium::{regret_in_base_game, ATTEND, STAY};
use anonlip::walk::{passage_prob, WalkParams};
use anonlip::{
    delta_star, find_eps_nash, lambda, lambda_oracle, party_game, seeded_random_game, simulate_meet_time,
    AnonymousGame, CouplingParams, EpsNashSearch, OracleBudget, Parity, SearchBudget,
};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::fmt::{round15, sig15};
use crate::game_file::read_game;
use crate::{
    Cli, Command, CouplingArgs, DeltaStarArgs, EquilibriumArgs, LambdaArgs, Method, OracleLimits, SweepArgs,
    SweepFormat, VerifyArgs,
};

/// Failure of a command, rendered as a single `error[code]: message` line.
#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: String,
    pub message: String,
}

impl CliError {
    fn new(code: &str, message: impl Into<String>) -> Self {
        CliError {
            code: code.into(),
            message: message.into(),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        // keep it on one line whatever the message contains
        write!(f, "error[{}]: {}", self.code, self.message.replace('\n', " "))
    }
}

impl std::error::Error for CliError {}

impl From<anonlip::Error> for CliError {
    fn from(e: anonlip::Error) -> Self {
        CliError::new(e.code(), e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::new("io", e.to_string())
    }
}

type CmdResult = Result<String, CliError>;

/// Runs a parsed command and returns what it prints on stdout.
pub fn run(cli: Cli) -> CmdResult {
    match cli.command {
        Command::Lambda(a) => cmd_lambda(&a),
        Command::Sweep(a) => cmd_sweep(&SweepSpec::try_from(&a)?),
        Command::Coupling(a) => cmd_coupling(&a),
        Command::MeetTime(a) => cmd_meet_time(&a),
        Command::Equilibrium(a) => cmd_equilibrium(&a),
        Command::DeltaStar(a) => cmd_delta_star(&a),
        Command::Verify(a) => cmd_verify(&a),
    }
}

fn to_json(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialise");
    s.push('\n');
    s
}

fn budget(limits: &OracleLimits) -> OracleBudget {
    OracleBudget {
        max_n: limits.oracle_max_n,
        max_k: limits.oracle_max_k,
    }
}

fn row(out: &mut String, key: &str, value: impl std::fmt::Display) {
    writeln!(out, "{key:<16}{value}").unwrap();
}

pub fn cmd_lambda(a: &LambdaArgs) -> CmdResult {
    let formula = match a.method {
        Method::Oracle => None,
        _ => Some(lambda(a.n, a.k, a.delta)?),
    };
    let oracle = match a.method {
        Method::Formula => None,
        _ => Some(lambda_oracle(a.n, a.k, a.delta, budget(&a.limits))?),
    };
    let diff = match (&formula, &oracle) {
        (Some(f), Some(o)) => Some((f.value - o.value).abs()),
        _ => None,
    };

    if a.json {
        let mut v = json!({
            "schema": "anonlip.lambda.v1",
            "n": a.n,
            "k": a.k,
            "delta": round15(a.delta),
        });
        if let Some(f) = &formula {
            v["value"] = json!(round15(f.value));
            v["lower"] = json!(round15(f.lower));
            v["upper"] = json!(round15(f.upper));
            v["method"] = json!(f.method.as_str());
            v["asymptotic"] = json!(f.asymptotic.map(round15));
        }
        if let Some(o) = &oracle {
            v["oracle"] = json!(round15(o.value));
            v["oracle_worst_class"] = json!(o.worst_class.0);
        }
        if let Some(d) = diff {
            v["abs_diff"] = json!(round15(d));
        }
        return Ok(to_json(&v));
    }

    let mut out = String::new();
    writeln!(out, "lambda(n={}, k={}, delta={})", a.n, a.k, sig15(a.delta)).unwrap();
    if let Some(f) = &formula {
        row(&mut out, "value", sig15(f.value));
        row(&mut out, "lower", sig15(f.lower));
        row(&mut out, "upper", sig15(f.upper));
        row(&mut out, "method", f.method.as_str());
        if let Some(est) = f.asymptotic {
            row(&mut out, "asymptotic", sig15(est));
        }
    }
    if let Some(o) = &oracle {
        row(&mut out, "oracle", sig15(o.value));
        row(&mut out, "worst_class", format!("{:?}", o.worst_class.0));
    }
    if let Some(d) = diff {
        row(&mut out, "abs_diff", sig15(d));
    }
    Ok(out)
}

/// A validated sweep request.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub n_start: usize,
    pub n_stop: usize,
    pub n_step: usize,
    pub k: usize,
    pub deltas: Vec<f64>,
    pub out: Option<PathBuf>,
    pub format: SweepFormat,
}

impl TryFrom<&SweepArgs> for SweepSpec {
    type Error = CliError;

    fn try_from(a: &SweepArgs) -> Result<Self, CliError> {
        let [n_start, n_stop, n_step] = a.n_range[..] else {
            return Err(CliError::new("invalid_parameter", "--n-range takes start,stop,step"));
        };
        if n_step == 0 || n_start > n_stop || n_start < 2 {
            return Err(CliError::new(
                "invalid_parameter",
                format!("empty or invalid n range {n_start},{n_stop},{n_step} (need 2 <= start <= stop, step >= 1)"),
            ));
        }
        if a.deltas.is_empty() {
            return Err(CliError::new("invalid_parameter", "no delta values"));
        }
        if let Some(d) = a.deltas.iter().find(|d| !(**d > 0.0 && **d < 1.0)) {
            return Err(anonlip::Error::InvalidDelta(*d).into());
        }
        Ok(SweepSpec {
            n_start,
            n_stop,
            n_step,
            k: a.k,
            deltas: a.deltas.clone(),
            out: a.out.clone(),
            format: a.format,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: usize,
    pub k: usize,
    pub delta: f64,
    pub lambda: f64,
    pub lower: f64,
    pub upper: f64,
    pub asymptotic: f64,
    pub ratio: f64,
}

pub const SWEEP_HEADER: [&str; 8] = ["n", "k", "delta", "lambda", "lower", "upper", "asymptotic", "ratio"];

/// Rows in `(n, δ)` order, `n` outer. Cells are computed in parallel.
pub fn sweep_rows(spec: &SweepSpec) -> Result<Vec<SweepRow>, CliError> {
    let cells: Vec<(usize, f64)> = (spec.n_start..=spec.n_stop)
        .step_by(spec.n_step)
        .flat_map(|n| spec.deltas.iter().map(move |&d| (n, d)))
        .collect();
    cells
        .par_iter()
        .map(|&(n, delta)| {
            let r = lambda(n, spec.k, delta)?;
            let asymptotic = r.asymptotic.expect("lambda attaches the estimate");
            Ok(SweepRow {
                n,
                k: spec.k,
                delta,
                lambda: r.value,
                lower: r.lower,
                upper: r.upper,
                asymptotic,
                ratio: r.value / asymptotic,
            })
        })
        .collect()
}

pub fn render_sweep_csv(rows: &[SweepRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SWEEP_HEADER).expect("in-memory write");
    for r in rows {
        w.write_record([
            r.n.to_string(),
            r.k.to_string(),
            sig15(r.delta),
            sig15(r.lambda),
            sig15(r.lower),
            sig15(r.upper),
            sig15(r.asymptotic),
            sig15(r.ratio),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
}

fn render_sweep_json(rows: &[SweepRow]) -> String {
    let rows: Vec<Value> = rows
        .iter()
        .map(|r| {
            json!({
                "n": r.n,
                "k": r.k,
                "delta": round15(r.delta),
                "lambda": round15(r.lambda),
                "lower": round15(r.lower),
                "upper": round15(r.upper),
                "asymptotic": round15(r.asymptotic),
                "ratio": round15(r.ratio),
            })
        })
        .collect();
    to_json(&json!({ "schema": "anonlip.sweep.v1", "rows": rows }))
}

pub fn cmd_sweep(spec: &SweepSpec) -> CmdResult {
    let rows = sweep_rows(spec)?;
    let body = match spec.format {
        SweepFormat::Csv => render_sweep_csv(&rows),
        SweepFormat::Json => render_sweep_json(&rows),
    };
    match &spec.out {
        None => Ok(body),
        Some(path) => {
            std::fs::write(path, &body)
                .map_err(|e| CliError::new("io", format!("cannot write {}: {e}", path.display())))?;
            Ok(format!("wrote {} rows to {}\n", rows.len(), path.display()))
        }
    }
}

fn coupling_params(a: &CouplingArgs) -> CouplingParams {
    let mut p = CouplingParams::new(a.n, a.k, a.delta, a.samples, a.seed);
    p.baseline = a.baseline.clone();
    p
}

fn exact_passage(a: &CouplingArgs) -> Result<f64, CliError> {
    if a.k < 2 {
        return Err(CliError::new("invalid_parameter", format!("need k >= 2, got {}", a.k)));
    }
    Ok(passage_prob(WalkParams::new(a.n, 2.0 * a.delta / a.k as f64)?))
}

fn z_score(observed: f64, expected: f64, se: f64) -> f64 {
    if se > 0.0 {
        (observed - expected) / se
    } else if observed == expected {
        0.0
    } else {
        f64::INFINITY
    }
}

pub fn cmd_coupling(a: &CouplingArgs) -> CmdResult {
    let run = anonlip::coupling::simulate_coupling_run(&coupling_params(a))?;
    let est = run.estimate;
    let exact = exact_passage(a)?;
    let z = z_score(est.estimate, exact, est.std_error);
    if a.json {
        return Ok(to_json(&json!({
            "schema": "anonlip.coupling.v1",
            "n": a.n,
            "k": a.k,
            "delta": round15(a.delta),
            "samples": est.samples,
            "seed": est.seed,
            "estimate": round15(est.estimate),
            "std_error": round15(est.std_error),
            "exact": round15(exact),
            "z_score": round15(z),
        })));
    }
    let mut out = String::new();
    writeln!(out, "coupling(n={}, k={}, delta={})", a.n, a.k, sig15(a.delta)).unwrap();
    row(&mut out, "samples", est.samples);
    row(&mut out, "seed", est.seed);
    row(&mut out, "estimate", sig15(est.estimate));
    row(&mut out, "std_error", sig15(est.std_error));
    row(&mut out, "exact", sig15(exact));
    row(&mut out, "z_score", sig15(z));
    Ok(out)
}

pub fn cmd_meet_time(a: &CouplingArgs) -> CmdResult {
    let h = if a.baseline.is_some() {
        let run = anonlip::coupling::simulate_coupling_run(&coupling_params(a))?;
        anonlip::MeetTimeHistogram {
            first_meet: run.first_meet,
            transitions: run.transitions,
            samples: a.samples,
            seed: a.seed,
        }
    } else {
        simulate_meet_time(a.n, a.k, a.delta, a.samples, a.seed)?
    };
    let move_rate = a.delta / a.k as f64;
    let t = &h.transitions;
    let total = t.total();
    let rates = [
        ("down", t.down, move_rate),
        ("stay", t.stay, 1.0 - 2.0 * move_rate),
        ("up", t.up, move_rate),
    ];
    let stats: Vec<(&str, u64, f64, f64, f64)> = rates
        .iter()
        .map(|&(name, count, p)| {
            let freq = if total > 0 { count as f64 / total as f64 } else { 0.0 };
            let se = if total > 0 { (p * (1.0 - p) / total as f64).sqrt() } else { 0.0 };
            (name, count, freq, p, z_score(freq, p, se))
        })
        .collect();

    if a.json {
        let transitions: Vec<Value> = stats
            .iter()
            .map(|&(name, count, freq, p, z)| {
                json!({"move": name, "count": count, "frequency": round15(freq), "expected": round15(p), "z_score": round15(z)})
            })
            .collect();
        return Ok(to_json(&json!({
            "schema": "anonlip.meet-time.v1",
            "n": a.n,
            "k": a.k,
            "delta": round15(a.delta),
            "samples": h.samples,
            "seed": h.seed,
            "first_meet": h.first_meet,
            "transitions": transitions,
        })));
    }
    let mut out = String::new();
    writeln!(out, "meet-time(n={}, k={}, delta={})", a.n, a.k, sig15(a.delta)).unwrap();
    row(&mut out, "samples", h.samples);
    row(&mut out, "seed", h.seed);
    writeln!(out, "{:<8}{:<12}fraction", "step", "count").unwrap();
    for (step, &count) in h.first_meet.iter().enumerate().skip(1) {
        let label = if step == a.n + 1 { "never".to_string() } else { step.to_string() };
        writeln!(out, "{label:<8}{count:<12}{}", sig15(count as f64 / h.samples as f64)).unwrap();
    }
    writeln!(out, "{:<8}{:<12}{:<20}{:<20}z_score", "move", "count", "frequency", "expected").unwrap();
    for (name, count, freq, p, z) in stats {
        writeln!(out, "{name:<8}{count:<12}{:<20}{:<20}{}", sig15(freq), sig15(p), sig15(z)).unwrap();
    }
    Ok(out)
}

fn parse_parity(s: &str) -> Result<Parity, CliError> {
    match s.trim().to_ascii_lowercase().as_str() {
        "even" => Ok(Parity::Even),
        "odd" => Ok(Parity::Odd),
        other => Err(CliError::new("invalid_parameter", format!("preference must be even or odd, got {other:?}"))),
    }
}

/// Even, odd, even, ...
pub fn alternating_preferences(n: usize) -> Vec<Parity> {
    (0..n).map(|i| if i % 2 == 0 { Parity::Even } else { Parity::Odd }).collect()
}

fn load_game(a: &EquilibriumArgs) -> Result<(AnonymousGame, String), CliError> {
    if let Some(path) = &a.source.game {
        return Ok((read_game(path)?, format!("file {}", path.display())));
    }
    if let Some(n) = a.source.party {
        let prefs = match &a.preferences {
            Some(p) => p.iter().map(|s| parse_parity(s)).collect::<Result<Vec<_>, _>>()?,
            None => alternating_preferences(n),
        };
        if prefs.len() != n {
            return Err(CliError::new(
                "invalid_parameter",
                format!("{} preferences for a {n}-player party", prefs.len()),
            ));
        }
        let names: Vec<&str> = prefs.iter().map(|p| if *p == Parity::Even { "even" } else { "odd" }).collect();
        let label = format!(
            "party n={n} preferences={} (action {ATTEND} = attend, {STAY} = stay)",
            names.join(",")
        );
        return Ok((party_game(&prefs)?, label));
    }
    let n = a.source.random.expect("clap enforces one game source");
    Ok((
        seeded_random_game(n, a.actions, a.seed)?,
        format!("random n={n} k={} seed={}", a.actions, a.seed),
    ))
}

/// Slack added to the automatic threshold to absorb rounding.
pub const AUTO_EPS_SLACK: f64 = 1e-9;

pub fn cmd_equilibrium(a: &EquilibriumArgs) -> CmdResult {
    let (g, label) = load_game(a)?;
    let (eps, search_eps, auto) = if a.eps == "auto" {
        let eps = 2.0 * g.k() as f64 * lambda(g.n(), g.k(), a.delta)?.value;
        (eps, eps + AUTO_EPS_SLACK, true)
    } else {
        let eps: f64 = a
            .eps
            .parse()
            .map_err(|_| CliError::new("invalid_parameter", format!("--eps must be a number or auto, got {:?}", a.eps)))?;
        (eps, eps, false)
    };
    let search = find_eps_nash(&g, a.delta, search_eps, SearchBudget { max_profiles: a.max_profiles })?;

    let mut v = json!({
        "schema": "anonlip.equilibrium.v1",
        "game": label,
        "n": g.n(),
        "k": g.k(),
        "delta": round15(a.delta),
        "eps": round15(eps),
        "eps_auto": auto,
    });
    let mut out = String::new();
    row(&mut out, "game", &label);
    row(&mut out, "delta", sig15(a.delta));
    row(&mut out, "eps", format!("{}{}", sig15(eps), if auto { " (auto: 2k*lambda)" } else { "" }));
    match &search {
        EpsNashSearch::Found { profile, report } => {
            let base = regret_in_base_game(&g, profile, a.delta)?;
            let joined: Vec<String> = profile.iter().map(|j| j.to_string()).collect();
            row(&mut out, "status", "found");
            row(&mut out, "profile", joined.join(","));
            row(&mut out, "max_regret", sig15(report.max_regret));
            row(&mut out, "guarantee_in_g", format!("{} (delta + eps)", sig15(a.delta + eps)));
            row(&mut out, "regret_in_g", sig15(base.max_regret));
            writeln!(out, "{:<8}{:<16}regret", "player", "best_deviation").unwrap();
            for (i, p) in report.per_player.iter().enumerate() {
                writeln!(out, "{i:<8}{:<16}{}", p.best_deviation, sig15(p.regret)).unwrap();
            }
            v["status"] = json!("found");
            v["profile"] = json!(profile);
            v["max_regret"] = json!(round15(report.max_regret));
            v["guarantee_in_g"] = json!(round15(a.delta + eps));
            v["regret_in_g"] = json!(round15(base.max_regret));
            v["per_player"] = json!(report
                .per_player
                .iter()
                .map(|p| json!({"best_deviation": p.best_deviation, "regret": round15(p.regret)}))
                .collect::<Vec<_>>());
        }
        EpsNashSearch::Absent {
            min_max_regret,
            best_profile,
        } => {
            let joined: Vec<String> = best_profile.iter().map(|j| j.to_string()).collect();
            row(&mut out, "status", "absent");
            row(&mut out, "min_max_regret", sig15(*min_max_regret));
            row(&mut out, "best_profile", joined.join(","));
            v["status"] = json!("absent");
            v["min_max_regret"] = json!(round15(*min_max_regret));
            v["best_profile"] = json!(best_profile);
        }
    }
    Ok(if a.json { to_json(&v) } else { out })
}

pub fn cmd_delta_star(a: &DeltaStarArgs) -> CmdResult {
    let fp = delta_star(a.n, a.k, a.tol)?;
    if a.json {
        return Ok(to_json(&json!({
            "schema": "anonlip.delta-star.v1",
            "n": a.n,
            "k": a.k,
            "tol": round15(a.tol),
            "delta_star": round15(fp.delta),
            "lambda_star": round15(fp.lambda),
            "epsilon": round15(2.0 * fp.delta),
            "residual": round15(fp.residual()),
        })));
    }
    let mut out = String::new();
    writeln!(out, "delta-star(n={}, k={})", a.n, a.k).unwrap();
    row(&mut out, "delta_star", sig15(fp.delta));
    row(&mut out, "lambda_star", sig15(fp.lambda));
    row(&mut out, "epsilon", sig15(2.0 * fp.delta));
    row(&mut out, "residual", sig15(fp.residual()));
    row(&mut out, "tol", sig15(a.tol));
    Ok(out)
}

/// δ values checked by `verify`.
pub const VERIFY_DELTAS: [f64; 5] = [0.1, 0.25, 0.5, 0.75, 0.9];

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyFamily {
    pub k: usize,
    pub max_n: usize,
    pub cells: usize,
    pub max_abs_diff: f64,
}

/// Formula-versus-oracle deviations for k = 2, 3, 4 over [`VERIFY_DELTAS`].
pub fn verify_families(max_n_k3: usize, max_n_k2: usize, budget: OracleBudget) -> Result<Vec<VerifyFamily>, CliError> {
    [(2, max_n_k2), (3, max_n_k3), (4, max_n_k3)]
        .into_iter()
        .map(|(k, max_n)| {
            let mut worst: f64 = 0.0;
            let mut cells = 0;
            for n in 2..=max_n {
                for delta in VERIFY_DELTAS {
                    let f = lambda(n, k, delta)?.value;
                    let o = lambda_oracle(n, k, delta, budget)?.value;
                    worst = worst.max((f - o).abs());
                    cells += 1;
                }
            }
            Ok(VerifyFamily {
                k,
                max_n,
                cells,
                max_abs_diff: worst,
            })
        })
        .collect()
}

pub fn cmd_verify(a: &VerifyArgs) -> CmdResult {
    let families = verify_families(a.max_n_k3, a.max_n_k2, budget(&a.limits))?;
    let worst = families.iter().map(|f| f.max_abs_diff).fold(0.0, f64::max);
    let pass = worst <= a.tol;
    let out = if a.json {
        to_json(&json!({
            "schema": "anonlip.verify.v1",
            "families": families.iter().map(|f| json!({
                "k": f.k, "n_max": f.max_n, "cells": f.cells, "max_abs_diff": round15(f.max_abs_diff)
            })).collect::<Vec<_>>(),
            "max_abs_diff": round15(worst),
            "tol": round15(a.tol),
            "pass": pass,
        }))
    } else {
        let mut out = String::new();
        for f in &families {
            writeln!(
                out,
                "k={} n=2..{} cells={} max_abs_diff={}",
                f.k,
                f.max_n,
                f.cells,
                sig15(f.max_abs_diff)
            )
            .unwrap();
        }
        writeln!(out, "max_abs_diff={} tol={} {}", sig15(worst), sig15(a.tol), if pass { "PASS" } else { "FAIL" }).unwrap();
        out
    };
    if pass {
        Ok(out)
    } else {
        Err(CliError::new(
            "verify_failed",
            format!("max |formula - oracle| = {} exceeds {}", sig15(worst), sig15(a.tol)),
        ))
    }
}
