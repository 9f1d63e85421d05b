//! Subcommand implementations. Work runs on the rayon pool; files are
//! written afterwards from the calling thread.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use twoflux::diagnostics::{
    comparison_check, contraction_check, front_bound_check, plateau_bound_check, DiagnosticsReport, Verdict,
};
use twoflux::scenario::{random_piecewise, PropertiesSpec, ScenarioConfig};
use twoflux::semigroup::{self, nu_ladder, wrap_line_to_periodic, NuLadder, SemigroupRun};
use twoflux::viscous::{viscous_ladder, ViscousRung};
use twoflux::{Error, Profile, SmoothFluxPair, Topology};

use crate::output::{num, opt, write_csv, write_json, Csv};
use crate::{CliResult, Loaded};

// ---------------------------------------------------------------------------
// run
// ---------------------------------------------------------------------------

fn profile_rows(csv: &mut Csv, time: f64, p: &Profile) {
    for (a, b, v) in p.cells() {
        csv.row(&[num(time), num(a), num(b), num(v)]);
    }
}

fn series_csv(hash: &str, run: &SemigroupRun, report: &DiagnosticsReport) -> Csv {
    let mut csv = Csv::new(
        hash,
        &[
            "time",
            "l1",
            "linf",
            "tv",
            "integral",
            "fronts",
            "plateaus",
            "min_plateau_width",
            "top_plateau_value",
            "positive_mass",
            "negative_mass",
            "restarts",
        ],
    );
    for (s, r) in run.samples.iter().zip(&report.series) {
        csv.row(&[
            num(s.time),
            num(s.l1),
            num(s.linf),
            num(s.tv),
            num(s.integral),
            s.fronts.to_string(),
            r.plateaus.to_string(),
            opt(s.min_plateau_width),
            opt(s.top_plateau().map(|p| p.value)),
            opt(r.positive_mass),
            opt(r.negative_mass),
            s.restarts.to_string(),
        ]);
    }
    csv
}

fn print_verdicts(verdicts: &[Verdict]) {
    println!("{:<24} {:>6} {:>14} {:>10}", "check", "result", "margin", "tolerance");
    for v in verdicts {
        println!(
            "{:<24} {:>6} {:>14.6e} {:>10.1e}",
            v.name,
            if v.passed { "pass" } else { "FAIL" },
            v.margin,
            v.tolerance
        );
    }
}

#[derive(Serialize)]
struct RunReport<'a> {
    nu: u32,
    horizon: f64,
    stats: &'a twoflux::tracker::TrackerStats,
    lambda_dagger: f64,
    c0: f64,
    front_bound: f64,
    diagnostics: &'a DiagnosticsReport,
}

pub fn run(l: &Loaded) -> CliResult<u8> {
    let cfg = &l.config;
    let initial = cfg.initial_profile()?;
    let pair = cfg.flux_pair(&initial)?;
    let nu = cfg.resolution();
    let r = semigroup::run(nu, &initial, &pair, cfg.horizon, &cfg.all_sample_times(), cfg.tracker.clone())?;
    let report = DiagnosticsReport::from_run(&r);

    let mut profiles = Csv::new(&l.hash, &["time", "x_left", "x_right", "value"]);
    for s in &r.samples {
        profile_rows(&mut profiles, s.time, &s.profile);
    }
    let mut events = Csv::new(&l.hash, &["time", "kind", "position", "index"]);
    for e in &r.events {
        events.row(&[num(e.time), format!("{:?}", e.kind), num(e.position), e.index.to_string()]);
    }
    write_csv(&l.out, "profiles.csv", profiles)?;
    write_csv(&l.out, "series.csv", series_csv(&l.hash, &r, &report))?;
    write_csv(&l.out, "events.csv", events)?;
    write_json(
        &l.out,
        "report.json",
        &l.hash,
        cfg,
        &RunReport {
            nu,
            horizon: cfg.horizon,
            stats: &r.stats,
            lambda_dagger: r.lambda_dagger,
            c0: r.c0,
            front_bound: r.front_bound(),
            diagnostics: &report,
        },
    )?;
    println!(
        "ν = {nu}, T = {}, {} samples, {} restarts, at most {} fronts (bound {})",
        cfg.horizon,
        r.samples.len(),
        r.stats.restarts,
        r.stats.max_fronts,
        r.front_bound()
    );
    print_verdicts(&report.verdicts);
    println!("config hash {}", l.hash);
    Ok(if report.all_passed() { 0 } else { 1 })
}

// ---------------------------------------------------------------------------
// compare
// ---------------------------------------------------------------------------

/// Data on the unit circle and the factor mapping physical to unit time.
fn to_unit_circle(cfg: &ScenarioConfig, initial: &Profile, pair: &SmoothFluxPair) -> CliResult<(Profile, f64)> {
    Ok(match cfg.topology {
        Topology::Periodic { period } => (initial.transform_x(0.0, 1.0 / period)?, 1.0 / period),
        Topology::Line => {
            let w = wrap_line_to_periodic(initial, pair, cfg.horizon, 1.0)?;
            (w.profile, w.time_scale)
        }
    })
}

#[derive(Serialize)]
struct Comparison {
    nu: u32,
    unit_horizon: f64,
    rungs: Vec<ViscousRung>,
    verdict: Option<&'static str>,
}

fn viscous_study(cfg: &ScenarioConfig, initial: &Profile, pair: &SmoothFluxPair, nu: u32) -> CliResult<Comparison> {
    let spec = cfg
        .viscous
        .as_ref()
        .ok_or_else(|| Error::Config("a 'viscous' section with n_cells and rungs is required".into()))?;
    let (unit, scale) = to_unit_circle(cfg, initial, pair)?;
    let horizon = cfg.horizon * scale;
    let tracked = semigroup::run(nu, &unit, pair, horizon, &[], cfg.tracker.clone())?;
    let reference = tracked.final_profile().expect("horizon is sampled").clone();
    let rungs = viscous_ladder(&unit, pair, spec.n_cells, &spec.rungs, &[(horizon, reference)])?;
    let verdict = (rungs.len() >= 2).then(|| {
        if rungs.windows(2).all(|w| w[1].distance() < w[0].distance()) {
            "converging"
        } else {
            "not converged"
        }
    });
    Ok(Comparison {
        nu,
        unit_horizon: horizon,
        rungs,
        verdict,
    })
}

fn viscous_csv(hash: &str, c: &Comparison) -> Csv {
    let mut csv = Csv::new(
        hash,
        &["eps", "delta", "n_cells", "distance", "mean_drift", "min", "max", "steps"],
    );
    for r in &c.rungs {
        csv.row(&[
            num(r.eps),
            num(r.delta),
            r.n_cells.to_string(),
            num(r.distance()),
            num(r.mean_drift),
            num(r.min),
            num(r.max),
            r.steps.to_string(),
        ]);
    }
    csv
}

fn print_viscous(c: &Comparison) {
    println!("{:>8} {:>8} {:>8} {:>14} {:>10}", "eps", "delta", "cells", "L1 distance", "drift");
    for r in &c.rungs {
        println!(
            "{:>8} {:>8} {:>8} {:>14.6e} {:>10.2e}",
            r.eps,
            r.delta,
            r.n_cells,
            r.distance(),
            r.mean_drift
        );
    }
    match c.verdict {
        Some(v) => println!("verdict: {v}"),
        None => println!("verdict: none (single rung)"),
    }
}

pub fn compare(l: &Loaded) -> CliResult<u8> {
    let cfg = &l.config;
    let initial = cfg.initial_profile()?;
    let pair = cfg.flux_pair(&initial)?;
    let c = viscous_study(cfg, &initial, &pair, cfg.resolution())?;
    write_csv(&l.out, "compare.csv", viscous_csv(&l.hash, &c))?;
    write_json(&l.out, "compare.json", &l.hash, cfg, &c)?;
    print_viscous(&c);
    println!("config hash {}", l.hash);
    Ok(0)
}

// ---------------------------------------------------------------------------
// properties
// ---------------------------------------------------------------------------

const CONTRACTION_TOL: f64 = 1e-8;
const COMPARISON_TOL: f64 = 1e-10;
const AVERAGE_TOL: f64 = 1e-8;

/// Outcome of one randomized trial: the verdicts, or the numerical error
/// that aborted it.
struct Trial {
    index: usize,
    seed: u64,
    verdicts: Vec<Verdict>,
    error: Option<String>,
}

fn trial_domain(topology: Topology) -> (f64, f64) {
    match topology {
        Topology::Periodic { period } => (0.0, period),
        Topology::Line => (0.0, 1.0),
    }
}

/// Finite-time decay: extinction on the line, relaxation to the mean of
/// the quantized data on the circle.
fn decay_check(cfg: &ScenarioConfig, spec: &PropertiesSpec, u: &Profile, pair: &SmoothFluxPair) -> twoflux::Result<Verdict> {
    let q = semigroup::quantize_initial(u, spec.nu)?;
    let probe = semigroup::run(spec.nu, u, pair, 0.0, &[], cfg.tracker.clone())?;
    let c0 = probe.c0;
    Ok(match cfg.topology {
        Topology::Line => {
            let t = q.l1_norm() / c0 + 1e-9;
            let r = semigroup::run(spec.nu, u, pair, t, &[], cfg.tracker.clone())?;
            let last = r.final_profile().expect("horizon is sampled");
            let residue = if last.is_constant() { last.linf() } else { f64::INFINITY };
            Verdict::new("extinction", -residue, 0.0)
        }
        Topology::Periodic { period } => {
            let mean = q.mean().unwrap_or(0.0);
            let t = period * q.linf() / c0;
            let r = semigroup::run(spec.nu, u, pair, t, &[], cfg.tracker.clone())?;
            let last = r.final_profile().expect("horizon is sampled");
            let dev = if last.is_constant() {
                (last.value_at(0.0) - mean).abs()
            } else {
                f64::INFINITY
            };
            Verdict::new("averaging", -dev, AVERAGE_TOL)
        }
    })
}

fn run_trial(cfg: &ScenarioConfig, spec: &PropertiesSpec, seed: u64) -> twoflux::Result<Vec<Verdict>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let domain = trial_domain(cfg.topology);
    let mut data = || random_piecewise(cfg.topology, rng.gen(), rng.gen_range(1..=spec.max_jumps.max(1)), spec.amplitude, domain);
    let (u, v) = (data()?, data()?);
    let upper = u.combine(&v, f64::max)?;
    let pair = cfg.flux.build(upper.linf().max(v.linf()) + 1.0)?;
    let times: Vec<f64> = (1..=spec.samples.max(1))
        .map(|k| cfg.horizon * k as f64 / spec.samples.max(1) as f64)
        .collect();
    let go = |p: &Profile| semigroup::run(spec.nu, p, &pair, cfg.horizon, &times, cfg.tracker.clone());
    let (ru, rv, rw) = (go(&u)?, go(&v)?, go(&upper)?);
    let report = DiagnosticsReport::from_run(&ru);
    // the ordered pairs start closer together, which sharpens the contraction test
    let mut contraction = contraction_check(&ru, &rv, CONTRACTION_TOL)?;
    for (a, b) in [(&ru, &rw), (&rv, &rw)] {
        let c = contraction_check(a, b, CONTRACTION_TOL)?;
        if c.margin < contraction.margin {
            contraction = c;
        }
    }
    let mut verdicts = vec![contraction, comparison_check(&ru, &rw, COMPARISON_TOL)?];
    verdicts.extend(
        report
            .verdicts
            .into_iter()
            .filter(|v| matches!(v.name.as_str(), "tv_monotone" | "linf_monotone")),
    );
    verdicts.push(plateau_bound_check(&ru));
    verdicts.push(front_bound_check(&ru));
    verdicts.push(decay_check(cfg, spec, &u, &pair)?);
    Ok(verdicts)
}

#[derive(Serialize)]
struct Worst {
    name: String,
    margin: f64,
    tolerance: f64,
    trial: usize,
    seed: u64,
    violations: usize,
}

#[derive(Serialize)]
struct PropertiesSummary<'a> {
    trials: usize,
    seed: u64,
    nu: u32,
    errors: Vec<String>,
    worst: &'a [Worst],
}

fn summarize(trials: &[Trial]) -> Vec<Worst> {
    let mut worst: Vec<Worst> = Vec::new();
    for t in trials {
        for v in &t.verdicts {
            let slot = match worst.iter_mut().position(|w| w.name == v.name) {
                Some(i) => &mut worst[i],
                None => {
                    worst.push(Worst {
                        name: v.name.clone(),
                        margin: f64::INFINITY,
                        tolerance: v.tolerance,
                        trial: t.index,
                        seed: t.seed,
                        violations: 0,
                    });
                    worst.last_mut().unwrap()
                }
            };
            if !v.passed {
                slot.violations += 1;
            }
            if v.margin < slot.margin {
                slot.margin = v.margin;
                slot.trial = t.index;
                slot.seed = t.seed;
            }
        }
    }
    worst
}

pub fn properties(l: &Loaded) -> CliResult<u8> {
    let cfg = &l.config;
    let spec = cfg
        .properties
        .as_ref()
        .ok_or_else(|| Error::Config("a 'properties' section is required".into()))?;
    if spec.trials == 0 {
        eprintln!("warning: properties.trials is 0; nothing to check");
    }
    let mut seeder = ChaCha8Rng::seed_from_u64(spec.seed);
    let seeds: Vec<u64> = (0..spec.trials).map(|_| seeder.gen()).collect();
    let trials: Vec<Trial> = seeds
        .par_iter()
        .enumerate()
        .map(|(index, &seed)| match run_trial(cfg, spec, seed) {
            Ok(verdicts) => Trial { index, seed, verdicts, error: None },
            Err(e) => Trial { index, seed, verdicts: Vec::new(), error: Some(e.to_string()) },
        })
        .collect();

    let mut csv = Csv::new(&l.hash, &["trial", "seed", "check", "passed", "margin", "tolerance"]);
    for t in &trials {
        for v in &t.verdicts {
            csv.row(&[
                t.index.to_string(),
                t.seed.to_string(),
                v.name.clone(),
                v.passed.to_string(),
                num(v.margin),
                num(v.tolerance),
            ]);
        }
        if let Some(e) = &t.error {
            csv.row(&[t.index.to_string(), t.seed.to_string(), "error".into(), "false".into(), String::new(), format!("\"{}\"", e.replace('"', "'"))]);
        }
    }
    let worst = summarize(&trials);
    let errors: Vec<String> = trials
        .iter()
        .filter_map(|t| t.error.as_ref().map(|e| format!("trial {} (seed {}): {e}", t.index, t.seed)))
        .collect();
    let violated = worst.iter().any(|w| w.violations > 0);
    write_csv(&l.out, "properties.csv", csv)?;
    write_json(
        &l.out,
        "summary.json",
        &l.hash,
        cfg,
        &PropertiesSummary {
            trials: spec.trials,
            seed: spec.seed,
            nu: spec.nu,
            errors: errors.clone(),
            worst: &worst,
        },
    )?;

    println!("{:<24} {:>10} {:>14} {:>10} {:>6}", "check", "violations", "worst margin", "tolerance", "trial");
    for w in &worst {
        println!(
            "{:<24} {:>10} {:>14.6e} {:>10.1e} {:>6}",
            w.name, w.violations, w.margin, w.tolerance, w.trial
        );
    }
    for e in &errors {
        eprintln!("error: {e}");
    }
    println!("config hash {}", l.hash);
    Ok(if violated {
        1
    } else if !errors.is_empty() {
        3
    } else {
        0
    })
}

// ---------------------------------------------------------------------------
// converge
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct Convergence<'a> {
    ladder: &'a NuLadder,
    strictly_decreasing: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    viscous: Option<&'a Comparison>,
}

pub fn converge(l: &Loaded) -> CliResult<u8> {
    let cfg = &l.config;
    let initial = cfg.initial_profile()?;
    let pair = cfg.flux_pair(&initial)?;
    let nus = if cfg.nu_ladder.is_empty() {
        vec![cfg.resolution()]
    } else {
        cfg.nu_ladder.clone()
    };
    let ladder = nu_ladder(&initial, &pair, cfg.horizon, &nus, &cfg.tracker)?;
    let viscous = match (&cfg.viscous, cfg.topology) {
        (Some(_), Topology::Periodic { .. }) => Some(viscous_study(cfg, &initial, &pair, *nus.last().unwrap())?),
        _ => None,
    };

    let mut csv = Csv::new(
        &l.hash,
        &["nu", "distance", "ratio", "a_priori", "flux_estimate", "constant", "restarts", "max_fronts"],
    );
    for r in &ladder.rows {
        csv.row(&[
            r.nu.to_string(),
            num(r.distance),
            opt(r.ratio),
            num(r.a_priori),
            num(r.flux_estimate),
            opt(r.constant),
            r.restarts.to_string(),
            r.max_fronts.to_string(),
        ]);
    }
    write_csv(&l.out, "converge.csv", csv)?;
    if let Some(c) = &viscous {
        write_csv(&l.out, "viscous.csv", viscous_csv(&l.hash, c))?;
    }
    write_json(
        &l.out,
        "converge.json",
        &l.hash,
        cfg,
        &Convergence {
            ladder: &ladder,
            strictly_decreasing: ladder.strictly_decreasing(),
            viscous: viscous.as_ref(),
        },
    )?;

    println!("{:>4} {:>14} {:>8} {:>12} {:>12} {:>10}", "nu", "distance", "ratio", "a priori", "flux est.", "constant");
    for r in &ladder.rows {
        let f = |x: Option<f64>| x.map(|v| format!("{v:.3}")).unwrap_or_else(|| "-".into());
        println!(
            "{:>4} {:>14.6e} {:>8} {:>12.4e} {:>12.4e} {:>10}",
            r.nu,
            r.distance,
            f(r.ratio),
            r.a_priori,
            r.flux_estimate,
            f(r.constant)
        );
    }
    if !ladder.strictly_decreasing() {
        println!("note: distances are not strictly decreasing");
    }
    if let Some(c) = &viscous {
        print_viscous(c);
    }
    println!("config hash {}", l.hash);
    Ok(0)
}
