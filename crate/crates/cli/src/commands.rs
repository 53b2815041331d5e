use crate::output::{num, Output};
use crate::{Command, Status};
use anyhow::{bail, Context, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use ssrdc_core::calibration::{calibrate, CalibParams, Calibration};
use ssrdc_core::sim::{builtin_scenarios, judge, run_scenario_suite, simulate, Outcome, RunVerdict, ScenarioReport};
use ssrdc_core::ssfe::{bench_tone, BenchResult};
use ssrdc_core::stability::{count_rhp_zeros, rhp_contour, sensitivity, sweep, ParamId, Pole, SweepPoint};
use ssrdc_core::tables::{reproduce_all, Row};
use ssrdc_core::tuner::tune_ksso;
use ssrdc_core::{Config, System};
use std::time::Instant;

pub fn dispatch(cmd: &Command, cfg: &Config, seed: u64, out: &mut Output) -> Result<Status> {
    let sys = cfg.system();
    match cmd {
        Command::Analyze => analyze(&sys, out),
        Command::Sensitivity { delta, points } => sensitivities(&sys, *delta, *points, out),
        Command::Tune => tune(&sys, out),
        Command::Simulate { scenario, no_ssrdc } => simulate_one(cfg, scenario.as_deref(), *no_ssrdc, out),
        Command::Suite => suite(cfg, out),
        Command::SsfeBench => ssfe_bench(cfg, seed, out),
        Command::Tables { calibrate } => tables(&sys, *calibrate, out),
    }
}

#[derive(Serialize)]
struct Analysis {
    dominant: Pole,
    frequency_hz: f64,
    damping_ratio: f64,
    stable: bool,
    /// Zeros of the characteristic function in the right half plane, from
    /// the argument principle.
    rhp_count: i64,
    band_hz: (f64, f64),
    poles: Vec<Pole>,
}

fn analyze(sys: &System, out: &mut Output) -> Result<Status> {
    let t0 = Instant::now();
    let mut poles = sys.poles()?;
    poles.sort_by(|a, b| b.sigma.total_cmp(&a.sigma).then(a.omega.total_cmp(&b.omega)));
    let dominant = sys.dominant()?;
    let rhp_count = count_rhp_zeros(&sys.zg(), &sys.zfarm()?, &rhp_contour(&sys.zg(), &sys.zfarm()?))?;
    out.time("analyze", t0.elapsed().as_secs_f64());
    let a = Analysis {
        dominant,
        frequency_hz: dominant.freq_hz(),
        damping_ratio: dominant.damping_ratio()?,
        stable: dominant.sigma < 0.0,
        rhp_count,
        band_hz: sys.band(),
        poles: poles.clone(),
    };
    println!("dominant pole {dominant} ({:.2} Hz), damping {:.4}, rhp zeros {rhp_count}", a.frequency_hz, a.damping_ratio);
    out.report("analyze.json", &a)?;
    out.csv(
        "poles.csv",
        "sigma,omega,freq_hz",
        poles.iter().map(|p| vec![p.sigma.to_string(), p.omega.to_string(), p.freq_hz().to_string()]),
    )?;
    Ok(Status::Ok)
}

#[derive(Serialize)]
struct Nominal {
    param: ParamId,
    value: f64,
    sensitivity: Option<f64>,
    error: Option<String>,
}

#[derive(Serialize)]
struct Sensitivities {
    delta_rel: f64,
    nominal_dp: Pole,
    nominal: Vec<Nominal>,
    sweeps: Vec<(ParamId, Vec<SweepPoint>)>,
}

fn sensitivities(sys: &System, delta: f64, points: usize, out: &mut Output) -> Result<Status> {
    if points < 2 {
        bail!("--points must be at least 2");
    }
    let t0 = Instant::now();
    let nominal: Vec<Nominal> = ParamId::MODEL
        .iter()
        .map(|&p| {
            let r = sensitivity(sys, p, delta);
            Nominal { param: p, value: p.get(sys), error: r.as_ref().err().map(|e| e.to_string()), sensitivity: r.ok() }
        })
        .collect();
    let grid: Vec<f64> = (0..points).map(|k| 0.5 + k as f64 / (points - 1) as f64).collect();
    let sweeps: Vec<(ParamId, Vec<SweepPoint>)> = ParamId::MODEL.iter().map(|&p| (p, sweep(sys, p, &grid, delta))).collect();
    out.time("sensitivity", t0.elapsed().as_secs_f64());
    for n in &nominal {
        println!("S_{:<4} {}", n.param.as_str(), n.sensitivity.map_or_else(|| n.error.clone().unwrap_or_default(), |s| format!("{s:+.4}")));
    }
    let report = Sensitivities { delta_rel: delta, nominal_dp: sys.dominant()?, nominal, sweeps };
    out.report("sensitivity.json", &report)?;
    let rows = report.sweeps.iter().flat_map(|(p, pts)| {
        pts.iter().map(move |s| vec![p.as_str().to_string(), s.x_pu.to_string(), num(s.re_dp), num(s.sensitivity)])
    });
    out.csv("sensitivity.csv", "param,x_pu,re_dp,sensitivity", rows)?;
    Ok(Status::Ok)
}

fn tune(sys: &System, out: &mut Output) -> Result<Status> {
    let r = tune_ksso(sys)?;
    out.time("tune", r.elapsed);
    println!(
        "k_sso {} (kp' {}), {} iterations, worst-condition DP {} -> {}{}",
        r.k_sso,
        r.kp_prime,
        r.iterations,
        r.dp_before,
        r.dp_after,
        if r.stabilizable { "" } else { ", NOT stabilizable within k_max" }
    );
    out.report("tune.json", &r)?;
    Ok(if r.stabilizable { Status::Ok } else { Status::NotStabilizable })
}

#[derive(Serialize)]
struct Simulation<'a> {
    scenario: &'a str,
    ssrdc: bool,
    verdict: Option<RunVerdict>,
    error: Option<String>,
}

fn simulate_one(cfg: &Config, builtin: Option<&str>, no_ssrdc: bool, out: &mut Output) -> Result<Status> {
    let mut sc = match builtin {
        None => cfg.scenario(),
        Some(name) => {
            let all = builtin_scenarios(&cfg.system(), cfg.scenario.dt);
            let names: Vec<&str> = all.iter().map(|b| b.name.as_str()).collect();
            let found = all.iter().find(|b| b.name == name);
            match found {
                Some(b) => b.scenario.clone(),
                None => bail!("unknown scenario `{name}`; built-ins: {}", names.join(", ")),
            }
        }
    };
    if no_ssrdc {
        sc.ssrdc_enabled = false;
    }
    let t0 = Instant::now();
    let res = simulate(&sc);
    out.time("simulate", t0.elapsed().as_secs_f64());
    match res {
        Ok(o) => {
            let v = judge(&sc, &o);
            o.write_csv(out.writer("timeseries.csv")?).context("writing timeseries.csv")?;
            println!("{}: {:?}, trip {:?}, activation {:?}", sc.name, v.outcome, v.relay_trip_time, v.ssrdc_activation_time);
            out.report("simulate.json", &Simulation { scenario: &sc.name, ssrdc: sc.ssrdc_enabled, verdict: Some(v), error: None })?;
            Ok(Status::Ok)
        }
        Err(e) => {
            eprintln!("scenario aborted: {e}");
            out.report(
                "simulate.json",
                &Simulation { scenario: &sc.name, ssrdc: sc.ssrdc_enabled, verdict: None, error: Some(e.to_string()) },
            )?;
            Ok(Status::Aborted)
        }
    }
}

fn outcome_str(o: &Outcome) -> String {
    match o {
        Outcome::Stable => "stable".into(),
        Outcome::Damped => "damped".into(),
        Outcome::Grew => "grew".into(),
        Outcome::Sustained => "sustained".into(),
        Outcome::Tripped => "tripped".into(),
        Outcome::Aborted(m) => format!("aborted: {}", m.replace(',', ";")),
    }
}

fn verdict_row(name: &str, v: &RunVerdict) -> Vec<String> {
    vec![
        name.to_string(),
        v.ssrdc.to_string(),
        outcome_str(&v.outcome),
        num(v.relay_trip_time),
        num(v.ssrdc_activation_time),
        num(v.settling),
        v.peak_oscillation.to_string(),
        num(v.super_peak.map(|p| p.freq)),
        num(v.super_peak.map(|p| p.amplitude)),
        num(v.sub_peak.map(|p| p.freq)),
        num(v.sub_peak.map(|p| p.amplitude)),
        num(v.mode.map(|m| m.re)),
        num(v.mode.map(|m| m.im)),
    ]
}

fn suite(cfg: &Config, out: &mut Output) -> Result<Status> {
    let t0 = Instant::now();
    let reports: Vec<ScenarioReport> = run_scenario_suite(&cfg.system(), cfg.scenario.dt);
    out.time("suite", t0.elapsed().as_secs_f64());
    for r in &reports {
        println!(
            "{:<10} without: {:<10} with: {:<10} {}",
            r.name,
            outcome_str(&r.without.outcome),
            outcome_str(&r.with.outcome),
            r.description
        );
    }
    out.report("suite.json", &reports)?;
    out.csv(
        "suite.csv",
        "scenario,ssrdc,outcome,trip_time,activation_time,settling,peak_mw,super_hz,super_a,sub_hz,sub_a,mode_re,mode_im",
        reports.iter().flat_map(|r| [verdict_row(&r.name, &r.without), verdict_row(&r.name, &r.with)]),
    )?;
    let aborted = reports.iter().any(|r| matches!(r.with.outcome, Outcome::Aborted(_)) || matches!(r.without.outcome, Outcome::Aborted(_)));
    Ok(if aborted { Status::Aborted } else { Status::Ok })
}

#[derive(Serialize)]
struct Bench {
    seed: u64,
    threshold: f64,
    t_e: f64,
    hop: f64,
    onset: f64,
    results: Vec<BenchResult>,
}

fn ssfe_bench(cfg: &Config, seed: u64, out: &mut Output) -> Result<Status> {
    let sc = cfg.scenario();
    let ssfe = sc.ssfe_config();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let onset = 0.3;
    let cases: Vec<(f64, f64, f64)> = [0.05, 0.1, 0.2]
        .iter()
        .flat_map(|&a| (55..=95).map(move |f| (f64::from(f), a)))
        .map(|(f, a)| (f, a, rng.gen_range(0.0..std::f64::consts::TAU)))
        .collect();
    let t0 = Instant::now();
    let results = cases
        .par_iter()
        .map(|&(f, a, ph)| bench_tone(&ssfe, f, a, ph, onset, 1.0, 0.6))
        .collect::<ssrdc_core::Result<Vec<_>>>()?;
    out.time("ssfe_bench", t0.elapsed().as_secs_f64());
    let worst_err = results.iter().filter_map(|r| r.error).fold(0.0f64, |m, e| m.max(e.abs()));
    let lat: Vec<f64> = results.iter().filter_map(|r| r.latency).collect();
    let missed = results.iter().filter(|r| r.latency.is_none()).count();
    println!(
        "{} tones: worst error {worst_err:.2e} Hz, latency {:.4}..{:.4} s, {missed} undetected",
        results.len(),
        lat.iter().copied().fold(f64::INFINITY, f64::min),
        lat.iter().copied().fold(0.0, f64::max)
    );
    out.csv(
        "ssfe_bench.csv",
        "fp,amplitude,latency,error,reset,false_alarm",
        results.iter().map(|r| {
            vec![r.fp.to_string(), r.amplitude.to_string(), num(r.latency), num(r.error), num(r.reset), r.false_alarm.to_string()]
        }),
    )?;
    out.report("ssfe_bench.json", &Bench { seed, threshold: ssfe.threshold, t_e: ssfe.t_e, hop: ssfe.hop, onset, results })?;
    Ok(Status::Ok)
}

#[derive(Serialize)]
struct Tables {
    rows: Vec<Row>,
    calibration: Option<Calibration>,
}

fn tables(sys: &System, refine: bool, out: &mut Output) -> Result<Status> {
    let t0 = Instant::now();
    let rows = reproduce_all(sys)?;
    out.time("tables", t0.elapsed().as_secs_f64());
    for r in &rows {
        out.time(format!("tune/{}/{}", r.sweep.as_str(), r.label), r.tune.elapsed);
    }
    let calibration = if refine {
        let t1 = Instant::now();
        let c = calibrate(sys, &CalibParams::of(sys), 2000)?;
        out.time("calibrate", t1.elapsed().as_secs_f64());
        println!("calibration cost {:.4} -> {:.4} after {} iterations: {:?}", c.start_cost, c.cost, c.iterations, c.params);
        Some(c)
    } else {
        None
    };
    for r in &rows {
        println!(
            "{:<14} {:<14} DP {} -> {}  k_sso {:.3}  retuned {}   (reference {} -> {}, {}, {})",
            r.sweep.as_str(),
            r.label,
            r.dp_before,
            r.dp_after,
            r.k_sso,
            r.dp_retuned,
            r.expected.dp_before,
            r.expected.dp_after,
            r.expected.k_sso,
            r.expected.dp_retuned
        );
    }
    out.csv(
        "tables.csv",
        "sweep,condition,dp_before_re,dp_before_im,dp_after_re,dp_after_im,k_sso,dp_retuned_re,dp_retuned_im,ref_before_re,ref_before_im,ref_after_re,ref_after_im,ref_k_sso,ref_retuned_re,ref_retuned_im",
        rows.iter().map(|r| {
            let e = &r.expected;
            [r.sweep.as_str().to_string(), r.label.clone()]
                .into_iter()
                .chain(
                    [
                        r.dp_before.sigma,
                        r.dp_before.omega,
                        r.dp_after.sigma,
                        r.dp_after.omega,
                        r.k_sso,
                        r.dp_retuned.sigma,
                        r.dp_retuned.omega,
                        e.dp_before.sigma,
                        e.dp_before.omega,
                        e.dp_after.sigma,
                        e.dp_after.omega,
                        e.k_sso,
                        e.dp_retuned.sigma,
                        e.dp_retuned.omega,
                    ]
                    .map(|v| v.to_string()),
                )
                .collect()
        }),
    )?;
    out.report("tables.json", &Tables { rows, calibration })?;
    Ok(Status::Ok)
}
