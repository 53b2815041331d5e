use super::analysis::{dominant_mode, envelope, settling_time, spectral_peak, Peak};
use super::scenario::{simulate, Event, EventKind, KssoSource, Scenario, SimOutput};
use crate::system::System;
use crate::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Envelope high-pass corner and averaging window for active power.
const ENV_CORNER: f64 = 5.0;
const ENV_WINDOW: f64 = 0.042;
/// Oscillation level, as a fraction of rated farm power, that counts.
const OSC_LEVEL: f64 = 0.01;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Stable,
    Damped,
    Grew,
    /// Still oscillating at the end without a growing fitted mode.
    Sustained,
    Tripped,
    Aborted(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunVerdict {
    pub ssrdc: bool,
    pub outcome: Outcome,
    pub relay_trip_time: Option<f64>,
    pub ssrdc_activation_time: Option<f64>,
    /// Time after the last event until the power oscillation stays below
    /// the oscillation level.
    pub settling: Option<f64>,
    /// Largest power oscillation amplitude after the last event, MW.
    pub peak_oscillation: f64,
    /// Strongest phase-current line above the fundamental.
    pub super_peak: Option<Peak>,
    /// Strongest phase-current line below the fundamental.
    pub sub_peak: Option<Peak>,
    /// Least-damped controller-frame mode in the closing window.
    pub mode: Option<Complex64>,
    pub k_sso_history: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub name: String,
    pub description: String,
    pub without: RunVerdict,
    pub with: RunVerdict,
}

/// Time of the last event, or zero.
pub fn last_event(sc: &Scenario) -> f64 {
    sc.events.last().map_or(0.0, |e| e.t)
}

/// Largest unit count over the run.
fn max_units(sc: &Scenario) -> f64 {
    sc.events
        .iter()
        .filter_map(|e| match e.kind {
            EventKind::UnitCount { n } => Some(f64::from(n)),
            _ => None,
        })
        .fold(f64::from(sc.system.op.n), f64::max)
}

/// Oscillation level used for verdicts, MW.
pub fn oscillation_level(sc: &Scenario) -> f64 {
    let rated = sc.system.plant.rated_power(sc.system.op.v1) / 1e6;
    OSC_LEVEL * rated * max_units(sc)
}

/// Classifies a finished run.
pub fn judge(sc: &Scenario, out: &SimOutput) -> RunVerdict {
    let fs = out.sample_rate();
    let te = last_event(sc);
    let f1 = sc.system.plant.f1;
    let env = envelope(&out.p, fs, ENV_CORNER, ENV_WINDOW);
    let level = oscillation_level(sc);
    // skip the power-step transient of the high-pass itself
    let from = te + 0.05;
    let start = out.t.partition_point(|&t| t < from);
    let stop = out.relay_trip_time.map_or(out.len(), |tt| out.t.partition_point(|&t| t < tt));
    let peak = env[start.min(stop)..stop].iter().fold(0.0f64, |m, &v| m.max(v));
    let settling = settling_time(&out.t[..stop], &env[..stop], te, level);

    let tail_len = ((0.5 * fs) as usize).min(stop.saturating_sub(start));
    let tail = stop - tail_len;
    let mode = dominant_mode(&out.id[tail..stop], fs, 4, (2.0, 48.0));
    let spec_from = out.t.partition_point(|&t| t < te + 0.1).min(stop);
    let ia = &out.ia[spec_from..stop];
    let super_peak = spectral_peak(ia, fs, f1, (f1 + 2.0, 2.0 * f1 - 2.0), 0.25);
    let sub_peak = spectral_peak(ia, fs, f1, (2.0, f1 - 2.0), 0.25);

    let end_env = env.get(stop.saturating_sub(1)).copied().unwrap_or(0.0);
    let outcome = if out.relay_trip_time.is_some() {
        Outcome::Tripped
    } else if end_env > level && mode.is_some_and(|m| m.re > 0.0) {
        Outcome::Grew
    } else if end_env > level {
        Outcome::Sustained
    } else if peak > level {
        Outcome::Damped
    } else {
        Outcome::Stable
    };
    RunVerdict {
        ssrdc: sc.ssrdc_enabled,
        outcome,
        relay_trip_time: out.relay_trip_time,
        ssrdc_activation_time: out.ssrdc_activation_time,
        settling,
        peak_oscillation: peak,
        super_peak,
        sub_peak,
        mode,
        k_sso_history: out.k_sso_history.clone(),
    }
}

fn run(sc: &Scenario) -> RunVerdict {
    match simulate(sc) {
        Ok(out) => judge(sc, &out),
        Err(e) => RunVerdict {
            ssrdc: sc.ssrdc_enabled,
            outcome: Outcome::Aborted(e.to_string()),
            relay_trip_time: None,
            ssrdc_activation_time: None,
            settling: None,
            peak_oscillation: f64::NAN,
            super_peak: None,
            sub_peak: None,
            mode: None,
            k_sso_history: Vec::new(),
        },
    }
}

/// A named built-in experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct Builtin {
    pub name: String,
    pub description: String,
    pub scenario: Scenario,
}

fn builtin(name: &str, description: String, base: &Scenario, edit: impl FnOnce(&mut Scenario)) -> Builtin {
    let mut scenario = Scenario { name: name.to_string(), ..base.clone() };
    edit(&mut scenario);
    Builtin { name: name.to_string(), description, scenario }
}

/// Scenarios 1 to 6 on top of `system` (plant, grid and controller settings).
pub fn builtin_scenarios(system: &System, dt: f64) -> Vec<Builtin> {
    let base = Scenario { system: system.clone(), dt, t_end: 2.5, ..Default::default() };
    let rated_i1 = system.plant.imax;
    let mut v = Vec::new();
    v.push(builtin("s1", "power step 1.5 -> 2.0 MW per unit at 0.2 s".into(), &base, |s| {
        s.k_sso_source = KssoSource::Pretuned;
        s.events = vec![Event { t: 0.2, kind: EventKind::PowerStep { mw: 2.0 } }];
    }));
    for n in [4, 8, 9] {
        v.push(builtin(&format!("s2_n{n}"), format!("units 6 -> {n} at 1 s"), &base, |s| {
            s.events = vec![Event { t: 1.0, kind: EventKind::UnitCount { n } }];
        }));
    }
    for k in [1.3, 1.35, 1.4] {
        v.push(builtin(&format!("s3_z{k}"), format!("line ZL -> {k} ZL at 1 s"), &base, |s| {
            s.events = vec![Event { t: 1.0, kind: EventKind::GridScale { factor: k } }];
        }));
    }
    for n in [7, 8, 9] {
        v.push(builtin(&format!("s4_n{n}"), format!("units 1 -> {n} at rated current at 1 s"), &base, |s| {
            s.system.op.n = 1;
            s.system.op.i1 = rated_i1;
            s.events = vec![Event { t: 1.0, kind: EventKind::UnitCount { n } }];
        }));
    }
    for k in [1.3, 1.35, 1.4] {
        v.push(builtin(&format!("s5_z{k}"), format!("line 0.3 ZL -> {k} ZL at rated current at 1 s"), &base, |s| {
            s.system.op.i1 = rated_i1;
            s.grid_scale = 0.3;
            s.events = vec![Event { t: 1.0, kind: EventKind::GridScale { factor: k } }];
        }));
    }
    v.push(builtin("s6", "three-phase fault 1.5 s to 1.55 s".into(), &base, |s| {
        s.events = vec![Event { t: 1.5, kind: EventKind::Fault { duration: 0.05 } }];
    }));
    v
}

/// Runs one scenario with and without the damping controller.
pub fn run_pair(b: &Builtin) -> ScenarioReport {
    let with = Scenario { ssrdc_enabled: true, ..b.scenario.clone() };
    let without = Scenario { ssrdc_enabled: false, ..b.scenario.clone() };
    let (w, wo) = rayon::join(|| run(&with), || run(&without));
    ScenarioReport { name: b.name.clone(), description: b.description.clone(), without: wo, with: w }
}

/// All built-in scenarios, concurrently; order follows [`builtin_scenarios`].
pub fn run_scenario_suite(system: &System, dt: f64) -> Vec<ScenarioReport> {
    builtin_scenarios(system, dt).par_iter().map(run_pair).collect()
}
