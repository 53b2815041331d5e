use super::model::{Converter, Inputs, Plant, State, C};
use super::relay::{Relay, RelayConfig};
use super::ssrdc::SsrdcRuntime;
use crate::error::{invalid, Error, Result};
use crate::ssfe::{SsfeConfig, SsfeState};
use crate::system::System;
use crate::tuner::{retune_trigger, tune_ksso, RetuneState};
use serde::{Deserialize, Serialize};
use std::io::Write;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    /// New active-power setpoint per unit, MW.
    PowerStep { mw: f64 },
    UnitCount { n: u32 },
    /// Line impedance as a multiple of the nominal line.
    GridScale { factor: f64 },
    /// Three-phase fault modeled as a source voltage dip.
    Fault { duration: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Event {
    pub t: f64,
    pub kind: EventKind,
}

/// Where the damping gain comes from.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KssoSource {
    /// `ssrdc.k_sso` as configured.
    Fixed,
    /// Tuned once for the initial condition.
    Pretuned,
    /// Pretuned, then retuned after unit-count or grid changes.
    #[default]
    Online,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    /// Plant, operating point, grid and controller at `t = 0`. The grid is
    /// the nominal line; `grid_scale` applies on top. Configured through the
    /// other sections of a [`Config`](crate::config::Config).
    #[serde(skip)]
    pub system: System,
    pub grid_scale: f64,
    pub ssrdc_enabled: bool,
    pub k_sso_source: KssoSource,
    pub events: Vec<Event>,
    pub t_end: f64,
    pub dt: f64,
    /// Output decimation factor.
    pub decimation: usize,
    pub relay: RelayConfig,
    /// Estimator settings; `t_e` is taken from `system.ssrdc`.
    pub ssfe: SsfeConfig,
    /// Residual source voltage during a fault, fraction of nominal.
    pub fault_residual: f64,
    /// The PLL freezes while the terminal voltage is below this fraction
    /// of nominal; zero disables.
    pub pll_freeze: f64,
    /// Delay between a retune trigger and the new gain taking effect, s.
    pub retune_latency: f64,
    /// Converter shorted and sources removed (energy check).
    pub passive: bool,
    /// Initial PLL angle offset, rad; seeds a small-signal transient.
    pub theta0: f64,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            name: String::from("custom"),
            system: System::default(),
            grid_scale: 1.0,
            ssrdc_enabled: true,
            k_sso_source: KssoSource::Online,
            events: Vec::new(),
            t_end: 2.0,
            dt: 20e-6,
            decimation: 10,
            relay: RelayConfig::default(),
            ssfe: SsfeConfig::default(),
            fault_residual: 0.2,
            pll_freeze: 0.4,
            retune_latency: 0.04,
            passive: false,
            theta0: 0.0,
        }
    }
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.system.validate()?;
        if !(self.dt > 0.0 && self.dt <= 50e-6) {
            return Err(invalid(format!("dt must lie in (0, 50 µs], got {}", self.dt)));
        }
        if !(self.t_end > 0.0 && self.t_end <= 30.0) {
            return Err(invalid(format!("t_end must lie in (0, 30 s], got {}", self.t_end)));
        }
        if self.decimation == 0 {
            return Err(invalid("decimation must be at least 1"));
        }
        if !(self.grid_scale > 0.0) {
            return Err(invalid("grid_scale must be positive"));
        }
        if self.events.windows(2).any(|w| w[1].t < w[0].t) {
            return Err(invalid("events must be time-ordered"));
        }
        for e in &self.events {
            match e.kind {
                EventKind::UnitCount { n: 0 } => return Err(invalid("unit count must be positive")),
                EventKind::GridScale { factor } if !(factor > 0.0) => return Err(invalid("grid factor must be positive")),
                EventKind::Fault { duration } if !(duration > 0.0) => return Err(invalid("fault duration must be positive")),
                _ => {}
            }
        }
        self.ssfe_config().validate()
    }

    pub fn ssfe_config(&self) -> SsfeConfig {
        SsfeConfig {
            t_e: self.system.ssrdc.t_e,
            f1: self.system.plant.f1,
            sample_rate: 1.0 / (self.dt * self.decimation as f64),
            ..self.ssfe.clone()
        }
    }

    /// The analysis case at the start of the run.
    pub fn initial_system(&self) -> System {
        self.system.with_grid_scale(self.grid_scale)
    }

    /// Initial per-unit power, MW.
    pub fn initial_power(&self) -> f64 {
        1.5 * self.system.op.v1 * self.system.op.i1 / 1e6
    }
}

/// Recorded series and run flags.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SimOutput {
    pub t: Vec<f64>,
    pub ia: Vec<f64>,
    pub ib: Vec<f64>,
    pub ic: Vec<f64>,
    pub id: Vec<f64>,
    pub iq: Vec<f64>,
    pub vd: Vec<f64>,
    pub vq: Vec<f64>,
    /// Farm active power, MW.
    pub p: Vec<f64>,
    pub f_pll: Vec<f64>,
    pub ssrdc_out: Vec<f64>,
    pub fp_est: Vec<Option<f64>>,
    pub relay_trip_time: Option<f64>,
    pub ssrdc_activation_time: Option<f64>,
    /// `(t, k_sso)` each time the gain took effect.
    pub k_sso_history: Vec<(f64, f64)>,
}

pub const CSV_HEADER: &str = "t,ia,ib,ic,id,iq,vd,vq,P,f_pll,ssrdc_out,fp_est";

impl SimOutput {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn sample_rate(&self) -> f64 {
        if self.t.len() < 2 {
            return 0.0;
        }
        (self.t.len() - 1) as f64 / (self.t[self.t.len() - 1] - self.t[0])
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{CSV_HEADER}")?;
        for k in 0..self.t.len() {
            let fp = self.fp_est[k].map(|f| format!("{f:.6}")).unwrap_or_default();
            writeln!(
                w,
                "{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.9},{}",
                self.t[k],
                self.ia[k],
                self.ib[k],
                self.ic[k],
                self.id[k],
                self.iq[k],
                self.vd[k],
                self.vq[k],
                self.p[k],
                self.f_pll[k],
                self.ssrdc_out[k],
                fp
            )?;
        }
        Ok(())
    }

    fn record(&mut self, t: f64, x: &State, s: &super::model::Signals, n: f64, out: f64, fp: Option<f64>) {
        let i = x.i;
        let a = C::from_polar(1.0, -std::f64::consts::TAU / 3.0);
        self.t.push(t);
        self.ia.push(i.re);
        self.ib.push((i * a).re);
        self.ic.push((i * a.conj()).re);
        self.id.push(s.ic.re);
        self.iq.push(s.ic.im);
        self.vd.push(s.vtc.re);
        self.vq.push(s.vtc.im);
        self.p.push(1.5 * n * (s.vt * i.conj()).re / 1e6);
        self.f_pll.push(s.omega / std::f64::consts::TAU);
        self.ssrdc_out.push(out);
        self.fp_est.push(fp);
    }
}

struct Pending {
    at: f64,
    k: f64,
}

/// Fixed-step integration of one scenario.
pub fn simulate(sc: &Scenario) -> Result<SimOutput> {
    sc.validate()?;
    let nominal_grid = sc.system.grid.clone();
    let mut sys = sc.initial_system();
    let f1 = sys.plant.f1;
    let v1 = sys.op.v1;
    let omega1 = sys.plant.omega1();
    let imax = sys.plant.imax;
    let mut plant = Plant::from_system(&sys);

    let p0 = sc.initial_power();
    let mut iref = C::new(2.0 / 3.0 * p0 * 1e6 / v1, 0.0);
    let (mut x, ug0) = plant.equilibrium(v1, iref);
    let mut ug_mag = ug0;
    let mode = if sc.passive { Converter::Passive } else { Converter::Active };
    if sc.passive {
        ug_mag = C::new(0.0, 0.0);
        iref = C::new(0.0, 0.0);
    }
    x.theta += sc.theta0;

    let mut out = SimOutput::default();
    let mut ssfe = SsfeState::new(sc.ssfe_config())?;
    let mut ssrdc = SsrdcRuntime::new(&sys.ssrdc, f1, sc.dt);
    let k0 = match (sc.ssrdc_enabled, sc.k_sso_source) {
        (false, _) => 0.0,
        (true, KssoSource::Fixed) => sys.ssrdc.k_sso,
        (true, _) => tune_ksso(&sys)?.k_sso,
    };
    ssrdc.set_k_sso(k0);
    out.k_sso_history.push((0.0, k0));
    let mut relay = Relay::new(&sc.relay, imax, sc.dt * sc.decimation as f64);
    let mut pending: Option<Pending> = None;
    let mut fault_until = f64::NEG_INFINITY;
    let mut next_event = 0;
    let mut blocked = false;
    let mut fp_est = None;
    let mut aux = 0.0;

    let steps = (sc.t_end / sc.dt).round() as usize;
    for k in 0..=steps {
        let t = k as f64 * sc.dt;
        while next_event < sc.events.len() && sc.events[next_event].t <= t + 0.5 * sc.dt {
            let ev = sc.events[next_event];
            next_event += 1;
            let before = RetuneState::of(&sys);
            match ev.kind {
                EventKind::PowerStep { mw } => {
                    if !sc.passive {
                        iref = C::new(2.0 / 3.0 * mw * 1e6 / v1, 0.0);
                    }
                    sys.op.i1 = iref.re;
                }
                EventKind::UnitCount { n } => {
                    sys.op.n = n;
                    sys.units = None;
                }
                EventKind::GridScale { factor } => sys.grid = nominal_grid.scaled(factor),
                EventKind::Fault { duration } => fault_until = ev.t + duration,
            }
            plant = Plant::from_system(&sys);
            if sc.ssrdc_enabled && sc.k_sso_source == KssoSource::Online && retune_trigger(&before, &RetuneState::of(&sys)) {
                pending = Some(Pending { at: ev.t + sc.retune_latency, k: tune_ksso(&sys)?.k_sso });
            }
        }
        if let Some(p) = pending.as_ref().filter(|p| t + 0.5 * sc.dt >= p.at) {
            ssrdc.set_k_sso(p.k);
            out.k_sso_history.push((t, p.k));
            pending = None;
        }

        let dip = if t < fault_until { sc.fault_residual } else { 1.0 };
        let ug = |tt: f64| ug_mag * C::from_polar(if tt < fault_until { sc.fault_residual } else { 1.0 }, omega1 * tt);
        let mut u = Inputs { iref, aux, mode: if blocked { Converter::Blocked } else { mode }, pll_hold: false };
        let now = ug_mag * C::from_polar(dip, omega1 * t);
        u.pll_hold = plant.signals(&x, now, &u).vt.norm() < sc.pll_freeze * v1;
        let s = plant.signals(&x, now, &u);

        if k % sc.decimation == 0 {
            out.record(t, &x, &s, plant.n, aux, fp_est);
            if sc.ssrdc_enabled {
                fp_est = ssfe.push_one(x.i.re);
            }
            // the relay watches the phase currents, seen here from a nominal-frequency frame
            if !blocked && relay.step(x.i * C::from_polar(1.0, -omega1 * t), t) {
                blocked = true;
                x.i = C::new(0.0, 0.0);
            }
        }
        if k == steps {
            break;
        }
        if x.i.norm() > 1e3 * imax || !x.i.re.is_finite() || !x.theta.is_finite() {
            return Err(Error::BlowUp { t, magnitude: x.i.norm() / imax });
        }
        aux = if sc.ssrdc_enabled && !blocked { ssrdc.step(s.vtc.im, fp_est) } else { 0.0 };
        if aux != 0.0 && out.ssrdc_activation_time.is_none() {
            out.ssrdc_activation_time = Some(t);
        }
        let u = Inputs { aux, ..u };
        x = plant.rk4(&x, t, sc.dt, &u, ug);
    }
    out.relay_trip_time = relay.trip_time();
    Ok(out)
}
