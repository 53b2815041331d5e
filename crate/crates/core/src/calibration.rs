//! One-time fit of the unpublished converter constants to the reference
//! condition sweeps.
//!
//! The free parameters are `K = km·Vdc`, the decoupling and feedforward
//! gains expressed relative to their ideal values, and the bus voltage `V1`.
//! `Vdc` stays at its configured value, so `km` absorbs the gain.

use crate::error::{Error, Result};
use crate::stability::Pole;
use crate::system::System;
use crate::tables::cases;
use crate::tuner::tune_ksso;
use argmin::core::{CostFunction, Executor, State};
use argmin::solver::neldermead::NelderMead;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Scale of a dominant-pole miss, 1/s, in the objective.
const SCALE: f64 = 5.0;
/// Cost of one reference point that could not be evaluated.
const MISSING: f64 = 2.0 * 100.0 * 100.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibParams {
    /// `km·Vdc`.
    pub k: f64,
    /// `kd·K/(ω1·L1)`; 1 is ideal cross-coupling cancellation.
    pub kd_ratio: f64,
    /// `kf·K`; 1 is full voltage feedforward.
    pub kf_ratio: f64,
    pub v1: f64,
}

impl CalibParams {
    pub fn of(sys: &System) -> Self {
        let p = &sys.plant;
        let k = p.k();
        Self { k, kd_ratio: p.kd * k / (p.omega1() * p.l1), kf_ratio: p.kf * k, v1: sys.op.v1 }
    }

    pub fn apply(&self, sys: &System) -> System {
        let mut s = sys.clone();
        let w1l1 = s.plant.omega1() * s.plant.l1;
        s.plant.km = self.k / s.plant.vdc;
        s.plant.kd = self.kd_ratio * w1l1 / self.k;
        s.plant.kf = self.kf_ratio / self.k;
        s.op.v1 = self.v1;
        s
    }

    fn to_vec(self) -> Vec<f64> {
        vec![self.k, self.kd_ratio, self.kf_ratio, self.v1]
    }

    fn from_slice(v: &[f64]) -> Self {
        Self { k: v[0], kd_ratio: v[1], kf_ratio: v[2], v1: v[3] }
    }
}

/// A published value and the case that produced it.
#[derive(Clone, Debug, PartialEq)]
pub enum Target {
    /// Dominant pole of the system.
    Pole { system: System, dp: Pole },
    /// Gain chosen by the tuner for the system.
    Gain { system: System, k_sso: f64 },
}

/// Every published pole and gain of the reference sweeps. Retuned poles of
/// rows whose published gain is zero are left out: they repeat the starting
/// pole rather than describe the changed condition.
pub fn targets(base: &System) -> Vec<Target> {
    let mut out = Vec::new();
    for c in cases(base) {
        out.push(Target::Pole { system: c.before.clone(), dp: c.expected.dp_before });
        out.push(Target::Pole { system: c.after.clone(), dp: c.expected.dp_after });
        out.push(Target::Gain { system: c.after.clone(), k_sso: c.expected.k_sso });
        if c.expected.k_sso > 0.0 {
            out.push(Target::Pole { system: c.after.with_ksso(c.expected.k_sso), dp: c.expected.dp_retuned });
        }
    }
    out
}

fn miss(t: &Target, p: &CalibParams) -> f64 {
    match t {
        Target::Pole { system, dp } => match p.apply(system).dominant() {
            Ok(d) => ((d.sigma - dp.sigma) / SCALE).powi(2) + ((d.omega - dp.omega) / SCALE).powi(2),
            Err(_) => MISSING,
        },
        Target::Gain { system, k_sso } => match tune_ksso(&p.apply(system)) {
            Ok(r) => ((r.k_sso - k_sso) / system.ssrdc.epsilon).powi(2),
            Err(_) => MISSING,
        },
    }
}

/// Scaled squared misses summed over `targets`, with the constants replaced
/// by `p`. A pole counts in units of 5 1/s, a gain in tuner steps.
pub fn objective(targets: &[Target], p: &CalibParams) -> f64 {
    if !(p.k > 0.0 && p.v1 > 0.0) {
        return f64::INFINITY;
    }
    // summed in a fixed order so the result does not depend on scheduling
    let misses: Vec<f64> = targets.par_iter().map(|t| miss(t, p)).collect();
    misses.iter().sum()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub params: CalibParams,
    pub cost: f64,
    pub start_cost: f64,
    pub iterations: u64,
}

struct Problem<'a>(&'a [Target]);

impl CostFunction for Problem<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, x: &Self::Param) -> std::result::Result<f64, argmin::core::Error> {
        Ok(objective(self.0, &CalibParams::from_slice(x)))
    }
}

/// Nelder–Mead from `start` over the targets of `base`.
pub fn calibrate(base: &System, start: &CalibParams, max_iters: u64) -> Result<Calibration> {
    let t = targets(base);
    let x0 = start.to_vec();
    let steps = [0.05 * start.k, 0.1, 0.02, 10.0];
    let mut simplex = vec![x0.clone()];
    for (i, h) in steps.iter().enumerate() {
        let mut v = x0.clone();
        v[i] += h;
        simplex.push(v);
    }
    let solver = NelderMead::new(simplex)
        .with_sd_tolerance(1e-8)
        .map_err(|e| Error::Invalid(e.to_string()))?;
    let res = Executor::new(Problem(&t), solver)
        .configure(|s| s.max_iters(max_iters))
        .run()
        .map_err(|e| Error::Invalid(e.to_string()))?;
    let state = res.state();
    let best = state.get_best_param().cloned().unwrap_or(x0);
    Ok(Calibration {
        params: CalibParams::from_slice(&best),
        cost: state.get_best_cost(),
        start_cost: objective(&t, start),
        iterations: state.get_iter(),
    })
}
