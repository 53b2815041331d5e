//! Grid search for the damping gain at the worst operating condition.

use crate::error::{invalid, Result};
use crate::impedance::ksso_from_kp;
use crate::params::{worst_condition, GridParams};
use crate::stability::{damping_ratio, Pole};
use crate::system::System;
use serde::{Deserialize, Serialize};
use std::time::Instant;

/// Relative change of `|Zg(j2πf1)|` that triggers a retune.
pub const RETUNE_DEADBAND: f64 = 0.01;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TuneReport {
    pub k_sso: f64,
    pub kp_prime: f64,
    pub iterations: u32,
    /// Dominant pole at the worst condition without damping.
    pub dp_before: Pole,
    /// Dominant pole at the worst condition with `kp_prime`.
    pub dp_after: Pole,
    /// Wall-clock tuning time, s. Not serialized, so reports stay reproducible.
    #[serde(skip)]
    pub elapsed: f64,
    pub stabilizable: bool,
}

impl TuneReport {
    /// Equality ignoring `elapsed`.
    pub fn same_result(&self, other: &Self) -> bool {
        Self { elapsed: 0.0, ..self.clone() } == Self { elapsed: 0.0, ..other.clone() }
    }
}

/// Largest step index allowed by `k_max`.
pub fn max_iterations(sys: &System) -> u32 {
    let n = (sys.ssrdc.k_max - sys.plant.kp) / sys.ssrdc.epsilon;
    // guard against 0.31/0.01 = 30.999...
    (n + 1e-9).floor().max(0.0) as u32
}

/// Smallest `kp' = kp + i·ε` whose dominant pole at the worst condition has
/// damping ratio above `mu_min`.
pub fn tune_ksso(sys: &System) -> Result<TuneReport> {
    let start = Instant::now();
    let cfg = &sys.ssrdc;
    if !(cfg.epsilon > 0.0) {
        return Err(invalid("epsilon must be positive"));
    }
    let mut worst = sys.with_ksso(0.0);
    worst.op = worst_condition(&sys.op, &sys.plant);
    let kp = sys.plant.kp;
    let n_max = max_iterations(sys);

    let dp_before = worst.dominant()?;
    let mut i = 0;
    let mut dp = dp_before;
    let mut kp_prime = kp;
    loop {
        if damping_ratio(&dp)? > cfg.mu_min {
            break;
        }
        if i == n_max {
            return Ok(TuneReport {
                k_sso: ksso_from_kp(kp, kp_prime, cfg),
                kp_prime,
                iterations: i,
                dp_before,
                dp_after: dp,
                elapsed: start.elapsed().as_secs_f64(),
                stabilizable: false,
            });
        }
        i += 1;
        kp_prime = kp + f64::from(i) * cfg.epsilon;
        dp = worst.with_kp(kp_prime).dominant()?;
    }
    Ok(TuneReport {
        k_sso: ksso_from_kp(kp, kp_prime, cfg),
        kp_prime,
        iterations: i,
        dp_before,
        dp_after: dp,
        elapsed: start.elapsed().as_secs_f64(),
        stabilizable: true,
    })
}

/// Farm-side and grid-side state that decides whether a retune is needed.
#[derive(Clone, Debug, PartialEq)]
pub struct RetuneState {
    pub n: u32,
    pub grid: GridParams,
}

impl RetuneState {
    pub fn of(sys: &System) -> Self {
        Self { n: sys.op.n, grid: sys.grid.clone() }
    }
}

/// True when the unit count changed or the grid impedance at the
/// fundamental moved by more than the deadband.
pub fn retune_trigger(prev: &RetuneState, next: &RetuneState) -> bool {
    if prev.n != next.n {
        return true;
    }
    let mag = |g: &GridParams| g.rl.hypot(g.xl) * crate::params::z_base(g);
    let (a, b) = (mag(&prev.grid), mag(&next.grid));
    (b - a).abs() > RETUNE_DEADBAND * a
}
