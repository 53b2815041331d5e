use serde::{Deserialize, Serialize};
use std::collections::VecDeque;
use std::f64::consts::TAU;

/// Oscillation relay settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RelayConfig {
    /// Trip level as a fraction of the maximum unit current.
    pub threshold: f64,
    /// Time the level must be exceeded without interruption, s.
    pub persistence: f64,
    /// High-pass corner applied to the current in a nominal-frequency frame, Hz.
    pub corner: f64,
    /// RMS averaging window, s.
    pub window: f64,
    pub enabled: bool,
}

impl Default for RelayConfig {
    fn default() -> Self {
        Self { threshold: 0.5, persistence: 0.5, corner: 5.0, window: 0.04, enabled: true }
    }
}

/// Trips when the high-passed current amplitude stays above the threshold.
#[derive(Clone, Debug)]
pub struct Relay {
    level: f64,
    persist: usize,
    alpha: f64,
    prev_in: num_complex::Complex64,
    prev_out: num_complex::Complex64,
    ring: VecDeque<f64>,
    len: usize,
    sum: f64,
    above: usize,
    primed: bool,
    trip: Option<f64>,
    enabled: bool,
}

impl Relay {
    /// `imax` in A, `dt` the sampling interval.
    pub fn new(cfg: &RelayConfig, imax: f64, dt: f64) -> Self {
        let rc = 1.0 / (TAU * cfg.corner);
        let len = (cfg.window / dt).round().max(1.0) as usize;
        Self {
            level: cfg.threshold * imax,
            persist: (cfg.persistence / dt).round() as usize,
            alpha: rc / (rc + dt),
            prev_in: Default::default(),
            prev_out: Default::default(),
            ring: VecDeque::with_capacity(len),
            len,
            sum: 0.0,
            above: 0,
            primed: false,
            trip: None,
            enabled: cfg.enabled,
        }
    }

    pub fn trip_time(&self) -> Option<f64> {
        self.trip
    }

    /// Current oscillation amplitude estimate, A.
    pub fn amplitude(&self) -> f64 {
        if self.ring.is_empty() {
            0.0
        } else {
            (self.sum.max(0.0) / self.ring.len() as f64).sqrt()
        }
    }

    /// Feeds one current sample (nominal-frequency frame) at time `t`; returns true
    /// on the sample that trips.
    pub fn step(&mut self, ic: num_complex::Complex64, t: f64) -> bool {
        if !self.primed {
            self.prev_in = ic;
            self.primed = true;
        }
        let y = self.alpha * (self.prev_out + ic - self.prev_in);
        self.prev_in = ic;
        self.prev_out = y;
        if self.ring.len() == self.len {
            self.sum -= self.ring.pop_front().unwrap_or(0.0);
        }
        self.ring.push_back(y.norm_sqr());
        self.sum += y.norm_sqr();
        if self.trip.is_some() || !self.enabled {
            return false;
        }
        if self.amplitude() > self.level {
            self.above += 1;
            if self.above >= self.persist {
                self.trip = Some(t);
                return true;
            }
        } else {
            self.above = 0;
        }
        false
    }
}
