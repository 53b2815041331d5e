//! A complete analysis case: plant, operating point, grid and controller.

use crate::error::Result;
use crate::impedance::{farm_impedance_scaled, grid_impedance, ModelOptions, PllMode, SsrdcActive, SsrdcConfig};
use crate::params::{GridParams, OperatingPoint, PlantParams};
use crate::stability::{closed_loop_poles, dominant_pole, Pole};
use crate::Rational;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct System {
    pub plant: PlantParams,
    pub op: OperatingPoint,
    pub grid: GridParams,
    pub ssrdc: SsrdcConfig,
    pub model: ModelOptions,
    /// Continuous override of the unit count, used by sensitivity analysis.
    #[serde(skip)]
    pub units: Option<f64>,
}

impl System {
    pub fn new(plant: PlantParams, op: OperatingPoint, grid: GridParams) -> Self {
        Self { plant, op, grid, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        self.plant.validate()?;
        self.op.validate()?;
        self.grid.validate()?;
        self.ssrdc.validate(self.plant.f1)
    }

    pub fn units(&self) -> f64 {
        self.units.unwrap_or(f64::from(self.op.n))
    }

    pub fn with_kp(&self, kp: f64) -> Self {
        let mut s = self.clone();
        s.plant.kp = kp;
        s
    }

    pub fn with_n(&self, n: u32) -> Self {
        let mut s = self.clone();
        s.op.n = n;
        s.units = None;
        s
    }

    pub fn with_grid_scale(&self, factor: f64) -> Self {
        let mut s = self.clone();
        s.grid = s.grid.scaled(factor);
        s
    }

    pub fn with_i1(&self, i1: f64) -> Self {
        let mut s = self.clone();
        s.op.i1 = i1;
        s
    }

    pub fn with_ksso(&self, k_sso: f64) -> Self {
        let mut s = self.clone();
        s.ssrdc.k_sso = k_sso;
        s
    }

    /// Band as a `(lo, hi)` pair in hertz.
    pub fn band(&self) -> (f64, f64) {
        self.ssrdc.band
    }

    pub fn zg(&self) -> Rational {
        grid_impedance(&self.grid, self.plant.f1)
    }

    /// The active damping branch, if `k_sso > 0`.
    pub fn active_ssrdc(&self) -> Result<Option<SsrdcActive>> {
        if self.ssrdc.k_sso == 0.0 {
            return Ok(None);
        }
        let omega_sso = match (self.model.pll_mode, self.model.omega_sso) {
            (PllMode::EquivalentGain, _) => 0.0,
            (PllMode::FullBranch, Some(w)) => w,
            (PllMode::FullBranch, None) => {
                let base = self.with_ksso(0.0).dominant()?;
                base.omega - self.plant.omega1()
            }
        };
        Ok(Some(SsrdcActive { cfg: self.ssrdc.clone(), mode: self.model.pll_mode, omega_sso }))
    }

    pub fn zfarm(&self) -> Result<Rational> {
        let active = self.active_ssrdc()?;
        farm_impedance_scaled(&self.plant, &self.op, &self.grid, active.as_ref(), &self.model, self.units())
    }

    pub fn poles(&self) -> Result<Vec<Pole>> {
        closed_loop_poles(&self.zg(), &self.zfarm()?)
    }

    pub fn dominant(&self) -> Result<Pole> {
        dominant_pole(&self.poles()?, self.band())
    }
}
