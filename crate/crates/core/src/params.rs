//! Plant, grid and operating-point parameters with per-unit bookkeeping.

use crate::error::{invalid, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// Grid-side converter control and filter parameters of one turbine.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlantParams {
    /// PLL proportional gain.
    pub kp: f64,
    /// PLL integral gain.
    pub ki: f64,
    /// Inner current loop proportional gain.
    pub kip: f64,
    /// Inner current loop integral gain.
    pub kii: f64,
    /// Converter filter inductance, H.
    pub l1: f64,
    /// Modulator gain.
    pub km: f64,
    /// DC bus reference voltage, V.
    pub vdc: f64,
    /// Cross-coupling decoupling coefficient.
    pub kd: f64,
    /// Voltage feedforward coefficient.
    pub kf: f64,
    /// Fundamental frequency, Hz.
    pub f1: f64,
    /// Maximum output current of one unit, A (peak of the dq vector).
    pub imax: f64,
}

/// Modulator gain of the calibrated preset (with `vdc` = 1100 V).
pub const CALIBRATED_KM: f64 = 7.877214570660509e-05;
/// Decoupling coefficient of the calibrated preset.
pub const CALIBRATED_KD: f64 = 0.328506246959351;
/// Feedforward coefficient of the calibrated preset.
pub const CALIBRATED_KF: f64 = 11.096567370619812;
/// Bus voltage magnitude of the calibrated preset, V.
pub const CALIBRATED_V1: f64 = 592.4942380068694;

/// Names of the fields that are calibration parameters rather than
/// published values.
pub const CALIBRATION_FIELDS: [&str; 5] = ["km", "vdc", "kd", "kf", "v1"];

impl Default for PlantParams {
    fn default() -> Self {
        Self {
            kp: 0.09,
            ki: 32.0,
            kip: 0.25,
            kii: 120.0,
            l1: 75e-6,
            km: CALIBRATED_KM,
            vdc: 1100.0,
            kd: CALIBRATED_KD,
            kf: CALIBRATED_KF,
            f1: 50.0,
            imax: 2200.0,
        }
    }
}

impl PlantParams {
    /// Uncalibrated design-practice values: unity modulator gain, full
    /// voltage feedforward and ideal cross-coupling cancellation.
    pub fn textbook() -> Self {
        let base = Self::default();
        let k = 1100.0;
        Self { km: 1.0, vdc: k, kf: 1.0 / k, kd: TAU * base.f1 * base.l1 / k, ..base }
    }

    /// Converter voltage gain `km·Vdc`.
    pub fn k(&self) -> f64 {
        self.km * self.vdc
    }

    pub fn omega1(&self) -> f64 {
        TAU * self.f1
    }

    /// Active power of one unit at maximum current and bus voltage `v1`, W.
    pub fn rated_power(&self, v1: f64) -> f64 {
        1.5 * v1 * self.imax
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("kp", self.kp),
            ("ki", self.ki),
            ("kip", self.kip),
            ("kii", self.kii),
            ("l1", self.l1),
            ("km", self.km),
            ("vdc", self.vdc),
            ("f1", self.f1),
            ("imax", self.imax),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(format!("plant.{name} must be positive, got {v}")));
            }
        }
        if !(self.kd.is_finite() && self.kf.is_finite()) {
            return Err(invalid("plant.kd and plant.kf must be finite"));
        }
        if self.kf * self.k() > 1.0 + 1e-12 {
            return Err(invalid(format!("kf·km·Vdc = {} exceeds 1", self.kf * self.k())));
        }
        Ok(())
    }
}

/// One turbine type of a heterogeneous farm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitGroup {
    #[serde(default)]
    pub plant: PlantParams,
    pub i1: f64,
    #[serde(default)]
    pub phi_i1: f64,
    pub count: u32,
}

/// Electrical operating state of the farm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OperatingPoint {
    /// Output current magnitude of one unit, A.
    pub i1: f64,
    /// Output current phase angle, rad.
    pub phi_i1: f64,
    /// Bus voltage magnitude, V.
    pub v1: f64,
    /// Number of online units.
    pub n: u32,
    /// Per-type breakdown; empty for a homogeneous farm.
    pub unit_types: Vec<UnitGroup>,
}

impl Default for OperatingPoint {
    fn default() -> Self {
        Self { i1: 1650.0, phi_i1: 0.0, v1: CALIBRATED_V1, n: 6, unit_types: Vec::new() }
    }
}

impl OperatingPoint {
    /// Peak phase voltage of a 690 V system.
    pub fn textbook_v1() -> f64 {
        690.0 * 2f64.sqrt() / 3f64.sqrt()
    }

    pub fn is_heterogeneous(&self) -> bool {
        !self.unit_types.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.i1.is_finite() && self.i1 >= 0.0) {
            return Err(invalid(format!("operating_point.i1 must be non-negative, got {}", self.i1)));
        }
        if !(self.v1.is_finite() && self.v1 > 0.0) {
            return Err(invalid(format!("operating_point.v1 must be positive, got {}", self.v1)));
        }
        if self.n < 1 {
            return Err(invalid("operating_point.n must be at least 1"));
        }
        if self.is_heterogeneous() {
            let total: u32 = self.unit_types.iter().map(|g| g.count).sum();
            if total != self.n {
                return Err(invalid(format!("unit type counts sum to {total}, expected n = {}", self.n)));
            }
            for g in &self.unit_types {
                g.plant.validate()?;
                if !(g.i1.is_finite() && g.i1 >= 0.0) || g.count == 0 {
                    return Err(invalid("unit types need non-negative i1 and count ≥ 1"));
                }
            }
        }
        Ok(())
    }
}

/// Transmission grid seen from the farm, per unit on `s_base`/`v_base`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridParams {
    pub rl: f64,
    pub xl: f64,
    pub xt: f64,
    /// Base power, VA.
    pub s_base: f64,
    /// Base line-to-line voltage, V.
    pub v_base: f64,
}

impl Default for GridParams {
    fn default() -> Self {
        Self { rl: 0.0504, xl: 0.6553, xt: 0.1512, s_base: 20e6, v_base: 690.0 }
    }
}

impl GridParams {
    /// Same grid with the line impedance `RL + jXL` scaled by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self { rl: self.rl * factor, xl: self.xl * factor, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.xl > 0.0 && self.xt > 0.0 && self.rl >= 0.0 && self.s_base > 0.0 && self.v_base > 0.0) {
            return Err(invalid("grid requires xl, xt, s_base, v_base > 0 and rl ≥ 0"));
        }
        Ok(())
    }
}

/// Base impedance `Vbase²/Sbase`, Ω.
pub fn z_base(grid: &GridParams) -> f64 {
    grid.v_base * grid.v_base / grid.s_base
}

pub fn pu_to_ohm(x_pu: f64, grid: &GridParams) -> f64 {
    x_pu * z_base(grid)
}

pub fn ohm_to_pu(x_ohm: f64, grid: &GridParams) -> f64 {
    x_ohm / z_base(grid)
}

/// Inductance whose reactance at `f1` is `x_ohm`.
pub fn ohm_to_henry(x_ohm: f64, f1: f64) -> f64 {
    x_ohm / (TAU * f1)
}

pub fn henry_to_ohm(l: f64, f1: f64) -> f64 {
    l * TAU * f1
}

/// Every unit pushed to its maximum output current; unit count and grid
/// state untouched.
pub fn worst_condition(current: &OperatingPoint, plant: &PlantParams) -> OperatingPoint {
    let mut op = current.clone();
    op.i1 = plant.imax;
    for g in &mut op.unit_types {
        g.i1 = g.plant.imax;
    }
    op
}

/// Model symbols and where each one lives.
pub const SYMBOLS: [(&str, &str); 18] = [
    ("km", "plant.km"),
    ("Vdc", "plant.vdc"),
    ("kd", "plant.kd"),
    ("kf", "plant.kf"),
    ("kp", "plant.kp"),
    ("ki", "plant.ki"),
    ("kip", "plant.kip"),
    ("kii", "plant.kii"),
    ("L1", "plant.l1"),
    ("f1", "plant.f1"),
    ("Imax", "plant.imax"),
    ("I1", "operating_point.i1"),
    ("phi_i1", "operating_point.phi_i1"),
    ("V1", "operating_point.v1"),
    ("n", "operating_point.n"),
    ("XT", "grid.xt"),
    ("XL", "grid.xl"),
    ("RL", "grid.rl"),
];

/// Looks a symbol up by its field path.
pub fn symbol_value(path: &str, plant: &PlantParams, op: &OperatingPoint, grid: &GridParams) -> Option<f64> {
    Some(match path {
        "plant.km" => plant.km,
        "plant.vdc" => plant.vdc,
        "plant.kd" => plant.kd,
        "plant.kf" => plant.kf,
        "plant.kp" => plant.kp,
        "plant.ki" => plant.ki,
        "plant.kip" => plant.kip,
        "plant.kii" => plant.kii,
        "plant.l1" => plant.l1,
        "plant.f1" => plant.f1,
        "plant.imax" => plant.imax,
        "operating_point.i1" => op.i1,
        "operating_point.phi_i1" => op.phi_i1,
        "operating_point.v1" => op.v1,
        "operating_point.n" => f64::from(op.n),
        "grid.xt" => grid.xt,
        "grid.xl" => grid.xl,
        "grid.rl" => grid.rl,
        _ => return None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn base_impedance() {
        let g = GridParams::default();
        assert_relative_eq!(z_base(&g), 0.023805, epsilon = 1e-12);
        let unit = GridParams { s_base: 1.0, v_base: 1.0, ..g.clone() };
        assert_eq!(z_base(&unit), 1.0);
        let doubled = GridParams { v_base: 2.0 * g.v_base, ..g.clone() };
        assert_relative_eq!(z_base(&doubled), 4.0 * z_base(&g), max_relative = 1e-15);
    }

    #[test]
    fn conversions() {
        let g = GridParams::default();
        let x = pu_to_ohm(g.xl, &g);
        assert_relative_eq!(x, 0.0156, epsilon = 1e-5);
        assert_eq!(pu_to_ohm(0.0, &g), 0.0);
        assert_relative_eq!(ohm_to_henry(0.01560, 50.0), 49.65e-6, epsilon = 1e-8);
        assert_relative_eq!(ohm_to_pu(x, &g), g.xl, max_relative = 1e-15);
        assert_relative_eq!(henry_to_ohm(ohm_to_henry(x, 50.0), 50.0), x, max_relative = 1e-15);
    }

    #[test]
    fn worst_condition_maps_current() {
        let plant = PlantParams::default();
        let op = OperatingPoint::default();
        let w = worst_condition(&op, &plant);
        assert_eq!(w.i1, 2200.0);
        assert_eq!(w.n, 6);
        assert_eq!(worst_condition(&w, &plant), w);
    }

    #[test]
    fn symbol_table_is_complete_and_unique() {
        let (p, o, g) = (PlantParams::default(), OperatingPoint::default(), GridParams::default());
        let mut paths: Vec<&str> = SYMBOLS.iter().map(|s| s.1).collect();
        for path in &paths {
            assert!(symbol_value(path, &p, &o, &g).is_some(), "{path}");
        }
        paths.sort_unstable();
        paths.dedup();
        assert_eq!(paths.len(), SYMBOLS.len());
        let names: Vec<&str> = SYMBOLS.iter().map(|s| s.0).collect();
        for sym in ["km", "Vdc", "kd", "kf", "kp", "ki", "kip", "kii", "L1", "f1", "I1", "phi_i1", "V1", "n", "XT", "XL", "RL", "Imax"] {
            assert!(names.contains(&sym), "{sym}");
        }
    }

    #[test]
    fn presets_validate() {
        PlantParams::default().validate().unwrap();
        PlantParams::textbook().validate().unwrap();
        OperatingPoint::default().validate().unwrap();
        GridParams::default().validate().unwrap();
        let bad = PlantParams { kf: 1.0, ..PlantParams::textbook() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn heterogeneous_counts_checked() {
        let g = UnitGroup { plant: PlantParams::default(), i1: 1650.0, phi_i1: 0.0, count: 3 };
        let op = OperatingPoint { unit_types: vec![g.clone(), g], ..OperatingPoint::default() };
        op.validate().unwrap();
        let short = OperatingPoint { n: 7, ..op };
        assert!(short.validate().is_err());
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(serde_json::from_str::<PlantParams>(r#"{"kp": 0.1, "kpp": 1}"#).is_err());
        let p: PlantParams = serde_json::from_str(r#"{"kp": 0.1}"#).unwrap();
        assert_eq!(p.kp, 0.1);
        assert_eq!(p.ki, 32.0);
    }
}
