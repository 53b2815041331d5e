use crate::error::{invalid, Error, Result};
use crate::system::System;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Parameters whose influence on the dominant pole can be measured.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamId {
    Kp,
    Ki,
    Kip,
    Kii,
    /// Unit output current.
    I1,
    /// Number of units, continuous.
    N,
    /// Line resistance.
    R,
    /// Line reactance.
    X,
    /// Estimator delay; does not enter the impedance model.
    Te,
}

impl ParamId {
    /// The eight model parameters in presentation order.
    pub const MODEL: [ParamId; 8] =
        [ParamId::Kp, ParamId::Ki, ParamId::Kip, ParamId::Kii, ParamId::I1, ParamId::N, ParamId::R, ParamId::X];

    pub fn as_str(self) -> &'static str {
        match self {
            ParamId::Kp => "kp",
            ParamId::Ki => "ki",
            ParamId::Kip => "kip",
            ParamId::Kii => "kii",
            ParamId::I1 => "I1",
            ParamId::N => "n",
            ParamId::R => "R",
            ParamId::X => "X",
            ParamId::Te => "t_e",
        }
    }

    pub fn get(self, sys: &System) -> f64 {
        match self {
            ParamId::Kp => sys.plant.kp,
            ParamId::Ki => sys.plant.ki,
            ParamId::Kip => sys.plant.kip,
            ParamId::Kii => sys.plant.kii,
            ParamId::I1 => sys.op.i1,
            ParamId::N => sys.units(),
            ParamId::R => sys.grid.rl,
            ParamId::X => sys.grid.xl,
            ParamId::Te => sys.ssrdc.t_e,
        }
    }

    /// Copy of `sys` with this parameter set to `value`. Heterogeneous unit
    /// types follow `kp..kii` and `I1` proportionally.
    pub fn set(self, sys: &System, value: f64) -> System {
        let mut s = sys.clone();
        let ratio = value / self.get(sys);
        match self {
            ParamId::Kp => s.plant.kp = value,
            ParamId::Ki => s.plant.ki = value,
            ParamId::Kip => s.plant.kip = value,
            ParamId::Kii => s.plant.kii = value,
            ParamId::I1 => s.op.i1 = value,
            ParamId::N => s.units = Some(value),
            ParamId::R => s.grid.rl = value,
            ParamId::X => s.grid.xl = value,
            ParamId::Te => s.ssrdc.t_e = value,
        }
        for g in &mut s.op.unit_types {
            match self {
                ParamId::Kp => g.plant.kp *= ratio,
                ParamId::Ki => g.plant.ki *= ratio,
                ParamId::Kip => g.plant.kip *= ratio,
                ParamId::Kii => g.plant.kii *= ratio,
                ParamId::I1 => g.i1 *= ratio,
                _ => {}
            }
        }
        s
    }
}

impl fmt::Display for ParamId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ParamId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "kp" => ParamId::Kp,
            "ki" => ParamId::Ki,
            "kip" => ParamId::Kip,
            "kii" => ParamId::Kii,
            "i1" | "i" => ParamId::I1,
            "n" => ParamId::N,
            "r" | "rl" => ParamId::R,
            "x" | "xl" => ParamId::X,
            "t_e" | "te" => ParamId::Te,
            other => return Err(invalid(format!("unknown parameter '{other}'"))),
        })
    }
}

fn real_part(sys: &System, param: ParamId) -> Result<f64> {
    match sys.dominant() {
        Ok(p) => Ok(p.sigma),
        Err(Error::NoPoleInBand { .. }) => Err(Error::DpLeftBand(param.to_string())),
        Err(e) => Err(e),
    }
}

fn check_delta(delta_rel: f64) -> Result<()> {
    if delta_rel > 0.0 && delta_rel <= 0.1 {
        Ok(())
    } else {
        Err(invalid(format!("delta_rel must lie in (0, 0.1], got {delta_rel}")))
    }
}

/// Per-unit sensitivity `x0·∂Re(DP)/∂x` by central differences.
pub fn sensitivity(sys: &System, param: ParamId, delta_rel: f64) -> Result<f64> {
    check_delta(delta_rel)?;
    let x0 = param.get(sys);
    if x0 == 0.0 {
        return Ok(0.0);
    }
    let up = real_part(&param.set(sys, x0 * (1.0 + delta_rel)), param)?;
    let down = real_part(&param.set(sys, x0 * (1.0 - delta_rel)), param)?;
    Ok((up - down) / (2.0 * delta_rel))
}

/// Forward-difference counterpart of [`sensitivity`].
pub fn sensitivity_forward(sys: &System, param: ParamId, delta_rel: f64) -> Result<f64> {
    check_delta(delta_rel)?;
    let x0 = param.get(sys);
    if x0 == 0.0 {
        return Ok(0.0);
    }
    let up = real_part(&param.set(sys, x0 * (1.0 + delta_rel)), param)?;
    let mid = real_part(sys, param)?;
    Ok((up - mid) / delta_rel)
}

/// One point of a per-unit sweep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    /// Parameter value relative to nominal.
    pub x_pu: f64,
    /// `Re(DP)`, or `None` when no in-band pole exists.
    pub re_dp: Option<f64>,
    /// Per-unit sensitivity at this point, relative to the nominal value.
    pub sensitivity: Option<f64>,
}

/// `Re(DP)` and sensitivity over `x_pu` multiples of the nominal value.
pub fn sweep(sys: &System, param: ParamId, x_pu: &[f64], delta_rel: f64) -> Vec<SweepPoint> {
    let x0 = param.get(sys);
    x_pu.iter()
        .map(|&k| {
            let at = param.set(sys, x0 * k);
            let re_dp = at.dominant().ok().map(|p| p.sigma);
            // referred to the nominal value so curves share one scale
            let sensitivity = sensitivity(&at, param, delta_rel).ok().map(|s| s / k);
            SweepPoint { x_pu: k, re_dp, sensitivity }
        })
        .collect()
}
