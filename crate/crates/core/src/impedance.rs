//! Turbine, farm and grid impedances and the damping-augmented PLL.

use crate::error::{invalid, Error, Result};
use crate::params::{ohm_to_henry, pu_to_ohm, GridParams, OperatingPoint, PlantParams};
use crate::tf::{parallel, Poly};
use crate::{Complex64, Rational};
use serde::{Deserialize, Serialize};

/// Band-pass damping controller and tuner constants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SsrdcConfig {
    /// Band-pass gain.
    pub h0: f64,
    /// Band-pass damping coefficient.
    pub zeta: f64,
    /// Damping gain.
    pub k_sso: f64,
    /// Upper limit on the effective proportional gain.
    pub k_max: f64,
    /// Required damping ratio of the dominant pole.
    pub mu_min: f64,
    /// Tuner step on the effective proportional gain.
    pub epsilon: f64,
    /// Frequency estimator reporting delay, s.
    pub t_e: f64,
    /// Bound on the controller output, rad/s.
    pub limiter: f64,
    /// Dominant-pole search window, Hz.
    pub band: (f64, f64),
}

impl Default for SsrdcConfig {
    fn default() -> Self {
        Self {
            h0: 1.0,
            zeta: 0.3,
            k_sso: 0.0,
            k_max: 0.4,
            mu_min: 0.01,
            epsilon: 0.01,
            t_e: 0.2,
            limiter: 30.0,
            band: (55.0, 95.0),
        }
    }
}

impl SsrdcConfig {
    pub fn validate(&self, f1: f64) -> Result<()> {
        let (lo, hi) = self.band;
        let ok = self.h0 > 0.0
            && self.zeta > 0.0
            && self.zeta < 1.0
            && self.k_sso >= 0.0
            && self.epsilon > 0.0
            && self.mu_min > 0.0
            && self.t_e >= 0.0
            && self.limiter > 0.0
            && f1 < lo
            && lo < hi
            && hi < 2.0 * f1;
        if ok {
            Ok(())
        } else {
            Err(invalid(format!("ssrdc settings out of range: {self:?}")))
        }
    }

    /// Gain at the band-pass center frequency, `H0/(2ζ)`.
    pub fn center_gain(&self) -> f64 {
        self.h0 / (2.0 * self.zeta)
    }
}

/// How the `T1` term of the turbine impedance bracket is formed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum T1Mode {
    /// `[j2πf1·L1 + V1(1 − K·kf)]/K`, with `K = km·Vdc`.
    #[default]
    Printed,
    /// `[j2πf1·L1·I1·e^{−jφi1} + V1(1 − K·kf)]/(2K)`: the steady-state
    /// converter voltage the PLL rotates, scaled like the current term.
    CurrentScaled,
    /// Term dropped.
    Excluded,
}

/// How an active damping branch enters the PLL.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PllMode {
    /// Constant `kp' = kp + H0·k_sso/(2ζ)`.
    #[default]
    EquivalentGain,
    /// The band-pass branch added to the PI.
    FullBranch,
}

/// Impedance model switches.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelOptions {
    pub t1_mode: T1Mode,
    pub pll_mode: PllMode,
    /// Band-pass center for [`PllMode::FullBranch`], rad/s in the PLL
    /// frame; `None` uses the dominant-pole frequency of the undamped system.
    pub omega_sso: Option<f64>,
}

/// Operating state of a single turbine.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnitState {
    pub i1: f64,
    pub phi_i1: f64,
    pub v1: f64,
}

impl UnitState {
    pub fn of(op: &OperatingPoint) -> Self {
        Self { i1: op.i1, phi_i1: op.phi_i1, v1: op.v1 }
    }
}

/// An active damping branch: settings plus its center frequency.
#[derive(Clone, Debug, PartialEq)]
pub struct SsrdcActive {
    pub cfg: SsrdcConfig,
    pub mode: PllMode,
    /// Center frequency in the PLL frame, rad/s.
    pub omega_sso: f64,
}

impl SsrdcActive {
    fn is_inert(&self) -> bool {
        self.cfg.k_sso == 0.0 || (self.mode == PllMode::FullBranch && self.omega_sso == 0.0)
    }
}

fn j(x: f64) -> Complex64 {
    Complex64::new(0.0, x)
}

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// `(T1, φT1)` with `(T1/2)e^{jφT1} = [j2πf1·L1 + V1(1 − km·Vdc·kf)]/(km·Vdc)`.
pub fn t1_phi(plant: &PlantParams, v1: f64) -> (f64, f64) {
    let rhs = t1_half(plant, v1);
    (2.0 * rhs.norm(), rhs.arg())
}

fn t1_half(plant: &PlantParams, v1: f64) -> Complex64 {
    let k = plant.k();
    Complex64::new(v1 * (1.0 - k * plant.kf), plant.omega1() * plant.l1) / k
}

fn t1_term(plant: &PlantParams, unit: &UnitState, mode: T1Mode) -> Complex64 {
    match mode {
        T1Mode::Printed => t1_half(plant, unit.v1),
        T1Mode::CurrentScaled => {
            let k = plant.k();
            let i0 = Complex64::from_polar(unit.i1, -unit.phi_i1);
            (j(plant.omega1() * plant.l1) * i0 + re(unit.v1 * (1.0 - k * plant.kf))) / (2.0 * k)
        }
        T1Mode::Excluded => Complex64::new(0.0, 0.0),
    }
}

/// `H0·ω·s/(s² + 2ζω·s + ω²)·k_sso`; the zero function for `ω = 0`.
pub fn ssrdc_branch(cfg: &SsrdcConfig, omega_sso: f64) -> Rational {
    if omega_sso == 0.0 || cfg.k_sso == 0.0 {
        return Rational::zero();
    }
    let w = omega_sso;
    Rational::from_real(&[0.0, cfg.h0 * w * cfg.k_sso], &[w * w, 2.0 * cfg.zeta * w, 1.0])
        .expect("nonzero denominator")
}

/// `kp + H0·k_sso/(2ζ)`.
pub fn equivalent_kp(kp: f64, cfg: &SsrdcConfig) -> f64 {
    kp + cfg.h0 * cfg.k_sso / (2.0 * cfg.zeta)
}

/// Inverse of [`equivalent_kp`]: `2ζ(kp' − kp)/H0`.
pub fn ksso_from_kp(kp: f64, kp_prime: f64, cfg: &SsrdcConfig) -> f64 {
    2.0 * cfg.zeta * (kp_prime - kp) / cfg.h0
}

/// PLL open-loop transfer `H_pll(s)` from `vq` to angle.
pub fn pll_open_loop(plant: &PlantParams, ssrdc: Option<&SsrdcActive>) -> Rational {
    let pi_over_s = |kp: f64| Rational::from_real(&[plant.ki, kp], &[0.0, 0.0, 1.0]).expect("nonzero");
    match ssrdc {
        Some(a) if !a.is_inert() => match a.mode {
            PllMode::EquivalentGain => pi_over_s(equivalent_kp(plant.kp, &a.cfg)),
            PllMode::FullBranch => {
                let pi = Rational::from_real(&[plant.ki, plant.kp], &[0.0, 1.0]).expect("nonzero");
                let integ = Rational::from_real(&[1.0], &[0.0, 1.0]).expect("nonzero");
                pi.add(&ssrdc_branch(&a.cfg, a.omega_sso)).mul(&integ)
            }
        },
        _ => pi_over_s(plant.kp),
    }
}

/// Closed PLL loop `T_PLL = V1·H/(1 + V1·H)`.
pub fn pll_closed_loop(plant: &PlantParams, v1: f64, ssrdc: Option<&SsrdcActive>) -> Rational {
    let h = pll_open_loop(plant, ssrdc);
    let num = h.num().scale(re(v1));
    let den = h.den().add(&num);
    Rational::new(num, den).expect("loop denominator is monic")
}

/// Small-signal impedance of one turbine in the stationary frame.
pub fn pmsg_impedance(
    plant: &PlantParams,
    unit: &UnitState,
    ssrdc: Option<&SsrdcActive>,
    opts: &ModelOptions,
) -> Result<Rational> {
    if !(unit.v1 > 0.0) {
        return Err(invalid("V1 must be positive"));
    }
    let k = plant.k();
    let f1 = plant.f1;
    let h1 = Rational::from_real(&[plant.kii, plant.kip], &[0.0, 1.0])?.shift(f1);
    let g = h1.add_const(j(-plant.kd));
    let s_l1 = Rational::polynomial(Poly::from_real(&[0.0, plant.l1]));
    let num = g.scalar_mul(re(k)).add(&s_l1);

    let tp = pll_closed_loop(plant, unit.v1, ssrdc).shift(f1);
    let i_half = Complex64::from_polar(unit.i1 / 2.0, -unit.phi_i1);
    let bracket = g.scalar_mul(i_half).add_const(t1_term(plant, unit, opts.t1_mode));
    let den = bracket.mul(&tp).scalar_mul(re(-k / unit.v1)).add_const(re(1.0 - k * plant.kf));
    if den.is_zero() {
        return Err(Error::DegenerateImpedance);
    }
    num.checked_div(&den)
}

/// Series inductance of the unit transformer, H.
pub fn transformer_inductance(grid: &GridParams, f1: f64) -> f64 {
    ohm_to_henry(pu_to_ohm(grid.xt, grid), f1)
}

/// `R + sL` of the grid line.
pub fn grid_impedance(grid: &GridParams, f1: f64) -> Rational {
    let r = pu_to_ohm(grid.rl, grid);
    let l = ohm_to_henry(pu_to_ohm(grid.xl, grid), f1);
    Rational::polynomial(Poly::from_real(&[r, l]))
}

/// Aggregated farm impedance seen from the point of common coupling.
pub fn farm_impedance(
    plant: &PlantParams,
    op: &OperatingPoint,
    grid: &GridParams,
    ssrdc: Option<&SsrdcActive>,
    opts: &ModelOptions,
) -> Result<Rational> {
    farm_impedance_scaled(plant, op, grid, ssrdc, opts, f64::from(op.n))
}

/// As [`farm_impedance`] with the unit count treated as the continuous
/// value `units` (type counts scaled proportionally).
pub fn farm_impedance_scaled(
    plant: &PlantParams,
    op: &OperatingPoint,
    grid: &GridParams,
    ssrdc: Option<&SsrdcActive>,
    opts: &ModelOptions,
    units: f64,
) -> Result<Rational> {
    if !(units > 0.0) {
        return Err(invalid("unit count must be positive"));
    }
    let branch = |p: &PlantParams, unit: UnitState| -> Result<Rational> {
        let lt = transformer_inductance(grid, p.f1);
        let z = pmsg_impedance(p, &unit, ssrdc, opts)?;
        Ok(z.add(&Rational::polynomial(Poly::from_real(&[0.0, lt]))))
    };
    if !op.is_heterogeneous() {
        return Ok(branch(plant, UnitState::of(op))?.scalar_mul(re(1.0 / units)));
    }
    let scale = units / f64::from(op.n);
    let parts = op
        .unit_types
        .iter()
        .map(|g| {
            let unit = UnitState { i1: g.i1, phi_i1: g.phi_i1, v1: op.v1 };
            Ok(branch(&g.plant, unit)?.scalar_mul(re(1.0 / (f64::from(g.count) * scale))))
        })
        .collect::<Result<Vec<_>>>()?;
    parallel(&parts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::z_base;
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_2, PI, TAU};

    #[test]
    fn t1_textbook_values() {
        let p = PlantParams::textbook();
        let (t1, phi) = t1_phi(&p, OperatingPoint::textbook_v1());
        assert_relative_eq!(phi, FRAC_PI_2, epsilon = 1e-12);
        assert_relative_eq!(t1, 4.0 * PI * 50.0 * 75e-6 / 1100.0, max_relative = 1e-12);
        assert_relative_eq!(t1, 4.284e-5, max_relative = 1e-3);
        let no_l = PlantParams { l1: 0.0, ..p };
        assert_eq!(t1_phi(&no_l, 563.0).0, 0.0);
    }

    #[test]
    fn closed_pll_has_unit_gain_at_dc() {
        let p = PlantParams::default();
        let tp = pll_closed_loop(&p, 609.0, None);
        assert_relative_eq!(tp.eval(Complex64::new(0.0, 0.0)).unwrap().re, 1.0, epsilon = 1e-14);
        let shifted = tp.shift(p.f1);
        let at = shifted.eval(j(p.omega1())).unwrap();
        assert!((at - re(1.0)).norm() < 1e-9);
    }

    #[test]
    fn zero_current_ignores_phase() {
        let p = PlantParams::default();
        let o = ModelOptions::default();
        let a = pmsg_impedance(&p, &UnitState { i1: 0.0, phi_i1: 0.0, v1: 609.0 }, None, &o).unwrap();
        let b = pmsg_impedance(&p, &UnitState { i1: 0.0, phi_i1: 1.1, v1: 609.0 }, None, &o).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn grid_impedance_values() {
        let g = GridParams::default();
        let zg = grid_impedance(&g, 50.0);
        let at = zg.eval(j(TAU * 50.0)).unwrap();
        assert_relative_eq!(at.re, 0.0504 * 0.023805, max_relative = 1e-12);
        assert_relative_eq!(at.im, 0.6553 * z_base(&g), max_relative = 1e-12);
        assert_relative_eq!(zg.eval(re(0.0)).unwrap().re, 0.0504 * 0.023805, max_relative = 1e-12);
    }

    #[test]
    fn branch_peak_and_zero() {
        let cfg = SsrdcConfig { k_sso: 0.042, ..Default::default() };
        let w = TAU * 24.0;
        let b = ssrdc_branch(&cfg, w);
        for s in [j(w), j(-w)] {
            let v = b.eval(s).unwrap();
            assert_relative_eq!(v.re, cfg.h0 * cfg.k_sso / (2.0 * cfg.zeta), max_relative = 1e-13);
            assert!(v.im.abs() < 1e-15);
        }
        assert_relative_eq!(cfg.center_gain(), 1.0 / 0.6, max_relative = 1e-15);
        assert!(ssrdc_branch(&cfg, 0.0).is_zero());
    }

    #[test]
    fn equivalent_gain_round_trip() {
        let cfg = SsrdcConfig { k_sso: 0.0144, ..Default::default() };
        assert_relative_eq!(equivalent_kp(0.09, &cfg), 0.114, max_relative = 1e-14);
        assert_eq!(equivalent_kp(0.09, &SsrdcConfig::default()), 0.09);
        let kpp = equivalent_kp(0.09, &cfg);
        assert_relative_eq!(ksso_from_kp(0.09, kpp, &cfg), 0.0144, max_relative = 1e-14);
    }

    #[test]
    fn farm_scaling() {
        let p = PlantParams::default();
        let g = GridParams::default();
        let o = ModelOptions::default();
        let one = OperatingPoint { n: 1, ..Default::default() };
        let two = OperatingPoint { n: 2, ..Default::default() };
        let z1 = farm_impedance(&p, &one, &g, None, &o).unwrap();
        let z2 = farm_impedance(&p, &two, &g, None, &o).unwrap();
        let lt = transformer_inductance(&g, 50.0);
        let bare = pmsg_impedance(&p, &UnitState::of(&one), None, &o).unwrap();
        for w in [100.0, 461.0, 900.0] {
            let s = Complex64::new(-3.0, w);
            let a = z1.eval(s).unwrap();
            assert!((a - 2.0 * z2.eval(s).unwrap()).norm() < 1e-12 * a.norm());
            assert!((a - bare.eval(s).unwrap() - s * lt).norm() < 1e-9 * a.norm());
        }
    }
}
